//! Nelder-Mead refinement stages of the operating-point search.

use std::cell::RefCell;

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;

use super::{Auditor, Evaluation, OperatingPoint, Stage};

const MAX_ITERS: u64 = 400;
const OUT_OF_BOUNDS: f64 = 1e3;

/// Minimization target: −objective on feasible points, 1 + total relative
/// violation on infeasible ones, so any feasible point beats any infeasible one.
struct Penalized<'a, 'b, F: Fn(&[f64]) -> OperatingPoint> {
    audit: RefCell<&'a mut Auditor<'b>>,
    stage: Stage,
    to_point: F,
}

impl<F: Fn(&[f64]) -> OperatingPoint> CostFunction for Penalized<'_, '_, F> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Self::Param) -> Result<f64, argmin::core::Error> {
        let point = (self.to_point)(x);
        let mut audit = self.audit.borrow_mut();
        if !audit.spec.contains(&point) {
            return Ok(OUT_OF_BOUNDS);
        }
        Ok(match audit.evaluate(self.stage, &point) {
            Some(e) if e.feasible => -e.objective,
            Some(e) => 1.0 + e.slacks.violation(),
            None => OUT_OF_BOUNDS,
        })
    }
}

fn simplex_minimum<F: Fn(&[f64]) -> OperatingPoint>(
    audit: &mut Auditor<'_>,
    stage: Stage,
    start: Vec<f64>,
    steps: &[f64],
    to_point: F,
) -> Option<Evaluation> {
    let mut vertices = vec![start.clone()];
    for (i, s) in steps.iter().enumerate() {
        let mut v = start.clone();
        v[i] += s;
        vertices.push(v);
    }
    let solver = NelderMead::new(vertices).with_sd_tolerance(1e-12).ok()?;
    let problem = Penalized { audit: RefCell::new(audit), stage, to_point };
    let result = Executor::new(problem, solver).configure(|s| s.max_iters(MAX_ITERS)).run().ok()?;
    let best = result.state().get_best_param()?.clone();
    let problem = result.problem.problem?;
    let point = (problem.to_point)(&best);
    let audit = problem.audit.into_inner();
    if !audit.spec.contains(&point) {
        return None;
    }
    audit.evaluate(stage, &point).filter(|e| e.feasible)
}

/// Three-dimensional refinement in (ln P, ln |Δ|, w0/w0_max).
pub(super) fn full(audit: &mut Auditor<'_>, start: &OperatingPoint, sign: f64) -> Option<Evaluation> {
    let w_scale = audit.spec.waist.max;
    let n = audit.spec.grid_points.max(2) as f64;
    let w_step = (audit.spec.waist.max - audit.spec.waist.min) / (n - 1.0) / w_scale;
    let x0 = vec![start.power_w.ln(), start.detuning.abs().ln(), start.waist_w0 / w_scale];
    simplex_minimum(audit, Stage::Refine, x0, &[0.3, 0.3, w_step.max(1e-3)], move |x| OperatingPoint {
        power_w: x[0].exp(),
        detuning: sign * x[1].exp(),
        waist_w0: x[2] * w_scale,
    })
}

/// Walks the waist up from its lower bound and returns the first waist whose
/// two-dimensional optimum in (P, Δ) reaches `target`.
///
/// The objectives depend on waist and detuning mostly through their product,
/// so the optimum is nearly flat along that direction; this picks the
/// tightest focus on the flat ridge.
pub(super) fn smallest_waist(
    audit: &mut Auditor<'_>,
    best: &Evaluation,
    target: f64,
    sign: f64,
) -> Option<Evaluation> {
    const STEPS: usize = 40;
    let w_lo = audit.spec.waist.min;
    let w_hi = best.point.waist_w0;
    if w_hi <= w_lo {
        return None;
    }
    let ratio = (w_hi / w_lo).ln();
    for i in 0..STEPS {
        let w = w_lo * (ratio * i as f64 / (STEPS - 1) as f64).exp();
        let scaled_detuning = (best.point.detuning.abs() * best.point.waist_w0 / w)
            .clamp(audit.spec.detuning.min, audit.spec.detuning.max);
        let mut found: Option<Evaluation> = None;
        for d0 in [scaled_detuning, best.point.detuning.abs()] {
            let x0 = vec![best.point.power_w.ln(), d0.ln()];
            let e = simplex_minimum(audit, Stage::Waist, x0, &[0.3, 0.3], move |x| OperatingPoint {
                power_w: x[0].exp(),
                detuning: sign * x[1].exp(),
                waist_w0: w,
            });
            if let Some(e) = e {
                if found.as_ref().is_none_or(|f| e.objective > f.objective) {
                    found = Some(e);
                }
            }
        }
        if let Some(e) = found {
            if e.objective >= target {
                return Some(e);
            }
        }
    }
    None
}
