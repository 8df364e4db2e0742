//! Constrained search over laser power, detuning and beam waist.

mod refine;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::rates::{rates_from_derived, RateSet};

/// Quantity the search maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Bare cooperativity 4g²/(γ_m^tot γ_at^diff).
    MaxC0,
    /// min(g_eff/γ_m^tot, g_eff/γ_at^diff).
    #[default]
    MaxMinRatio,
}

impl Objective {
    pub fn value(self, rates: &RateSet) -> f64 {
        match self {
            Objective::MaxC0 => rates.coop_c0,
            Objective::MaxMinRatio => rates.min_strong_coupling_ratio(),
        }
    }
}

/// Closed search interval; all searched quantities are positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub min: f64,
    pub max: f64,
}

impl Bounds {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min > 0.0 && min <= max) {
            return Err(Error::invalid("bounds", format!("need 0 < min <= max, both finite; got [{min}, {max}]")));
        }
        Ok(Bounds { min, max })
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    fn log_grid(&self, n: usize) -> Vec<f64> {
        grid(n, self.min.ln(), self.max.ln()).into_iter().map(f64::exp).collect()
    }

    fn linear_grid(&self, n: usize) -> Vec<f64> {
        grid(n, self.min, self.max)
    }
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Validity conditions imposed on every candidate operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintSet {
    /// χ in Ω <= |Δ|/χ (adiabatic elimination of the excited state).
    pub adiabatic_margin: f64,
    /// s in Ω² <= s (Γ² + 4Δ²)/2 (below saturation).
    pub saturation_cap: f64,
    /// r in g_eff <= ω_m/r (beamsplitter approximation).
    pub rwa_margin: f64,
    /// Rayleigh range πw0²/λ must cover this length (m).
    pub ensemble_length: f64,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        ConstraintSet { adiabatic_margin: 1.0, saturation_cap: 0.9, rwa_margin: 4.0, ensemble_length: 0.01 }
    }
}

impl ConstraintSet {
    pub fn validate(&self) -> Result<()> {
        if !(self.adiabatic_margin >= 1.0) {
            return Err(Error::invalid("adiabatic_margin", "must be >= 1"));
        }
        if !(self.saturation_cap > 0.0 && self.saturation_cap < 1.0) {
            return Err(Error::invalid("saturation_cap", "must lie in (0, 1)"));
        }
        if !(self.rwa_margin >= 1.0) {
            return Err(Error::invalid("rwa_margin", "must be >= 1"));
        }
        if !(self.ensemble_length >= 0.0 && self.ensemble_length.is_finite()) {
            return Err(Error::invalid("ensemble_length", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpec {
    pub power: Bounds,
    /// Bounds on |Δ|; the sign of the configured detuning is kept.
    pub detuning: Bounds,
    pub waist: Bounds,
    pub objective: Objective,
    pub constraints: ConstraintSet,
    /// Points per axis of the coarse grid.
    pub grid_points: usize,
    /// Number of best grid points the simplex refinement starts from.
    pub refine_starts: usize,
    /// Relative objective loss accepted in exchange for a smaller waist; 0 disables the stage.
    pub waist_tolerance: f64,
}

impl SearchSpec {
    pub fn new(
        power: Bounds,
        detuning: Bounds,
        waist: Bounds,
        objective: Objective,
        constraints: ConstraintSet,
    ) -> Result<Self> {
        constraints.validate()?;
        Ok(SearchSpec {
            power,
            detuning,
            waist,
            objective,
            constraints,
            grid_points: 16,
            refine_starts: 4,
            waist_tolerance: 0.01,
        })
    }

    fn validate(&self) -> Result<()> {
        self.constraints.validate()?;
        if self.grid_points == 0 {
            return Err(Error::invalid("grid_points", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.waist_tolerance) {
            return Err(Error::invalid("waist_tolerance", "must lie in [0, 1)"));
        }
        Ok(())
    }

    pub fn contains(&self, p: &OperatingPoint) -> bool {
        self.power.contains(p.power_w) && self.detuning.contains(p.detuning.abs()) && self.waist.contains(p.waist_w0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub power_w: f64,
    /// Signed detuning (rad/s).
    pub detuning: f64,
    pub waist_w0: f64,
}

/// Constraint slacks in their natural units; negative means violated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slacks {
    /// |Δ|/χ − Ω (rad/s).
    pub adiabatic: f64,
    /// s(Γ² + 4Δ²)/2 − Ω² (rad²/s²).
    pub saturation: f64,
    /// ω_m/r − g_eff (rad/s).
    pub rwa: f64,
    /// πw0²/λ − ensemble length (m).
    pub rayleigh: f64,
    #[serde(skip)]
    relative: [f64; 4],
}

impl Slacks {
    pub const NAMES: [&'static str; 4] = ["adiabatic", "saturation", "rwa", "rayleigh"];

    pub fn feasible(&self) -> bool {
        self.relative.iter().all(|&s| s >= 0.0)
    }

    /// Slacks divided by their bounds, comparable across constraints.
    pub fn relative(&self) -> [f64; 4] {
        self.relative
    }

    /// Most violated (or least slack) constraint and its relative slack.
    pub fn tightest(&self) -> (&'static str, f64) {
        let (i, v) = self
            .relative
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i, *v))
            .unwrap_or((0, 0.0));
        (Self::NAMES[i], v)
    }

    fn violation(&self) -> f64 {
        self.relative.iter().map(|s| (-s).max(0.0)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub point: OperatingPoint,
    /// Objective value, or −∞ when a constraint is violated.
    pub objective: f64,
    /// Objective value ignoring the constraints.
    pub unconstrained_objective: f64,
    pub feasible: bool,
    pub rates: RateSet,
    pub slacks: Slacks,
}

/// Evaluates one operating point against the objective and constraints.
pub fn evaluate(
    point: &OperatingPoint,
    fixed: &PhysicalParams,
    objective: Objective,
    constraints: &ConstraintSet,
) -> Result<Evaluation> {
    let params = fixed.with_operating_point(point.power_w, point.detuning, point.waist_w0);
    let d = params.derive()?;
    let rates = rates_from_derived(&params, &d)?;
    let rabi = d.rabi_minus;
    let delta = point.detuning;
    let gamma = params.atoms.gamma_spont;
    let wavelength = 2.0 * PI * C / params.laser.omega_l;

    let adiabatic_bound = delta.abs() / constraints.adiabatic_margin;
    let saturation_bound = constraints.saturation_cap * (gamma * gamma + 4.0 * delta * delta) / 2.0;
    let rwa_bound = params.mechanics.omega_m / constraints.rwa_margin;
    let rayleigh_range = PI * point.waist_w0 * point.waist_w0 / wavelength;

    let adiabatic = adiabatic_bound - rabi;
    let saturation = saturation_bound - rabi * rabi;
    let rwa = rwa_bound - rates.g_eff;
    let rayleigh = rayleigh_range - constraints.ensemble_length;
    let rayleigh_rel =
        if constraints.ensemble_length > 0.0 { rayleigh / constraints.ensemble_length } else { 1.0 };
    let slacks = Slacks {
        adiabatic,
        saturation,
        rwa,
        rayleigh,
        relative: [adiabatic / adiabatic_bound, saturation / saturation_bound, rwa / rwa_bound, rayleigh_rel],
    };
    let feasible = slacks.feasible();
    let unconstrained_objective = objective.value(&rates);
    Ok(Evaluation {
        point: *point,
        objective: if feasible { unconstrained_objective } else { f64::NEG_INFINITY },
        unconstrained_objective,
        feasible,
        rates,
        slacks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Grid,
    Refine,
    Waist,
}

/// One evaluated point of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuditRecord {
    pub stage: Stage,
    pub power_w: f64,
    pub detuning: f64,
    pub waist_w0: f64,
    pub objective: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best: Evaluation,
    pub best_grid: Evaluation,
    pub best_refined: Evaluation,
    #[serde(skip)]
    pub audit: Vec<AuditRecord>,
}

struct Auditor<'a> {
    fixed: &'a PhysicalParams,
    spec: &'a SearchSpec,
    records: Vec<AuditRecord>,
}

impl<'a> Auditor<'a> {
    fn record(&mut self, stage: Stage, e: &Evaluation) {
        self.records.push(AuditRecord {
            stage,
            power_w: e.point.power_w,
            detuning: e.point.detuning,
            waist_w0: e.point.waist_w0,
            objective: e.objective,
            feasible: e.feasible,
        });
    }

    fn evaluate(&mut self, stage: Stage, p: &OperatingPoint) -> Option<Evaluation> {
        let e = evaluate(p, self.fixed, self.spec.objective, &self.spec.constraints).ok()?;
        self.record(stage, &e);
        Some(e)
    }
}

fn better(a: &Evaluation, b: &Evaluation) -> bool {
    a.objective > b.objective
}

/// Grid scan, simplex refinement from the best grid points, then a search for
/// the smallest waist whose optimum stays within `waist_tolerance` of the best.
pub fn optimize(spec: &SearchSpec, fixed: &PhysicalParams) -> Result<SearchResult> {
    spec.validate()?;
    let sign = if fixed.laser.detuning < 0.0 { -1.0 } else { 1.0 };
    let n = spec.grid_points;
    let powers = spec.power.log_grid(n);
    let detunings = spec.detuning.log_grid(n);
    let waists = spec.waist.linear_grid(n);
    let mut points = Vec::with_capacity(n * n * n);
    for &power_w in &powers {
        for &d in &detunings {
            for &waist_w0 in &waists {
                points.push(OperatingPoint { power_w, detuning: sign * d, waist_w0 });
            }
        }
    }
    let grid: Vec<Evaluation> = points
        .par_iter()
        .map(|p| evaluate(p, fixed, spec.objective, &spec.constraints))
        .collect::<Result<_>>()?;

    let mut audit = Auditor { fixed, spec, records: Vec::with_capacity(grid.len() + 4096) };
    for e in &grid {
        audit.record(Stage::Grid, e);
    }
    let mut ranked: Vec<&Evaluation> = grid.iter().filter(|e| e.feasible).collect();
    if ranked.is_empty() {
        let closest = grid
            .iter()
            .max_by(|a, b| (-a.slacks.violation()).total_cmp(&-b.slacks.violation()))
            .expect("grid is non-empty");
        let (constraint, slack) = closest.slacks.tightest();
        return Err(Error::NoFeasiblePoint { constraint: constraint.to_string(), slack });
    }
    ranked.sort_by(|a, b| b.objective.total_cmp(&a.objective));
    let best_grid = ranked[0].clone();

    let mut best_refined = best_grid.clone();
    for start in ranked.iter().take(spec.refine_starts.max(1)) {
        let candidate = refine::full(&mut audit, &start.point, sign);
        if let Some(c) = candidate {
            if better(&c, &best_refined) {
                best_refined = c;
            }
        }
    }

    let mut best = best_refined.clone();
    if spec.waist_tolerance > 0.0 {
        let target = ((1.0 - spec.waist_tolerance) * best_refined.objective).max(best_grid.objective);
        if let Some(c) = refine::smallest_waist(&mut audit, &best_refined, target, sign) {
            best = c;
        }
    }
    Ok(SearchResult { best, best_grid, best_refined, audit: audit.records })
}
