//! Time evolution of the moment equations.

use nalgebra::{Matrix4, SMatrix, Vector4};

use super::{GaussianModel, MomentState};
use crate::error::{Error, Result};

/// Backend for [`evolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Integrator {
    /// Adaptive Dormand-Prince 5(4) with mixed absolute/relative error control.
    DormandPrince { rtol: f64, atol: f64 },
    /// Exact propagation over sub-intervals with a block matrix exponential.
    MatrixExponential,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Largest allowed step (s).
    pub dt_max: f64,
    pub integrator: Integrator,
}

impl EvolveOptions {
    pub fn dormand_prince(dt_max: f64) -> Self {
        EvolveOptions { dt_max, integrator: Integrator::DormandPrince { rtol: 1e-10, atol: 1e-12 } }
    }

    pub fn matrix_exponential(dt_max: f64) -> Self {
        EvolveOptions { dt_max, integrator: Integrator::MatrixExponential }
    }
}

/// Propagates a moment state for a time `t` >= 0.
pub fn evolve(model: &GaussianModel, s0: &MomentState, t: f64, opts: &EvolveOptions) -> Result<MomentState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", format!("must be finite and >= 0, got {t}")));
    }
    if !(opts.dt_max > 0.0) {
        return Err(Error::invalid("dt_max", "must be > 0"));
    }
    if t == 0.0 {
        return Ok(*s0);
    }
    match opts.integrator {
        Integrator::DormandPrince { rtol, atol } => dormand_prince(model, s0, t, opts.dt_max, rtol, atol),
        Integrator::MatrixExponential => exponential(model, s0, t, opts.dt_max),
    }
}

fn exponential(model: &GaussianModel, s0: &MomentState, t: f64, dt_max: f64) -> Result<MomentState> {
    let steps = (t / dt_max).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    // Van Loan: exp([[-A, D], [0, Aᵀ]] h) = [[., F12], [0, F22]] with F22 = exp(Aᵀ h)
    // and the accumulated noise ∫ exp(A s) D exp(Aᵀ s) ds = F22ᵀ F12.
    let mut block = SMatrix::<f64, 8, 8>::zeros();
    let a = model.drift;
    block.fixed_view_mut::<4, 4>(0, 0).copy_from(&(-a * h));
    block.fixed_view_mut::<4, 4>(0, 4).copy_from(&(model.diffusion * h));
    block.fixed_view_mut::<4, 4>(4, 4).copy_from(&(a.transpose() * h));
    let e = block.exp();
    let f12: Matrix4<f64> = e.fixed_view::<4, 4>(0, 4).into_owned();
    let f22: Matrix4<f64> = e.fixed_view::<4, 4>(4, 4).into_owned();
    let phi = f22.transpose();
    let noise = phi * f12;
    let noise = (noise + noise.transpose()) * 0.5;
    let mut mean = s0.mean;
    let mut cov = s0.cov;
    for _ in 0..steps {
        mean = phi * mean;
        cov = phi * cov * phi.transpose() + noise;
        cov = (cov + cov.transpose()) * 0.5;
    }
    Ok(MomentState { mean, cov })
}

#[derive(Clone, Copy)]
struct Moments {
    mean: Vector4<f64>,
    cov: Matrix4<f64>,
}

impl Moments {
    fn axpy(&self, h: f64, k: &[Moments], coeffs: &[f64]) -> Moments {
        let mut out = *self;
        for (ki, c) in k.iter().zip(coeffs) {
            if *c != 0.0 {
                out.mean += ki.mean * (h * c);
                out.cov += ki.cov * (h * c);
            }
        }
        out
    }
}

fn derivative(model: &GaussianModel, y: &Moments) -> Moments {
    let a = &model.drift;
    Moments { mean: a * y.mean, cov: a * y.cov + y.cov * a.transpose() + model.diffusion }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dormand_prince(
    model: &GaussianModel,
    s0: &MomentState,
    t_end: f64,
    dt_max: f64,
    rtol: f64,
    atol: f64,
) -> Result<MomentState> {
    let mut y = Moments { mean: s0.mean, cov: s0.cov };
    let mut t = 0.0;
    let rate = model.drift.norm().max(1.0 / t_end);
    let mut h = (0.01 / rate).min(dt_max).min(t_end);
    let mut k1 = derivative(model, &y);
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        let mut k = [k1; 7];
        for stage in 1..7 {
            let yi = y.axpy(h, &k[..stage], &A[stage][..stage]);
            k[stage] = derivative(model, &yi);
        }
        let y_new = y.axpy(h, &k[..6], &A[6][..6]);
        let mut err_mean = Vector4::zeros();
        let mut err_cov = Matrix4::zeros();
        for (ki, e) in k.iter().zip(E.iter()) {
            err_mean += ki.mean * (h * e);
            err_cov += ki.cov * (h * e);
        }
        let mut ratio: f64 = 0.0;
        for i in 0..4 {
            let sc = atol + rtol * y.mean[i].abs().max(y_new.mean[i].abs());
            ratio = ratio.max(err_mean[i].abs() / sc);
        }
        for i in 0..16 {
            let sc = atol + rtol * y.cov[i].abs().max(y_new.cov[i].abs());
            ratio = ratio.max(err_cov[i].abs() / sc);
        }
        if ratio <= 1.0 {
            t += h;
            y = y_new;
            y.cov = (y.cov + y.cov.transpose()) * 0.5;
            k1 = k[6];
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(dt_max);
        if t < t_end && (h <= f64::EPSILON * t.max(t_end) || t + h == t) {
            return Err(Error::StepUnderflow { t, h });
        }
    }
    Ok(MomentState { mean: y.mean, cov: y.cov })
}
