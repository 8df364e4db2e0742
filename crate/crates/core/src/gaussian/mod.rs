//! Exact first- and second-moment dynamics of the two-mode Gaussian system.
//!
//! Quadratures are ordered (X_m, P_m, X_s, P_s) with [X, P] = i, so the vacuum
//! variance is 1/2. For a Lindblad generator with quadratic Hamiltonian and
//! linear jump operators the adjoint equations close on the moments:
//!
//! * H = ω a†a rotates (X, P) with X' = ωP, P' = -ωX.
//! * -g X_m X_s gives P_m' = g X_s and P_s' = g X_m; the beamsplitter form
//!   -g (X_m X_s + P_m P_s) adds X_m' = -g P_s and X_s' = -g P_m.
//! * γ D[a] and γ D[a†] damp both quadratures at γ/2 and add γ/2 of
//!   diffusion each; with γ_m (N+1) D[a] + γ_m N D[a†] the diffusion is γ_m (N + 1/2).
//! * γ D[X_m] leaves the drift unchanged and adds γ to the P_m diffusion.

mod integrate;
pub mod lyapunov;
mod sweep;

use nalgebra::{Complex, Matrix2, Matrix4, Vector4};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rates::RateSet;

pub use integrate::{evolve, EvolveOptions, Integrator};
pub use sweep::{cooling_curve, strong_coupling_sweep, CoolingCurve, CoolingPoint, PointOutcome, StrongCouplingRow};

/// Form of the light-mediated interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// -g X_m X_s, keeping counter-rotating terms.
    FullQuadrature,
    /// -g (a†S + S†a), valid for g well below ω_m.
    BeamsplitterRwa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HamiltonianChoice {
    pub coupling: Coupling,
    /// Mechanical frequency (rad/s).
    pub omega_m: f64,
    /// Spin-wave frequency minus mechanical frequency (rad/s).
    pub delta_resonance: f64,
}

impl HamiltonianChoice {
    pub fn full_quadrature(omega_m: f64, delta_resonance: f64) -> Result<Self> {
        Self::checked(Coupling::FullQuadrature, omega_m, delta_resonance)
    }

    /// Beamsplitter form; refuses couplings at or above the mechanical frequency.
    pub fn beamsplitter_rwa(omega_m: f64, delta_resonance: f64, g_eff: f64) -> Result<Self> {
        let h = Self::checked(Coupling::BeamsplitterRwa, omega_m, delta_resonance)?;
        h.check_coupling(g_eff)?;
        Ok(h)
    }

    pub fn new(coupling: Coupling, omega_m: f64, delta_resonance: f64) -> Result<Self> {
        Self::checked(coupling, omega_m, delta_resonance)
    }

    fn checked(coupling: Coupling, omega_m: f64, delta_resonance: f64) -> Result<Self> {
        if !(omega_m > 0.0 && omega_m.is_finite()) {
            return Err(Error::invalid("omega_m", format!("must be > 0, got {omega_m}")));
        }
        if !delta_resonance.is_finite() {
            return Err(Error::invalid("delta_resonance", "must be finite"));
        }
        Ok(HamiltonianChoice { coupling, omega_m, delta_resonance })
    }

    pub fn omega_spin(&self) -> f64 {
        self.omega_m + self.delta_resonance
    }

    pub(crate) fn check_coupling(&self, g_eff: f64) -> Result<()> {
        if self.coupling == Coupling::BeamsplitterRwa && !(g_eff.abs() < self.omega_m) {
            return Err(Error::RwaOutOfRange { g_eff, omega_m: self.omega_m });
        }
        Ok(())
    }
}

/// Amplitude damping of the mechanics, γ_m, and its bath occupation N_m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MechanicalBath {
    pub damping: f64,
    pub occupation: f64,
}

impl MechanicalBath {
    /// Splits the thermal decoherence rate γ_m N_m into damping and occupation.
    pub fn from_thermal_rate(gamma_m_th: f64, occupation: f64) -> Result<Self> {
        if !(occupation >= 0.0 && occupation.is_finite()) {
            return Err(Error::invalid("N_m", format!("must be finite and >= 0, got {occupation}")));
        }
        if !(gamma_m_th >= 0.0 && gamma_m_th.is_finite()) {
            return Err(Error::invalid("gamma_m_th", format!("must be finite and >= 0, got {gamma_m_th}")));
        }
        let damping = if occupation > 0.0 {
            gamma_m_th / occupation
        } else if gamma_m_th == 0.0 {
            0.0
        } else {
            return Err(Error::invalid("N_m", "zero occupation cannot carry a nonzero thermal rate"));
        };
        Ok(MechanicalBath { damping, occupation })
    }

    pub fn new(damping: f64, occupation: f64) -> Result<Self> {
        if !(damping >= 0.0 && damping.is_finite()) {
            return Err(Error::invalid("gamma_m", format!("must be finite and >= 0, got {damping}")));
        }
        if !(occupation >= 0.0 && occupation.is_finite()) {
            return Err(Error::invalid("N_m", format!("must be finite and >= 0, got {occupation}")));
        }
        Ok(MechanicalBath { damping, occupation })
    }
}

/// Drift and diffusion of the moment equations, in 1/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModel {
    pub drift: Matrix4<f64>,
    pub diffusion: Matrix4<f64>,
}

impl GaussianModel {
    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        self.drift.complex_eigenvalues().iter().copied().collect()
    }

    /// Largest real part among the drift eigenvalues.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Mean and covariance of a Gaussian state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentState {
    pub mean: Vector4<f64>,
    pub cov: Matrix4<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Mechanics,
    Spin,
}

impl Mode {
    fn offset(self) -> usize {
        match self {
            Mode::Mechanics => 0,
            Mode::Spin => 2,
        }
    }
}

impl MomentState {
    pub fn vacuum() -> Self {
        MomentState { mean: Vector4::zeros(), cov: Matrix4::identity() * 0.5 }
    }

    /// Product of thermal states with the given occupations.
    pub fn thermal(n_mech: f64, n_spin: f64) -> Self {
        let v = Vector4::new(n_mech + 0.5, n_mech + 0.5, n_spin + 0.5, n_spin + 0.5);
        MomentState { mean: Vector4::zeros(), cov: Matrix4::from_diagonal(&v) }
    }
}

/// Symplectic form for the (X_m, P_m, X_s, P_s) ordering.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut o = Matrix4::zeros();
    o[(0, 1)] = 1.0;
    o[(1, 0)] = -1.0;
    o[(2, 3)] = 1.0;
    o[(3, 2)] = -1.0;
    o
}

/// Smallest eigenvalue of cov + (i/2) Ω; non-negative for physical states.
pub fn physicality_margin(cov: &Matrix4<f64>) -> f64 {
    let omega = symplectic_form();
    let h = Matrix4::from_fn(|i, j| Complex::new(0.5 * (cov[(i, j)] + cov[(j, i)]), 0.5 * omega[(i, j)]));
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn require_rate(field: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")))
    }
}

/// Builds the moment equations, splitting γ_m^th into γ_m and `occupation` = N_m.
pub fn build_model(h: &HamiltonianChoice, rates: &RateSet, occupation: f64) -> Result<GaussianModel> {
    let bath = MechanicalBath::from_thermal_rate(rates.gamma_m_th, occupation)?;
    build_model_with_bath(h, rates, &bath)
}

/// Builds the moment equations with an explicit mechanical bath.
pub fn build_model_with_bath(h: &HamiltonianChoice, rates: &RateSet, bath: &MechanicalBath) -> Result<GaussianModel> {
    require_rate("gamma_m_diff", rates.gamma_m_diff)?;
    require_rate("gamma_at_diff", rates.gamma_at_diff)?;
    require_rate("gamma_at_cool", rates.gamma_at_cool)?;
    if !rates.g_eff.is_finite() {
        return Err(Error::invalid("g_eff", "must be finite"));
    }
    h.check_coupling(rates.g_eff)?;
    let g = rates.g_eff;
    let (wm, ws) = (h.omega_m, h.omega_spin());
    let gamma_s = rates.gamma_at_tot();
    let gamma_m = bath.damping;

    let mut a = Matrix4::zeros();
    a[(0, 1)] = wm;
    a[(1, 0)] = -wm;
    a[(2, 3)] = ws;
    a[(3, 2)] = -ws;
    a[(1, 2)] += g;
    a[(3, 0)] += g;
    if h.coupling == Coupling::BeamsplitterRwa {
        a[(0, 3)] -= g;
        a[(2, 1)] -= g;
    }
    for i in 0..2 {
        a[(i, i)] -= gamma_m / 2.0;
        a[(i + 2, i + 2)] -= gamma_s / 2.0;
    }

    let mut d = Matrix4::zeros();
    let thermal = gamma_m * (bath.occupation + 0.5);
    d[(0, 0)] = thermal;
    d[(1, 1)] = thermal + rates.gamma_m_diff;
    d[(2, 2)] = gamma_s / 2.0;
    d[(3, 3)] = gamma_s / 2.0;
    Ok(GaussianModel { drift: a, diffusion: d })
}

/// Stationary state from the Lyapunov equation, with the residual checked.
pub fn steady_state(model: &GaussianModel) -> Result<MomentState> {
    let abscissa = model.spectral_abscissa();
    if abscissa >= 0.0 {
        return Err(Error::Unstable { abscissa });
    }
    let cov = lyapunov::solve(&model.drift, &model.diffusion)?;
    let residual = lyapunov::residual(&model.drift, &model.diffusion, &cov);
    let bound = lyapunov::residual_bound(&model.drift, &model.diffusion, &cov);
    if residual > bound {
        return Err(Error::LyapunovResidual { residual, bound });
    }
    Ok(MomentState { mean: Vector4::zeros(), cov })
}

/// Tolerance applied to the occupation and the uncertainty relation.
pub const OCCUPATION_TOLERANCE: f64 = 1e-9;

/// Mean excitation number (⟨X²⟩ + ⟨P²⟩ - 1)/2 of one mode.
pub fn occupation(s: &MomentState, mode: Mode) -> Result<f64> {
    let o = mode.offset();
    let block = Matrix2::new(s.cov[(o, o)], s.cov[(o, o + 1)], s.cov[(o + 1, o)], s.cov[(o + 1, o + 1)]);
    let scale = block.trace().abs().max(1.0);
    // Single-mode uncertainty relation: det σ >= 1/4 with positive diagonal.
    let det_margin = block.determinant() - 0.25;
    if block[(0, 0)] <= 0.0 || block[(1, 1)] <= 0.0 || det_margin < -OCCUPATION_TOLERANCE * scale * scale {
        return Err(Error::UnphysicalCovariance { min_eigenvalue: det_margin });
    }
    let mx = s.mean[o];
    let mp = s.mean[o + 1];
    let n = (block[(0, 0)] + block[(1, 1)] + mx * mx + mp * mp - 1.0) / 2.0;
    if n < -OCCUPATION_TOLERANCE * scale {
        return Err(Error::UnphysicalCovariance { min_eigenvalue: n });
    }
    Ok(n.max(0.0))
}

/// Time for a full single-excitation swap under the lossless beamsplitter, π/(2 g_eff).
pub fn rabi_exchange_period(rates: &RateSet) -> f64 {
    std::f64::consts::PI / (2.0 * rates.g_eff)
}
