//! Parameter sweeps over the effective coupling and the repumping rate.

use rayon::prelude::*;
use serde::Serialize;

use super::{build_model, occupation, steady_state, HamiltonianChoice, Mode};
use crate::error::{Error, Result};
use crate::rates::RateSet;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointOutcome {
    Stable { n_ss: f64 },
    Unstable { abscissa: f64 },
    Failed { message: String },
}

impl PointOutcome {
    pub fn occupation(&self) -> Option<f64> {
        match self {
            PointOutcome::Stable { n_ss } => Some(*n_ss),
            _ => None,
        }
    }

    pub fn is_unstable(&self) -> bool {
        matches!(self, PointOutcome::Unstable { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingPoint {
    pub g_eff: f64,
    pub gamma_at_cool: f64,
    #[serde(flatten)]
    pub outcome: PointOutcome,
}

/// Steady-state mechanical occupation over a (g_eff, γ_at^cool) grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoolingCurve {
    /// Points ordered by repumping rate, then by coupling.
    pub points: Vec<CoolingPoint>,
}

impl CoolingCurve {
    pub fn column(&self, gamma_at_cool: f64) -> impl Iterator<Item = &CoolingPoint> {
        self.points.iter().filter(move |p| p.gamma_at_cool == gamma_at_cool)
    }

    /// Lowest stable occupation in one column, with its coupling.
    pub fn min_occupation(&self, gamma_at_cool: f64) -> Option<(f64, f64)> {
        self.column(gamma_at_cool)
            .filter_map(|p| p.outcome.occupation().map(|n| (p.g_eff, n)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Smallest coupling in one column that came out unstable.
    pub fn first_unstable(&self, gamma_at_cool: f64) -> Option<f64> {
        self.column(gamma_at_cool).filter(|p| p.outcome.is_unstable()).map(|p| p.g_eff).reduce(f64::min)
    }
}

fn solve_point(h: &HamiltonianChoice, rates: &RateSet, occupation_n: f64) -> PointOutcome {
    let model = match build_model(h, rates, occupation_n) {
        Ok(m) => m,
        Err(e) => return PointOutcome::Failed { message: e.to_string() },
    };
    match steady_state(&model).and_then(|s| occupation(&s, Mode::Mechanics)) {
        Ok(n_ss) => PointOutcome::Stable { n_ss },
        Err(Error::Unstable { abscissa }) => PointOutcome::Unstable { abscissa },
        Err(e) => PointOutcome::Failed { message: e.to_string() },
    }
}

/// Evaluates the steady state for every coupling and repumping rate. Errors at
/// single points are recorded and the sweep continues.
pub fn cooling_curve(
    h: &HamiltonianChoice,
    base: &RateSet,
    geff_grid: &[f64],
    cool_rates: &[f64],
    occupation_n: f64,
) -> Result<CoolingCurve> {
    if geff_grid.is_empty() {
        return Err(Error::invalid("geff_grid", "must not be empty"));
    }
    if cool_rates.is_empty() {
        return Err(Error::invalid("cool_rates", "must not be empty"));
    }
    let pairs: Vec<(f64, f64)> =
        cool_rates.iter().flat_map(|&c| geff_grid.iter().map(move |&g| (g, c))).collect();
    let points = pairs
        .par_iter()
        .map(|&(g_eff, gamma_at_cool)| {
            let rates = base.with_cooling(gamma_at_cool).with_coupling(g_eff);
            CoolingPoint { g_eff, gamma_at_cool, outcome: solve_point(h, &rates, occupation_n) }
        })
        .collect();
    Ok(CoolingCurve { points })
}

/// Strong-coupling figures of merit at one coupling value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrongCouplingRow {
    pub g_eff: f64,
    /// g_eff / γ_m^tot.
    pub mech_ratio: f64,
    /// g_eff / γ_at^diff.
    pub spin_ratio: f64,
    pub coop_c0: f64,
}

/// Varies g_eff with every decoherence rate held at its base value.
pub fn strong_coupling_sweep(base: &RateSet, geff_grid: &[f64]) -> Result<Vec<StrongCouplingRow>> {
    if geff_grid.is_empty() {
        return Err(Error::invalid("geff_grid", "must not be empty"));
    }
    if base.gamma_m_tot() == 0.0 || base.gamma_at_diff == 0.0 {
        return Err(Error::ZeroDenominator("strong-coupling ratio"));
    }
    Ok(geff_grid
        .iter()
        .map(|&g| {
            let r = base.with_coupling(g);
            StrongCouplingRow {
                g_eff: g,
                mech_ratio: g / r.gamma_m_tot(),
                spin_ratio: g / r.gamma_at_diff,
                coop_c0: r.coop_c0,
            }
        })
        .collect())
}
