//! Closed-form coupling and decoherence rates and the derived figures of merit.

use std::f64::consts::PI;

use serde::Serialize;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::params::{DerivedQuantities, MechParams, MechVariant, PhysicalParams};

/// Sign of the laser detuning. Rates are stored as magnitudes; the light shift
/// and the atomic coupling carry this sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningSign {
    /// Laser above the atomic resonance (Δ > 0).
    Blue,
    /// Laser below the atomic resonance (Δ < 0).
    Red,
}

impl DetuningSign {
    pub fn of(delta: f64) -> Self {
        if delta < 0.0 {
            DetuningSign::Red
        } else {
            DetuningSign::Blue
        }
    }

    pub fn factor(self) -> f64 {
        match self {
            DetuningSign::Blue => 1.0,
            DetuningSign::Red => -1.0,
        }
    }
}

/// All derived rates of the effective model, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateSet {
    pub g_m: f64,
    pub g_at: f64,
    pub g_eff: f64,
    pub gamma_m_diff: f64,
    pub gamma_at_diff: f64,
    pub gamma_m_th: f64,
    pub gamma_at_cool: f64,
    /// Magnitude of the optical-lattice light shift.
    pub omega_ol: f64,
    pub coop_c0: f64,
    pub coop_c: f64,
    pub detuning_sign: DetuningSign,
}

impl RateSet {
    /// Builds a rate set from effective rates alone.
    ///
    /// The microscopic couplings cannot be recovered from the effective rates:
    /// `g_m` is taken from `gamma_m_diff = 2 g_m^2` and `g_at` and `omega_ol` are left at zero.
    pub fn from_effective(
        g_eff: f64,
        gamma_m_diff: f64,
        gamma_at_diff: f64,
        gamma_m_th: f64,
        gamma_at_cool: f64,
    ) -> Result<RateSet> {
        let fields = [
            ("g_eff", g_eff),
            ("gamma_m_diff", gamma_m_diff),
            ("gamma_at_diff", gamma_at_diff),
            ("gamma_m_th", gamma_m_th),
            ("gamma_at_cool", gamma_at_cool),
        ];
        for (field, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        let mut rates = RateSet {
            g_m: (gamma_m_diff / 2.0).sqrt(),
            g_at: 0.0,
            g_eff,
            gamma_m_diff,
            gamma_at_diff,
            gamma_m_th,
            gamma_at_cool,
            omega_ol: 0.0,
            coop_c0: 0.0,
            coop_c: 0.0,
            detuning_sign: DetuningSign::Blue,
        };
        rates.refresh_cooperativities();
        Ok(rates)
    }

    pub fn gamma_m_tot(&self) -> f64 {
        self.gamma_m_diff + self.gamma_m_th
    }

    pub fn gamma_at_tot(&self) -> f64 {
        self.gamma_at_diff + self.gamma_at_cool
    }

    /// Copy with a different effective coupling; cooperativities follow.
    pub fn with_coupling(&self, g_eff: f64) -> RateSet {
        let mut out = *self;
        out.g_eff = g_eff;
        out.refresh_cooperativities();
        out
    }

    /// Copy with a different repumping rate; cooperativities follow.
    pub fn with_cooling(&self, gamma_at_cool: f64) -> RateSet {
        let mut out = *self;
        out.gamma_at_cool = gamma_at_cool;
        out.refresh_cooperativities();
        out
    }

    /// Bare cooperativity recomputed from the stored rates.
    pub fn c0_from_fields(&self) -> f64 {
        cooperativity(self.g_eff, self.gamma_m_tot(), self.gamma_at_diff).unwrap_or(f64::INFINITY)
    }

    /// Cooperativity including repumping, recomputed from the stored rates.
    pub fn c_from_fields(&self) -> f64 {
        cooperativity(self.g_eff, self.gamma_m_tot(), self.gamma_at_tot()).unwrap_or(f64::INFINITY)
    }

    fn refresh_cooperativities(&mut self) {
        self.coop_c0 = self.c0_from_fields();
        self.coop_c = self.c_from_fields();
    }

    /// Smaller of the two strong-coupling ratios g_eff/γ_m^tot and g_eff/γ_at^diff.
    pub fn min_strong_coupling_ratio(&self) -> f64 {
        let mech = self.g_eff / self.gamma_m_tot();
        let spin = self.g_eff / self.gamma_at_diff;
        mech.min(spin)
    }
}

/// Mirror-light coupling α k_L ℓ_m / √π.
pub fn g_m_mirror(d: &DerivedQuantities) -> f64 {
    d.alpha() * d.k_l * d.ell_m / PI.sqrt()
}

/// Coupling through a generic optomechanical cavity, (2α/√π)(g0/κ).
pub fn g_m_optomech(d: &DerivedQuantities, g0: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::invalid("kappa", format!("must be > 0, got {kappa}")));
    }
    Ok(2.0 * d.alpha() / PI.sqrt() * g0 / kappa)
}

/// Membrane-in-the-middle coupling α (k_L ℓ_m/√(2π)) 2|r| (2F/π).
pub fn g_m_mim(d: &DerivedQuantities, reflectivity: f64, finesse: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&reflectivity) {
        return Err(Error::invalid("reflectivity_r", format!("must lie in [0, 1], got {reflectivity}")));
    }
    if !(finesse >= 1.0) {
        return Err(Error::invalid("finesse_F", format!("must be >= 1, got {finesse}")));
    }
    Ok(d.alpha() * d.k_l * d.ell_m / (2.0 * PI).sqrt() * 2.0 * reflectivity.abs() * 2.0 * finesse / PI)
}

/// Mechanical coupling for whichever element `variant` describes.
pub fn g_m_for(d: &DerivedQuantities, variant: &MechVariant) -> Result<f64> {
    match *variant {
        MechVariant::IdealMirror => Ok(g_m_mirror(d)),
        MechVariant::OptomechCavity { g0, kappa } => g_m_optomech(d, g0, kappa),
        MechVariant::MembraneInMiddle { reflectivity, finesse } => g_m_mim(d, reflectivity, finesse),
    }
}

/// Magnitude of the atom-field coupling (μ+μ-/ħ²|Δ|) α E² √(π/8).
///
/// Written through the Rabi frequencies, Ω+Ω-/(α|Δ|) √(π/8), so the amplitude
/// convention applied in [`crate::params::derive_all`] carries over.
pub fn g_at(d: &DerivedQuantities, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::invalid("detuning_Delta", "must be nonzero"));
    }
    let alpha = d.alpha();
    if alpha == 0.0 {
        return Ok(0.0);
    }
    Ok(d.rabi_plus * d.rabi_minus / (alpha * delta.abs()) * (PI / 8.0).sqrt())
}

/// Effective mechanics-spin coupling 2√N g_at g_m.
pub fn g_eff(d: &DerivedQuantities, g_m: f64, g_at: f64) -> f64 {
    2.0 * d.atom_number.sqrt() * g_at * g_m
}

/// Second route to the effective coupling for an ideal mirror,
/// √(N/2)(Ω+Ω-/|Δ|) k_L ℓ_m.
pub fn g_eff_mirror_direct(d: &DerivedQuantities, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::invalid("detuning_Delta", "must be nonzero"));
    }
    Ok((d.atom_number / 2.0).sqrt() * d.rabi_plus * d.rabi_minus / delta.abs() * d.k_l * d.ell_m)
}

/// Mechanical diffusion from radiation-pressure noise, 2 g_m².
pub fn gamma_m_diff(g_m: f64) -> f64 {
    2.0 * g_m * g_m
}

/// Single-atom scattering rate Γ Ω² / (Γ² + 4Δ² + 2Ω²).
pub fn gamma_at_diff(gamma_spont: f64, rabi: f64, delta: f64) -> Result<f64> {
    if !(gamma_spont > 0.0) {
        return Err(Error::invalid("gamma_spont", format!("must be > 0, got {gamma_spont}")));
    }
    let r2 = rabi * rabi;
    Ok(gamma_spont * r2 / (gamma_spont * gamma_spont + 4.0 * delta * delta + 2.0 * r2))
}

/// Bath temperature including laser heating (K).
pub fn bath_temperature(mech: &MechParams, power_w: f64) -> f64 {
    mech.bath_t0 + mech.heating_dt_per_w * power_w
}

/// Thermal decoherence rate k_B T / (ħ Q).
pub fn gamma_m_th(mech: &MechParams, power_w: f64) -> Result<f64> {
    if !(mech.quality_q > 0.0) {
        return Err(Error::invalid("quality_Q", format!("must be > 0, got {}", mech.quality_q)));
    }
    Ok(K_B * bath_temperature(mech, power_w) / (HBAR * mech.quality_q))
}

/// High-temperature bath occupation k_B T / (ħ ω_m); consistent with
/// `gamma_m_th = (ω_m/Q) N_m`.
pub fn thermal_occupation(mech: &MechParams, power_w: f64) -> f64 {
    K_B * bath_temperature(mech, power_w) / (HBAR * mech.omega_m)
}

/// Signed light shift of the optical lattice, μ-² α² E² / (ħ² Δ) = Ω-²/Δ.
pub fn omega_ol(d: &DerivedQuantities, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::invalid("detuning_Delta", "must be nonzero"));
    }
    Ok(d.rabi_minus * d.rabi_minus / delta)
}

/// Ground-state splitting that puts the light-shifted spin wave on resonance
/// with the mechanics, ω_m − Ω_OL/2, for a signed light shift.
pub fn resonant_omega_at(omega_m: f64, omega_ol_signed: f64) -> f64 {
    omega_m - omega_ol_signed / 2.0
}

/// Cooperativity 4 g² / (γ_m γ_at).
pub fn cooperativity(g_eff: f64, gamma_m_tot: f64, gamma_at_tot: f64) -> Result<f64> {
    if gamma_m_tot == 0.0 || gamma_at_tot == 0.0 {
        return Err(Error::ZeroDenominator("cooperativity"));
    }
    Ok(4.0 * g_eff * g_eff / (gamma_m_tot * gamma_at_tot))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

/// Default relative width of the marginal band around the stability boundary.
pub const MARGINAL_BAND: f64 = 1e-9;

/// Classifies the full-quadrature coupling: stable iff γ_at² + 4ω_m² > 4g².
pub fn stability_inequality(g_eff: f64, omega_m: f64, gamma_at_tot: f64, band: f64) -> Stability {
    let bound = gamma_at_tot * gamma_at_tot + 4.0 * omega_m * omega_m;
    let drive = 4.0 * g_eff * g_eff;
    if (bound - drive).abs() <= band * bound.max(drive) {
        Stability::Marginal
    } else if bound > drive {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

/// Coupling value at which the full-quadrature model loses stability, √(ω_m² + γ_at²/4).
pub fn stability_boundary(omega_m: f64, gamma_at_tot: f64) -> f64 {
    (omega_m * omega_m + gamma_at_tot * gamma_at_tot / 4.0).sqrt()
}

/// Ratio of internal-state to motional coupling, 1/(k_L ℓ_at) with
/// ℓ_at = √(ħ/(2 m ω_at)), the inverse Lamb-Dicke parameter.
pub fn motional_comparison(d: &DerivedQuantities, omega_at: f64, atom_mass: f64) -> Result<f64> {
    if !(omega_at > 0.0) {
        return Err(Error::invalid("omega_at", "must be > 0"));
    }
    if !(atom_mass > 0.0) {
        return Err(Error::invalid("atom_mass", "must be > 0"));
    }
    let ell = (HBAR / (2.0 * atom_mass * omega_at)).sqrt();
    Ok(1.0 / (d.k_l * ell))
}

/// Evaluates every rate for a parameter set.
pub fn compute_rates(params: &PhysicalParams) -> Result<RateSet> {
    let d = params.derive()?;
    rates_from_derived(params, &d)
}

pub(crate) fn rates_from_derived(params: &PhysicalParams, d: &DerivedQuantities) -> Result<RateSet> {
    let delta = params.laser.nonzero_detuning()?;
    let g_m = g_m_for(d, &params.mechanics.variant)?;
    let g_at = g_at(d, delta)?;
    let mut rates = RateSet {
        g_m,
        g_at,
        g_eff: g_eff(d, g_m, g_at),
        gamma_m_diff: gamma_m_diff(g_m),
        gamma_at_diff: gamma_at_diff(params.atoms.gamma_spont, d.rabi_minus, delta)?,
        gamma_m_th: gamma_m_th(&params.mechanics, params.laser.power_w)?,
        gamma_at_cool: params.atoms.gamma_at_cool,
        omega_ol: omega_ol(d, delta)?.abs(),
        coop_c0: 0.0,
        coop_c: 0.0,
        detuning_sign: DetuningSign::of(delta),
    };
    rates.refresh_cooperativities();
    Ok(rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{C, RB87_MASS, TWO_PI};
    use crate::params::fixtures::{membrane, zipper};
    use crate::params::Conventions;
    use approx::assert_relative_eq;

    fn khz(rad: f64) -> f64 {
        rad / TWO_PI / 1e3
    }

    #[test]
    fn thermal_rate_reference() {
        // k_B (4 K + 12 K/mW * 2.5e-7 W) / (ħ 1e5), evaluated by hand: 2π * 834.4 kHz.
        let p = zipper();
        let hand = 1.380649e-23 * 4.003 / (1.054571817e-34 * 1e5);
        let rate = gamma_m_th(&p.mechanics, p.laser.power_w).unwrap();
        assert_relative_eq!(rate, hand, max_relative = 1e-12);
        assert!((khz(rate) / 844.0 - 1.0).abs() < 0.05);
        let mut cold = p.mechanics;
        cold.bath_t0 = 0.0;
        assert_eq!(gamma_m_th(&cold, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn optomech_diffusion_reference() {
        let p = zipper();
        let d = p.derive().unwrap();
        let g = g_m_optomech(&d, TWO_PI * 1.83e6, TWO_PI * 4e9).unwrap();
        assert!((khz(gamma_m_diff(g)) / 541.0 - 1.0).abs() < 0.05);
        assert_eq!(g_m_optomech(&d, 0.0, 1.0).unwrap(), 0.0);
        let halved = g_m_optomech(&d, TWO_PI * 1.83e6, TWO_PI * 2e9).unwrap();
        assert_relative_eq!(halved, 2.0 * g, max_relative = 1e-14);
        assert!(g_m_optomech(&d, 1.0, 0.0).is_err());
    }

    #[test]
    fn membrane_rates() {
        let p = membrane();
        let d = p.derive().unwrap();
        let g_mim = g_m_mim(&d, 0.4, 700.0).unwrap();
        let doubled = g_m_mim(&d, 0.4, 1400.0).unwrap();
        assert_relative_eq!(doubled, 2.0 * g_mim, max_relative = 1e-14);
        assert_eq!(g_m_mim(&d, 0.0, 700.0).unwrap(), 0.0);
        assert!(g_m_mim(&d, 1.2, 700.0).is_err());
        assert!(g_m_mim(&d, 0.4, 0.5).is_err());
        let th = gamma_m_th(&p.mechanics, p.laser.power_w).unwrap();
        assert!((khz(th) / 105.0 - 1.0).abs() < 0.10);
        // The cavity-form coupling with the membrane's single-photon rate gives the
        // tabulated diffusion; the finesse-enhanced form gives the tabulated g_eff.
        let g_om = g_m_optomech(&d, TWO_PI * 175.0, TWO_PI * 232e6).unwrap();
        assert!((khz(gamma_m_diff(g_om)) / 15.0 - 1.0).abs() < 0.10);
        let rates = compute_rates(&p).unwrap();
        assert!((khz(rates.g_eff) / 150.0 - 1.0).abs() < 0.05);
    }

    #[test]
    fn atomic_rate_needs_halving_convention() {
        let p = zipper();
        let rates = compute_rates(&p).unwrap();
        assert!((khz(rates.gamma_at_diff) / 143.0 - 1.0).abs() < 0.10);
        let mut plain = p;
        plain.conventions = Conventions::default();
        let rates = compute_rates(&plain).unwrap();
        assert!((khz(rates.gamma_at_diff) / 143.0 - 1.0).abs() > 0.10);
    }

    #[test]
    fn coupling_at_reference_point() {
        // With the halving convention the zipper point gives 2π * 3.07 MHz; the
        // tabulated 2π * 2.5 MHz sits 23% below.
        let rates = compute_rates(&zipper()).unwrap();
        let mhz = rates.g_eff / TWO_PI / 1e6;
        assert!((mhz / 2.5 - 1.0).abs() < 0.25, "{mhz}");
    }

    #[test]
    fn dual_route_for_mirror() {
        let mut p = zipper();
        p.mechanics.variant = MechVariant::IdealMirror;
        for halving in [false, true] {
            p.conventions.rabi_halving = halving;
            let d = p.derive().unwrap();
            let a = g_eff(&d, g_m_mirror(&d), g_at(&d, p.laser.detuning).unwrap());
            let b = g_eff_mirror_direct(&d, p.laser.detuning).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn trivial_limits() {
        let mut p = zipper();
        p.laser.power_w = 0.0;
        let d = p.derive().unwrap();
        assert_eq!(g_m_mirror(&d), 0.0);
        assert_eq!(g_at(&d, 1.0).unwrap(), 0.0);
        assert_eq!(omega_ol(&d, 1.0).unwrap(), 0.0);
        assert!(g_at(&d, 0.0).is_err());
        assert!(omega_ol(&d, 0.0).is_err());
        assert_eq!(gamma_m_diff(0.0), 0.0);
        assert_eq!(gamma_at_diff(1.0, 0.0, 3.0).unwrap(), 0.0);
        assert!(gamma_at_diff(0.0, 1.0, 3.0).is_err());
        assert_eq!(cooperativity(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(cooperativity(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn far_detuned_scattering_limit() {
        let (gamma, rabi) = (1.0, 0.3);
        for delta in [1e3, 1e5, 1e7] {
            let exact = gamma_at_diff(gamma, rabi, delta).unwrap();
            let asymptotic = gamma * rabi * rabi / (4.0 * delta * delta);
            assert!((exact / asymptotic - 1.0).abs() < 1.0 / delta);
        }
    }

    #[test]
    fn light_shift_and_resonance() {
        let p = zipper();
        let d = p.derive().unwrap();
        let shift = omega_ol(&d, p.laser.detuning).unwrap();
        // Ω-² / Δ evaluated from the halved drive amplitude, by hand.
        let hand = {
            let rabi = (6_271_508_973_728.447f64).sqrt() * 1.030_666_287_322_106_3e-4 * 0.5 * 2.54e-29 / 1.054571817e-34;
            rabi * rabi / (TWO_PI * 15e6)
        };
        assert_relative_eq!(shift, hand, max_relative = 1e-9);
        let mut red = p.laser;
        red.detuning = -red.detuning;
        assert_relative_eq!(omega_ol(&d, red.detuning).unwrap(), -shift, max_relative = 1e-15);
        let omega_at = resonant_omega_at(TWO_PI * 10e6, shift);
        assert_relative_eq!(omega_at + shift / 2.0, TWO_PI * 10e6, max_relative = 1e-15);
        let mut bright = p;
        bright.laser.power_w *= 2.0;
        let d2 = bright.derive().unwrap();
        assert_relative_eq!(omega_ol(&d2, p.laser.detuning).unwrap(), 2.0 * shift, max_relative = 1e-12);
    }

    #[test]
    fn stored_cooperativity_is_recomputable() {
        let r = compute_rates(&zipper()).unwrap();
        assert_eq!(r.coop_c0, r.c0_from_fields());
        assert_eq!(r.coop_c, r.c_from_fields());
    }

    #[test]
    fn reference_cooperativities() {
        let two_pi_k = TWO_PI * 1e3;
        let c0 = cooperativity(2500.0 * two_pi_k, (541.0 + 844.0) * two_pi_k, 143.0 * two_pi_k).unwrap();
        assert!((c0 / 124.4 - 1.0).abs() < 0.02, "{c0}");
        let c0 = cooperativity(150.0 * two_pi_k, (15.0 + 105.0) * two_pi_k, 113.0 * two_pi_k).unwrap();
        assert!((c0 / 6.5 - 1.0).abs() < 0.03, "{c0}");
    }

    #[test]
    fn stability_classes() {
        let (w, g_at) = (1.0, 0.3);
        assert_eq!(stability_inequality(0.0, w, g_at, MARGINAL_BAND), Stability::Stable);
        let edge = stability_boundary(w, g_at);
        assert_eq!(stability_inequality(edge, w, g_at, MARGINAL_BAND), Stability::Marginal);
        assert_eq!(stability_inequality(edge * 1.01, w, g_at, MARGINAL_BAND), Stability::Unstable);
        assert_eq!(stability_inequality(edge * 0.99, w, g_at, MARGINAL_BAND), Stability::Stable);
    }

    #[test]
    fn motional_ratio() {
        let p = zipper();
        let mut laser = p.laser;
        laser.omega_l = TWO_PI * C / 795e-9;
        let mut q = p;
        q.laser = laser;
        let d = q.derive().unwrap();
        let omega_at = TWO_PI * 300e3;
        let r = motional_comparison(&d, omega_at, RB87_MASS).unwrap();
        // 1/(k ℓ) with k = 2π/795 nm and ℓ = sqrt(ħ/(2 m ω)): about 9.0 by hand.
        let k = TWO_PI / 795e-9;
        let ell = (1.054571817e-34 / (2.0 * 1.443160648e-25 * omega_at)).sqrt();
        assert_relative_eq!(r, 1.0 / (k * ell), max_relative = 1e-9);
        let heavier = motional_comparison(&d, omega_at, 2.0 * RB87_MASS).unwrap();
        assert_relative_eq!(heavier / r, 2f64.sqrt(), max_relative = 1e-12);
        // Mass that makes k ℓ = 1 exactly.
        let unit_mass = HBAR * d.k_l * d.k_l / (2.0 * omega_at);
        assert_relative_eq!(motional_comparison(&d, omega_at, unit_mass).unwrap(), 1.0, max_relative = 1e-12);
    }
}
