//! Laboratory inputs and the single derived quantities every rate formula consumes.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{C, EPSILON_0, HBAR};
use crate::error::{Error, Result};

/// How the beam cross-section entering the mode amplitude is computed from the waist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AreaConvention {
    #[default]
    PiW0Squared,
    PiW0SquaredOverTwo,
}

impl AreaConvention {
    pub fn area(self, waist: f64) -> f64 {
        match self {
            AreaConvention::PiW0Squared => PI * waist * waist,
            AreaConvention::PiW0SquaredOverTwo => 0.5 * PI * waist * waist,
        }
    }

    pub const ALL: [AreaConvention; 2] =
        [AreaConvention::PiW0Squared, AreaConvention::PiW0SquaredOverTwo];
}

/// Convention switches that change numeric results.
///
/// With `rabi_halving` the atoms see half the running-wave amplitude, so every
/// atom-light quantity (Rabi frequencies, atomic coupling, light shift) uses
/// `E/2`. The mirror coupling is unaffected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Conventions {
    pub area: AreaConvention,
    pub rabi_halving: bool,
}

impl Conventions {
    pub fn rabi_factor(&self) -> f64 {
        if self.rabi_halving {
            0.5
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaserParams {
    /// Running-wave power (W).
    pub power_w: f64,
    /// Laser angular frequency (rad/s).
    pub omega_l: f64,
    /// Signed detuning from the excited state (rad/s).
    pub detuning: f64,
    /// Beam waist (m).
    pub waist_w0: f64,
}

impl LaserParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.power_w >= 0.0 && self.power_w.is_finite()) {
            return Err(Error::invalid("power_W", format!("must be finite and >= 0, got {}", self.power_w)));
        }
        if !(self.omega_l > 0.0 && self.omega_l.is_finite()) {
            return Err(Error::invalid("omega_L", format!("must be > 0, got {}", self.omega_l)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning_Delta", "must be finite"));
        }
        if !(self.waist_w0 > 0.0 && self.waist_w0.is_finite()) {
            return Err(Error::invalid("waist_w0", format!("must be > 0, got {}", self.waist_w0)));
        }
        Ok(())
    }

    /// Returns the detuning, rejecting zero for quantities that divide by it.
    pub fn nonzero_detuning(&self) -> Result<f64> {
        if self.detuning == 0.0 {
            Err(Error::invalid("detuning_Delta", "must be nonzero"))
        } else {
            Ok(self.detuning)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomParams {
    /// Dipole element of the sigma+ transition (C m).
    pub dipole_mu_plus: f64,
    /// Dipole element of the sigma- transition (C m).
    pub dipole_mu_minus: f64,
    /// Spontaneous decay rate of the excited state (rad/s).
    pub gamma_spont: f64,
    /// Ground-state splitting (rad/s).
    pub omega_at: f64,
    /// Atomic area density (1/m^2).
    pub area_density: f64,
    /// External repumping rate of the spin wave (1/s).
    pub gamma_at_cool: f64,
}

impl AtomParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dipole_mu_plus", self.dipole_mu_plus),
            ("dipole_mu_minus", self.dipole_mu_minus),
            ("gamma_spont", self.gamma_spont),
            ("omega_at", self.omega_at),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, format!("must be > 0, got {v}")));
            }
        }
        if !(self.area_density >= 0.0 && self.area_density.is_finite()) {
            return Err(Error::invalid("area_density_rhoA", format!("must be >= 0, got {}", self.area_density)));
        }
        if !(self.gamma_at_cool >= 0.0 && self.gamma_at_cool.is_finite()) {
            return Err(Error::invalid("gamma_at_cool", format!("must be >= 0, got {}", self.gamma_at_cool)));
        }
        Ok(())
    }
}

/// Mechanical element and the way it couples to the light.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MechVariant {
    IdealMirror,
    /// Generic cavity optomechanics: single-photon coupling `g0` and linewidth `kappa` (rad/s).
    OptomechCavity { g0: f64, kappa: f64 },
    /// Membrane of amplitude reflectivity `reflectivity` inside a cavity of finesse `finesse`.
    MembraneInMiddle { reflectivity: f64, finesse: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MechParams {
    pub variant: MechVariant,
    /// Mechanical angular frequency (rad/s).
    pub omega_m: f64,
    /// Effective mass (kg).
    pub mass: f64,
    pub quality_q: f64,
    /// Bath temperature (K).
    pub bath_t0: f64,
    /// Laser heating of the bath (K/W).
    pub heating_dt_per_w: f64,
}

impl MechParams {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [("omega_m", self.omega_m), ("mass_M", self.mass), ("quality_Q", self.quality_q)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(field, format!("must be > 0, got {v}")));
            }
        }
        if !(self.bath_t0 >= 0.0 && self.bath_t0.is_finite()) {
            return Err(Error::invalid("bath_T0", format!("must be >= 0, got {}", self.bath_t0)));
        }
        if !self.heating_dt_per_w.is_finite() {
            return Err(Error::invalid("heating_dT_per_W", "must be finite"));
        }
        match self.variant {
            MechVariant::IdealMirror => {}
            MechVariant::OptomechCavity { g0, kappa } => {
                if !(g0 >= 0.0 && g0.is_finite()) {
                    return Err(Error::invalid("g0", format!("must be >= 0, got {g0}")));
                }
                if !(kappa > 0.0 && kappa.is_finite()) {
                    return Err(Error::invalid("kappa", format!("must be > 0, got {kappa}")));
                }
            }
            MechVariant::MembraneInMiddle { reflectivity, finesse } => {
                if !(0.0..=1.0).contains(&reflectivity) {
                    return Err(Error::invalid("reflectivity_r", format!("must lie in [0, 1], got {reflectivity}")));
                }
                if !(finesse >= 1.0 && finesse.is_finite()) {
                    return Err(Error::invalid("finesse_F", format!("must be >= 1, got {finesse}")));
                }
            }
        }
        Ok(())
    }
}

/// Geometry outside the beam itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    /// Length of the atomic ensemble along the beam (m).
    pub ensemble_length: f64,
}

impl Default for Geometry {
    fn default() -> Self {
        Geometry { ensemble_length: 0.01 }
    }
}

/// Complete laboratory parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    pub laser: LaserParams,
    pub atoms: AtomParams,
    pub mechanics: MechParams,
    pub geometry: Geometry,
    pub conventions: Conventions,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        self.laser.validate()?;
        self.atoms.validate()?;
        self.mechanics.validate()?;
        if !(self.geometry.ensemble_length >= 0.0 && self.geometry.ensemble_length.is_finite()) {
            return Err(Error::invalid("ensemble_length", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn derive(&self) -> Result<DerivedQuantities> {
        derive_all(&self.laser, &self.atoms, &self.mechanics, &self.conventions)
    }

    /// Copy with a different laser operating point.
    pub fn with_operating_point(&self, power_w: f64, detuning: f64, waist_w0: f64) -> Self {
        let mut out = *self;
        out.laser.power_w = power_w;
        out.laser.detuning = detuning;
        out.laser.waist_w0 = waist_w0;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedQuantities {
    /// Photon flux (1/s).
    pub alpha_sq: f64,
    /// Mode amplitude per square-root photon flux (V/m s^1/2).
    pub field_amp_e: f64,
    /// Rabi frequency of the sigma+ drive (rad/s).
    pub rabi_plus: f64,
    /// Rabi frequency of the sigma- drive (rad/s).
    pub rabi_minus: f64,
    /// Mechanical zero-point length (m).
    pub ell_m: f64,
    pub atom_number: f64,
    /// Laser wavenumber (1/m).
    pub k_l: f64,
    pub warnings: Vec<String>,
}

impl DerivedQuantities {
    pub fn alpha(&self) -> f64 {
        self.alpha_sq.sqrt()
    }
}

/// Photon flux of the running wave, 2πP/(ħω_L).
pub fn alpha_from_power(laser: &LaserParams) -> f64 {
    2.0 * PI * laser.power_w / (HBAR * laser.omega_l)
}

/// Mode amplitude sqrt(ħω_L/(π c ε0 A)) with the area taken from the waist.
pub fn field_amplitude(laser: &LaserParams, convention: AreaConvention) -> Result<f64> {
    if !(laser.waist_w0 > 0.0) {
        return Err(Error::invalid("waist_w0", format!("must be > 0, got {}", laser.waist_w0)));
    }
    let area = convention.area(laser.waist_w0);
    Ok((HBAR * laser.omega_l / (PI * C * EPSILON_0 * area)).sqrt())
}

/// Mechanical zero-point length sqrt(ħ/(2Mω_m)).
pub fn zero_point_length(mass: f64, omega: f64) -> f64 {
    (HBAR / (2.0 * mass * omega)).sqrt()
}

pub fn derive_all(
    laser: &LaserParams,
    atoms: &AtomParams,
    mech: &MechParams,
    conventions: &Conventions,
) -> Result<DerivedQuantities> {
    laser.validate()?;
    atoms.validate()?;
    mech.validate()?;
    let alpha_sq = alpha_from_power(laser);
    let field_amp_e = field_amplitude(laser, conventions.area)?;
    let drive = alpha_sq.sqrt() * field_amp_e * conventions.rabi_factor() / HBAR;
    let atom_number = atoms.area_density * PI * laser.waist_w0 * laser.waist_w0;
    let mut warnings = Vec::new();
    if atom_number == 0.0 {
        warnings.push("area_density_rhoA is zero: ensemble holds no atoms and the spin coupling vanishes".to_string());
    } else if atom_number < 1.0 {
        warnings.push(format!("atom number {atom_number:e} is below one"));
    }
    Ok(DerivedQuantities {
        alpha_sq,
        field_amp_e,
        rabi_plus: drive * atoms.dipole_mu_plus,
        rabi_minus: drive * atoms.dipole_mu_minus,
        ell_m: zero_point_length(mech.mass, mech.omega_m),
        atom_number,
        k_l: laser.omega_l / C,
        warnings,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::constants::TWO_PI;

    pub fn zipper() -> PhysicalParams {
        PhysicalParams {
            laser: LaserParams {
                power_w: 2.5e-7,
                omega_l: TWO_PI * 378e12,
                detuning: TWO_PI * 15e6,
                waist_w0: 30e-6,
            },
            atoms: AtomParams {
                dipole_mu_plus: 2.54e-29,
                dipole_mu_minus: 2.54e-29,
                gamma_spont: TWO_PI * 5.75e6,
                omega_at: TWO_PI * 10e6,
                area_density: 3e15,
                gamma_at_cool: 0.0,
            },
            mechanics: MechParams {
                variant: MechVariant::OptomechCavity { g0: TWO_PI * 1.83e6, kappa: TWO_PI * 4e9 },
                omega_m: TWO_PI * 10e6,
                mass: 4e-14,
                quality_q: 1e5,
                bath_t0: 4.0,
                heating_dt_per_w: 12e3,
            },
            geometry: Geometry::default(),
            conventions: Conventions { area: AreaConvention::PiW0Squared, rabi_halving: true },
        }
    }

    pub fn membrane() -> PhysicalParams {
        let mut p = zipper();
        p.laser.power_w = 2.5e-3;
        p.laser.detuning = TWO_PI * 1.1e9;
        p.laser.waist_w0 = 50e-6;
        p.atoms.omega_at = TWO_PI * 276e3;
        p.mechanics = MechParams {
            variant: MechVariant::MembraneInMiddle { reflectivity: 0.4, finesse: 700.0 },
            omega_m: TWO_PI * 276e3,
            mass: 4e-10,
            quality_q: 1.9e6,
            bath_t0: 4.0,
            heating_dt_per_w: 2.2e3,
        };
        p
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::zipper;
    use super::*;
    use crate::constants::TWO_PI;
    use approx::assert_relative_eq;

    // Reference values computed independently as P/(ħ f_L), with f_L in Hz, and
    // by direct evaluation of the amplitude and zero-point formulas.
    const ALPHA_SQ_TABLE: f64 = 6_271_508_973_728.447;
    const FIELD_AMP_TABLE: f64 = 1.030_666_287_322_106_3e-4;
    const ELL_M_TABLE: f64 = 4.580_397_328_848_116e-15;
    const ATOMS_TABLE: f64 = 8_482_300.164_692_443;

    #[test]
    fn alpha_matches_reference() {
        let p = zipper();
        assert_relative_eq!(alpha_from_power(&p.laser), ALPHA_SQ_TABLE, max_relative = 1e-12);
        let mut dark = p.laser;
        dark.power_w = 0.0;
        assert_eq!(alpha_from_power(&dark), 0.0);
        let mut bright = p.laser;
        bright.power_w *= 2.0;
        assert_relative_eq!(alpha_from_power(&bright), 2.0 * ALPHA_SQ_TABLE, max_relative = 1e-12);
    }

    #[test]
    fn field_amplitude_scalings() {
        let p = zipper();
        let e = field_amplitude(&p.laser, AreaConvention::PiW0Squared).unwrap();
        assert_relative_eq!(e, FIELD_AMP_TABLE, max_relative = 1e-12);
        let mut wide = p.laser;
        wide.waist_w0 *= 2.0;
        assert_relative_eq!(field_amplitude(&wide, AreaConvention::PiW0Squared).unwrap(), e / 2.0, max_relative = 1e-14);
        let mut blue = p.laser;
        blue.omega_l *= 4.0;
        assert_relative_eq!(field_amplitude(&blue, AreaConvention::PiW0Squared).unwrap(), 2.0 * e, max_relative = 1e-14);
        let half = field_amplitude(&p.laser, AreaConvention::PiW0SquaredOverTwo).unwrap();
        assert_relative_eq!(half, e * 2f64.sqrt(), max_relative = 1e-14);
        let mut bad = p.laser;
        bad.waist_w0 = 0.0;
        assert!(field_amplitude(&bad, AreaConvention::PiW0Squared).is_err());
    }

    #[test]
    fn derived_reference_values() {
        let d = zipper().derive().unwrap();
        assert_relative_eq!(d.ell_m, ELL_M_TABLE, max_relative = 1e-12);
        assert_relative_eq!(d.atom_number, ATOMS_TABLE, max_relative = 1e-12);
        // Tabulated atom number is quoted to two digits.
        assert!((d.atom_number / 8.5e6 - 1.0).abs() < 0.01);
        assert_relative_eq!(d.k_l, TWO_PI * 378e12 / C, max_relative = 1e-15);
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn rabi_halving_halves_drive() {
        let mut p = zipper();
        p.conventions.rabi_halving = false;
        let full = p.derive().unwrap();
        p.conventions.rabi_halving = true;
        let half = p.derive().unwrap();
        assert_relative_eq!(half.rabi_minus, full.rabi_minus / 2.0, max_relative = 1e-15);
        assert_eq!(half.field_amp_e, full.field_amp_e);
    }

    #[test]
    fn empty_ensemble_warns() {
        let mut p = zipper();
        p.atoms.area_density = 0.0;
        let d = p.derive().unwrap();
        assert_eq!(d.atom_number, 0.0);
        assert_eq!(d.warnings.len(), 1);
    }

    #[test]
    fn invalid_fields_are_named() {
        let mut p = zipper();
        p.mechanics.mass = -1.0;
        match p.derive() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "mass_M"),
            other => panic!("unexpected {other:?}"),
        }
        let mut p = zipper();
        p.mechanics.variant = MechVariant::MembraneInMiddle { reflectivity: 1.5, finesse: 10.0 };
        assert!(p.derive().is_err());
    }

    #[test]
    fn derive_is_deterministic() {
        let p = zipper();
        assert_eq!(p.derive().unwrap(), p.derive().unwrap());
    }
}
