//! TOML configuration files.
//!
//! Sections `[laser]`, `[atoms]`, `[mechanics]`, `[geometry]` and
//! `[conventions]` map onto [`PhysicalParams`]; an optional `[search]` section
//! configures the operating-point search. Frequencies accept the forms handled
//! by [`crate::units::parse_angular`].

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::optimizer::{Bounds, ConstraintSet, Objective, SearchSpec};
use crate::params::{
    AtomParams, Conventions, Geometry, LaserParams, MechParams, MechVariant, PhysicalParams,
};
use crate::units::angular;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    laser: RawLaser,
    atoms: RawAtoms,
    mechanics: RawMechanics,
    #[serde(default)]
    geometry: RawGeometry,
    #[serde(default)]
    conventions: Conventions,
    search: Option<RawSearch>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLaser {
    #[serde(rename = "power_W")]
    power_w: f64,
    #[serde(rename = "omega_L", deserialize_with = "angular")]
    omega_l: f64,
    #[serde(rename = "detuning_Delta", deserialize_with = "angular")]
    detuning: f64,
    waist_w0: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtoms {
    dipole_mu_plus: f64,
    dipole_mu_minus: f64,
    #[serde(deserialize_with = "angular")]
    gamma_spont: f64,
    #[serde(deserialize_with = "angular")]
    omega_at: f64,
    #[serde(rename = "area_density_rhoA")]
    area_density: f64,
    #[serde(default)]
    gamma_at_cool: f64,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariantName {
    IdealMirror,
    OptomechCavity,
    MembraneInMiddle,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMechanics {
    variant: VariantName,
    #[serde(deserialize_with = "angular")]
    omega_m: f64,
    #[serde(rename = "mass_M")]
    mass: f64,
    #[serde(rename = "quality_Q")]
    quality_q: f64,
    #[serde(rename = "bath_T0")]
    bath_t0: f64,
    #[serde(rename = "heating_dT_per_W", default)]
    heating_dt_per_w: f64,
    #[serde(default, deserialize_with = "optional_angular")]
    g0: Option<f64>,
    #[serde(default, deserialize_with = "optional_angular")]
    kappa: Option<f64>,
    reflectivity_r: Option<f64>,
    #[serde(rename = "finesse_F")]
    finesse: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    ensemble_length: f64,
}

impl Default for RawGeometry {
    fn default() -> Self {
        RawGeometry { ensemble_length: Geometry::default().ensemble_length }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    #[serde(rename = "power_W")]
    power_w: [f64; 2],
    #[serde(rename = "detuning_Delta")]
    detuning: [RawFrequency; 2],
    waist_w0: [f64; 2],
    #[serde(default)]
    objective: Objective,
    adiabatic_margin: Option<f64>,
    saturation_cap: Option<f64>,
    rwa_margin: Option<f64>,
    grid_points: Option<usize>,
    waist_tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(transparent)]
struct RawFrequency(#[serde(deserialize_with = "angular")] f64);

fn optional_angular<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Option<f64>, D::Error> {
    angular(de).map(Some)
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub params: PhysicalParams,
    pub search: Option<SearchSpec>,
}

fn require(value: Option<f64>, field: &str, variant: &str) -> Result<f64> {
    value.ok_or_else(|| Error::Config(format!("[mechanics] variant {variant} needs `{field}`")))
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Config> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let m = raw.mechanics;
        let variant = match m.variant {
            VariantName::IdealMirror => MechVariant::IdealMirror,
            VariantName::OptomechCavity => MechVariant::OptomechCavity {
                g0: require(m.g0, "g0", "optomech_cavity")?,
                kappa: require(m.kappa, "kappa", "optomech_cavity")?,
            },
            VariantName::MembraneInMiddle => MechVariant::MembraneInMiddle {
                reflectivity: require(m.reflectivity_r, "reflectivity_r", "membrane_in_middle")?,
                finesse: require(m.finesse, "finesse_F", "membrane_in_middle")?,
            },
        };
        let params = PhysicalParams {
            laser: LaserParams {
                power_w: raw.laser.power_w,
                omega_l: raw.laser.omega_l,
                detuning: raw.laser.detuning,
                waist_w0: raw.laser.waist_w0,
            },
            atoms: AtomParams {
                dipole_mu_plus: raw.atoms.dipole_mu_plus,
                dipole_mu_minus: raw.atoms.dipole_mu_minus,
                gamma_spont: raw.atoms.gamma_spont,
                omega_at: raw.atoms.omega_at,
                area_density: raw.atoms.area_density,
                gamma_at_cool: raw.atoms.gamma_at_cool,
            },
            mechanics: MechParams {
                variant,
                omega_m: m.omega_m,
                mass: m.mass,
                quality_q: m.quality_q,
                bath_t0: m.bath_t0,
                heating_dt_per_w: m.heating_dt_per_w,
            },
            geometry: Geometry { ensemble_length: raw.geometry.ensemble_length },
            conventions: raw.conventions,
        };
        params.validate()?;
        let search = match raw.search {
            None => None,
            Some(s) => {
                let defaults = ConstraintSet::default();
                let constraints = ConstraintSet {
                    adiabatic_margin: s.adiabatic_margin.unwrap_or(defaults.adiabatic_margin),
                    saturation_cap: s.saturation_cap.unwrap_or(defaults.saturation_cap),
                    rwa_margin: s.rwa_margin.unwrap_or(defaults.rwa_margin),
                    ensemble_length: params.geometry.ensemble_length,
                };
                let mut spec = SearchSpec::new(
                    Bounds::new(s.power_w[0], s.power_w[1])?,
                    Bounds::new(s.detuning[0].0, s.detuning[1].0)?,
                    Bounds::new(s.waist_w0[0], s.waist_w0[1])?,
                    s.objective,
                    constraints,
                )?;
                if let Some(n) = s.grid_points {
                    spec.grid_points = n;
                }
                if let Some(t) = s.waist_tolerance {
                    spec.waist_tolerance = t;
                }
                Some(spec)
            }
        };
        Ok(Config { params, search })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Config::from_toml_str(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::TWO_PI;
    use crate::params::fixtures;

    const ZIPPER: &str = include_str!("../../../configs/zipper.toml");
    const MEMBRANE: &str = include_str!("../../../configs/membrane.toml");

    #[test]
    fn shipped_zipper_config_matches_fixture() {
        let cfg = Config::from_toml_str(ZIPPER).unwrap();
        let fixture = fixtures::zipper();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1e-300);
        assert!(close(cfg.params.laser.omega_l, fixture.laser.omega_l));
        assert!(close(cfg.params.laser.detuning, fixture.laser.detuning));
        assert!(close(cfg.params.mechanics.omega_m, fixture.mechanics.omega_m));
        assert_eq!(cfg.params.conventions, fixture.conventions);
        assert!(cfg.search.is_some());
    }

    #[test]
    fn shipped_membrane_config_parses() {
        let cfg = Config::from_toml_str(MEMBRANE).unwrap();
        assert!(matches!(cfg.params.mechanics.variant, MechVariant::MembraneInMiddle { .. }));
        assert!((cfg.params.mechanics.omega_m - TWO_PI * 276e3).abs() < 1e-6);
    }

    #[test]
    fn missing_payload_is_reported() {
        let text = ZIPPER.replace("g0 =", "#g0 =");
        let err = Config::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("g0"), "{err}");
    }

    #[test]
    fn unknown_field_is_rejected() {
        let text = ZIPPER.replace("[geometry]", "[geometry]\nbogus = 1");
        assert!(Config::from_toml_str(&text).is_err());
    }
}
