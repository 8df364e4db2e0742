//! CODATA 2018 constants in SI units. Every other module reads them from here.

use std::f64::consts::PI;

/// Reduced Planck constant (J s), exact.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K), exact.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum (m/s), exact.
pub const C: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Atomic mass of 87Rb (kg).
pub const RB87_MASS: f64 = 1.443_160_648e-25;

pub const TWO_PI: f64 = 2.0 * PI;

/// Converts an ordinary frequency in Hz to an angular frequency in rad/s.
pub fn hz_to_rad(hz: f64) -> f64 {
    TWO_PI * hz
}

/// Converts an angular frequency in rad/s to an ordinary frequency in Hz.
pub fn rad_to_hz(rad: f64) -> f64 {
    rad / TWO_PI
}
