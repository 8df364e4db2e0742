//! Parsing of frequency values written in config files.
//!
//! A bare number is an angular frequency in rad/s. Strings may carry a unit
//! and an explicit `2π` prefix: `"2π·10 MHz"`, `"2pi*378 THz"`, `"5.75e6 Hz"`
//! (an ordinary frequency, converted to rad/s) or `"6.3e7 rad/s"`.

use serde::{Deserialize, Deserializer};

use crate::constants::TWO_PI;
use crate::error::{Error, Result};

const HZ_UNITS: [(&str, f64); 5] =
    [("thz", 1e12), ("ghz", 1e9), ("mhz", 1e6), ("khz", 1e3), ("hz", 1.0)];

/// Parses a frequency string to rad/s.
pub fn parse_angular(text: &str) -> Result<f64> {
    let bad = |why: &str| Error::Config(format!("cannot parse frequency {text:?}: {why}"));
    let lower = text.trim().to_lowercase();
    let mut rest = lower.as_str();
    let mut two_pi = false;
    for prefix in ["2π", "2*pi", "2pi"] {
        if let Some(stripped) = rest.strip_prefix(prefix) {
            two_pi = true;
            rest = stripped.trim_start_matches(|c: char| c == '·' || c == '*' || c == '×' || c.is_whitespace());
            break;
        }
    }
    let split = rest
        .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | 'e' | '+' | '-')))
        .unwrap_or(rest.len());
    let (number, unit) = rest.split_at(split);
    let value: f64 = number.trim().parse().map_err(|_| bad("missing number"))?;
    let unit = unit.trim();
    if unit.is_empty() || unit == "rad/s" {
        if two_pi && unit == "rad/s" {
            return Err(bad("2π prefix cannot be combined with rad/s"));
        }
        return Ok(if two_pi { TWO_PI * value } else { value });
    }
    let scale = HZ_UNITS
        .iter()
        .find(|(name, _)| *name == unit)
        .map(|(_, s)| *s)
        .ok_or_else(|| bad("unknown unit"))?;
    Ok(TWO_PI * value * scale)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawFrequency {
    Number(f64),
    Text(String),
}

/// Serde adapter for angular-frequency fields.
pub fn angular<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    match RawFrequency::deserialize(de)? {
        RawFrequency::Number(v) => Ok(v),
        RawFrequency::Text(s) => parse_angular(&s).map_err(serde::de::Error::custom),
    }
}
