//! Run manifests, frequency units and atomic artifact writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::params::Conventions;

/// Version of every JSON and CSV layout written by the tool.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrequencyUnit {
    /// Angular frequency divided by 2π, keys ending in `_2pi_hz`.
    Hz,
    /// Angular frequency, keys ending in `_rad_s`.
    Radians,
}

impl FrequencyUnit {
    pub fn from_flag(radians: bool) -> Self {
        if radians {
            FrequencyUnit::Radians
        } else {
            FrequencyUnit::Hz
        }
    }

    pub fn convert(self, angular: f64) -> f64 {
        match self {
            FrequencyUnit::Hz => angular / TWO_PI,
            FrequencyUnit::Radians => angular,
        }
    }

    pub fn key(self, name: &str) -> String {
        match self {
            FrequencyUnit::Hz => format!("{name}_2pi_hz"),
            FrequencyUnit::Radians => format!("{name}_rad_s"),
        }
    }

    /// CSV column name.
    pub fn column(self, name: &str) -> String {
        match self {
            FrequencyUnit::Hz => format!("{name}_Hz"),
            FrequencyUnit::Radians => format!("{name}_rad_s"),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FrequencyUnit::Hz => "2pi_hz",
            FrequencyUnit::Radians => "rad_s",
        }
    }
}

/// Builds a JSON object with frequency entries converted and renamed.
#[derive(Debug, Default)]
pub struct JsonObject {
    map: Map<String, Value>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn freq(mut self, unit: FrequencyUnit, name: &str, angular: f64) -> Self {
        self.map.insert(unit.key(name), Value::from(unit.convert(angular)));
        self
    }

    pub fn value(mut self, name: &str, v: impl Into<Value>) -> Self {
        self.map.insert(name.to_string(), v.into());
        self
    }

    pub fn serialized<T: Serialize>(mut self, name: &str, v: &T) -> Result<Self> {
        let v = serde_json::to_value(v).map_err(|e| Error::Config(e.to_string()))?;
        self.map.insert(name.to_string(), v);
        Ok(self)
    }

    pub fn build(self) -> Value {
        Value::Object(self.map)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub subcommand: String,
    pub arguments: Vec<String>,
    pub config_path: Option<String>,
    pub config_sha256: Option<String>,
    pub conventions: Option<Conventions>,
    pub frequency_unit: &'static str,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, arguments: Vec<String>, unit: FrequencyUnit) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand: subcommand.to_string(),
            arguments,
            config_path: None,
            config_sha256: None,
            conventions: None,
            frequency_unit: unit.label(),
            timestamp,
        }
    }

    pub fn with_config(mut self, path: &Path, bytes: &[u8], conventions: Conventions) -> Self {
        self.config_path = Some(path.display().to_string());
        self.config_sha256 = Some(sha256_hex(bytes));
        self.conventions = Some(conventions);
        self
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Wraps a payload with the schema version and manifest.
pub fn document(manifest: &RunManifest, payload: Value) -> Result<Value> {
    let mut map = Map::new();
    map.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
    map.insert("manifest".into(), serde_json::to_value(manifest).map_err(|e| Error::Config(e.to_string()))?);
    match payload {
        Value::Object(inner) => map.extend(inner),
        other => {
            map.insert("result".into(), other);
        }
    }
    Ok(Value::Object(map))
}

pub fn to_json_text(v: &Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Files produced by one run, written together once every result is known.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes each file through a temporary file in `dir` and renames it into place.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let target = dir.join(name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
            tmp.write_all(contents).map_err(|e| Error::io(&target, e))?;
            tmp.persist(&target).map_err(|e| Error::io(&target, e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}

/// Serializes rows to CSV text with the given header.
pub fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Config(e.to_string()))?;
    for row in rows {
        w.write_record(row).map_err(|e| Error::Config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
}
