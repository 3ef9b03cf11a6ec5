//! TOML hardware descriptions.
//!
//! ```toml
//! name = "A100-80GB"
//! memory_bandwidth_tbps = 1.94
//! l2_cache_mb = 40
//!
//! [peaks]
//! fp64.cuda_core_tflops = 9.7
//! fp64.tensor_core_tflops = 19.5
//! ```
//!
//! Units are decimal (TB/s, TFLOPS, MB) and converted to bytes/s, flops/s
//! and bytes on load. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rooflens_core::hardware::scale_decimal;
use rooflens_core::{ExecutionUnit, HardwareSpec, Precision};
use serde::Deserialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse hardware spec: {0}")]
    Parse(String),
    #[error("invalid hardware spec: {0}")]
    Validation(String),
    #[error("hardware spec is missing `{0}`")]
    MissingField(&'static str),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    name: Option<String>,
    memory_bandwidth_tbps: Option<Number>,
    l2_cache_mb: Option<Number>,
    peaks: Option<BTreeMap<String, RawPeaks>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPeaks {
    cuda_core_tflops: Option<Number>,
    tensor_core_tflops: Option<Number>,
}

/// TOML distinguishes `40` from `40.0`; both are accepted.
#[derive(Deserialize, Clone, Copy)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    fn get(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }
}

/// Parses and validates one hardware description.
pub fn load_spec(text: &str) -> Result<HardwareSpec, ConfigError> {
    let raw: RawSpec =
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))?;
    let name = raw.name.ok_or(ConfigError::MissingField("name"))?;
    let tbps = raw
        .memory_bandwidth_tbps
        .ok_or(ConfigError::MissingField("memory_bandwidth_tbps"))?
        .get();
    let l2_mb = raw
        .l2_cache_mb
        .ok_or(ConfigError::MissingField("l2_cache_mb"))?
        .get();
    let raw_peaks = raw.peaks.ok_or(ConfigError::MissingField("peaks"))?;

    if !(l2_mb.is_finite() && l2_mb >= 0.0) {
        return Err(ConfigError::Validation(format!(
            "l2_cache_mb must be non-negative, got {l2_mb}"
        )));
    }
    let l2_bytes = scale_decimal(l2_mb, 6);
    if l2_bytes.fract() != 0.0 || l2_bytes > u64::MAX as f64 {
        return Err(ConfigError::Validation(format!(
            "l2_cache_mb = {l2_mb} is not a whole number of bytes"
        )));
    }

    let mut peaks = Vec::new();
    for (key, entry) in raw_peaks {
        let precision: Precision = key.parse().map_err(ConfigError::Parse)?;
        let units = [
            (ExecutionUnit::CudaCore, entry.cuda_core_tflops),
            (ExecutionUnit::TensorCore, entry.tensor_core_tflops),
        ];
        for (unit, value) in units {
            if let Some(v) = value {
                peaks.push(((unit, precision), scale_decimal(v.get(), 12)));
            }
        }
    }
    HardwareSpec::new(name, scale_decimal(tbps, 12), l2_bytes as u64, peaks)
        .map_err(|e| ConfigError::Validation(e.to_string()))
}

pub fn load_spec_file(path: &Path) -> Result<HardwareSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_spec(&text)
}

fn toml_string(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Writes `spec` in the schema [`load_spec`] reads.
pub fn serialize_spec(spec: &HardwareSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}", toml_string(spec.name()));
    let _ = writeln!(
        out,
        "memory_bandwidth_tbps = {:?}",
        scale_decimal(spec.memory_bandwidth(), -12)
    );
    let _ = writeln!(
        out,
        "l2_cache_mb = {:?}",
        scale_decimal(spec.l2_cache_bytes() as f64, -6)
    );
    out.push_str("\n[peaks]\n");
    for (unit, precision, value) in spec.peaks() {
        let _ = writeln!(
            out,
            "{}.{}_tflops = {:?}",
            precision.key(),
            unit.key(),
            scale_decimal(value, -12)
        );
    }
    out
}
