//! Machine descriptions, machine balance and the tensor-core factor α.
//!
//! Bandwidth is kept in bytes/second and peaks in flops/second, SI decimal.
//! Values such as "1.94 TB/s" are converted with [`scale_decimal`] so that a
//! spec read from a config file is bit-identical to the built-in one.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Execution unit inside a streaming multiprocessor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExecutionUnit {
    CudaCore,
    TensorCore,
}

impl ExecutionUnit {
    pub const ALL: [ExecutionUnit; 2] = [ExecutionUnit::CudaCore, ExecutionUnit::TensorCore];

    /// Snake-case key used in config files and CLI flags.
    pub fn key(self) -> &'static str {
        match self {
            Self::CudaCore => "cuda_core",
            Self::TensorCore => "tensor_core",
        }
    }
}

impl fmt::Display for ExecutionUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CudaCore => f.write_str("CudaCore"),
            Self::TensorCore => f.write_str("TensorCore"),
        }
    }
}

impl FromStr for ExecutionUnit {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "cuda_core" | "cudacore" | "cuda" | "cc" => Ok(Self::CudaCore),
            "tensor_core" | "tensorcore" | "tensor" | "tc" => Ok(Self::TensorCore),
            _ => Err(format!("unknown execution unit `{s}`")),
        }
    }
}

/// Floating-point precision of the kernel's values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Precision {
    FP64,
    FP32,
    FP16,
}

impl Precision {
    pub const ALL: [Precision; 3] = [Precision::FP64, Precision::FP32, Precision::FP16];

    /// Bytes per value.
    pub fn element_bytes(self) -> u8 {
        match self {
            Self::FP64 => 8,
            Self::FP32 => 4,
            Self::FP16 => 2,
        }
    }

    /// Lower-case key used in config files (`fp64`).
    pub fn key(self) -> &'static str {
        match self {
            Self::FP64 => "fp64",
            Self::FP32 => "fp32",
            Self::FP16 => "fp16",
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::FP64 => f.write_str("FP64"),
            Self::FP32 => f.write_str("FP32"),
            Self::FP16 => f.write_str("FP16"),
        }
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> core::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fp64" | "f64" | "double" => Ok(Self::FP64),
            "fp32" | "f32" | "single" => Ok(Self::FP32),
            "fp16" | "f16" | "half" => Ok(Self::FP16),
            _ => Err(format!("unknown precision `{s}`")),
        }
    }
}

/// Multiplies `value` by `10^exp` in decimal, so `scale_decimal(1.94, 12)`
/// is exactly the literal `1.94e12` rather than `1.94 * 1e12`.
pub fn scale_decimal(value: f64, exp: i32) -> f64 {
    if !value.is_finite() || value == 0.0 {
        return value;
    }
    // Display prints the shortest round-tripping decimal, which re-parses
    // with correct rounding at the new exponent.
    format!("{value}e{exp}").parse().unwrap_or(f64::NAN)
}

/// Peak throughputs, bandwidth and cache size of one machine.
#[derive(Clone, Debug, PartialEq)]
pub struct HardwareSpec {
    name: String,
    memory_bandwidth: f64,
    l2_cache_bytes: u64,
    peaks: BTreeMap<(ExecutionUnit, Precision), f64>,
}

impl HardwareSpec {
    /// Builds a spec, checking that bandwidth and every peak are positive
    /// and that each tensor-core peak has a CUDA-core peak beside it.
    pub fn new(
        name: impl Into<String>,
        memory_bandwidth: f64,
        l2_cache_bytes: u64,
        peaks: impl IntoIterator<Item = ((ExecutionUnit, Precision), f64)>,
    ) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(Error::InvalidSpec("name must not be empty".to_string()));
        }
        if !(memory_bandwidth.is_finite() && memory_bandwidth > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "memory bandwidth must be positive, got {memory_bandwidth}"
            )));
        }
        let peaks: BTreeMap<_, _> = peaks.into_iter().collect();
        if peaks.is_empty() {
            return Err(Error::InvalidSpec(
                "at least one peak is required".to_string(),
            ));
        }
        for (&(unit, precision), &value) in &peaks {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "{precision} {unit} peak must be positive, got {value}"
                )));
            }
            if unit == ExecutionUnit::TensorCore
                && !peaks.contains_key(&(ExecutionUnit::CudaCore, precision))
            {
                return Err(Error::InvalidSpec(format!(
                    "{precision} has a TensorCore peak but no CudaCore peak"
                )));
            }
        }
        Ok(Self {
            name,
            memory_bandwidth,
            l2_cache_bytes,
            peaks,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Bytes per second.
    pub fn memory_bandwidth(&self) -> f64 {
        self.memory_bandwidth
    }

    pub fn l2_cache_bytes(&self) -> u64 {
        self.l2_cache_bytes
    }

    /// Flops per second of `unit` at `precision`.
    pub fn peak(&self, unit: ExecutionUnit, precision: Precision) -> Result<f64> {
        self.peaks
            .get(&(unit, precision))
            .copied()
            .ok_or(Error::MissingPeak { unit, precision })
    }

    pub fn peaks(&self) -> impl Iterator<Item = (ExecutionUnit, Precision, f64)> + '_ {
        self.peaks.iter().map(|(&(u, p), &v)| (u, p, v))
    }

    /// Precisions with at least one peak, in `Precision` order.
    pub fn precisions(&self) -> Vec<Precision> {
        let mut out: Vec<Precision> = self.peaks.keys().map(|&(_, p)| p).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Copy of this spec with a different bandwidth (e.g. a measured one).
    pub fn with_memory_bandwidth(&self, memory_bandwidth: f64) -> Result<Self> {
        Self::new(
            self.name.clone(),
            memory_bandwidth,
            self.l2_cache_bytes,
            self.peaks.iter().map(|(&k, &v)| (k, v)),
        )
    }
}

/// Peak flops over bandwidth, in flops per byte.
pub fn machine_balance(
    spec: &HardwareSpec,
    unit: ExecutionUnit,
    precision: Precision,
) -> Result<f64> {
    Ok(spec.peak(unit, precision)? / spec.memory_bandwidth())
}

/// α = P(TensorCore) / P(CudaCore) at one precision.
pub fn tensor_alpha(spec: &HardwareSpec, precision: Precision) -> Result<f64> {
    let tc = spec.peak(ExecutionUnit::TensorCore, precision)?;
    let cc = spec.peak(ExecutionUnit::CudaCore, precision)?;
    Ok(tc / cc)
}

/// The two evaluation platforms: A100-80GB and GH200 (FP64 peaks only).
pub fn builtin_specs() -> Vec<HardwareSpec> {
    let table = [
        ("A100-80GB", 1.94, 40, 9.7, 19.5),
        ("GH200", 4.00, 50, 34.0, 67.0),
    ];
    table
        .iter()
        .map(|&(name, tbps, l2_mb, cc_tflops, tc_tflops)| {
            HardwareSpec::new(
                name,
                scale_decimal(tbps, 12),
                l2_mb * 1_000_000,
                [
                    (
                        (ExecutionUnit::CudaCore, Precision::FP64),
                        scale_decimal(cc_tflops, 12),
                    ),
                    (
                        (ExecutionUnit::TensorCore, Precision::FP64),
                        scale_decimal(tc_tflops, 12),
                    ),
                ],
            )
            .expect("built-in spec is valid")
        })
        .collect()
}

/// Looks up a built-in spec by name, ignoring ASCII case.
pub fn builtin(name: &str) -> Option<HardwareSpec> {
    builtin_specs()
        .into_iter()
        .find(|s| s.name().eq_ignore_ascii_case(name))
}
