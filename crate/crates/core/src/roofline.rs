//! Attainable performance, boundedness and roofline curve sampling.
//!
//! Tensor cores appear as a second flat ceiling over the same bandwidth arm.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{Error, Result};
use crate::hardware::{machine_balance, ExecutionUnit, HardwareSpec, Precision};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundedness {
    MemoryBound,
    ComputeBound,
    /// Intensity equals balance exactly.
    Balanced,
}

impl fmt::Display for Boundedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MemoryBound => f.write_str("MemoryBound"),
            Self::ComputeBound => f.write_str("ComputeBound"),
            Self::Balanced => f.write_str("Balanced"),
        }
    }
}

/// One sample of a roofline ceiling.
#[derive(Clone, Debug, PartialEq)]
pub struct RooflinePoint {
    pub intensity: f64,
    pub attainable: f64,
    pub ceiling_name: String,
}

/// Display name of a ceiling, e.g. `FP64 TensorCore`.
pub fn ceiling_name(unit: ExecutionUnit, precision: Precision) -> String {
    format!("{precision} {unit}")
}

/// `min(peak, bandwidth * intensity)`, returning the peak exactly at and
/// above the ridge point.
pub fn attainable(
    spec: &HardwareSpec,
    unit: ExecutionUnit,
    precision: Precision,
    intensity: f64,
) -> Result<f64> {
    let peak = spec.peak(unit, precision)?;
    if intensity.is_nan() || intensity < 0.0 {
        return Err(Error::InvalidRange("intensity must be non-negative"));
    }
    let bw = spec.memory_bandwidth();
    if intensity >= peak / bw {
        Ok(peak)
    } else {
        Ok((bw * intensity).min(peak))
    }
}

/// Strict comparison of intensity against balance.
pub fn classify(intensity: f64, balance: f64) -> Boundedness {
    match intensity.partial_cmp(&balance) {
        Some(Ordering::Less) => Boundedness::MemoryBound,
        Some(Ordering::Greater) => Boundedness::ComputeBound,
        _ => Boundedness::Balanced,
    }
}

/// Intensity where the bandwidth arm meets the flat ceiling.
pub fn ridge_point(spec: &HardwareSpec, unit: ExecutionUnit, precision: Precision) -> Result<f64> {
    machine_balance(spec, unit, precision)
}

/// `n_points` log-spaced samples over `[i_min, i_max]`, plus the ridge
/// point when it falls strictly inside the range.
pub fn sample_curve(
    spec: &HardwareSpec,
    unit: ExecutionUnit,
    precision: Precision,
    i_min: f64,
    i_max: f64,
    n_points: usize,
) -> Result<Vec<RooflinePoint>> {
    if !(i_min > 0.0 && i_min.is_finite() && i_max.is_finite()) {
        return Err(Error::InvalidRange("bounds must be positive and finite"));
    }
    if i_min >= i_max {
        return Err(Error::InvalidRange("i_min must be below i_max"));
    }
    if n_points < 2 {
        return Err(Error::InvalidRange("at least two points are required"));
    }
    let ridge = ridge_point(spec, unit, precision)?;
    let (lo, hi) = (libm::log(i_min), libm::log(i_max));
    let last = (n_points - 1) as f64;
    let mut xs: Vec<f64> = (0..n_points)
        .map(|k| match k {
            0 => i_min,
            k if k == n_points - 1 => i_max,
            k => libm::exp(lo + (hi - lo) * (k as f64) / last),
        })
        .collect();
    if ridge > i_min && ridge < i_max && !xs.contains(&ridge) {
        let at = xs.partition_point(|&x| x < ridge);
        xs.insert(at, ridge);
    }
    let name = ceiling_name(unit, precision);
    xs.into_iter()
        .map(|x| {
            Ok(RooflinePoint {
                intensity: x,
                attainable: attainable(spec, unit, precision, x)?,
                ceiling_name: name.clone(),
            })
        })
        .collect()
}
