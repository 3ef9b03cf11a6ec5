//! Work, traffic and operational intensity for the modeled kernel families.
//!
//! Traffic is the ideal one: each input is loaded once and each output
//! stored once. Intensities are exact rationals of integer counts; convert
//! with [`Intensity::to_f64`] only when reporting.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::hardware::Precision;

/// Index width assumed for CSR column indices and row pointers.
pub const DEFAULT_INDEX_BYTES: u8 = 4;

/// Operational intensity in flops per byte, kept as a reduced fraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Intensity(Ratio<u128>);

impl Intensity {
    /// Panics if `traffic_bytes` is zero.
    pub fn new(work_flops: u128, traffic_bytes: u128) -> Self {
        Self(Ratio::new(work_flops, traffic_bytes))
    }

    pub fn numer(&self) -> u128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> u128 {
        *self.0.denom()
    }

    pub fn as_ratio(&self) -> Ratio<u128> {
        self.0
    }

    /// Correctly rounded when numerator and denominator fit in 53 bits.
    pub fn to_f64(&self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Intensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// Work and traffic of one kernel instance.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelCharacterization {
    kernel_name: String,
    work_flops: u128,
    traffic_bytes: u128,
    parameters: Vec<(String, f64)>,
}

impl KernelCharacterization {
    pub fn new(
        kernel_name: impl Into<String>,
        work_flops: u128,
        traffic_bytes: u128,
    ) -> Result<Self> {
        if traffic_bytes == 0 {
            return Err(Error::InvalidCount("traffic must be positive"));
        }
        Ok(Self {
            kernel_name: kernel_name.into(),
            work_flops,
            traffic_bytes,
            parameters: Vec::new(),
        })
    }

    /// Records a named input for reporting.
    pub fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.push((name.to_string(), value));
        self
    }

    pub fn kernel_name(&self) -> &str {
        &self.kernel_name
    }

    pub fn work_flops(&self) -> u128 {
        self.work_flops
    }

    pub fn traffic_bytes(&self) -> u128 {
        self.traffic_bytes
    }

    pub fn parameters(&self) -> &[(String, f64)] {
        &self.parameters
    }

    pub fn intensity(&self) -> Intensity {
        Intensity::new(self.work_flops, self.traffic_bytes)
    }
}

/// Shape of a sparse matrix: rows, columns, nonzeros.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SparseMatrixStats {
    rows: u64,
    cols: u64,
    nnz: u64,
}

impl SparseMatrixStats {
    pub fn new(rows: u64, cols: u64, nnz: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidStats("rows and cols must be at least 1"));
        }
        if nnz == 0 {
            return Err(Error::InvalidStats("nnz must be at least 1"));
        }
        if u128::from(nnz) > u128::from(rows) * u128::from(cols) {
            return Err(Error::InvalidStats("nnz exceeds rows * cols"));
        }
        Ok(Self { rows, cols, nnz })
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn cols(&self) -> u64 {
        self.cols
    }

    pub fn nnz(&self) -> u64 {
        self.nnz
    }
}

fn check_byte_size(b: u8) -> Result<u8> {
    match b {
        0 | 1 | 2 | 4 | 8 => Ok(b),
        _ => Err(Error::InvalidByteSize(b)),
    }
}

/// Format-specific SpMV traffic on top of the values and vectors:
/// `index_entry_count` indices of `index_entry_bytes` each, plus
/// `packed_entry_count` packed words of `packed_entry_bytes` each.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct SparseMetadataTraffic {
    index_entry_count: u64,
    index_entry_bytes: u8,
    packed_entry_count: u64,
    packed_entry_bytes: u8,
}

impl SparseMetadataTraffic {
    pub fn new(
        index_entry_count: u64,
        index_entry_bytes: u8,
        packed_entry_count: u64,
        packed_entry_bytes: u8,
    ) -> Result<Self> {
        Ok(Self {
            index_entry_count,
            index_entry_bytes: check_byte_size(index_entry_bytes)?,
            packed_entry_count,
            packed_entry_bytes: check_byte_size(packed_entry_bytes)?,
        })
    }

    /// No metadata at all.
    pub fn none() -> Self {
        Self::default()
    }

    /// CSR: `nnz` column indices plus `m + 1` row pointers.
    pub fn csr(stats: &SparseMatrixStats, index_bytes: u8) -> Result<Self> {
        check_csr_index(index_bytes)?;
        Self::new(stats.nnz + stats.rows + 1, index_bytes, 0, 0)
    }

    pub fn index_entry_count(&self) -> u64 {
        self.index_entry_count
    }

    pub fn index_entry_bytes(&self) -> u8 {
        self.index_entry_bytes
    }

    pub fn packed_entry_count(&self) -> u64 {
        self.packed_entry_count
    }

    pub fn packed_entry_bytes(&self) -> u8 {
        self.packed_entry_bytes
    }

    pub fn bytes(&self) -> u128 {
        u128::from(self.index_entry_count) * u128::from(self.index_entry_bytes)
            + u128::from(self.packed_entry_count) * u128::from(self.packed_entry_bytes)
    }
}

fn check_csr_index(index_bytes: u8) -> Result<()> {
    match index_bytes {
        2 | 4 | 8 => Ok(()),
        b => Err(Error::InvalidIndexSize(b)),
    }
}

/// Named stencil presets and their point counts.
pub const STENCIL_PRESETS: [(&str, u8, u32); 6] = [
    ("2d5pt", 2, 5),
    ("2d9pt", 2, 9),
    ("2d13pt", 2, 13),
    ("2d49pt", 2, 49),
    ("3d7pt", 3, 7),
    ("3d27pt", 3, 27),
];

/// A stencil footprint, reduced to what the intensity model needs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StencilShape {
    name: String,
    dimensionality: u8,
    point_count: u32,
}

impl StencilShape {
    pub fn new(name: impl Into<String>, dimensionality: u8, point_count: u32) -> Result<Self> {
        let name = name.into();
        if !(dimensionality == 2 || dimensionality == 3) {
            return Err(Error::InvalidCount("stencil dimensionality must be 2 or 3"));
        }
        if point_count == 0 {
            return Err(Error::InvalidCount("stencil needs at least one point"));
        }
        if let Some(&(_, d, c)) = STENCIL_PRESETS
            .iter()
            .find(|(n, _, _)| n.eq_ignore_ascii_case(&name))
        {
            if d != dimensionality || c != point_count {
                return Err(Error::InvalidCount(
                    "stencil name does not match its preset shape",
                ));
            }
        }
        Ok(Self {
            name,
            dimensionality,
            point_count,
        })
    }

    /// Looks up `2d5pt`, `3d27pt`, ... ignoring ASCII case.
    pub fn preset(name: &str) -> Result<Self> {
        STENCIL_PRESETS
            .iter()
            .find(|(n, _, _)| n.eq_ignore_ascii_case(name))
            .map(|&(n, d, c)| Self {
                name: n.to_string(),
                dimensionality: d,
                point_count: c,
            })
            .ok_or_else(|| Error::UnknownStencil(name.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimensionality(&self) -> u8 {
        self.dimensionality
    }

    pub fn point_count(&self) -> u32 {
        self.point_count
    }
}

/// STREAM SCALE, `b[i] = q * a[i]`: one flop, one load, one store per element.
pub fn scale_model(n_elements: u64, precision: Precision) -> Result<KernelCharacterization> {
    if n_elements == 0 {
        return Err(Error::InvalidCount("SCALE needs at least one element"));
    }
    let n = u128::from(n_elements);
    let d = u128::from(precision.element_bytes());
    Ok(KernelCharacterization::new("scale", n, n * 2 * d)?.with_parameter("n", n_elements as f64))
}

/// Dense `y = A x` with `A` of `m x n`.
pub fn gemv_model(m: u64, n: u64, precision: Precision) -> Result<KernelCharacterization> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidCount("GEMV dimensions must be at least 1"));
    }
    let (mm, nn) = (u128::from(m), u128::from(n));
    let d = u128::from(precision.element_bytes());
    Ok(
        KernelCharacterization::new("gemv", 2 * mm * nn, (mm * nn + mm + nn) * d)?
            .with_parameter("m", m as f64)
            .with_parameter("n", n as f64),
    )
}

/// Sparse `y = A x` with explicit format metadata traffic.
pub fn spmv_generic_model(
    stats: &SparseMatrixStats,
    meta: &SparseMetadataTraffic,
    precision: Precision,
) -> Result<KernelCharacterization> {
    let d = u128::from(precision.element_bytes());
    let nnz = u128::from(stats.nnz);
    let values = (nnz + u128::from(stats.rows) + u128::from(stats.cols)) * d;
    Ok(
        KernelCharacterization::new("spmv", 2 * nnz, values + meta.bytes())?
            .with_parameter("m", stats.rows as f64)
            .with_parameter("n", stats.cols as f64)
            .with_parameter("nnz", stats.nnz as f64)
            .with_parameter("index_entries", meta.index_entry_count as f64)
            .with_parameter("index_bytes", f64::from(meta.index_entry_bytes))
            .with_parameter("packed_entries", meta.packed_entry_count as f64)
            .with_parameter("packed_bytes", f64::from(meta.packed_entry_bytes)),
    )
}

/// SpMV over CSR: values, `x`, `y`, column indices and row pointers.
pub fn spmv_csr_model(
    stats: &SparseMatrixStats,
    index_bytes: u8,
    precision: Precision,
) -> Result<KernelCharacterization> {
    check_csr_index(index_bytes)?;
    let d = u128::from(precision.element_bytes());
    let (m, n, nnz) = (
        u128::from(stats.rows),
        u128::from(stats.cols),
        u128::from(stats.nnz),
    );
    let traffic = (nnz + m + n) * d + (nnz + m + 1) * u128::from(index_bytes);
    Ok(KernelCharacterization::new("spmv-csr", 2 * nnz, traffic)?
        .with_parameter("m", stats.rows as f64)
        .with_parameter("n", stats.cols as f64)
        .with_parameter("nnz", stats.nnz as f64)
        .with_parameter("index_bytes", f64::from(index_bytes)))
}

/// One grid point of an iterative stencil with `temporal_depth` fused steps:
/// `2|S|` flops per step, one load and one store per sweep.
pub fn stencil_model(
    shape: &StencilShape,
    precision: Precision,
    temporal_depth: u64,
) -> Result<KernelCharacterization> {
    if temporal_depth == 0 {
        return Err(Error::InvalidCount("temporal depth must be at least 1"));
    }
    let t = u128::from(temporal_depth);
    let s = u128::from(shape.point_count);
    let d = u128::from(precision.element_bytes());
    let mut name = String::from("stencil-");
    name.push_str(&shape.name);
    Ok(KernelCharacterization::new(name, t * 2 * s, 2 * d)?
        .with_parameter("points", f64::from(shape.point_count))
        .with_parameter("dimensionality", f64::from(shape.dimensionality))
        .with_parameter("t", temporal_depth as f64))
}
