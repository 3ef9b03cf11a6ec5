//! Matrix Market ingestion, reduced to the counts the SpMV models need.
//!
//! [`MatrixMarketCounter`] is fed one line at a time and keeps only a few
//! counters, so memory stays constant no matter how many entries a file
//! holds. Values are parsed for validity but never stored.
//!
//! Symmetric, skew-symmetric and hermitian files store one triangle; every
//! stored off-diagonal entry therefore stands for two nonzeros of the full
//! matrix. Explicit zeros count, since they still occupy a CSR slot.

use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use crate::bounds::{kernel_speedup_ceiling, workload_ceiling, SpeedupBound};
use crate::error::Error;
use crate::hardware::{machine_balance, tensor_alpha, ExecutionUnit, HardwareSpec, Precision};
use crate::kernels::{
    spmv_csr_model, KernelCharacterization, SparseMatrixStats, DEFAULT_INDEX_BYTES,
};
use crate::roofline::{classify, Boundedness};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum MtxError {
    #[error("bad Matrix Market banner: {0}")]
    BadBanner(String),
    #[error("unsupported Matrix Market format: {0}")]
    UnsupportedFormat(String),
    #[error("line {line}: {reason}")]
    MalformedEntry { line: u64, reason: String },
    #[error("line {line}: entry ({row}, {col}) outside declared dimensions")]
    IndexOutOfRange { line: u64, row: u64, col: u64 },
    #[error("truncated file: expected {expected} entries, found {found}")]
    TruncatedFile { expected: u64, found: u64 },
    #[error(transparent)]
    Stats(#[from] Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MtxFormat {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MtxField {
    Real,
    Integer,
    Pattern,
    Complex,
}

impl MtxField {
    /// Tokens per entry line, indices included.
    fn tokens(self) -> usize {
        match self {
            Self::Pattern => 2,
            Self::Real | Self::Integer => 3,
            Self::Complex => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MtxSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

/// The `%%MatrixMarket matrix <format> <field> <symmetry>` banner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MatrixMarketHeader {
    pub format: MtxFormat,
    pub field: MtxField,
    pub symmetry: MtxSymmetry,
}

impl MatrixMarketHeader {
    /// Tokens after the `%%MatrixMarket` keyword are case-insensitive.
    pub fn parse(line: &str) -> Result<Self, MtxError> {
        let bad = |why: &str| MtxError::BadBanner(why.to_string());
        let mut tokens = line.split_ascii_whitespace();
        if tokens.next() != Some("%%MatrixMarket") {
            return Err(bad("first line must start with %%MatrixMarket"));
        }
        let mut next = |what: &str| {
            tokens
                .next()
                .map(str::to_ascii_lowercase)
                .ok_or_else(|| MtxError::BadBanner(alloc::format!("missing {what}")))
        };
        let object = next("object")?;
        if object != "matrix" {
            return Err(MtxError::BadBanner(alloc::format!(
                "unknown object `{object}`"
            )));
        }
        let format = match next("format")?.as_str() {
            "coordinate" => MtxFormat::Coordinate,
            "array" => MtxFormat::Array,
            other => {
                return Err(MtxError::BadBanner(alloc::format!(
                    "unknown format `{other}`"
                )))
            }
        };
        let field = match next("field")?.as_str() {
            "real" | "double" => MtxField::Real,
            "integer" => MtxField::Integer,
            "pattern" => MtxField::Pattern,
            "complex" => MtxField::Complex,
            other => {
                return Err(MtxError::BadBanner(alloc::format!(
                    "unknown field `{other}`"
                )))
            }
        };
        let symmetry = match next("symmetry")?.as_str() {
            "general" => MtxSymmetry::General,
            "symmetric" => MtxSymmetry::Symmetric,
            "skew-symmetric" => MtxSymmetry::SkewSymmetric,
            "hermitian" => MtxSymmetry::Hermitian,
            other => {
                return Err(MtxError::BadBanner(alloc::format!(
                    "unknown symmetry `{other}`"
                )))
            }
        };
        if tokens.next().is_some() {
            return Err(bad("trailing tokens after symmetry"));
        }
        Ok(Self {
            format,
            field,
            symmetry,
        })
    }
}

impl fmt::Display for MatrixMarketHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let format = match self.format {
            MtxFormat::Coordinate => "coordinate",
            MtxFormat::Array => "array",
        };
        let field = match self.field {
            MtxField::Real => "real",
            MtxField::Integer => "integer",
            MtxField::Pattern => "pattern",
            MtxField::Complex => "complex",
        };
        let symmetry = match self.symmetry {
            MtxSymmetry::General => "general",
            MtxSymmetry::Symmetric => "symmetric",
            MtxSymmetry::SkewSymmetric => "skew-symmetric",
            MtxSymmetry::Hermitian => "hermitian",
        };
        write!(f, "%%MatrixMarket matrix {format} {field} {symmetry}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Banner,
    Size,
    Entries,
}

/// Line-driven counter over a coordinate Matrix Market stream.
#[derive(Clone, Debug)]
pub struct MatrixMarketCounter {
    state: State,
    header: Option<MatrixMarketHeader>,
    line: u64,
    rows: u64,
    cols: u64,
    declared: u64,
    seen: u64,
    expanded: u64,
}

impl Default for MatrixMarketCounter {
    fn default() -> Self {
        Self::new()
    }
}

impl MatrixMarketCounter {
    pub fn new() -> Self {
        Self {
            state: State::Banner,
            header: None,
            line: 0,
            rows: 0,
            cols: 0,
            declared: 0,
            seen: 0,
            expanded: 0,
        }
    }

    pub fn header(&self) -> Option<&MatrixMarketHeader> {
        self.header.as_ref()
    }

    /// Stored entries read so far.
    pub fn entries_seen(&self) -> u64 {
        self.seen
    }

    fn malformed(&self, reason: impl Into<String>) -> MtxError {
        MtxError::MalformedEntry {
            line: self.line,
            reason: reason.into(),
        }
    }

    /// Consumes one line; a trailing `\n` or `\r\n` is ignored.
    pub fn feed_line(&mut self, line: &str) -> Result<(), MtxError> {
        self.line += 1;
        let line = line.trim_end_matches(['\n', '\r']);
        if self.state == State::Banner {
            let header = MatrixMarketHeader::parse(line)?;
            if header.format == MtxFormat::Array {
                return Err(MtxError::UnsupportedFormat(
                    "dense `array` files are not supported; use `coordinate`".to_string(),
                ));
            }
            self.header = Some(header);
            self.state = State::Size;
            return Ok(());
        }
        let body = line.trim();
        if body.is_empty() || body.starts_with('%') {
            return Ok(());
        }
        match self.state {
            State::Size => self.size_line(body),
            _ => self.entry_line(body),
        }
    }

    fn size_line(&mut self, body: &str) -> Result<(), MtxError> {
        let mut it = body.split_ascii_whitespace();
        let mut dims = [0u64; 3];
        for d in dims.iter_mut() {
            *d = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| self.malformed("size line must be `rows cols entries`"))?;
        }
        if it.next().is_some() {
            return Err(self.malformed("size line must be `rows cols entries`"));
        }
        let [rows, cols, declared] = dims;
        let symmetry = self.header.map(|h| h.symmetry);
        if symmetry != Some(MtxSymmetry::General) && rows != cols {
            return Err(self.malformed("symmetric storage requires a square matrix"));
        }
        self.rows = rows;
        self.cols = cols;
        self.declared = declared;
        self.state = State::Entries;
        Ok(())
    }

    fn entry_line(&mut self, body: &str) -> Result<(), MtxError> {
        let header = self.header.expect("banner parsed before entries");
        if self.seen == self.declared {
            return Err(self.malformed("more entries than declared"));
        }
        let mut it = body.split_ascii_whitespace();
        let mut index = || -> Option<u64> { it.next()?.parse().ok() };
        let (row, col) = match (index(), index()) {
            (Some(r), Some(c)) => (r, c),
            _ => return Err(self.malformed("entry indices must be positive integers")),
        };
        let rest: usize = header.field.tokens() - 2;
        let mut values = 0usize;
        for tok in it {
            values += 1;
            if values > rest {
                break;
            }
            let ok = match header.field {
                MtxField::Integer => i128::from_str(tok).is_ok(),
                _ => f64::from_str(tok).is_ok(),
            };
            if !ok {
                return Err(self.malformed(alloc::format!("non-numeric value `{tok}`")));
            }
        }
        if values != rest {
            return Err(self.malformed(alloc::format!(
                "expected {} tokens per entry",
                header.field.tokens()
            )));
        }
        if row == 0 || col == 0 || row > self.rows || col > self.cols {
            return Err(MtxError::IndexOutOfRange {
                line: self.line,
                row,
                col,
            });
        }
        let weight = match header.symmetry {
            MtxSymmetry::General => 1,
            MtxSymmetry::SkewSymmetric if row == col => {
                return Err(self.malformed("skew-symmetric matrices have a zero diagonal"));
            }
            _ if row == col => 1,
            _ => 2,
        };
        self.seen += 1;
        self.expanded = self
            .expanded
            .checked_add(weight)
            .ok_or_else(|| self.malformed("nonzero count overflows"))?;
        Ok(())
    }

    /// Checks the entry count and returns the full-matrix stats.
    pub fn finish(self) -> Result<SparseMatrixStats, MtxError> {
        match self.state {
            State::Banner => return Err(MtxError::BadBanner("empty input".to_string())),
            State::Size => {
                return Err(MtxError::TruncatedFile {
                    expected: 0,
                    found: 0,
                })
            }
            State::Entries => {}
        }
        if self.seen < self.declared {
            return Err(MtxError::TruncatedFile {
                expected: self.declared,
                found: self.seen,
            });
        }
        Ok(SparseMatrixStats::new(self.rows, self.cols, self.expanded)?)
    }
}

/// Counts an in-memory Matrix Market document.
pub fn parse_stats_str(text: &str) -> Result<SparseMatrixStats, MtxError> {
    let mut counter = MatrixMarketCounter::new();
    for line in text.lines() {
        counter.feed_line(line)?;
    }
    counter.finish()
}

/// Per-matrix CSR analysis against one machine.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixAnalysis {
    pub stats: SparseMatrixStats,
    pub kernel: KernelCharacterization,
    pub intensity: f64,
    /// CUDA-core balance at the analysed precision.
    pub balance: f64,
    pub boundedness: Boundedness,
    pub alpha: f64,
    pub kernel_ceiling: SpeedupBound,
    pub workload_ceiling: SpeedupBound,
    /// Total CSR traffic: values, vectors, indices and row pointers.
    pub csr_bytes: u128,
    pub fits_in_l2: bool,
}

/// CSR analysis with 32-bit indices.
pub fn stats_to_report(
    stats: &SparseMatrixStats,
    spec: &HardwareSpec,
    precision: Precision,
) -> Result<MatrixAnalysis, Error> {
    stats_to_report_with_index(stats, spec, precision, DEFAULT_INDEX_BYTES)
}

pub fn stats_to_report_with_index(
    stats: &SparseMatrixStats,
    spec: &HardwareSpec,
    precision: Precision,
    index_bytes: u8,
) -> Result<MatrixAnalysis, Error> {
    let kernel = spmv_csr_model(stats, index_bytes, precision)?;
    let intensity = kernel.intensity().to_f64();
    let balance = machine_balance(spec, ExecutionUnit::CudaCore, precision)?;
    let alpha = tensor_alpha(spec, precision)?;
    let csr_bytes = kernel.traffic_bytes();
    Ok(MatrixAnalysis {
        stats: *stats,
        intensity,
        balance,
        boundedness: classify(intensity, balance),
        alpha,
        kernel_ceiling: kernel_speedup_ceiling(alpha, balance, intensity)?,
        workload_ceiling: workload_ceiling(intensity, balance)?,
        csr_bytes,
        fits_in_l2: csr_bytes <= u128::from(spec.l2_cache_bytes()),
        kernel,
    })
}
