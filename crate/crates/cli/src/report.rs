//! Analysis records and their text, JSON and CSV encodings.
//!
//! JSON and CSV carry full precision (shortest round-tripping decimals);
//! text mode shows four significant digits of the same numbers.

use std::fmt::Write as _;

use rooflens_core::bounds::{
    ceilings, mem_cmp_ratio, min_temporal_depth, tc_scale_trick_throughput, BoundKind,
};
use rooflens_core::hardware::{machine_balance, tensor_alpha};
use rooflens_core::kernels::{gemv_model, scale_model, spmv_csr_model, stencil_model};
use rooflens_core::matrix::MatrixAnalysis;
use rooflens_core::roofline::{attainable, classify};
use rooflens_core::{
    Boundedness, Error, ExecutionUnit, HardwareSpec, KernelCharacterization, Precision,
    SparseMatrixStats, StencilShape,
};
use serde::Serialize;
use serde_json::Value;

use crate::fmt::{csv_field, num, sig};

/// FP64 tensor-core MMA tile on A100/H100-class parts.
pub const FP64_MMA_TILE: (u32, u32) = (8, 4);

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Text,
    Json,
    Csv,
}

/// A kernel instance to characterize.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelRequest {
    Scale {
        n: u64,
    },
    Gemv {
        m: u64,
        n: u64,
    },
    SpmvCsr {
        stats: SparseMatrixStats,
        index_bytes: u8,
    },
    Stencil {
        shape: StencilShape,
        temporal_depth: u64,
    },
}

impl KernelRequest {
    pub fn characterize(&self, precision: Precision) -> Result<KernelCharacterization, Error> {
        match self {
            Self::Scale { n } => scale_model(*n, precision),
            Self::Gemv { m, n } => gemv_model(*m, *n, precision),
            Self::SpmvCsr { stats, index_bytes } => spmv_csr_model(stats, *index_bytes, precision),
            Self::Stencil {
                shape,
                temporal_depth,
            } => stencil_model(shape, precision, *temporal_depth),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MachineSummary {
    pub name: String,
    pub memory_bandwidth: f64,
    pub l2_cache_bytes: u64,
    pub peak_cuda_core: f64,
    pub peak_tensor_core: Option<f64>,
    pub balance_cuda_core: f64,
    pub balance_tensor_core: Option<f64>,
    pub alpha: Option<f64>,
}

impl MachineSummary {
    pub fn new(spec: &HardwareSpec, precision: Precision) -> Result<Self, Error> {
        let tc = spec.peak(ExecutionUnit::TensorCore, precision).ok();
        Ok(Self {
            name: spec.name().to_string(),
            memory_bandwidth: spec.memory_bandwidth(),
            l2_cache_bytes: spec.l2_cache_bytes(),
            peak_cuda_core: spec.peak(ExecutionUnit::CudaCore, precision)?,
            peak_tensor_core: tc,
            balance_cuda_core: machine_balance(spec, ExecutionUnit::CudaCore, precision)?,
            balance_tensor_core: machine_balance(spec, ExecutionUnit::TensorCore, precision).ok(),
            alpha: tensor_alpha(spec, precision).ok(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Param {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelSummary {
    pub name: String,
    pub parameters: Vec<Param>,
    pub work_flops: u64,
    pub traffic_bytes: u64,
    pub intensity: f64,
    pub intensity_exact: String,
    pub attainable_cuda_core: f64,
    pub attainable_tensor_core: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSummary {
    pub kind: String,
    pub value: f64,
    pub alpha: Option<f64>,
    pub applicable: bool,
    pub assumptions: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub machine: MachineSummary,
    pub precision: String,
    pub kernel: KernelSummary,
    pub balance: f64,
    pub balance_overridden: bool,
    pub boundedness: String,
    pub mem_cmp_ratio: f64,
    pub bounds: Vec<BoundSummary>,
    pub min_temporal_depth: Option<u64>,
    pub scale_trick_throughput: Option<f64>,
    pub caveats: Vec<String>,
    pub verdict_ceiling: Option<f64>,
    pub verdict: String,
}

fn to_u64(x: u128, what: &'static str) -> Result<u64, Error> {
    u64::try_from(x).map_err(|_| Error::InvalidCount(what))
}

/// Runs the full per-kernel analysis. `balance_override` replaces the
/// CUDA-core balance used for classification, ceilings and temporal depth;
/// the machine summary keeps the spec's own values.
pub fn analyze(
    spec: &HardwareSpec,
    request: &KernelRequest,
    precision: Precision,
    balance_override: Option<f64>,
) -> Result<AnalysisReport, Error> {
    let machine = MachineSummary::new(spec, precision)?;
    let kernel = request.characterize(precision)?;
    let intensity = kernel.intensity().to_f64();

    let balance = match balance_override {
        Some(b) if !(b.is_finite() && b > 0.0) => return Err(Error::ZeroBalance),
        Some(b) => b,
        None => machine.balance_cuda_core,
    };
    let boundedness = classify(intensity, balance);

    let bounds: Vec<BoundSummary> = match (machine.alpha, intensity > 0.0) {
        (Some(alpha), true) => ceilings(alpha, balance, intensity)?
            .into_iter()
            .map(|b| BoundSummary {
                kind: b.kind.to_string(),
                value: b.value,
                alpha: match b.kind {
                    BoundKind::WorkloadCeiling => None,
                    _ if b.assumptions.iter().any(|a| a == "nominal alpha = 2") => Some(2.0),
                    _ => Some(alpha),
                },
                applicable: !b.premise_violated,
                assumptions: b.assumptions,
            })
            .collect(),
        _ => Vec::new(),
    };

    // Counted from the single-step intensity, whatever depth was asked for.
    let min_depth = match request {
        KernelRequest::Stencil { shape, .. } => {
            let one = stencil_model(shape, precision, 1)?.intensity().to_f64();
            Some(min_temporal_depth(balance, one)?)
        }
        _ => None,
    };

    let scale_trick = match (request, machine.peak_tensor_core, precision) {
        (KernelRequest::Scale { .. }, Some(peak), Precision::FP64) => Some(
            tc_scale_trick_throughput(peak, FP64_MMA_TILE.0, FP64_MMA_TILE.1)?,
        ),
        _ => None,
    };

    let mut caveats = vec![
        "fully overlapped memory-bound kernels gain nothing from faster compute (speedup 1)"
            .to_string(),
        "partially overlapped kernels fall between 1 and the ceilings".to_string(),
    ];
    if matches!(request, KernelRequest::Stencil { .. }) {
        caveats.push(
            "deep temporal blocking (t > 16) usually hits register-pressure limits not modeled here"
                .to_string(),
        );
    }
    if machine.alpha.is_none() {
        caveats.push(format!(
            "no {precision} tensor-core peak: speedup ceilings unavailable"
        ));
    }

    let applicable: Vec<f64> = bounds
        .iter()
        .filter(|b| b.applicable)
        .map(|b| b.value)
        .collect();
    let verdict_ceiling = applicable.iter().copied().reduce(f64::min);
    let verdict = match (verdict_ceiling, boundedness) {
        (Some(x), _) => format!(
            "tensor cores cannot exceed {}× on this kernel/machine",
            sig(x, 3)
        ),
        (None, _) if machine.alpha.is_none() => {
            format!("no {precision} tensor cores on this machine")
        }
        (None, Boundedness::MemoryBound) => "no applicable speedup ceiling".to_string(),
        (None, _) => format!(
            "kernel is not memory-bound here; speedup is limited only by the peak ratio α = {}",
            sig(machine.alpha.unwrap_or(1.0), 3)
        ),
    };

    Ok(AnalysisReport {
        kernel: KernelSummary {
            name: kernel.kernel_name().to_string(),
            parameters: kernel
                .parameters()
                .iter()
                .map(|(n, v)| Param {
                    name: n.clone(),
                    value: *v,
                })
                .collect(),
            work_flops: to_u64(kernel.work_flops(), "work exceeds 64 bits")?,
            traffic_bytes: to_u64(kernel.traffic_bytes(), "traffic exceeds 64 bits")?,
            intensity,
            intensity_exact: kernel.intensity().to_string(),
            attainable_cuda_core: attainable(spec, ExecutionUnit::CudaCore, precision, intensity)?,
            attainable_tensor_core: attainable(
                spec,
                ExecutionUnit::TensorCore,
                precision,
                intensity,
            )
            .ok(),
        },
        machine,
        precision: precision.to_string(),
        balance,
        balance_overridden: balance_override.is_some(),
        boundedness: boundedness.to_string(),
        mem_cmp_ratio: if intensity > 0.0 {
            mem_cmp_ratio(balance, intensity)?
        } else {
            f64::MAX
        },
        bounds,
        min_temporal_depth: min_depth,
        scale_trick_throughput: scale_trick,
        caveats,
        verdict_ceiling,
        verdict,
    })
}

impl AnalysisReport {
    /// Re-derives the verdict ceiling from the bounds list.
    pub fn check_invariants(&self) -> Result<(), String> {
        let expected = self
            .bounds
            .iter()
            .filter(|b| b.applicable)
            .map(|b| b.value)
            .reduce(f64::min);
        if expected != self.verdict_ceiling {
            return Err(format!(
                "verdict ceiling {:?} differs from minimum applicable bound {:?}",
                self.verdict_ceiling, expected
            ));
        }
        if let Some(x) = expected {
            if !self.verdict.contains(&format!("{}×", sig(x, 3))) {
                return Err("verdict text does not match its ceiling".to_string());
            }
        }
        if self
            .bounds
            .iter()
            .any(|b| b.value.is_nan() || b.value < 1.0)
        {
            return Err("speedup bound below 1".to_string());
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Two-column `field,value` CSV with dotted field paths.
    pub fn to_csv(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut rows = Vec::new();
        flatten("", &value, &mut rows);
        let mut out = String::from("field,value\n");
        for (k, v) in rows {
            let _ = writeln!(out, "{},{}", csv_field(&k), csv_field(&v));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let m = &self.machine;
        let k = &self.kernel;
        let mut out = String::new();
        let _ = writeln!(out, "machine            {}", m.name);
        let _ = writeln!(out, "  bandwidth        {} B/s", num(m.memory_bandwidth));
        let _ = writeln!(out, "  l2 cache         {} B", m.l2_cache_bytes);
        let _ = writeln!(
            out,
            "  {} CudaCore    {} flop/s",
            self.precision,
            num(m.peak_cuda_core)
        );
        if let Some(p) = m.peak_tensor_core {
            let _ = writeln!(out, "  {} TensorCore  {} flop/s", self.precision, num(p));
        }
        if let Some(a) = m.alpha {
            let _ = writeln!(out, "  alpha            {}", num(a));
        }
        let params: Vec<String> = k
            .parameters
            .iter()
            .map(|p| format!("{}={}", p.name, count_or_num(p.value)))
            .collect();
        let _ = writeln!(out, "kernel             {} ({})", k.name, params.join(", "));
        let _ = writeln!(out, "  work             {} flop", num(k.work_flops as f64));
        let _ = writeln!(out, "  traffic          {} B", num(k.traffic_bytes as f64));
        let _ = writeln!(
            out,
            "  intensity        {} flop/B ({})",
            num(k.intensity),
            k.intensity_exact
        );
        let _ = writeln!(
            out,
            "  attainable CC    {} flop/s",
            num(k.attainable_cuda_core)
        );
        if let Some(p) = k.attainable_tensor_core {
            let _ = writeln!(out, "  attainable TC    {} flop/s", num(p));
        }
        let source = if self.balance_overridden {
            " (override)"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "balance            {} flop/B{}",
            num(self.balance),
            source
        );
        let _ = writeln!(out, "boundedness        {}", self.boundedness);
        let _ = writeln!(out, "T_mem/T_cmp        {}", num(self.mem_cmp_ratio));
        if !self.bounds.is_empty() {
            let _ = writeln!(out, "bounds");
            for b in &self.bounds {
                let alpha = b
                    .alpha
                    .map(|a| format!("  alpha={}", num(a)))
                    .unwrap_or_default();
                let flag = if b.applicable {
                    ""
                } else {
                    "  (premise violated)"
                };
                let _ = writeln!(out, "  {:<18} < {}{}{}", b.kind, num(b.value), alpha, flag);
            }
        }
        if let Some(t) = self.min_temporal_depth {
            let _ = writeln!(out, "min temporal depth {t}");
        }
        if let Some(p) = self.scale_trick_throughput {
            let _ = writeln!(out, "TC SCALE-as-MMA    {} flop/s", num(p));
        }
        for c in &self.caveats {
            let _ = writeln!(out, "note: {c}");
        }
        let _ = writeln!(out, "verdict            {}", self.verdict);
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.to_text(),
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }
}

fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        Value::Null => out.push((prefix.to_string(), String::new())),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// One row of the per-matrix table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixRow {
    pub name: String,
    pub m: u64,
    pub n: u64,
    pub nnz: u64,
    pub csr_intensity: f64,
    pub boundedness: String,
    pub kernel_ceiling: f64,
    pub workload_ceiling: f64,
    pub csr_bytes: u64,
    pub fits_in_l2: bool,
}

impl MatrixRow {
    pub fn new(name: &str, a: &MatrixAnalysis) -> Self {
        Self {
            name: name.to_string(),
            m: a.stats.rows(),
            n: a.stats.cols(),
            nnz: a.stats.nnz(),
            csr_intensity: a.intensity,
            boundedness: a.boundedness.to_string(),
            kernel_ceiling: a.kernel_ceiling.value,
            workload_ceiling: a.workload_ceiling.value,
            csr_bytes: u64::try_from(a.csr_bytes).unwrap_or(u64::MAX),
            fits_in_l2: a.fits_in_l2,
        }
    }
}

/// Sorts by nnz ascending (name breaks ties) and renders.
pub fn render_matrix_rows(rows: &mut [MatrixRow], format: OutputFormat) -> String {
    rows.sort_by(|a, b| a.nnz.cmp(&b.nnz).then_with(|| a.name.cmp(&b.name)));
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut out = String::from(
                "name,m,n,nnz,csr_intensity,boundedness,kernel_ceiling,workload_ceiling,csr_bytes,fits_in_l2\n",
            );
            for r in rows.iter() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    csv_field(&r.name),
                    r.m,
                    r.n,
                    r.nnz,
                    r.csr_intensity,
                    r.boundedness,
                    r.kernel_ceiling,
                    r.workload_ceiling,
                    r.csr_bytes,
                    r.fits_in_l2
                );
            }
            out
        }
        OutputFormat::Text => {
            let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
            let mut out = format!(
                "{:<width$}  {:>10}  {:>12}  {:>9}  {:<12}  {:>8}  {:>8}  {:>10}  {}\n",
                "name",
                "m",
                "nnz",
                "I(CSR)",
                "bound",
                "ceiling",
                "workload",
                "csr_bytes",
                "fits_l2"
            );
            for r in rows.iter() {
                let _ = writeln!(
                    out,
                    "{:<width$}  {:>10}  {:>12}  {:>9}  {:<12}  {:>8}  {:>8}  {:>10}  {}",
                    r.name,
                    r.m,
                    r.nnz,
                    num(r.csr_intensity),
                    r.boundedness,
                    num(r.kernel_ceiling),
                    num(r.workload_ceiling),
                    r.csr_bytes,
                    if r.fits_in_l2 { "yes" } else { "no" }
                );
            }
            out
        }
    }
}

/// Whole-number parameters (sizes, counts) print exactly.
fn count_or_num(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        num(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rooflens_core::hardware::builtin;

    fn a100() -> HardwareSpec {
        builtin("A100-80GB").unwrap()
    }

    #[test]
    fn gemv_report() {
        let r = analyze(
            &a100(),
            &KernelRequest::Gemv {
                m: 100_000,
                n: 100_000,
            },
            Precision::FP64,
            None,
        )
        .unwrap();
        assert_eq!(r.boundedness, "MemoryBound");
        let w = r
            .bounds
            .iter()
            .find(|b| b.kind == "WorkloadCeiling")
            .unwrap();
        assert!((w.value - 1.05).abs() < 1e-5);
        assert_eq!(r.verdict_ceiling, Some(r.bounds[0].value));
        assert!(r.verdict.contains("1.02×"));
        r.check_invariants().unwrap();
    }

    #[test]
    fn scale_report() {
        let r = analyze(
            &a100(),
            &KernelRequest::Scale { n: 1 },
            Precision::FP64,
            None,
        )
        .unwrap();
        assert_eq!(r.boundedness, "MemoryBound");
        assert_eq!(r.kernel.intensity, 1.0 / 16.0);
        let nominal = r
            .bounds
            .iter()
            .find(|b| b.kind == "TensorCoreCeiling" && b.alpha == Some(2.0))
            .unwrap();
        assert_eq!(nominal.value, 4.0 / 3.0);
        assert_eq!(r.scale_trick_throughput, Some(2.4375e12));
        assert_eq!(r.mem_cmp_ratio, 80.0);
    }

    #[test]
    fn stencil_report_with_override() {
        let gh = builtin("GH200").unwrap();
        let req = KernelRequest::Stencil {
            shape: StencilShape::preset("2d5pt").unwrap(),
            temporal_depth: 1,
        };
        let r = analyze(&gh, &req, Precision::FP64, Some(9.99)).unwrap();
        assert_eq!(r.min_temporal_depth, Some(16));
        assert!(r.balance_overridden);
        let r = analyze(&gh, &req, Precision::FP64, None).unwrap();
        assert_eq!(r.min_temporal_depth, Some(14));
        assert!(r.caveats.iter().any(|c| c.contains("register")));
    }

    #[test]
    fn compute_bound_stencil_has_no_ceiling() {
        let req = KernelRequest::Stencil {
            shape: StencilShape::preset("2d49pt").unwrap(),
            temporal_depth: 1,
        };
        let r = analyze(&a100(), &req, Precision::FP64, None).unwrap();
        assert_eq!(r.boundedness, "ComputeBound");
        assert_eq!(r.verdict_ceiling, None);
        assert!(r.bounds.iter().all(|b| !b.applicable));
        assert!(r.verdict.contains("not memory-bound"));
        r.check_invariants().unwrap();
    }

    #[test]
    fn csv_and_json_agree() {
        let r = analyze(
            &a100(),
            &KernelRequest::Gemv { m: 1000, n: 1000 },
            Precision::FP64,
            None,
        )
        .unwrap();
        let json: Value = serde_json::from_str(&r.to_json()).unwrap();
        let csv = r.to_csv();
        let intensity = csv
            .lines()
            .find(|l| l.starts_with("kernel.intensity,"))
            .unwrap();
        let v: f64 = intensity.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, json["kernel"]["intensity"].as_f64().unwrap());
        assert_eq!(v, r.kernel.intensity);
    }

    #[test]
    fn missing_precision_errors() {
        assert!(analyze(
            &a100(),
            &KernelRequest::Scale { n: 4 },
            Precision::FP32,
            None
        )
        .is_err());
        assert!(analyze(
            &a100(),
            &KernelRequest::Scale { n: 4 },
            Precision::FP64,
            Some(0.0)
        )
        .is_err());
    }
}
