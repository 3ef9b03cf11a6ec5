//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or parse error,
//! 3 internal invariant violation.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rooflens_core::hardware::{machine_balance, tensor_alpha};
use rooflens_core::matrix::stats_to_report_with_index;
use rooflens_core::{ExecutionUnit, HardwareSpec, Precision, StencilShape};
use serde::Serialize;

use crate::chart::{build_chart, ChartRequest, Marker};
use crate::config::load_spec_file;
use crate::fmt::{csv_field, num};
use crate::mtx::{parse_stats_file, IngestError};
use crate::registry::{Registry, Source};
use crate::report::{analyze, render_matrix_rows, KernelRequest, MatrixRow, OutputFormat};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Input(_) => 2,
            Self::Internal(_) => 3,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Parser, Debug)]
#[command(
    name = "rooflens",
    version,
    about = "Roofline analysis and tensor-core speedup ceilings for memory-bound kernels"
)]
pub struct Cli {
    /// Output encoding.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
    /// Floating-point precision of the analysed kernel.
    #[arg(long, global = true, default_value = "fp64", value_parser = parse_precision)]
    pub precision: Precision,
    /// Embed a generation timestamp in written chart files.
    #[arg(long, global = true)]
    pub stamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List or show hardware specs.
    Hardware(HardwareArgs),
    /// Analyse one kernel on one machine.
    Analyze(AnalyzeArgs),
    /// Analyse SpMV (CSR) for Matrix Market files.
    Matrix(MatrixArgs),
    /// Write a roofline chart as SVG or CSV.
    Roofline(RooflineArgs),
}

#[derive(Args, Debug)]
pub struct HardwareArgs {
    /// Show a spec loaded from this TOML file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[command(subcommand)]
    pub action: Option<HardwareAction>,
}

#[derive(Subcommand, Debug)]
pub enum HardwareAction {
    /// Built-in specs plus any in $ROOFLENS_HW_PATH.
    List,
    /// One spec with derived balances and alpha.
    Show { name: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Scale,
    Gemv,
    SpmvCsr,
    Stencil,
}

#[derive(Args, Debug, Default)]
pub struct KernelArgs {
    /// Kernel family.
    #[arg(long, value_enum)]
    pub kernel: Option<KernelKind>,
    /// Elements (scale) or columns (gemv, spmv-csr).
    #[arg(long)]
    pub n: Option<u64>,
    /// Rows (gemv, spmv-csr).
    #[arg(long)]
    pub m: Option<u64>,
    /// Nonzeros (spmv-csr).
    #[arg(long)]
    pub nnz: Option<u64>,
    /// Take spmv-csr dimensions from a Matrix Market file.
    #[arg(long)]
    pub mtx: Option<PathBuf>,
    /// CSR index width in bytes.
    #[arg(long, default_value_t = 4)]
    pub index_bytes: u8,
    /// Stencil preset: 2d5pt, 2d9pt, 2d13pt, 2d49pt, 3d7pt, 3d27pt.
    #[arg(long)]
    pub shape: Option<String>,
    /// Fused stencil time steps.
    #[arg(long, default_value_t = 1)]
    pub t: u64,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Built-in name, user spec name, or path to a spec file.
    #[arg(long)]
    pub hw: String,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Use this CUDA-core balance (flop/byte) instead of peak/bandwidth.
    #[arg(long)]
    pub balance_override: Option<f64>,
}

#[derive(Args, Debug)]
pub struct MatrixArgs {
    #[arg(long)]
    pub hw: String,
    #[arg(long, default_value_t = 4)]
    pub index_bytes: u8,
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RooflineArgs {
    #[arg(long)]
    pub hw: String,
    /// Ceilings to draw (cuda-core, tensor-core); all available by default.
    #[arg(long = "unit", value_parser = parse_unit)]
    pub units: Vec<ExecutionUnit>,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Extra marker as LABEL=INTENSITY; repeatable.
    #[arg(long = "mark", value_parser = parse_marker)]
    pub marks: Vec<Marker>,
    #[arg(long)]
    pub i_min: Option<f64>,
    #[arg(long)]
    pub i_max: Option<f64>,
    /// Log-spaced samples per ceiling (the ridge point is added).
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    /// Output path ending in .svg or .csv.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_precision(s: &str) -> Result<Precision, String> {
    s.parse()
}

fn parse_unit(s: &str) -> Result<ExecutionUnit, String> {
    s.parse()
}

fn parse_marker(s: &str) -> Result<Marker, String> {
    let (label, value) = s
        .rsplit_once('=')
        .ok_or_else(|| format!("expected LABEL=INTENSITY, got `{s}`"))?;
    let intensity: f64 = value
        .parse()
        .map_err(|_| format!("bad intensity `{value}`"))?;
    Ok(Marker {
        label: label.to_string(),
        intensity,
    })
}

fn need<T>(v: Option<T>, flag: &str, kernel: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--kernel {kernel} requires --{flag}")))
}

impl KernelArgs {
    fn request(&self) -> Result<Option<KernelRequest>, CliError> {
        let Some(kind) = self.kernel else {
            return Ok(None);
        };
        let req = match kind {
            KernelKind::Scale => KernelRequest::Scale {
                n: need(self.n, "n", "scale")?,
            },
            KernelKind::Gemv => KernelRequest::Gemv {
                m: need(self.m, "m", "gemv")?,
                n: need(self.n, "n", "gemv")?,
            },
            KernelKind::SpmvCsr => {
                let stats = match &self.mtx {
                    Some(path) => parse_stats_file(path)
                        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
                    None => rooflens_core::SparseMatrixStats::new(
                        need(self.m, "m", "spmv-csr")?,
                        need(self.n, "n", "spmv-csr")?,
                        need(self.nnz, "nnz", "spmv-csr")?,
                    )
                    .map_err(input)?,
                };
                KernelRequest::SpmvCsr {
                    stats,
                    index_bytes: self.index_bytes,
                }
            }
            KernelKind::Stencil => KernelRequest::Stencil {
                shape: StencilShape::preset(&need(self.shape.clone(), "shape", "stencil")?)
                    .map_err(input)?,
                temporal_depth: self.t,
            },
        };
        Ok(Some(req))
    }
}

fn label(req: &KernelRequest) -> String {
    match req {
        KernelRequest::Scale { .. } => "scale".to_string(),
        KernelRequest::Gemv { .. } => "gemv".to_string(),
        KernelRequest::SpmvCsr { .. } => "spmv-csr".to_string(),
        KernelRequest::Stencil {
            shape,
            temporal_depth,
        } if *temporal_depth > 1 => format!("{} t={temporal_depth}", shape.name()),
        KernelRequest::Stencil { shape, .. } => shape.name().to_string(),
    }
}

#[derive(Serialize)]
struct PrecisionView {
    precision: String,
    peak_cuda_core: Option<f64>,
    peak_tensor_core: Option<f64>,
    balance_cuda_core: Option<f64>,
    balance_tensor_core: Option<f64>,
    alpha: Option<f64>,
}

#[derive(Serialize)]
struct HardwareView {
    name: String,
    source: String,
    memory_bandwidth: f64,
    l2_cache_bytes: u64,
    precisions: Vec<PrecisionView>,
}

impl HardwareView {
    fn new(spec: &HardwareSpec, source: &Source) -> Self {
        Self {
            name: spec.name().to_string(),
            source: match source {
                Source::Builtin => "builtin".to_string(),
                Source::File(p) => p.display().to_string(),
            },
            memory_bandwidth: spec.memory_bandwidth(),
            l2_cache_bytes: spec.l2_cache_bytes(),
            precisions: spec
                .precisions()
                .into_iter()
                .map(|p| PrecisionView {
                    precision: p.to_string(),
                    peak_cuda_core: spec.peak(ExecutionUnit::CudaCore, p).ok(),
                    peak_tensor_core: spec.peak(ExecutionUnit::TensorCore, p).ok(),
                    balance_cuda_core: machine_balance(spec, ExecutionUnit::CudaCore, p).ok(),
                    balance_tensor_core: machine_balance(spec, ExecutionUnit::TensorCore, p).ok(),
                    alpha: tensor_alpha(spec, p).ok(),
                })
                .collect(),
        }
    }

    fn text(&self) -> String {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_else(|| "-".to_string());
        let mut out = String::new();
        let _ = writeln!(out, "name               {}", self.name);
        let _ = writeln!(out, "source             {}", self.source);
        let _ = writeln!(out, "memory bandwidth   {} B/s", num(self.memory_bandwidth));
        let _ = writeln!(out, "l2 cache           {} B", self.l2_cache_bytes);
        let _ = writeln!(
            out,
            "{:<9}  {:>10}  {:>10}  {:>10}  {:>10}  {:>6}",
            "precision", "peak CC", "peak TC", "balance CC", "balance TC", "alpha"
        );
        for p in &self.precisions {
            let _ = writeln!(
                out,
                "{:<9}  {:>10}  {:>10}  {:>10}  {:>10}  {:>6}",
                p.precision,
                opt(p.peak_cuda_core),
                opt(p.peak_tensor_core),
                opt(p.balance_cuda_core),
                opt(p.balance_tensor_core),
                opt(p.alpha)
            );
        }
        out
    }

    fn csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from(
            "name,source,memory_bandwidth,l2_cache_bytes,precision,peak_cuda_core,peak_tensor_core,balance_cuda_core,balance_tensor_core,alpha\n",
        );
        for p in &self.precisions {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                csv_field(&self.name),
                csv_field(&self.source),
                self.memory_bandwidth,
                self.l2_cache_bytes,
                p.precision,
                opt(p.peak_cuda_core),
                opt(p.peak_tensor_core),
                opt(p.balance_cuda_core),
                opt(p.balance_tensor_core),
                opt(p.alpha)
            );
        }
        out
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_hardware(
    args: &HardwareArgs,
    format: OutputFormat,
    registry: &Registry,
) -> Result<String, CliError> {
    let show = |spec: HardwareSpec, source: Source| {
        let view = HardwareView::new(&spec, &source);
        match format {
            OutputFormat::Text => view.text(),
            OutputFormat::Json => json(&view),
            OutputFormat::Csv => view.csv(),
        }
    };
    match (&args.spec, &args.action) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--spec cannot be combined with a subcommand".into(),
        )),
        (Some(path), None) => {
            let spec = load_spec_file(path).map_err(input)?;
            Ok(show(spec, Source::File(path.clone())))
        }
        (None, Some(HardwareAction::Show { name })) => {
            let spec = registry.resolve(name).map_err(input)?;
            let source = registry
                .list()
                .ok()
                .and_then(|all| {
                    all.into_iter()
                        .find(|(s, _)| *s == spec)
                        .map(|(_, src)| src)
                })
                .unwrap_or_else(|| Source::File(PathBuf::from(name)));
            Ok(show(spec, source))
        }
        (None, Some(HardwareAction::List)) => {
            let all = registry.list().map_err(input)?;
            let views: Vec<HardwareView> = all
                .iter()
                .map(|(s, src)| HardwareView::new(s, src))
                .collect();
            Ok(match format {
                OutputFormat::Json => json(&views),
                OutputFormat::Csv => {
                    let mut out = String::from("name,source,memory_bandwidth,l2_cache_bytes\n");
                    for v in &views {
                        let _ = writeln!(
                            out,
                            "{},{},{},{}",
                            csv_field(&v.name),
                            csv_field(&v.source),
                            v.memory_bandwidth,
                            v.l2_cache_bytes
                        );
                    }
                    out
                }
                OutputFormat::Text => {
                    let mut out = String::new();
                    for v in &views {
                        let _ = writeln!(
                            out,
                            "{:<16}  {:>10} B/s  {:>10} B L2  {}",
                            v.name,
                            num(v.memory_bandwidth),
                            v.l2_cache_bytes,
                            v.source
                        );
                    }
                    out
                }
            })
        }
        (None, None) => Err(CliError::Usage(
            "hardware needs `list`, `show <NAME>` or `--spec <FILE>`".into(),
        )),
    }
}

fn cmd_analyze(cli: &Cli, args: &AnalyzeArgs, registry: &Registry) -> Result<String, CliError> {
    let request = args
        .kernel
        .request()?
        .ok_or_else(|| CliError::Usage("analyze requires --kernel".into()))?;
    let spec = registry.resolve(&args.hw).map_err(input)?;
    let report = analyze(&spec, &request, cli.precision, args.balance_override).map_err(input)?;
    report.check_invariants().map_err(CliError::Internal)?;
    Ok(report.render(cli.format))
}

fn ingest_one(
    path: &Path,
    spec: &HardwareSpec,
    precision: Precision,
    index_bytes: u8,
) -> Result<MatrixRow, String> {
    let stats = parse_stats_file(path).map_err(|e| match e {
        IngestError::Io(e) => format!("cannot read: {e}"),
        IngestError::Mtx(e) => e.to_string(),
    })?;
    let analysis = stats_to_report_with_index(&stats, spec, precision, index_bytes)
        .map_err(|e| e.to_string())?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(MatrixRow::new(&name, &analysis))
}

fn cmd_matrix(
    cli: &Cli,
    args: &MatrixArgs,
    registry: &Registry,
    err: &mut dyn Write,
) -> Result<(String, bool), CliError> {
    let spec = registry.resolve(&args.hw).map_err(input)?;
    let results: Vec<Mutex<Option<Result<MatrixRow, String>>>> =
        args.paths.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(args.paths.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = args.paths.get(i) else { break };
                let row = ingest_one(path, &spec, cli.precision, args.index_bytes);
                *results[i].lock().expect("result slot") = Some(row);
            });
        }
    });

    let mut rows = Vec::new();
    let mut failed = false;
    for (path, slot) in args.paths.iter().zip(results) {
        match slot
            .into_inner()
            .expect("result slot")
            .expect("every path processed")
        {
            Ok(row) => rows.push(row),
            Err(e) => {
                failed = true;
                let _ = writeln!(err, "error: {}: {e}", path.display());
            }
        }
    }
    Ok((render_matrix_rows(&mut rows, cli.format), failed))
}

fn stamp() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("generated at unix time {secs}")
}

fn cmd_roofline(cli: &Cli, args: &RooflineArgs, registry: &Registry) -> Result<String, CliError> {
    enum Kind {
        Svg,
        Csv,
    }
    let kind = match args
        .out
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
    {
        Some(e) if e == "svg" => Kind::Svg,
        Some(e) if e == "csv" => Kind::Csv,
        _ => return Err(CliError::Usage("--out must end in .svg or .csv".into())),
    };
    let spec = registry.resolve(&args.hw).map_err(input)?;
    let units = if args.units.is_empty() {
        ExecutionUnit::ALL
            .into_iter()
            .filter(|&u| spec.peak(u, cli.precision).is_ok())
            .collect()
    } else {
        args.units.clone()
    };
    let mut markers = Vec::new();
    if let Some(req) = args.kernel.request()? {
        let k = req.characterize(cli.precision).map_err(input)?;
        markers.push(Marker {
            label: label(&req),
            intensity: k.intensity().to_f64(),
        });
    }
    markers.extend(args.marks.iter().cloned());
    let chart = build_chart(
        &spec,
        &ChartRequest {
            units,
            precision: cli.precision,
            i_min: args.i_min,
            i_max: args.i_max,
            points: args.points,
            markers,
        },
    )
    .map_err(input)?;
    chart.check_invariants().map_err(CliError::Internal)?;
    let st = cli.stamp.then(stamp);
    let body = match kind {
        Kind::Svg => chart.to_svg(st.as_deref()),
        Kind::Csv => chart.to_csv(st.as_deref()),
    };
    std::fs::write(&args.out, body)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.out.display())))?;
    Ok(format!("wrote {}\n", args.out.display()))
}

/// Parses `args` and runs one command, writing to `out` and `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with_registry(args, &Registry::from_env(), out, err)
}

pub fn run_with_registry<I, T>(
    args: I,
    registry: &Registry,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Hardware(a) => cmd_hardware(a, cli.format, registry).map(|s| (s, false)),
        Command::Analyze(a) => cmd_analyze(&cli, a, registry).map(|s| (s, false)),
        Command::Matrix(a) => cmd_matrix(&cli, a, registry, err),
        Command::Roofline(a) => cmd_roofline(&cli, a, registry).map(|s| (s, false)),
    };
    match result {
        Ok((text, partial_failure)) => {
            let _ = out.write_all(text.as_bytes());
            if partial_failure {
                2
            } else {
                0
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
