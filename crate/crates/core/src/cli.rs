//! Command-line driver.
//!
//! Exit codes: 0 success, 2 usage, parse or configuration error,
//! 3 numerical failure, 4 GMRES did not converge.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::commsim::{
    build_3d_mapping, simulate_splu_comm, simulate_sptrsv_comm, sweep_csv, sweep_pz, CommReport, EtreeView, Problem,
    ProcessGrid3D,
};
use crate::krylov::{gmres, GmresOptions, IterationTrace};
use crate::multifrontal::{multifrontal_factorize, Compression, FactorStats, Policy};
use crate::sparse::{
    model_problem, nested_dissection, parse_matrix_market, parse_model_spec, symbolic_factorize, ModelKind,
    MatrixMarket, Point, SparseMatrix, DEFAULT_LEAF_CUTOFF,
};
use crate::sptrsv::{build_task_dag, MachineModel};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(crate::Error),
    #[error("GMRES stopped after {iterations} iterations at relative residual {residual:e}")]
    NotConverged { iterations: usize, residual: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::NotConverged { .. } => EXIT_NOT_CONVERGED,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::Config(m) => CliError::Usage(m),
            other => CliError::Numeric(other),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "rankmf", version, about = "Rank-structured multifrontal sparse solver toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a matrix and solve with A x = A·1, directly or by GMRES.
    Solve(SolveArgs),
    /// Communication-cost sweeps over pz, or one simulated grid.
    Sim(SimArgs),
    /// Factor a series of model problems and emit scaling data.
    Bench(BenchArgs),
    /// Dump the triangular-solve task graph of the exact factor as DOT.
    Dag(DagArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ordering {
    Nd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Direct,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimKind {
    Planar,
    Nonplanar,
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Class {
    Planar,
    Nonplanar,
}

#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    #[arg(long, value_enum, default_value = "nd")]
    pub ordering: Ordering,
    /// none, blr or hodlr.
    #[arg(long, default_value = "none")]
    pub compression: String,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Fronts smaller than this stay dense.
    #[arg(long, default_value_t = 256)]
    pub threshold_dense: usize,
    #[arg(long, default_value_t = 32)]
    pub tile: usize,
    #[arg(long, default_value_t = 32)]
    pub leaf_size: usize,
    #[arg(long, default_value_t = 0.7)]
    pub eta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Accepted for forward compatibility; must be 1.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

impl PolicyArgs {
    fn policy(&self) -> CliResult<Policy> {
        if self.workers != 1 {
            return Err(CliError::Usage(format!("--workers {} is not supported; only 1 worker", self.workers)));
        }
        let compression: Compression = self.compression.parse()?;
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Usage(format!("--tol {} must lie in (0, 1)", self.tol)));
        }
        if self.tile == 0 || self.leaf_size == 0 {
            return Err(CliError::Usage("--tile and --leaf-size must be positive".into()));
        }
        Ok(Policy {
            threshold_dense: self.threshold_dense,
            compression,
            tol: self.tol,
            tile: self.tile,
            leaf_size: self.leaf_size,
            eta: self.eta,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// MatrixMarket path or model spec such as poisson2d:31.
    #[arg(long)]
    pub matrix: String,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long, value_enum, default_value = "direct")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1e-8)]
    pub gmres_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub restart: usize,
    #[arg(long, default_value_t = 500)]
    pub maxit: usize,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// GMRES residual history as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Leave wall-clock timings out of the report.
    #[arg(long)]
    pub omit_timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, value_enum, default_value = "planar")]
    pub sim: SimKind,
    /// Problem size for formula sweeps, e.g. 1e6.
    #[arg(long, default_value_t = 1e6)]
    pub n: f64,
    #[arg(long = "P", default_value_t = 1024)]
    pub p: usize,
    /// Power-of-two list: "1..64" or "1,2,4".
    #[arg(long, default_value = "1..64")]
    pub pz: String,
    /// Single simulation on px,py,pz instead of a sweep.
    #[arg(long)]
    pub grid: Option<String>,
    /// Matrix for measured sweeps and single simulations.
    #[arg(long)]
    pub matrix: Option<String>,
    /// Formula class for measured sweeps; poisson3d defaults to nonplanar.
    #[arg(long, value_enum)]
    pub class: Option<Class>,
    #[arg(long, default_value_t = 1.7e-6)]
    pub alpha: f64,
    #[arg(long, default_value_t = 3.2e-10)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-11)]
    pub gamma: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "poisson2d")]
    pub kind: String,
    /// Comma-separated grid sizes k.
    #[arg(long, default_value = "15,31,63")]
    pub sizes: String,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub omit_timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DagArgs {
    #[arg(long)]
    pub matrix: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Level histogram CSV.
    #[arg(long)]
    pub levels: Option<PathBuf>,
}

struct Input {
    a: SparseMatrix,
    coords: Option<Vec<Point>>,
    model: Option<ModelKind>,
}

fn load_matrix(spec: &str) -> CliResult<Input> {
    if let Ok((kind, k)) = parse_model_spec(spec) {
        let (a, c) = model_problem(kind, k)?;
        return Ok(Input {
            a,
            coords: Some(c),
            model: Some(kind),
        });
    }
    let path = Path::new(spec);
    let bytes = std::fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let a = match parse_matrix_market(&bytes) {
        Ok(MatrixMarket::Real(a)) => a,
        Ok(MatrixMarket::Complex(_)) => {
            return Err(CliError::Usage(format!("{}: complex matrices are not supported", path.display())))
        }
        Err(e) => return Err(CliError::Usage(format!("{}: {e}", path.display()))),
    };
    Ok(Input {
        a,
        coords: None,
        model: None,
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}"))),
    }
}

fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = b.iter().zip(&ax).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

#[derive(Debug, Serialize)]
struct SolveTimings {
    analysis_seconds: f64,
    factor_seconds: f64,
    solve_seconds: f64,
}

#[derive(Debug, Serialize)]
struct SolveReport {
    matrix: String,
    n: usize,
    nnz: usize,
    compression: String,
    mode: &'static str,
    residual: f64,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    gmres: Option<IterationSummary>,
    stats: FactorStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings: Option<SolveTimings>,
}

#[derive(Debug, Serialize)]
struct IterationSummary {
    iterations: usize,
    restarts: usize,
    breakdown: bool,
}

impl From<&IterationTrace> for IterationSummary {
    fn from(t: &IterationTrace) -> Self {
        Self {
            iterations: t.iterations,
            restarts: t.restarts,
            breakdown: t.breakdown,
        }
    }
}

pub fn cmd_solve(args: &SolveArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let policy = args.policy.policy()?;
    let input = load_matrix(&args.matrix)?;
    let a = &input.a;
    if !a.is_square() {
        return Err(CliError::Usage(format!("matrix is {}x{}, not square", a.n_rows(), a.n_cols())));
    }
    let f = multifrontal_factorize(a, input.coords.as_deref(), &policy)?;
    let b = a.matvec(&vec![1.0; a.n_cols()]);
    let t0 = Instant::now();
    let (x, trace) = match args.mode {
        Mode::Direct => (f.solve(&b)?, None),
        Mode::Gmres => {
            let opts = GmresOptions {
                tol: args.gmres_tol,
                restart: args.restart,
                max_iters: args.maxit,
            };
            let (x, t) = gmres(|v: &[f64]| a.matvec(v), |v: &[f64]| f.solve(v), &b, &opts)?;
            (x, Some(t))
        }
    };
    let solve_seconds = t0.elapsed().as_secs_f64();
    let residual = relative_residual(a, &x, &b);
    if !residual.is_finite() {
        return Err(CliError::Numeric(crate::Error::Structure(format!("solve produced residual {residual}"))));
    }
    let converged = trace.as_ref().is_none_or(|t| t.converged);
    let timings = f.stats.timings.map(|t| SolveTimings {
        analysis_seconds: t.analysis_seconds,
        factor_seconds: t.factor_seconds,
        solve_seconds,
    });
    let report = SolveReport {
        matrix: args.matrix.clone(),
        n: a.n_rows(),
        nnz: a.nnz(),
        compression: args.policy.compression.clone(),
        mode: match args.mode {
            Mode::Direct => "direct",
            Mode::Gmres => "gmres",
        },
        residual,
        converged,
        gmres: trace.as_ref().map(IterationSummary::from),
        stats: f.stats.clone().without_timings(),
        timings: if args.omit_timings { None } else { timings },
    };
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    emit(args.out.as_deref(), &json, stdout)?;
    if let (Some(path), Some(t)) = (&args.trace, &trace) {
        emit(Some(path), &t.to_csv(), stdout)?;
    }
    match trace {
        Some(t) if !t.converged => Err(CliError::NotConverged {
            iterations: t.iterations,
            residual: t.final_residual(),
        }),
        _ => Ok(()),
    }
}

/// Accepts `a..b` (powers of two from a to b) or a comma list.
pub fn parse_pz_list(s: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("--pz {s:?} is not a power-of-two list"));
    let list: Vec<usize> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if !lo.is_power_of_two() || hi < lo {
            return Err(bad());
        }
        std::iter::successors(Some(lo), |&p| p.checked_mul(2)).take_while(|&p| p <= hi).collect()
    } else {
        s.split(',').map(|t| t.trim().parse::<usize>()).collect::<Result<_, _>>().map_err(|_| bad())?
    };
    if list.is_empty() || list.iter().any(|p| !p.is_power_of_two()) {
        return Err(bad());
    }
    Ok(list)
}

fn etree_for(input: &Input) -> CliResult<EtreeView> {
    let (p, _) = nested_dissection(&input.a, input.coords.as_deref(), DEFAULT_LEAF_CUTOFF)?;
    Ok(EtreeView::from_elimination(&symbolic_factorize(&input.a, &p)?))
}

#[derive(Debug, Serialize)]
struct SimReport {
    splu: CommReport,
    sptrsv: CommReport,
}

pub fn cmd_sim(args: &SimArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let model = MachineModel::new(args.alpha, args.beta, args.gamma)?;
    if let Some(spec) = &args.grid {
        let grid = ProcessGrid3D::parse(spec)?;
        let matrix = args
            .matrix
            .as_deref()
            .ok_or_else(|| CliError::Usage("--grid needs --matrix".into()))?;
        let input = load_matrix(matrix)?;
        let tree = etree_for(&input)?;
        let mapping = build_3d_mapping(&tree, &grid)?;
        let report = SimReport {
            splu: simulate_splu_comm(&mapping, &tree, &grid, &model)?,
            sptrsv: simulate_sptrsv_comm(&mapping, &tree, &grid, &model)?,
        };
        let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
        json.push('\n');
        return emit(args.out.as_deref(), &json, stdout);
    }
    let pz = parse_pz_list(&args.pz)?;
    if args.p == 0 {
        return Err(CliError::Usage("--P must be positive".into()));
    }
    let rows = match args.sim {
        SimKind::Planar => sweep_pz(Problem::Planar, args.n, args.p, &pz, None, &model)?,
        SimKind::Nonplanar => sweep_pz(Problem::Nonplanar, args.n, args.p, &pz, None, &model)?,
        SimKind::Measured => {
            let matrix = args
                .matrix
                .as_deref()
                .ok_or_else(|| CliError::Usage("--sim measured needs --matrix".into()))?;
            let input = load_matrix(matrix)?;
            let class = match (args.class, input.model) {
                (Some(Class::Planar), _) => Problem::Planar,
                (Some(Class::Nonplanar), _) | (None, Some(ModelKind::Poisson3d)) => Problem::Nonplanar,
                _ => Problem::Planar,
            };
            let tree = etree_for(&input)?;
            sweep_pz(class, 0.0, args.p, &pz, Some(&tree), &model)?
        }
    };
    emit(args.out.as_deref(), &sweep_csv(&rows), stdout)
}

pub const BENCH_HEADER: &str = "n,factor_entries,factor_flops,solve_seconds,error";

pub fn cmd_bench(args: &BenchArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let policy = args.policy.policy()?;
    let kind: ModelKind = args.kind.parse()?;
    let sizes: Vec<usize> = args
        .sizes
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--sizes {:?} is not a list of integers", args.sizes)))?;
    if sizes.is_empty() {
        return Err(CliError::Usage("--sizes is empty".into()));
    }
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for k in sizes {
        let run = || -> crate::Result<(usize, usize, f64, f64)> {
            let (a, c) = model_problem(kind, k)?;
            let f = multifrontal_factorize(&a, Some(&c), &policy)?;
            let b = a.matvec(&vec![1.0; a.n_cols()]);
            let t0 = Instant::now();
            f.solve(&b)?;
            Ok((a.n_rows(), f.stats.fill, f.stats.flops, t0.elapsed().as_secs_f64()))
        };
        match run() {
            Ok((n, fill, flops, secs)) => {
                let secs = if args.omit_timings { String::new() } else { format!("{secs:e}") };
                let _ = writeln!(csv, "{n},{fill},{flops:e},{secs},");
            }
            Err(e) => {
                let msg = e.to_string().replace([',', '\n'], ";");
                let _ = writeln!(csv, "k={k},,,,{msg}");
            }
        }
    }
    emit(args.out.as_deref(), &csv, stdout)
}

pub fn cmd_dag(args: &DagArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let input = load_matrix(&args.matrix)?;
    let f = multifrontal_factorize(&input.a, input.coords.as_deref(), &Policy::exact())?;
    let (l, _) = f.lower_factor().expect("exact policy keeps fronts dense");
    let dag = build_task_dag(&l, &f.supernodes())?;
    emit(args.out.as_deref(), &dag.to_dot(), stdout)?;
    if let Some(p) = &args.levels {
        emit(Some(p), &dag.level_histogram_csv(), stdout)?;
    }
    Ok(())
}

pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Sim(a) => cmd_sim(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
        Command::Dag(a) => cmd_dag(a, stdout),
    }
}

/// Parses `args` (including the program name), runs, and returns the
/// process exit code. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "rankmf: {e}");
            e.exit_code()
        }
    }
}
