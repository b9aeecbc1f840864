//! The `rftrace` command line.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on runtime errors.
//! Diagnostics go to stderr; results go to files or stdout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use rftrace::bench::{required_k, run_bench, write_csv, BenchPlan, DEFAULT_PILOT_REPS};
use rftrace::gen::{GenSpec, DEFAULT_BA_M, DEFAULT_KNN_K, DEFAULT_NOISE_SIGMA};
use rftrace::io::{read_graph, read_matrix_market, read_vector, write_graph, write_vector};
use rftrace::rng::derive_seed;
use rftrace::{
    estimate_girard, estimate_rf, estimate_sdd, exact_s, smooth, spectrum, Error, EstimatorResult,
    Method, SddMatrix, SolverConfig, SymmetricOperator, WeightedGraph,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "rftrace",
    version,
    about = "Random spanning forest estimates of q·Tr((L + qI)^-1)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a graph and write it as an edge list.
    Gen(GenArgs),
    /// Estimate s(q) for a graph or an SDD matrix.
    Estimate(EstimateArgs),
    /// Run a benchmark plan and write the results as CSV.
    Bench(BenchArgs),
    /// Solve (L + qI) x = q y for a signal y.
    Smooth(SmoothArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Ring,
    Grid2d,
    Grid3d,
    Ba,
    Heart,
}

#[derive(Debug, Args)]
struct GenArgs {
    family: Family,
    /// Node count (ring, ba, heart).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Grid dimensions such as 10x10x10 (grid3d) or 50x50 (grid2d).
    #[arg(long)]
    dims: Option<String>,
    /// Edges per new node (ba).
    #[arg(long)]
    m: Option<usize>,
    /// Neighbors per point (heart).
    #[arg(long)]
    k: Option<usize>,
    /// Noise standard deviation (heart).
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["graph", "sdd"])))]
#[command(group(ArgGroup::new("reps").required(true).args(["k", "epsilon"])))]
struct EstimateArgs {
    /// Edge-list file.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Matrix Market file holding a symmetric diagonally dominant matrix.
    #[arg(long)]
    sdd: Option<PathBuf>,
    /// forest, girard-cg, girard-direct or exact.
    #[arg(long, default_value = "forest")]
    method: String,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    /// Number of replicates.
    #[arg(long)]
    k: Option<usize>,
    /// Target relative error; k is then sized from a pilot run.
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_PILOT_REPS)]
    pilot_reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative residual tolerance of the conjugate gradient solver.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SmoothArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    q: f64,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Use a dense Cholesky factorization instead of conjugate gradients.
    #[arg(long)]
    direct: bool,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Estimate(a) => estimate(a, out),
        Command::Bench(a) => bench(a),
        Command::Smooth(a) => smooth_cmd(a),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn parse_dims(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(['x', 'X'])
        .map(|d| {
            d.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("invalid dimensions '{s}'")))
        })
        .collect()
}

fn gen_spec(a: &GenArgs) -> Result<GenSpec, Failure> {
    let need_n = || {
        a.n.ok_or_else(|| Failure::Usage(format!("{:?} needs --n", a.family).to_lowercase()))
    };
    let dims = a.dims.as_deref().map(parse_dims).transpose()?;
    Ok(match a.family {
        Family::Ring => GenSpec::Ring { n: need_n()? },
        Family::Grid2d => match (a.rows, a.cols, dims.as_deref()) {
            (Some(rows), Some(cols), None) => GenSpec::Grid2d { rows, cols },
            (None, None, Some(&[rows, cols])) => GenSpec::Grid2d { rows, cols },
            _ => {
                return Err(Failure::Usage(
                    "grid2d needs --rows and --cols, or --dims RxC".into(),
                ))
            }
        },
        Family::Grid3d => match dims.as_deref() {
            Some(&[a, b, c]) => GenSpec::Grid3d { a, b, c },
            _ => return Err(Failure::Usage("grid3d needs --dims AxBxC".into())),
        },
        Family::Ba => GenSpec::BarabasiAlbert {
            n: need_n()?,
            m: a.m.unwrap_or(DEFAULT_BA_M),
            seed: a.seed,
        },
        Family::Heart => GenSpec::KnnCloud {
            n: need_n()?,
            k: a.k.unwrap_or(DEFAULT_KNN_K),
            noise_sigma: a.noise.unwrap_or(DEFAULT_NOISE_SIGMA),
            seed: a.seed,
        },
    })
}

fn gen(a: GenArgs) -> Result<(), Failure> {
    let g = gen_spec(&a)?.generate().map_err(|e| match e {
        Error::SizeTooSmall(_) | Error::BadParameters(_) | Error::BadK { .. } => usage(e),
        e => Failure::Runtime(e),
    })?;
    write_graph(&g, &a.output)?;
    Ok(())
}

enum Input {
    Graph(WeightedGraph),
    Sdd(SddMatrix),
}

impl Input {
    fn operator(&self) -> &dyn SymmetricOperator {
        match self {
            Input::Graph(g) => g,
            Input::Sdd(m) => m,
        }
    }
}

fn run_method(
    input: &Input,
    method: Method,
    q: f64,
    k: usize,
    seed: u64,
    tol: f64,
) -> rftrace::Result<EstimatorResult> {
    match (method, input) {
        (Method::Forest, Input::Graph(g)) => estimate_rf(g, q, k, seed),
        (Method::Forest, Input::Sdd(m)) => estimate_sdd(m, q, k, seed),
        (Method::GirardCg, _) => {
            estimate_girard(input.operator(), q, k, seed, &SolverConfig::cg(tol))
        }
        (Method::GirardDirect, _) => {
            estimate_girard(input.operator(), q, k, seed, &SolverConfig::dense())
        }
        (Method::Exact, _) => {
            let s = exact_s(&spectrum(input.operator())?, q)?;
            Ok(EstimatorResult::from_samples(&[s], Method::Exact, q, 0))
        }
    }
}

fn estimate(a: EstimateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let method: Method = a.method.parse().map_err(usage)?;
    if !(a.q > 0.0 && a.q.is_finite()) {
        return Err(usage(Error::NonPositiveQ(a.q)));
    }
    if a.k == Some(0) {
        return Err(usage(Error::ZeroReplicates));
    }
    if let Some(eps) = a.epsilon {
        if !(eps > 0.0) {
            return Err(usage(Error::BadParameters(format!(
                "epsilon must be > 0, got {eps}"
            ))));
        }
        if a.pilot_reps < 2 {
            return Err(usage(Error::BadParameters(
                "pilot-reps must be at least 2".into(),
            )));
        }
    }
    if !(a.tol > 0.0) {
        return Err(usage(Error::BadParameters(format!(
            "tol must be > 0, got {}",
            a.tol
        ))));
    }

    let input = match (&a.graph, &a.sdd) {
        (Some(p), _) => Input::Graph(read_graph(p)?),
        (None, Some(p)) => Input::Sdd(read_matrix_market(p)?),
        (None, None) => unreachable!("clap enforces the input group"),
    };
    let k = match (a.k, a.epsilon) {
        (Some(k), _) => k,
        (None, Some(_)) if method == Method::Exact => 1,
        (None, Some(eps)) => {
            let pilot = run_method(
                &input,
                method,
                a.q,
                a.pilot_reps,
                derive_seed(a.seed, 1),
                a.tol,
            )?;
            required_k(&pilot, eps)?
        }
        (None, None) => unreachable!("clap enforces the replicate group"),
    };
    let r = run_method(&input, method, a.q, k, a.seed, a.tol)?;
    writeln!(out, "s_hat={} stderr={} k={}", r.mean, r.stderr, r.k).map_err(|e| Error::Io {
        path: "<stdout>".into(),
        msg: e.to_string(),
    })?;
    Ok(())
}

fn bench(a: BenchArgs) -> Result<(), Failure> {
    let plan = BenchPlan::from_file(&a.plan).map_err(|e| match e {
        Error::Io { .. } => Failure::Runtime(e),
        e => usage(e),
    })?;
    let rows = run_bench(&plan)?;
    write_csv(&rows, &a.output)?;
    Ok(())
}

fn smooth_cmd(a: SmoothArgs) -> Result<(), Failure> {
    if !(a.q > 0.0 && a.q.is_finite()) {
        return Err(usage(Error::NonPositiveQ(a.q)));
    }
    let g = read_graph(&a.graph)?;
    let y = read_vector(&a.input)?;
    let cfg = if a.direct {
        SolverConfig::dense()
    } else {
        SolverConfig::cg(a.tol)
    };
    let x = smooth(&g, a.q, &y, &cfg)?;
    write_vector(&x, &a.output)?;
    Ok(())
}
