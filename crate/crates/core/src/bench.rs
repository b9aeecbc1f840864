//! Fixed-relative-error benchmark protocol.
//!
//! For every graph, q value and method a pilot of `pilot_reps` replicates
//! gives a mean and a variance. The replicate count needed for relative
//! error `ε` is `k = ⌈σ̂² / (ε² ŝ²)⌉`, and the effective cost is the
//! per-replicate work counter times `k`. Wall time is recorded but is
//! informational only.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{EstimatorResult, Method};
use crate::forest::estimate_rf;
use crate::gen::GenSpec;
use crate::graph::WeightedGraph;
use crate::io::{read_graph, write_atomic};
use crate::probe::{estimate_girard, SolverConfig};
use crate::rng::derive_seed;
use crate::spectral::{exact_s, spectrum, SpectralSummary, DENSE_LIMIT};

pub const DEFAULT_EPSILON: f64 = 0.02;
pub const DEFAULT_PILOT_REPS: usize = 100;
pub const DEFAULT_Q_POINTS: usize = 8;
pub const DEFAULT_Q_LO_FRAC: f64 = 0.01;
pub const DEFAULT_Q_HI_FRAC: f64 = 0.5;

/// Forests per evaluation when `s(q)` has to be estimated during the q search.
pub const PILOT_SEARCH_REPS: usize = 50;
const PILOT_SEARCH_TOL: f64 = 0.1;
const EXACT_SEARCH_TOL: f64 = 1e-3;
const MAX_SEARCH_ITERATIONS: usize = 60;

/// Replicates needed so that `σ̂ / (ŝ √k) ≤ ε`.
pub fn required_k(pilot: &EstimatorResult, epsilon: f64) -> Result<usize> {
    if !(pilot.mean > 0.0) {
        return Err(Error::ZeroMeanPilot(pilot.mean));
    }
    if !(epsilon > 0.0) {
        return Err(Error::BadParameters(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    let k = (pilot.sample_variance / (epsilon * epsilon * pilot.mean * pilot.mean)).ceil();
    Ok((k as usize).max(1))
}

/// Finds `q` with `s(q)` within relative `tol` of `target`, for an increasing
/// function `s`. Brackets by decades from `start`, then bisects in log scale.
/// Every evaluation counts toward a budget of 60, and the bracket may not
/// leave `[start·1e-12, start·1e12]`.
pub fn search_q<F>(mut s: F, start: f64, target: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let hit = |v: f64| (v - target).abs() <= tol * target;
    let mut evals = 0usize;
    let mut eval = |q: f64, evals: &mut usize| -> Result<f64> {
        *evals += 1;
        if *evals > MAX_SEARCH_ITERATIONS {
            return Err(Error::BisectionFailed(format!(
                "no q with s(q) ≈ {target} after {MAX_SEARCH_ITERATIONS} evaluations"
            )));
        }
        s(q)
    };

    let mut q = start;
    let v = eval(q, &mut evals)?;
    if hit(v) {
        return Ok(q);
    }
    let upward = v < target;
    let (mut lo, mut hi) = (q, q);
    loop {
        q = if upward { q * 10.0 } else { q / 10.0 };
        if !(start * 1e-12..=start * 1e12).contains(&q) {
            return Err(Error::BisectionFailed(format!(
                "no q in [{:e}, {:e}] brackets s(q) = {target}",
                start * 1e-12,
                start * 1e12
            )));
        }
        let v = eval(q, &mut evals)?;
        if hit(v) {
            return Ok(q);
        }
        if upward {
            lo = hi;
            hi = q;
            if v > target {
                break;
            }
        } else {
            hi = lo;
            lo = q;
            if v < target {
                break;
            }
        }
    }
    loop {
        let mid = (lo * hi).sqrt();
        let v = eval(mid, &mut evals)?;
        if hit(v) {
            return Ok(mid);
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Finds `q` with `s(q) ≈ target`, exactly through the spectrum when the
/// graph is small enough and otherwise from 50-forest pilot estimates.
pub fn find_q_for_target(g: &WeightedGraph, target: f64, seed: u64) -> Result<f64> {
    let start = if g.total_weight() > 0.0 {
        g.total_weight() / g.n() as f64
    } else {
        1.0
    };
    if g.n() <= DENSE_LIMIT {
        let spec = spectrum(g)?;
        search_q(|q| exact_s(&spec, q), start, target, EXACT_SEARCH_TOL)
    } else {
        let mut round = 0u64;
        search_q(
            |q| {
                round += 1;
                Ok(estimate_rf(g, q, PILOT_SEARCH_REPS, derive_seed(seed, round))?.mean)
            },
            start,
            target,
            PILOT_SEARCH_TOL,
        )
    }
}

/// `points` log-spaced values between the q giving `s ≈ lo_frac·n` and the q
/// giving `s ≈ hi_frac·n`.
pub fn pick_q_grid(
    g: &WeightedGraph,
    points: usize,
    lo_frac: f64,
    hi_frac: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if !(0.0 < lo_frac && lo_frac < hi_frac && hi_frac < 1.0) || points < 2 {
        return Err(Error::BadParameters(format!(
            "need 0 < lo_frac < hi_frac < 1 and points >= 2, got {lo_frac}, {hi_frac}, {points}"
        )));
    }
    let n = g.n() as f64;
    let q_lo = find_q_for_target(g, lo_frac * n, seed)?;
    let q_hi = find_q_for_target(g, hi_frac * n, derive_seed(seed, 1))?;
    if !(q_lo < q_hi) {
        return Err(Error::BisectionFailed(format!(
            "endpoints not increasing: {q_lo} >= {q_hi}"
        )));
    }
    let (a, b) = (q_lo.ln(), q_hi.ln());
    Ok((0..points)
        .map(|i| match i {
            0 => q_lo,
            _ if i == points - 1 => q_hi,
            _ => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        })
        .collect())
}

/// A generated graph or an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Generated(GenSpec),
    File(PathBuf),
}

impl GraphSource {
    /// Parses a generator spec such as `ring:200`, or `file:<path>`. Anything
    /// that is not a generator spec is taken as a path.
    pub fn parse(s: &str, base_dir: Option<&Path>) -> Self {
        let path = |p: &str| {
            let p = PathBuf::from(p);
            match base_dir {
                Some(dir) if p.is_relative() => dir.join(p),
                _ => p,
            }
        };
        if let Some(p) = s.strip_prefix("file:") {
            return GraphSource::File(path(p));
        }
        match s.parse::<GenSpec>() {
            Ok(spec) => GraphSource::Generated(spec),
            Err(_) => GraphSource::File(path(s)),
        }
    }

    pub fn name(&self) -> String {
        match self {
            GraphSource::Generated(spec) => spec.to_string(),
            GraphSource::File(p) => p
                .file_name()
                .map_or_else(|| p.display().to_string(), |f| f.to_string_lossy().into()),
        }
    }

    pub fn load(&self) -> Result<WeightedGraph> {
        match self {
            GraphSource::Generated(spec) => spec.generate(),
            GraphSource::File(p) => read_graph(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QGrid {
    Explicit(Vec<f64>),
    Auto {
        points: usize,
        lo_frac: f64,
        hi_frac: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchPlan {
    pub graphs: Vec<GraphSource>,
    pub methods: Vec<Method>,
    pub q_grid: QGrid,
    pub epsilon: f64,
    pub pilot_reps: usize,
    pub master_seed: u64,
    pub cg_tolerance: f64,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            graphs: Vec::new(),
            methods: vec![
                Method::Forest,
                Method::GirardCg,
                Method::GirardDirect,
                Method::Exact,
            ],
            q_grid: QGrid::Auto {
                points: DEFAULT_Q_POINTS,
                lo_frac: DEFAULT_Q_LO_FRAC,
                hi_frac: DEFAULT_Q_HI_FRAC,
            },
            epsilon: DEFAULT_EPSILON,
            pilot_reps: DEFAULT_PILOT_REPS,
            master_seed: 0,
            cg_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    graphs: Vec<String>,
    methods: Option<Vec<String>>,
    epsilon: Option<f64>,
    pilot_reps: Option<usize>,
    seed: Option<u64>,
    q_grid: Option<Vec<f64>>,
    q_points: Option<usize>,
    q_lo_frac: Option<f64>,
    q_hi_frac: Option<f64>,
    cg_tolerance: Option<f64>,
}

impl BenchPlan {
    /// Parses a flat TOML plan. Relative graph paths resolve against `base_dir`.
    ///
    /// ```toml
    /// graphs = ["ring:200", "grid2d:50x50", "file:mesh.tsv"]
    /// methods = ["forest", "girard_cg", "girard_direct", "exact"]
    /// epsilon = 0.02
    /// pilot_reps = 100
    /// seed = 7
    /// q_points = 8        # or an explicit q_grid = [0.1, 1.0]
    /// q_lo_frac = 0.01
    /// q_hi_frac = 0.5
    /// ```
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: PlanFile =
            toml::from_str(text).map_err(|e| Error::FormatViolation(format!("plan: {e}")))?;
        let defaults = BenchPlan::default();
        let methods = match raw.methods {
            Some(ms) => ms.iter().map(|m| m.parse()).collect::<Result<_>>()?,
            None => defaults.methods,
        };
        let q_grid = match raw.q_grid {
            Some(qs) => QGrid::Explicit(qs),
            None => QGrid::Auto {
                points: raw.q_points.unwrap_or(DEFAULT_Q_POINTS),
                lo_frac: raw.q_lo_frac.unwrap_or(DEFAULT_Q_LO_FRAC),
                hi_frac: raw.q_hi_frac.unwrap_or(DEFAULT_Q_HI_FRAC),
            },
        };
        let plan = BenchPlan {
            graphs: raw
                .graphs
                .iter()
                .map(|g| GraphSource::parse(g, base_dir))
                .collect(),
            methods,
            q_grid,
            epsilon: raw.epsilon.unwrap_or(DEFAULT_EPSILON),
            pilot_reps: raw.pilot_reps.unwrap_or(DEFAULT_PILOT_REPS),
            master_seed: raw.seed.unwrap_or(0),
            cg_tolerance: raw.cg_tolerance.unwrap_or(defaults.cg_tolerance),
        };
        plan.check()?;
        Ok(plan)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent())
    }

    pub fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::BadParameters(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.pilot_reps < 2 {
            return Err(Error::BadParameters("pilot_reps must be >= 2".into()));
        }
        if let QGrid::Explicit(qs) = &self.q_grid {
            if qs.iter().any(|&q| !(q > 0.0)) || qs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::BadParameters(
                    "q_grid must be positive and strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Column order of the benchmark CSV.
pub const CSV_COLUMNS: [&str; 13] = [
    "graph",
    "n",
    "m_edges",
    "q",
    "method",
    "s_hat",
    "s_exact",
    "stderr",
    "required_k",
    "setup_cost",
    "cost_metric",
    "wall_time_ms",
    "error",
];

/// One benchmark measurement.
///
/// `setup_cost` is one-off work (dense factorization `n³`, Jacobi diagonal
/// `n`); `cost_metric` is per-replicate work times `required_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub graph: String,
    pub n: usize,
    pub m_edges: usize,
    pub q: f64,
    pub method: Method,
    pub s_hat: Option<f64>,
    pub s_exact: Option<f64>,
    pub stderr: Option<f64>,
    pub required_k: Option<usize>,
    pub setup_cost: Option<f64>,
    pub cost_metric: Option<f64>,
    pub wall_time_ms: f64,
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(graph: &str, n: usize, m_edges: usize, q: f64, method: Method, err: &Error) -> Self {
        Self {
            graph: graph.to_string(),
            n,
            m_edges,
            q,
            method,
            s_hat: None,
            s_exact: None,
            stderr: None,
            required_k: None,
            setup_cost: None,
            cost_metric: None,
            wall_time_ms: 0.0,
            error: Some(err.to_string()),
        }
    }
}

struct Measurement {
    s_hat: f64,
    stderr: f64,
    required_k: usize,
    setup_cost: f64,
    cost_metric: f64,
}

fn measure(
    g: &WeightedGraph,
    spec: Option<&SpectralSummary>,
    q: f64,
    method: Method,
    plan: &BenchPlan,
    seed: u64,
) -> Result<Measurement> {
    let n = g.n() as f64;
    let from_pilot =
        |pilot: EstimatorResult, setup_cost: f64, per_rep: f64| -> Result<Measurement> {
            let k = required_k(&pilot, plan.epsilon)?;
            Ok(Measurement {
                s_hat: pilot.mean,
                stderr: pilot.stderr,
                required_k: k,
                setup_cost,
                cost_metric: per_rep * k as f64,
            })
        };
    match method {
        Method::Forest => {
            let pilot = estimate_rf(g, q, plan.pilot_reps, seed)?;
            let per_rep = pilot.work_per_replicate();
            from_pilot(pilot, 0.0, per_rep)
        }
        Method::GirardCg => {
            let pilot = estimate_girard(
                g,
                q,
                plan.pilot_reps,
                seed,
                &SolverConfig::cg(plan.cg_tolerance),
            )?;
            let per_rep = pilot.work_per_replicate() * n;
            from_pilot(pilot, n, per_rep)
        }
        Method::GirardDirect => {
            let pilot = estimate_girard(g, q, plan.pilot_reps, seed, &SolverConfig::dense())?;
            from_pilot(pilot, n.powi(3), 2.0 * n * n)
        }
        Method::Exact => {
            let spec = spec.ok_or(Error::TooLarge {
                n: g.n(),
                limit: DENSE_LIMIT,
            })?;
            Ok(Measurement {
                s_hat: exact_s(spec, q)?,
                stderr: 0.0,
                required_k: 1,
                setup_cost: n.powi(3),
                cost_metric: 0.0,
            })
        }
    }
}

/// Runs every (graph, q, method) combination of the plan, in that order.
///
/// Failures are recorded in the row's `error` column and do not stop the run.
pub fn run_bench(plan: &BenchPlan) -> Result<Vec<BenchRow>> {
    plan.check()?;
    let mut rows = Vec::new();
    if plan.methods.is_empty() {
        return Ok(rows);
    }
    for (gi, source) in plan.graphs.iter().enumerate() {
        let name = source.name();
        let g = match source.load() {
            Ok(g) => g,
            Err(e) => {
                rows.extend(
                    plan.methods
                        .iter()
                        .map(|&m| BenchRow::failed(&name, 0, 0, 0.0, m, &e)),
                );
                continue;
            }
        };
        let spec = if g.n() <= DENSE_LIMIT {
            spectrum(&g).ok()
        } else {
            None
        };
        let graph_seed = derive_seed(plan.master_seed, gi as u64);
        let qs = match &plan.q_grid {
            QGrid::Explicit(qs) => qs.clone(),
            QGrid::Auto {
                points,
                lo_frac,
                hi_frac,
            } => match pick_q_grid(&g, *points, *lo_frac, *hi_frac, graph_seed) {
                Ok(qs) => qs,
                Err(e) => {
                    rows.extend(
                        plan.methods
                            .iter()
                            .map(|&m| BenchRow::failed(&name, g.n(), g.num_edges(), 0.0, m, &e)),
                    );
                    continue;
                }
            },
        };
        for (qi, &q) in qs.iter().enumerate() {
            let s_exact = spec.as_ref().and_then(|s| exact_s(s, q).ok());
            for (mi, &method) in plan.methods.iter().enumerate() {
                let seed = derive_seed(graph_seed, ((qi as u64) << 16) | mi as u64);
                let started = Instant::now();
                let outcome = measure(&g, spec.as_ref(), q, method, plan, seed);
                let wall_time_ms = started.elapsed().as_secs_f64() * 1e3;
                let row = match outcome {
                    Ok(m) => BenchRow {
                        graph: name.clone(),
                        n: g.n(),
                        m_edges: g.num_edges(),
                        q,
                        method,
                        s_hat: Some(m.s_hat),
                        s_exact,
                        stderr: Some(m.stderr),
                        required_k: Some(m.required_k),
                        setup_cost: Some(m.setup_cost),
                        cost_metric: Some(m.cost_metric),
                        wall_time_ms,
                        error: None,
                    },
                    Err(e) => BenchRow {
                        s_exact,
                        wall_time_ms,
                        ..BenchRow::failed(&name, g.n(), g.num_edges(), q, method, &e)
                    },
                };
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// CSV text with the header always present, even for zero rows.
pub fn format_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::FormatViolation(format!("csv: {e}"));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::FormatViolation(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r
        .headers()
        .map_err(|e| Error::FormatViolation(format!("csv: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != CSV_COLUMNS {
        return Err(Error::FormatViolation(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                line: i + 2,
                msg: e.to_string(),
            })
        })
        .collect()
}

pub fn write_csv(rows: &[BenchRow], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_csv(rows)?.as_bytes())
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<BenchRow>> {
    let path = path.as_ref();
    parse_csv(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}
