//! Batch experiment runner: TOML scenario files describing a matrix, a
//! function and a grid of run configurations; per-run convergence CSVs and
//! a summary table. Exit code 0 when every run converged (or broke down
//! exactly), 2 when any run hit its iteration cap or stagnated.

use crate::error::{Error, Result};
use crate::funm::{
    reference_solution, run_invsqrt, sign_action, sqrt_action, ConvergenceReport, FunmKind, Method,
    OraclePath, RunConfig,
};
use crate::linalg::dense_inv_sqrtm_times;
use crate::operators::{
    laplace_extreme_eigenvalues, make_graph_laplacian, make_laplace, make_synthetic_nonhermitian,
    random_digraph_adjacency, read_matrix_market, rng::random_unit_vector, LaplaceFamily,
    SparseMatrix,
};
use crate::Scalar;
use num_complex::Complex64;
use serde::Deserialize;
use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

/// Scenario file: matrix source, function, oracle toggle, output directory
/// and the method grid.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub matrix: MatrixSpec,
    pub function: FunctionSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub vector: VectorSpec,
    #[serde(rename = "runs")]
    pub runs: Vec<RunSpec>,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    pub kind: String,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub path: Option<String>,
    /// Extra random arcs for the digraph generator.
    #[serde(default)]
    pub extra_edges: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub kind: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default = "default_dense_limit")]
    pub dense_limit: usize,
}

fn default_dense_limit() -> usize {
    2000
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec {
            enabled: false,
            dense_limit: default_dense_limit(),
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    /// "normal" (unit-norm Gaussian) or "coordinate" (a canonical unit
    /// vector picked by the seed).
    #[serde(default = "default_vector_kind")]
    pub kind: String,
}

fn default_vector_kind() -> String {
    "normal".to_string()
}

impl Default for VectorSpec {
    fn default() -> Self {
        VectorSpec {
            kind: default_vector_kind(),
        }
    }
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub method: String,
    #[serde(default)]
    pub poly: Option<String>,
    #[serde(default = "default_d")]
    pub d: usize,
    pub tol: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub check_every: Option<usize>,
    #[serde(default)]
    pub reorth: Option<bool>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub use_lanczos: bool,
    #[serde(default)]
    pub two_pass: bool,
    #[serde(default)]
    pub harmonic: bool,
    #[serde(default = "default_true")]
    pub store_y: bool,
    #[serde(default)]
    pub random_start: bool,
    #[serde(default)]
    pub interval: Option<[f64; 2]>,
    #[serde(default)]
    pub min_abs: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub ritz_dim: Option<usize>,
}

fn default_d() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// One summary row per run.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub label: String,
    pub d: usize,
    pub iterations: usize,
    pub mvms: u64,
    pub inner_products: u64,
    pub wall_time: f64,
    pub final_est: f64,
    pub final_true_err: Option<f64>,
    pub termination: String,
}

/// Aggregated scenario outcome.
pub struct ScenarioOutcome {
    pub rows: Vec<ResultRow>,
    pub reports: Vec<ConvergenceReport>,
    pub out_dir: PathBuf,
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioFile> {
    toml::from_str(text).map_err(|e| Error::Config(format!("scenario parse error: {e}")))
}

fn build_matrix(spec: &MatrixSpec, scenario_seed: u64) -> Result<SparseMatrix> {
    let seed = spec.seed.unwrap_or(scenario_seed);
    match spec.kind.as_str() {
        "laplace1d" | "laplace2d" | "laplace3d" => {
            let family = LaplaceFamily::parse(&spec.kind).unwrap();
            if spec.n == 0 {
                return Err(Error::Config("laplace matrices need n >= 1".into()));
            }
            Ok(make_laplace(family, spec.n))
        }
        "graph_in_degree_laplacian" => {
            if spec.n < 2 {
                return Err(Error::Config("graph Laplacian needs n >= 2".into()));
            }
            let extra = spec.extra_edges.unwrap_or(3 * spec.n);
            let adj = random_digraph_adjacency(spec.n, extra, seed);
            Ok(make_graph_laplacian(&adj))
        }
        "synthetic_nonhermitian" => {
            if spec.n < 2 {
                return Err(Error::Config("synthetic matrix needs n >= 2".into()));
            }
            make_synthetic_nonhermitian(spec.n, seed)
        }
        "matrix_market" => {
            let path = spec
                .path
                .as_ref()
                .ok_or_else(|| Error::Config("matrix_market needs a path".into()))?;
            read_matrix_market(path)
        }
        other => Err(Error::Config(format!("unknown matrix kind: {other}"))),
    }
}

/// Closed-form spectral interval for model problems (used by the
/// Chebyshev strategy when the scenario does not pin one).
fn known_interval(spec: &MatrixSpec) -> Option<(f64, f64)> {
    LaplaceFamily::parse(&spec.kind).map(|family| laplace_extreme_eigenvalues(family, spec.n))
}

fn start_vector(kind: &str, n: usize, seed: u64) -> Result<Vec<Scalar>> {
    match kind {
        "normal" => Ok(random_unit_vector(n, seed)),
        "coordinate" => {
            let mut b = vec![Complex64::new(0.0, 0.0); n];
            b[(seed as usize) % n] = Complex64::new(1.0, 0.0);
            Ok(b)
        }
        other => Err(Error::Config(format!("unknown vector kind: {other}"))),
    }
}

fn run_config_from(
    spec: &RunSpec,
    scenario: &ScenarioFile,
    matrix: &MatrixSpec,
) -> Result<RunConfig> {
    let method = Method::parse(&spec.method)
        .ok_or_else(|| Error::Config(format!("unknown method: {}", spec.method)))?;
    let poly_kind = match spec.poly.as_deref() {
        None | Some("none") => None,
        Some(p) => Some(p.to_string()),
    };
    let env_seed = std::env::var("POLYPREC_SEED")
        .ok()
        .and_then(|s| s.parse().ok());
    let seed = env_seed.or(spec.seed).unwrap_or(scenario.seed);
    let mut cfg = RunConfig::plain(spec.max_iter, spec.tol, seed);
    cfg.method = method;
    cfg.poly_kind = poly_kind;
    cfg.d = spec.d;
    cfg.check_every = spec.check_every;
    // Reorthogonalization defaults on for the graph scenario.
    cfg.reorth = spec
        .reorth
        .unwrap_or(matrix.kind == "graph_in_degree_laplacian");
    cfg.use_lanczos = spec.use_lanczos;
    cfg.two_pass = spec.two_pass;
    cfg.harmonic = spec.harmonic;
    cfg.store_y = spec.store_y;
    cfg.ritz_random_start = spec.random_start;
    cfg.interval = spec
        .interval
        .map(|[a, b]| (a, b))
        .or_else(|| known_interval(matrix));
    if let Some(m) = spec.min_abs {
        cfg.contour_min_abs = m;
    }
    if let Some(s) = spec.step {
        cfg.contour_step = s;
    }
    if let Some(r) = spec.ritz_dim {
        cfg.contour_ritz_dim = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Executes a parsed scenario. Returns the process exit code: 0 when all
/// runs succeeded, 2 when any hit max_iter or stagnation.
pub fn run_scenario_parsed(
    scenario: &ScenarioFile,
    jobs: usize,
    out_override: Option<&Path>,
) -> Result<(i32, ScenarioOutcome)> {
    if scenario.runs.is_empty() {
        return Err(Error::Config("scenario has no runs".into()));
    }
    let function = FunmKind::parse(&scenario.function.kind)
        .ok_or_else(|| Error::Config(format!("unknown function: {}", scenario.function.kind)))?;
    let matrix = Arc::new(build_matrix(&scenario.matrix, scenario.seed)?);
    let n = matrix.dim();
    if scenario.oracle.enabled && n > scenario.oracle.dense_limit {
        return Err(Error::Config(format!(
            "oracle enabled but n = {n} exceeds dense_limit = {}",
            scenario.oracle.dense_limit
        )));
    }

    // Validate configs up front (fail before any run executes).
    let configs: Vec<RunConfig> = scenario
        .runs
        .iter()
        .map(|r| run_config_from(r, scenario, &scenario.matrix))
        .collect::<Result<_>>()?;

    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .or_else(|| scenario.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("polyprec-out"));
    fs::create_dir_all(&out_dir)?;

    // Oracles per distinct seed (b depends on the run seed).
    let mut oracle_cache: HashMap<u64, Arc<OraclePair>> = HashMap::new();
    let mut oracles: Vec<Option<Arc<OraclePair>>> = Vec::with_capacity(configs.len());
    for cfg in &configs {
        if !scenario.oracle.enabled {
            oracles.push(None);
            continue;
        }
        let pair = match oracle_cache.entry(cfg.seed) {
            std::collections::hash_map::Entry::Occupied(e) => Arc::clone(e.get()),
            std::collections::hash_map::Entry::Vacant(e) => {
                let b = start_vector(&scenario.vector.kind, n, cfg.seed)?;
                let pair = Arc::new(compute_oracles(&matrix, &b, function)?);
                e.insert(Arc::clone(&pair));
                pair
            }
        };
        oracles.push(Some(pair));
    }

    let labels: Vec<String> = scenario
        .runs
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let base = r.label.clone().unwrap_or_else(|| {
                format!(
                    "{}-{}-d{}",
                    r.method,
                    r.poly.as_deref().unwrap_or("none"),
                    r.d
                )
            });
            format!("{:02}_{}", i, sanitize(&base))
        })
        .collect();

    // Execute the grid, optionally in parallel.
    let jobs = jobs.max(1).min(configs.len());
    let results: Mutex<Vec<Option<(Vec<Scalar>, ConvergenceReport)>>> =
        Mutex::new(vec![None; configs.len()]);
    let next: Mutex<usize> = Mutex::new(0);
    let vector_kind = scenario.vector.kind.clone();
    let first_error: Mutex<Option<Error>> = Mutex::new(None);

    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = {
                    let mut guard = next.lock().unwrap();
                    if *guard >= configs.len() {
                        return;
                    }
                    let i = *guard;
                    *guard += 1;
                    i
                };
                let cfg = &configs[idx];
                let outcome = (|| -> Result<(Vec<Scalar>, ConvergenceReport)> {
                    let b = start_vector(&vector_kind, n, cfg.seed)?;
                    let checkpoint_oracle = oracles[idx].as_ref().map(|p| p.checkpoint.as_slice());
                    dispatch(function, Arc::clone(&matrix), &b, cfg, checkpoint_oracle)
                })();
                match outcome {
                    Ok(pair) => {
                        results.lock().unwrap()[idx] = Some(pair);
                    }
                    Err(e) => {
                        let mut slot = first_error.lock().unwrap();
                        if slot.is_none() {
                            *slot = Some(e);
                        }
                        return;
                    }
                }
            });
        }
    });

    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }
    let results: Vec<(Vec<Scalar>, ConvergenceReport)> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("all runs completed"))
        .collect();

    // Emit per-run CSVs and build the summary.
    let mut rows = Vec::with_capacity(results.len());
    let mut reports = Vec::with_capacity(results.len());
    let mut any_failed = false;
    for (idx, (f, report)) in results.into_iter().enumerate() {
        if let Some(cert) = &report.branch_certificate {
            if !cert.satisfied {
                eprintln!(
                    "polyprec: warning: run {} proceeded with an unsatisfied branch \
                     certificate (min Re q(z) = {:.3e}); the computed square root may \
                     be non-principal",
                    labels[idx], cert.min_real_part
                );
            }
        }
        let csv_path = out_dir.join(format!("{}_convergence.csv", labels[idx]));
        emit_convergence_csv(&report, &csv_path)?;

        // Final true error against the target oracle (for sign runs the
        // checkpoint oracle tracks the inner iterates instead).
        let final_true = oracles[idx].as_ref().map(|p| {
            let diff = crate::linalg::sub_vec(&f, &p.target);
            crate::linalg::norm2(&diff) / crate::linalg::norm2(&p.target)
        });
        if !report.termination.is_success() {
            any_failed = true;
        }
        rows.push(ResultRow {
            label: labels[idx].clone(),
            d: report.d,
            iterations: report.iterations,
            mvms: report.mvms,
            inner_products: report.inner_products,
            wall_time: report.wall_time,
            final_est: report.final_estimate(),
            final_true_err: final_true.or(report.final_true_err()),
            termination: report.termination.name().to_string(),
        });
        reports.push(report);
    }

    write_summary_csv(&rows, &out_dir.join("summary.csv"))?;
    write_summary_text(&rows, &out_dir.join("summary.txt"))?;

    let code = if any_failed { 2 } else { 0 };
    Ok((
        code,
        ScenarioOutcome {
            rows,
            reports,
            out_dir,
        },
    ))
}

/// Loads and executes a scenario file.
pub fn run_scenario(path: &Path, jobs: usize, out_override: Option<&Path>) -> Result<i32> {
    let text = fs::read_to_string(path)?;
    let scenario = parse_scenario_str(&text)?;
    let (code, _) = run_scenario_parsed(&scenario, jobs, out_override)?;
    Ok(code)
}

struct OraclePair {
    /// Reference for the returned vector (`f(A) b`).
    target: Vec<Scalar>,
    /// Reference for the checkpoint iterates (differs from `target` only
    /// for the sign function, whose iterates approximate `(A^2)^{-1/2} b`).
    checkpoint: Vec<Scalar>,
}

fn compute_oracles(a: &SparseMatrix, b: &[Scalar], kind: FunmKind) -> Result<OraclePair> {
    let target = reference_solution(a, b, kind, OraclePath::Auto)?;
    let checkpoint = match kind {
        FunmKind::Sign => {
            let dense = a.to_dense();
            let a2 = dense.matmul(&dense);
            dense_inv_sqrtm_times(&a2, b)?
        }
        _ => target.clone(),
    };
    Ok(OraclePair { target, checkpoint })
}

fn dispatch(
    kind: FunmKind,
    a: Arc<SparseMatrix>,
    b: &[Scalar],
    cfg: &RunConfig,
    oracle: Option<&[Scalar]>,
) -> Result<(Vec<Scalar>, ConvergenceReport)> {
    match kind {
        FunmKind::InvSqrt => run_invsqrt(a, b, None, cfg, oracle),
        FunmKind::Sqrt => sqrt_action(a, b, None, cfg, oracle),
        FunmKind::Sign => sign_action(a, b, None, cfg, oracle),
    }
}

/// Writes one checkpoint per row with 17 significant digits; the
/// true-error column appears only when the report carries oracle data.
pub fn emit_convergence_csv(report: &ConvergenceReport, path: &Path) -> Result<()> {
    assert!(!report.checkpoints.is_empty(), "report must be nonempty");
    let with_true = report.checkpoints.iter().any(|c| c.true_rel_err.is_some());
    let mut out = String::new();
    out.push_str("m,mvms_cumulative,est_rel_diff");
    if with_true {
        out.push_str(",true_rel_err");
    }
    out.push('\n');
    for c in &report.checkpoints {
        out.push_str(&format!(
            "{},{},{:.16e}",
            c.m, c.mvms_cumulative, c.est_rel_diff
        ));
        if with_true {
            match c.true_rel_err {
                Some(t) => out.push_str(&format!(",{t:.16e}")),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

fn write_summary_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("label,d,iterations,mvms,inner_products,final_est,final_true_err,termination\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{:.16e},{},{}\n",
            r.label,
            r.d,
            r.iterations,
            r.mvms,
            r.inner_products,
            r.final_est,
            r.final_true_err
                .map(|t| format!("{t:.16e}"))
                .unwrap_or_default(),
            r.termination
        ));
    }
    atomic_write(path, out.as_bytes())
}

fn write_summary_text(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<28} {:>4} {:>10} {:>10} {:>14} {:>12} {:>12} {:>10} {:>12}\n",
        "label",
        "d",
        "iterations",
        "mvms",
        "inner_products",
        "final_est",
        "true_err",
        "time_s",
        "termination"
    ));
    for r in rows {
        out.push_str(&format!(
            "{:<28} {:>4} {:>10} {:>10} {:>14} {:>12.3e} {:>12} {:>10.3} {:>12}\n",
            r.label,
            r.d,
            r.iterations,
            r.mvms,
            r.inner_products,
            r.final_est,
            r.final_true_err
                .map(|t| format!("{t:.3e}"))
                .unwrap_or_else(|| "-".to_string()),
            r.wall_time,
            r.termination
        ));
    }
    atomic_write(path, out.as_bytes())
}

/// Writes through a temp file and renames, so concurrent runs never see a
/// half-written file.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
