//! The three command entry points: config-driven runs, verification suites,
//! and kernel × relaxation rate studies.
//!
//! All outputs are assembled in memory and written only on success, so a
//! failing run leaves no partial artifacts. Trace CSVs begin with a
//! `# timestamp_unix:` comment line; everything below that line is a pure
//! function of the configuration and seed.

use crate::config::ConfigFile;
use crate::Error;
use aniso_ppa::alm::{self, AlmConfig, PrimalTerm, SaddleProblem};
use aniso_ppa::nalgebra::DVector;
use aniso_ppa::operators::OperatorSpec;
use aniso_ppa::ppa::{self, PpaConfig};
use aniso_ppa::prox::ProxKernel;
use aniso_ppa::verify::{self, CheckReport, SuiteOptions, VerifyTolerances};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// What a run produced: the directory, the files written, a human summary
/// (also written as `summary.txt`), and whether all embedded checks passed.
#[derive(Debug)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: String,
    pub ok: bool,
}

/// Concurrency cap for grid sweeps: `ANISO_PPA_THREADS` when set (minimum 1),
/// otherwise the machine's available parallelism.
pub fn thread_cap() -> usize {
    match std::env::var("ANISO_PPA_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_or(1, |t| t.max(1)),
        Err(_) => std::thread::available_parallelism().map_or(1, |p| p.get()),
    }
}

fn timestamp_line() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    format!("# timestamp_unix: {secs}\n")
}

fn write_artifact(dir: &Path, name: &str, content: &str) -> Result<PathBuf, Error> {
    let path = dir.join(name);
    std::fs::write(&path, content)?;
    Ok(path)
}

/// Replaces (or appends) the `seed=` argument of a problem spec string.
pub fn override_seed(spec: &str, seed: u64) -> String {
    match spec.split_once(':') {
        Some((head, args)) => {
            let mut parts: Vec<String> = Vec::new();
            let mut replaced = false;
            for part in args.split(',') {
                let part = part.trim();
                if part.starts_with("seed=") {
                    parts.push(format!("seed={seed}"));
                    replaced = true;
                } else {
                    parts.push(part.to_string());
                }
            }
            if !replaced {
                parts.push(format!("seed={seed}"));
            }
            format!("{head}:{}", parts.join(","))
        }
        None => format!("{spec}:seed={seed}"),
    }
}

/// Executes the experiment described by `config`.
///
/// `out_override` and `seed_override` take precedence over the
/// `[experiment]` keys `out` and `seed`. Returns the artifacts; `ok` is
/// `false` when an embedded verification table has failures.
pub fn cmd_run(
    config: &ConfigFile,
    out_override: Option<&Path>,
    seed_override: Option<u64>,
) -> Result<RunArtifacts, Error> {
    let experiment = config.section("experiment");
    let kind = experiment.require("kind")?;
    let out_dir = out_override
        .map(Path::to_path_buf)
        .or_else(|| experiment.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let seed = match seed_override {
        Some(s) => Some(s),
        None => match experiment.get("seed") {
            Some(_) => Some(experiment.get_u64("seed", 0)?),
            None => None,
        },
    };
    match kind {
        "ppa_run" => run_ppa_experiment(config, &out_dir),
        "alm_run" => run_alm_experiment(config, &out_dir, seed),
        "verify_identities" => run_verify_experiment(config, &out_dir, seed),
        "rate_study" => run_rate_study_experiment(config, &out_dir),
        other => Err(Error::Config(format!(
            "unknown experiment kind `{other}` (expected ppa_run | alm_run | verify_identities | rate_study)"
        ))),
    }
}

fn parse_start(
    section: &crate::config::Section<'_>,
    key: &str,
    dim: usize,
    default: DVector<f64>,
) -> Result<DVector<f64>, Error> {
    match section.get_f64_list(key)? {
        Some(values) => {
            if values.len() != dim {
                return Err(Error::Config(format!(
                    "key `{key}`: expected {dim} components, got {}",
                    values.len()
                )));
            }
            Ok(DVector::from_vec(values))
        }
        None => Ok(default),
    }
}

fn run_ppa_experiment(config: &ConfigFile, out_dir: &Path) -> Result<RunArtifacts, Error> {
    let section = config.section("ppa");
    let op = OperatorSpec::parse(section.require("operator")?)?;
    let kernel = ProxKernel::parse(section.require("kernel")?, op.dim())?;
    let mut ppa_config = PpaConfig::new(kernel);
    ppa_config.lambda = section.get_f64("lambda", 1.0)?;
    ppa_config.eps0 = section.get_f64("eps0", 0.0)?;
    ppa_config.max_outer = section.get_usize("max_outer", 500)?;
    ppa_config.dual_norm_tol = section.get_f64("dual_norm_tol", 1e-10)?;
    ppa_config.step_tol = section.get_f64("step_tol", 0.0)?;
    ppa_config.solver.residual_tol = section.get_f64("residual_tol", 1e-12)?;
    let x0 = parse_start(
        &section,
        "x0",
        op.dim(),
        DVector::from_element(op.dim(), 1.0),
    )?;

    let started = Instant::now();
    let trace = ppa::run_ppa(&op, &ppa_config, &x0)?;
    let elapsed = started.elapsed();

    let mut csv = timestamp_line().into_bytes();
    trace.write_csv(&mut csv)?;
    let fejer = ppa::fejer_report(&trace);

    let mut summary = String::new();
    let _ = writeln!(summary, "kind = ppa_run");
    let _ = writeln!(summary, "operator = {}", section.require("operator")?);
    let _ = writeln!(summary, "kernel = {}", trace.kernel_desc);
    let _ = writeln!(summary, "lambda = {}", trace.lambda);
    let _ = writeln!(summary, "stop = {:?}", trace.stop);
    let _ = writeln!(summary, "outer_iterations = {}", trace.records.len());
    let _ = writeln!(summary, "csv_rows = {}", trace.records.len());
    if let Some(last) = trace.records.last() {
        let _ = writeln!(summary, "final_dual_norm = {:e}", last.dual_norm);
        let _ = writeln!(summary, "final_bregman_to_zero = {:e}", last.bregman_to_zero);
    }
    let _ = writeln!(summary, "fejer_min_slack = {:e}", fejer.min_slack);
    if op.known_zero().is_some() {
        let tail = section.get_usize("tail", 20)?;
        for (label, values) in [
            ("dist_p", trace.records.iter().map(|r| r.dist_p).collect::<Vec<_>>()),
            ("dist_2", trace.records.iter().map(|r| r.dist_2).collect::<Vec<_>>()),
        ] {
            match ppa::estimate_order(&values, tail) {
                Ok((order, rate)) => {
                    let _ = writeln!(summary, "{label}_order = {order:.4}");
                    let _ = writeln!(summary, "{label}_rate = {rate:.4}");
                }
                Err(_) => {
                    let _ = writeln!(summary, "{label}_order = nan  # insufficient data");
                }
            }
        }
    }
    let _ = writeln!(summary, "wall_time_ms = {}", elapsed.as_millis());

    std::fs::create_dir_all(out_dir)?;
    let csv_text = String::from_utf8(csv).expect("trace CSV is UTF-8");
    let files = vec![
        write_artifact(out_dir, "trace.csv", &csv_text)?,
        write_artifact(out_dir, "summary.txt", &summary)?,
    ];
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
        summary,
        ok: true,
    })
}

/// Default starting pair: barycentres for simplex-constrained blocks, zero
/// vectors otherwise.
pub fn default_alm_start(problem: &SaddleProblem) -> (DVector<f64>, DVector<f64>) {
    let (n, m) = (problem.primal_dim(), problem.dual_dim());
    let x0 = match problem.f {
        PrimalTerm::SimplexIndicator => DVector::from_element(n, 1.0 / n as f64),
        PrimalTerm::ScaledSquaredNorm { .. } => DVector::zeros(n),
    };
    let y0 = match problem.gstar {
        alm::ConjTerm::SimplexIndicator => DVector::from_element(m, 1.0 / m as f64),
        _ => DVector::zeros(m),
    };
    (x0, y0)
}

fn run_alm_experiment(
    config: &ConfigFile,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<RunArtifacts, Error> {
    let section = config.section("alm");
    let mut problem_spec = section.require("problem")?.to_string();
    if let Some(s) = seed {
        problem_spec = override_seed(&problem_spec, s);
    }
    let problem = SaddleProblem::parse(&problem_spec)?;
    let (n, m) = (problem.primal_dim(), problem.dual_dim());
    let primal_kernel = ProxKernel::parse(section.require("primal_kernel")?, n)?;
    let dual_kernel = ProxKernel::parse(section.require("dual_kernel")?, m)?;
    let mut alm_config = AlmConfig::new(primal_kernel, dual_kernel);
    alm_config.max_outer = section.get_usize("max_outer", 300)?;
    alm_config.eps0 = section.get_f64("eps0", 1e-3)?;
    alm_config.gap_tol = section.get_f64("gap_tol", 1e-6)?;
    alm_config.kkt_tol = section.get_f64("kkt_tol", 0.0)?;
    alm_config.inner_max_iters = section.get_usize("inner_max_iters", 1000)?;
    alm_config.solver.residual_tol = section.get_f64("residual_tol", 1e-8)?;

    let (dx0, dy0) = default_alm_start(&problem);
    let x0 = parse_start(&section, "x0", n, dx0)?;
    let y0 = parse_start(&section, "y0", m, dy0)?;

    let started = Instant::now();
    let trace = alm::run_alm(&problem, &alm_config, &x0, &y0)?;
    let elapsed = started.elapsed();

    let mut csv = timestamp_line().into_bytes();
    trace.write_csv(&mut csv)?;

    let mut summary = String::new();
    let _ = writeln!(summary, "kind = alm_run");
    let _ = writeln!(summary, "problem = {problem_spec}");
    let _ = writeln!(summary, "primal_kernel = {}", trace.primal_kernel_desc);
    let _ = writeln!(summary, "dual_kernel = {}", trace.dual_kernel_desc);
    let _ = writeln!(summary, "stop = {:?}", trace.stop);
    let _ = writeln!(summary, "outer_iterations = {}", trace.records.len() - 1);
    let _ = writeln!(summary, "csv_rows = {}", trace.records.len());
    let _ = writeln!(summary, "final_gap = {:e}", trace.final_gap());
    let _ = writeln!(summary, "final_kkt = {:e}", trace.final_kkt());
    if let Some(last) = trace.records.last() {
        let _ = writeln!(summary, "cumulative_inner_iterations = {}", last.cum_inner);
    }
    let _ = writeln!(summary, "wall_time_ms = {}", elapsed.as_millis());

    std::fs::create_dir_all(out_dir)?;
    let csv_text = String::from_utf8(csv).expect("trace CSV is UTF-8");
    let files = vec![
        write_artifact(out_dir, "alm_trace.csv", &csv_text)?,
        write_artifact(out_dir, "summary.txt", &summary)?,
    ];
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
        summary,
        ok: true,
    })
}

/// Options for the verification command, resolved from flags or config.
#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub points: usize,
    pub seed: u64,
    /// Uniform tolerance override applied to every suite when set.
    pub tol: Option<f64>,
    pub threads: usize,
}

impl Default for VerifyArgs {
    fn default() -> Self {
        VerifyArgs {
            points: 100,
            seed: 2024,
            tol: None,
            threads: thread_cap(),
        }
    }
}

/// Runs all verification suites; returns the table and overall pass flag.
pub fn cmd_verify(args: &VerifyArgs) -> Result<(Vec<CheckReport>, bool), Error> {
    let options = SuiteOptions {
        points: args.points,
        seed: args.seed,
        threads: args.threads,
        ..SuiteOptions::default()
    };
    let mut tols = VerifyTolerances::default();
    if let Some(t) = args.tol {
        tols = VerifyTolerances {
            identity: t,
            algebraic: t,
            dfirm: t,
            enlargement: t,
        };
    }
    let reports = verify::run_all(&options, &tols)?;
    let ok = reports.iter().all(|r| r.pass);
    Ok((reports, ok))
}

pub fn format_verify_table(reports: &[CheckReport]) -> String {
    let mut text = String::new();
    for r in reports {
        let _ = writeln!(text, "{r}");
    }
    let _ = writeln!(
        text,
        "overall = {}",
        if reports.iter().all(|r| r.pass) {
            "PASS"
        } else {
            "FAIL"
        }
    );
    text
}

fn run_verify_experiment(
    config: &ConfigFile,
    out_dir: &Path,
    seed: Option<u64>,
) -> Result<RunArtifacts, Error> {
    let section = config.section("verify");
    let mut args = VerifyArgs {
        points: section.get_usize("points", 100)?,
        ..VerifyArgs::default()
    };
    if let Some(s) = seed {
        args.seed = s;
    }
    if section.get("tol").is_some() {
        args.tol = Some(section.get_f64("tol", 0.0)?);
    }
    let (reports, ok) = cmd_verify(&args)?;
    let table = format_verify_table(&reports);
    std::fs::create_dir_all(out_dir)?;
    let files = vec![write_artifact(out_dir, "verify.txt", &table)?];
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
        summary: table,
        ok,
    })
}

/// One cell of a rate study.
#[derive(Debug, Clone)]
pub struct RateStudyRow {
    pub kernel: String,
    pub lambda: f64,
    pub stop: String,
    pub iters: usize,
    pub final_dual_norm: f64,
    /// `(order, rate)` fits on the distance-to-solution tails; `NaN` when a
    /// fit had too few usable points (flagged, not fatal).
    pub order_p: f64,
    pub rate_p: f64,
    pub order_2: f64,
    pub rate_2: f64,
}

/// Sweeps `kernels × lambdas` on one operator (which must carry known-zero
/// metadata for the distance columns) and fits convergence orders on the
/// trace tails. Cells run on up to [`thread_cap`] workers.
pub fn cmd_rate_study(
    op: &OperatorSpec,
    kernel_specs: &[String],
    lambdas: &[f64],
    max_outer: usize,
    tail: usize,
    x0: &DVector<f64>,
    threads: usize,
) -> Result<Vec<RateStudyRow>, Error> {
    if op.known_zero().is_none() {
        return Err(Error::Config(
            "rate study requires an operator with known-zero metadata".to_string(),
        ));
    }
    let mut cells = Vec::new();
    for spec in kernel_specs {
        let kernel = ProxKernel::parse(spec, op.dim())?;
        for &lambda in lambdas {
            cells.push((kernel.clone(), lambda));
        }
    }
    if cells.is_empty() {
        return Ok(Vec::new());
    }

    let workers = threads.max(1).min(cells.len());
    let chunk = cells.len().div_ceil(workers);
    let results: Vec<Result<RateStudyRow, Error>> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for part in cells.chunks(chunk) {
            handles.push(scope.spawn(move || {
                part.iter()
                    .map(|(kernel, lambda)| rate_study_cell(op, kernel, *lambda, max_outer, tail, x0))
                    .collect::<Vec<_>>()
            }));
        }
        handles
            .into_iter()
            .flat_map(|h| h.join().unwrap())
            .collect()
    });
    results.into_iter().collect()
}

fn rate_study_cell(
    op: &OperatorSpec,
    kernel: &ProxKernel,
    lambda: f64,
    max_outer: usize,
    tail: usize,
    x0: &DVector<f64>,
) -> Result<RateStudyRow, Error> {
    let mut config = PpaConfig::new(kernel.clone());
    config.lambda = lambda;
    config.max_outer = max_outer;
    config.dual_norm_tol = 1e-13;
    let trace = ppa::run_ppa(op, &config, x0)?;
    let dist_p: Vec<f64> = trace.records.iter().map(|r| r.dist_p).collect();
    let dist_2: Vec<f64> = trace.records.iter().map(|r| r.dist_2).collect();
    let fit = |values: &[f64]| match ppa::estimate_order(values, tail) {
        Ok((order, rate)) => (order, rate),
        Err(_) => (f64::NAN, f64::NAN),
    };
    let (order_p, rate_p) = fit(&dist_p);
    let (order_2, rate_2) = fit(&dist_2);
    Ok(RateStudyRow {
        kernel: kernel.to_string(),
        lambda,
        stop: format!("{:?}", trace.stop),
        iters: trace.records.len(),
        final_dual_norm: trace.records.last().map_or(f64::NAN, |r| r.dual_norm),
        order_p,
        rate_p,
        order_2,
        rate_2,
    })
}

pub fn format_rate_table(rows: &[RateStudyRow]) -> String {
    let mut text = String::from(
        "kernel,lambda,stop,iters,final_dual_norm,order_p,rate_p,order_2,rate_2\n",
    );
    for r in rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{},{},{}",
            r.kernel,
            r.lambda,
            r.stop,
            r.iters,
            fmt_cell(r.final_dual_norm),
            fmt_cell(r.order_p),
            fmt_cell(r.rate_p),
            fmt_cell(r.order_2),
            fmt_cell(r.rate_2),
        );
    }
    text
}

fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

fn run_rate_study_experiment(config: &ConfigFile, out_dir: &Path) -> Result<RunArtifacts, Error> {
    let section = config.section("rate_study");
    let op = OperatorSpec::parse(section.require("operator")?)?;
    let kernel_specs: Vec<String> = section
        .require("kernels")?
        .split(';')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    let lambdas = section
        .get_f64_list("lambdas")?
        .unwrap_or_else(|| vec![1.0]);
    let max_outer = section.get_usize("max_outer", 60)?;
    let tail = section.get_usize("tail", 20)?;
    let x0 = parse_start(
        &section,
        "x0",
        op.dim(),
        DVector::from_element(op.dim(), 1.0),
    )?;
    let rows = cmd_rate_study(
        &op,
        &kernel_specs,
        &lambdas,
        max_outer,
        tail,
        &x0,
        thread_cap(),
    )?;
    let table = format_rate_table(&rows);
    let content = format!("{}{}", timestamp_line(), table);
    std::fs::create_dir_all(out_dir)?;
    let files = vec![write_artifact(out_dir, "rate_study.csv", &content)?];
    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        files,
        summary: table,
        ok: true,
    })
}
