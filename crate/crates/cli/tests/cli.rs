//! Integration tests for the command layer: experiment dispatch, artifact
//! layout, seed/out overrides, and failure behaviour, all driven through the
//! same entry points the binary uses.

use aniso_ppa_cli::commands::{cmd_run, cmd_verify, VerifyArgs};
use aniso_ppa_cli::config::ConfigFile;
use std::path::Path;

fn write_config(dir: &Path, text: &str) -> ConfigFile {
    let path = dir.join("experiment.cfg");
    std::fs::write(&path, text).unwrap();
    ConfigFile::from_path(&path).unwrap()
}

fn summary_value<'a>(summary: &'a str, key: &str) -> &'a str {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("summary missing key {key}:\n{summary}"))
}

fn strip_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# timestamp"))
        .collect::<Vec<_>>()
        .join("\n")
}

const SKEW_CONFIG: &str = "\
[experiment]
kind = ppa_run

[ppa]
operator = skew2
kernel = sep_power:p=4
lambda = 1.0
max_outer = 200
x0 = 5.0, 1.0
";

#[test]
fn ppa_run_produces_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SKEW_CONFIG);
    let artifacts = cmd_run(&config, Some(dir.path()), None).unwrap();
    assert!(artifacts.ok);

    let trace_path = dir.path().join("trace.csv");
    let summary_path = dir.path().join("summary.txt");
    assert!(trace_path.is_file());
    assert!(summary_path.is_file());
    assert!(artifacts.files.contains(&trace_path));
    assert!(artifacts.files.contains(&summary_path));

    let summary = std::fs::read_to_string(&summary_path).unwrap();
    assert_eq!(summary, artifacts.summary);
    assert_eq!(summary_value(&summary, "stop"), "DualNorm");

    // The CSV carries one row per recorded iterate, and the dual
    // Bregman-distance-to-zero column never increases on this instance.
    let csv = std::fs::read_to_string(&trace_path).unwrap();
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap();
    let breg_col = header
        .split(',')
        .position(|c| c == "bregman_to_zero")
        .unwrap();
    let breg: Vec<f64> = lines
        .map(|l| l.split(',').nth(breg_col).unwrap().parse().unwrap())
        .collect();
    let rows: usize = summary_value(&summary, "csv_rows").parse().unwrap();
    assert_eq!(breg.len(), rows);
    assert!(breg
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs())));
}

#[test]
fn ppa_run_is_deterministic_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SKEW_CONFIG);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    cmd_run(&config, Some(out_a.as_path()), None).unwrap();
    cmd_run(&config, Some(out_b.as_path()), None).unwrap();
    let csv_a = std::fs::read_to_string(out_a.join("trace.csv")).unwrap();
    let csv_b = std::fs::read_to_string(out_b.join("trace.csv")).unwrap();
    assert_eq!(strip_timestamp(&csv_a), strip_timestamp(&csv_b));
}

#[test]
fn unknown_experiment_kind_fails_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[experiment]\nkind = frobnicate\n");
    let out = dir.path().join("out");
    let err = cmd_run(&config, Some(out.as_path()), None).unwrap_err();
    assert!(err.to_string().contains("frobnicate"), "{err}");
    assert!(!out.exists(), "failed run must not leave artifacts behind");
}

#[test]
fn invalid_kernel_spec_fails_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[experiment]\nkind = ppa_run\n\n[ppa]\noperator = skew2\nkernel = sep_power:p=0.5\n",
    );
    let out = dir.path().join("out");
    assert!(cmd_run(&config, Some(out.as_path()), None).is_err());
    assert!(!out.exists());
}

#[test]
fn seed_override_changes_the_generated_instance() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[experiment]\nkind = alm_run\n\n[alm]\nproblem = game:n=4,m=5,seed=3\nprimal_kernel = sep_power:p=2\ndual_kernel = sep_power:p=2\nmax_outer = 5\ngap_tol = 0\n",
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    cmd_run(&config, Some(out_a.as_path()), None).unwrap();
    cmd_run(&config, Some(out_b.as_path()), Some(4)).unwrap();
    let csv_a = std::fs::read_to_string(out_a.join("alm_trace.csv")).unwrap();
    let csv_b = std::fs::read_to_string(out_b.join("alm_trace.csv")).unwrap();
    assert_ne!(strip_timestamp(&csv_a), strip_timestamp(&csv_b));
}

#[test]
fn verify_experiment_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[experiment]\nkind = verify_identities\n\n[verify]\npoints = 10\n",
    );
    let artifacts = cmd_run(&config, Some(dir.path()), None).unwrap();
    assert!(artifacts.ok);
    let report = std::fs::read_to_string(dir.path().join("verify.txt")).unwrap();
    assert!(report.contains("overall = PASS"), "{report}");
}

#[test]
fn verify_with_unreachable_tolerance_reports_failure() {
    let args = VerifyArgs {
        points: 10,
        tol: Some(1e-15),
        ..VerifyArgs::default()
    };
    let (reports, ok) = cmd_verify(&args).unwrap();
    assert!(!ok, "1e-15 is below float round-off for these identities");
    assert!(reports.iter().any(|r| !r.pass));
}

#[test]
fn rate_study_experiment_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[experiment]\nkind = rate_study\n\n[rate_study]\noperator = growth_linear\nkernels = iso_power:p=2; sep_power:p=3\nlambdas = 1.0\nmax_outer = 60\nx0 = 2.2, -1.8\n",
    );
    let artifacts = cmd_run(&config, Some(dir.path()), None).unwrap();
    assert!(artifacts.ok);
    let table = std::fs::read_to_string(dir.path().join("rate_study.csv")).unwrap();
    let body = strip_timestamp(&table);
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kernel,lambda,stop,iters,final_dual_norm,order_p,rate_p,order_2,rate_2"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("iso_power:p=2,"));
    assert!(rows[1].starts_with("sep_power:p=3,"));
}
