use std::process::Command;

use freecov::ensembles::{EnsembleSpec, Field};
use freecov::harness::{
    run_convergence, run_counterexample, run_crossing_decay, run_lemma_suite, ConfigOverrides, ExperimentConfig,
};
use freecov::partitions::SetPartition;
use freecov::Error;

fn small_config() -> ExperimentConfig {
    ExperimentConfig { n_grid: vec![16, 32], p_max: 3, trials: 20, ..ExperimentConfig::default() }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freecov"))
}

#[test]
fn config_file_round_trip_through_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "ensemble = gaussian-scaled\nfield = real\nn_grid = 8, 16\np_max = 2\ntrials = 5\n").unwrap();
    let config = ConfigOverrides::from_file(&path).unwrap().resolve().unwrap();
    assert_eq!(config.ensemble, EnsembleSpec::gaussian_scaled(Field::Real));
    assert_eq!(config.n_grid, vec![8, 16]);
    assert!(ConfigOverrides::from_file(&dir.path().join("missing.conf")).is_err());
}

#[test]
fn convergence_writes_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig { output_dir: Some(dir.path().to_path_buf()), ..small_config() };
    let a = run_convergence(&config).unwrap();
    let b = run_convergence(&small_config()).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.rows.len(), 6);
    let csv = std::fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    assert!(csv.starts_with("n,N,p,estimate,std_error,trials,predicted,abs_gap,rel_gap,within_tolerance\n"));
    assert_eq!(csv.lines().count(), 7);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("convergence.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["command"], "simulate");
    assert_eq!(json["metadata"]["config"]["trials"], 20);
    assert_eq!(json["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn convergence_refuses_canonical_basis() {
    let config = ExperimentConfig { ensemble: EnsembleSpec::canonical_basis(Field::Complex), ..small_config() };
    match run_convergence(&config) {
        Err(Error::HypothesisViolated { l4_small, l4_large, .. }) => assert!(l4_large >= 3.0 * l4_small),
        other => panic!("expected a hypothesis violation, got {other:?}"),
    }
}

#[test]
fn counterexample_needs_canonical_basis_at_lambda_one() {
    assert!(run_counterexample(&small_config()).is_err());
    let basis = ExperimentConfig { ensemble: EnsembleSpec::canonical_basis(Field::Complex), ..small_config() };
    assert!(run_counterexample(&ExperimentConfig { lambda: 0.5, ..basis.clone() }).is_err());
    let report = run_counterexample(&basis).unwrap();
    assert_eq!(report.rows.len(), 6);
    assert!(report.rows.iter().all(|r| r.predicted_classical >= r.predicted_free));
}

#[test]
fn crossing_needs_a_crossing_partition() {
    let nc = SetPartition::new(4, vec![vec![1, 2], vec![3, 4]]).unwrap();
    assert!(run_crossing_decay(&small_config(), &nc).is_err());
    let crossing = SetPartition::new(4, vec![vec![1, 3], vec![2, 4]]).unwrap();
    let report = run_crossing_decay(&ExperimentConfig { trials: 200, ..small_config() }, &crossing).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert!(report.slope.is_finite());
}

#[test]
fn lemma_suite_random_part_is_reproducible() {
    let a = run_lemma_suite(3, 200, false).unwrap();
    let b = run_lemma_suite(3, 200, false).unwrap();
    assert_eq!(a, b);
    assert!(a.passed());
    assert_eq!(a.tally("2.2").unwrap().instances, 200);
    assert_eq!(a.tally("2.4").unwrap().instances, 0);
}

#[test]
fn cli_predict_prints_csv() {
    let out = bin().args(["predict", "--cumulants", "1,1,1,1", "--p-max", "4"]).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, "p,predicted_free,predicted_classical\n1,1.0,1.0\n2,2.0,2.0\n3,5.0,5.0\n4,14.0,15.0\n");
}

#[test]
fn cli_exit_codes() {
    let bad = bin().args(["simulate", "--n-grid", "64,32"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let refused = bin()
        .args(["simulate", "--ensemble", "canonical-basis", "--n-grid", "16", "--p-max", "2", "--trials", "4"])
        .output()
        .unwrap();
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("fourth-moment"));
    let ok = bin().args(["lemmas", "--random", "50", "--no-exhaustive", "--format", "json"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(json["tallies"].as_array().unwrap().len(), 5);
}

#[test]
fn cli_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("c.conf");
    std::fs::write(&conf, "n_grid = 16\np_max = 2\ntrials = 4\nseed = 1\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&conf)
        .args(["--seed", "2", "--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("convergence.json")).unwrap()).unwrap();
    assert_eq!(json["metadata"]["config"]["seed"], 2);
    assert_eq!(json["metadata"]["config"]["p_max"], 2);
}
