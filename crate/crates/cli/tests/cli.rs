use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mceif_cli::spec::{Experiment, ExperimentSpec};
use mceif_cli::run;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mceif")).args(args).output().unwrap()
}

fn small(experiment: Experiment, out: &Path) -> ExperimentSpec {
    let mut o = BTreeMap::new();
    o.insert("out".to_owned(), out.display().to_string());
    o.insert("replicates".to_owned(), "2".to_owned());
    o.insert("seed".to_owned(), "11".to_owned());
    match experiment {
        Experiment::DensityCompare => {
            o.insert("m-grid".into(), "200,800".into());
            o.insert("gateaux-eps".into(), "0.1,0.02".into());
            o.insert("gateaux-lambda".into(), "0.3,0.1".into());
        }
        Experiment::McDecay => {
            o.insert("m-grid".into(), "100,400".into());
        }
        Experiment::DimScaling => {
            o.insert("m".into(), "1000".into());
            o.insert("f-grid".into(), "2,5".into());
        }
        Experiment::EstimatorParity | Experiment::EstimatorMse => {
            o.insert("m".into(), "500".into());
            o.insert("n".into(), "80".into());
            o.insert("f".into(), "3".into());
            o.insert("fisher-mode".into(), "cached".into());
        }
        Experiment::Markowitz => {
            o.insert("m".into(), "500".into());
            o.insert("n".into(), "120".into());
            o.insert("d".into(), "3".into());
        }
    }
    ExperimentSpec::build(experiment, &o).unwrap()
}

const ALL: [Experiment; 6] = [
    Experiment::DensityCompare,
    Experiment::McDecay,
    Experiment::DimScaling,
    Experiment::EstimatorParity,
    Experiment::EstimatorMse,
    Experiment::Markowitz,
];

#[test]
fn every_experiment_writes_its_files() {
    for exp in ALL {
        let dir = tempfile::tempdir().unwrap();
        let spec = small(exp, dir.path());
        let summary = run(&spec).unwrap();
        assert_eq!(summary.experiment, exp.name());
        assert!(!summary.aggregates.is_empty(), "{}", exp.name());
        let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("replicate,estimator,metric,value"));
        assert!(csv.lines().count() > 1);
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
        assert_eq!(meta["spec"]["experiment"], exp.name());
        assert!(meta["version"].as_str().unwrap().starts_with('v'));
        for key in ["rel_tolerance", "damping", "max_steps", "lkj_shape", "gateaux_grid", "markowitz_fit"] {
            assert!(!find(&meta, key).is_null(), "{key} missing from metadata of {}", exp.name());
        }
        let summary_json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
        assert!(summary_json["aggregates"][0]["mean"].is_number());
    }
}

/// First value stored under `key` anywhere in the document.
fn find<'a>(v: &'a serde_json::Value, key: &str) -> &'a serde_json::Value {
    static NULL: serde_json::Value = serde_json::Value::Null;
    match v {
        serde_json::Value::Object(map) => {
            if let Some(x) = map.get(key) {
                return x;
            }
            map.values().map(|x| find(x, key)).find(|x| !x.is_null()).unwrap_or(&NULL)
        }
        serde_json::Value::Array(items) => items.iter().map(|x| find(x, key)).find(|x| !x.is_null()).unwrap_or(&NULL),
        _ => &NULL,
    }
}

#[test]
fn identical_specs_give_identical_results() {
    for exp in ALL {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run(&small(exp, a.path())).unwrap();
        run(&small(exp, b.path())).unwrap();
        let ra = fs::read(a.path().join("results.csv")).unwrap();
        let rb = fs::read(b.path().join("results.csv")).unwrap();
        assert_eq!(ra, rb, "{} not reproducible", exp.name());
    }
}

#[test]
fn a_different_seed_changes_the_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = small(Experiment::McDecay, a.path());
    run(&spec).unwrap();
    let mut other = small(Experiment::McDecay, b.path());
    other.seed += 1;
    run(&other).unwrap();
    assert_ne!(
        fs::read(a.path().join("results.csv")).unwrap(),
        fs::read(b.path().join("results.csv")).unwrap()
    );
}

#[test]
fn gateaux_export_covers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small(Experiment::DensityCompare, dir.path());
    let summary = run(&spec).unwrap();
    let csv = fs::read_to_string(dir.path().join("gateaux.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("epsilon,lambda,x0,value"));
    let n = spec.gateaux_eps.len() * spec.gateaux_lambda.len() * spec.eval_points.len();
    assert_eq!(lines.count(), n);
    // The baseline depends on its tuning parameters far more than the MC-EIF on its seed.
    assert!(summary.extras["gateaux_spread"] > summary.extras["mc_eif_spread"]);
}

#[test]
fn datasets_are_saved_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small(Experiment::EstimatorMse, dir.path());
    spec.save_datasets = true;
    run(&spec).unwrap();
    for r in 0..spec.replicates {
        let path = dir.path().join("datasets").join(format!("replicate_{r}.csv"));
        let (cols, data) = mceif::dataset::read_csv::<f64>(&path).unwrap();
        assert_eq!(data.len(), spec.n);
        assert_eq!(cols.len(), data.dim());
    }
}

#[test]
fn binary_runs_and_flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "# small run\nm_grid = 100,200\nreplicates = 5\nseed = 3\n").unwrap();
    let out = dir.path().join("out");
    let res = bin(&[
        "mc-decay",
        "--config",
        cfg.to_str().unwrap(),
        "--replicates",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["spec"]["replicates"], 2);
    assert_eq!(meta["spec"]["seed"], 3);
    assert_eq!(meta["spec"]["m_grid"], serde_json::json!([100, 200]));
}

fn assert_single_line_failure(res: &Output, code: i32) {
    assert_eq!(res.status.code(), Some(code));
    let err = String::from_utf8_lossy(&res.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "), "{err}");
}

#[test]
fn invalid_specs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = out.to_str().unwrap();
    assert_single_line_failure(&bin(&["mc-decay", "--replicates", "0", "--out", o]), 1);
    assert_single_line_failure(&bin(&["estimator-mse", "--n", "1", "--out", o]), 1);
    assert_single_line_failure(&bin(&["mc-decay", "--m-grid", "10,x", "--out", o]), 1);
    assert_single_line_failure(&bin(&["no-such-experiment"]), 1);
    assert_single_line_failure(&bin(&["mc-decay", "--config", "/nonexistent/x.cfg"]), 1);
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "unknown_key = 4\n").unwrap();
    assert_single_line_failure(&bin(&["mc-decay", "--config", cfg.to_str().unwrap(), "--out", o]), 1);
}
