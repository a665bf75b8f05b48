//! Experiment runner for the `mceif` library.

pub mod error;
pub mod experiments;
pub mod output;
pub mod spec;

use std::fs;
use std::path::PathBuf;

use mceif::dataset::write_csv;

pub use error::{CliError, Result};
pub use experiments::{execute, ExperimentOutput};
pub use output::{Record, Summary};
pub use spec::{Experiment, ExperimentSpec};

/// Runs the experiment and writes `results.csv`, `summary.json`,
/// `metadata.json` (plus `gateaux.csv` and datasets when produced) into
/// `spec.out`.
pub fn run(spec: &ExperimentSpec) -> Result<Summary> {
    spec.validate()?;
    fs::create_dir_all(&spec.out)?;
    let out = execute(spec)?;
    if out.records.iter().any(|r| !r.value.is_finite()) {
        return Err(CliError::Numerical("experiment produced a non-finite value".into()));
    }
    let summary = Summary {
        experiment: spec.experiment.name().to_owned(),
        aggregates: output::aggregate(&out.records),
        extras: out.extras.clone(),
    };
    output::write_results(&spec.out.join("results.csv"), &out.records)?;
    output::write_json(&spec.out.join("summary.json"), &summary)?;
    output::write_json(&spec.out.join("metadata.json"), &output::metadata(spec))?;
    if !out.gateaux.is_empty() {
        let mut s = String::from("epsilon,lambda,x0,value\n");
        for g in &out.gateaux {
            s.push_str(&format!("{:?},{:?},{:?},{:?}\n", g.epsilon, g.lambda, g.x0, g.value));
        }
        fs::write(spec.out.join("gateaux.csv"), s)?;
    }
    if !out.datasets.is_empty() {
        let dir: PathBuf = spec.out.join("datasets");
        fs::create_dir_all(&dir)?;
        for ds in &out.datasets {
            write_csv(dir.join(format!("replicate_{}.csv", ds.replicate)), &ds.columns, &ds.data)?;
        }
    }
    Ok(summary)
}
