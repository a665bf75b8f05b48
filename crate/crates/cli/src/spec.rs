//! Experiment specification: defaults, `key=value` config files and flag
//! overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use mceif::estimators::{MapConfig, TmleConfig};
use mceif::{CgConfig, Damping, FisherMode};
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    DensityCompare,
    McDecay,
    DimScaling,
    EstimatorParity,
    EstimatorMse,
    Markowitz,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::DensityCompare => "density-compare",
            Experiment::McDecay => "mc-decay",
            Experiment::DimScaling => "dim-scaling",
            Experiment::EstimatorParity => "estimator-parity",
            Experiment::EstimatorMse => "estimator-mse",
            Experiment::Markowitz => "markowitz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DmlMoment {
    PlugIn,
    RegressionDifference,
    Ipw,
}

impl DmlMoment {
    fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, true).ok()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "F")]
    pub f: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub replicates: usize,
    pub out: PathBuf,
    pub m_grid: Vec<usize>,
    pub f_grid: Vec<usize>,
    pub save_datasets: bool,
    pub dml_moment: DmlMoment,
    pub cg: CgConfig<f64>,
    pub fisher_mode: FisherMode,
    pub map: MapConfig,
    pub tmle: TmleConfig,
    /// Gateaux perturbation masses and kernel bandwidths (full grid).
    pub gateaux_eps: Vec<f64>,
    pub gateaux_lambda: Vec<f64>,
    /// Evaluation points for the one-dimensional experiments.
    pub eval_points: Vec<f64>,
}

pub const KEYS: &[&str] = &[
    "seed",
    "m",
    "n",
    "f",
    "d",
    "replicates",
    "out",
    "m-grid",
    "f-grid",
    "save-datasets",
    "dml-moment",
    "cg-tolerance",
    "cg-max-iters",
    "damping",
    "fisher-mode",
    "map-iters",
    "map-step-size",
    "map-tolerance",
    "tmle-steps",
    "tmle-step-size",
    "tmle-margin",
    "tmle-samples",
    "gateaux-eps",
    "gateaux-lambda",
    "eval-points",
];

impl ExperimentSpec {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut spec = Self {
            experiment,
            seed: 0,
            m: 10_000,
            n: 500,
            f: 50,
            d: 25,
            replicates: 20,
            out: PathBuf::from("out").join(experiment.name()),
            m_grid: vec![100, 1_000, 10_000, 100_000],
            f_grid: vec![5, 25, 50, 100],
            save_datasets: false,
            dml_moment: DmlMoment::RegressionDifference,
            cg: CgConfig::default(),
            fisher_mode: FisherMode::Cached,
            map: MapConfig::default(),
            tmle: TmleConfig::default(),
            gateaux_eps: vec![0.5, 0.1, 0.02, 0.004],
            gateaux_lambda: vec![0.5, 0.1, 0.02, 0.004],
            eval_points: vec![-3.0, -2.0, -0.5, 0.0, 0.5, 2.0, 3.0],
        };
        match experiment {
            Experiment::DensityCompare => {
                spec.m_grid = vec![1_000, 10_000, 100_000];
                spec.replicates = 5;
            }
            Experiment::McDecay => spec.replicates = 10,
            Experiment::DimScaling => spec.replicates = 5,
            Experiment::EstimatorParity => {
                // Parity needs a small MC-EIF error at p = 402; streaming keeps memory flat.
                spec.f = 200;
                spec.m = 200_000;
                spec.fisher_mode = FisherMode::Streaming;
            }
            Experiment::EstimatorMse => {
                spec.f = 200;
                spec.replicates = 100;
            }
            Experiment::Markowitz => spec.n = 1000,
        }
        spec
    }

    /// Defaults, then `overrides` (config file entries overlaid by flags).
    pub fn build(experiment: Experiment, overrides: &BTreeMap<String, String>) -> Result<Self> {
        let mut spec = Self::defaults(experiment);
        for (key, raw) in overrides {
            spec.set(key, raw.trim())?;
        }
        spec.validate()?;
        Ok(spec)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "seed" => self.seed = parse(key, v)?,
            "m" => self.m = parse(key, v)?,
            "n" => self.n = parse(key, v)?,
            "f" => self.f = parse(key, v)?,
            "d" => self.d = parse(key, v)?,
            "replicates" => self.replicates = parse(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "m-grid" => self.m_grid = parse_list(key, v)?,
            "f-grid" => self.f_grid = parse_list(key, v)?,
            "save-datasets" => self.save_datasets = parse(key, v)?,
            "dml-moment" => {
                self.dml_moment = DmlMoment::parse(v)
                    .ok_or_else(|| invalid(format!("unknown dml-moment {v:?}")))?
            }
            "cg-tolerance" => self.cg.rel_tolerance = parse(key, v)?,
            "cg-max-iters" => self.cg.max_iters = Some(parse(key, v)?),
            "damping" => self.cg.damping = Damping::Relative(parse(key, v)?),
            "fisher-mode" => {
                self.fisher_mode = match v {
                    "cached" => FisherMode::Cached,
                    "streaming" => FisherMode::Streaming,
                    _ => return Err(invalid(format!("unknown fisher-mode {v:?}"))),
                }
            }
            "map-iters" => self.map.max_iters = parse(key, v)?,
            "map-step-size" => self.map.step_size = parse(key, v)?,
            "map-tolerance" => self.map.grad_tolerance = parse(key, v)?,
            "tmle-steps" => self.tmle.max_steps = parse(key, v)?,
            "tmle-step-size" => self.tmle.step_size = parse(key, v)?,
            "tmle-margin" => self.tmle.margin = parse(key, v)?,
            "tmle-samples" => self.tmle.samples = parse(key, v)?,
            "gateaux-eps" => self.gateaux_eps = parse_list(key, v)?,
            "gateaux-lambda" => self.gateaux_lambda = parse_list(key, v)?,
            "eval-points" => self.eval_points = parse_list(key, v)?,
            _ => return Err(invalid(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("m", self.m),
            ("n", self.n),
            ("f", self.f),
            ("d", self.d),
            ("replicates", self.replicates),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(invalid(format!("{name} must be >= 1")));
            }
        }
        if self.n < 2 {
            return Err(invalid("n must be >= 2 to split the data".into()));
        }
        if self.d < 2 && self.experiment == Experiment::Markowitz {
            return Err(invalid("d must be >= 2".into()));
        }
        for (name, list) in [("m-grid", &self.m_grid), ("f-grid", &self.f_grid)] {
            if list.is_empty() || list.contains(&0) {
                return Err(invalid(format!("{name} entries must be >= 1")));
            }
        }
        if self.gateaux_eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(invalid("gateaux-eps entries must lie in (0, 1)".into()));
        }
        if self.gateaux_lambda.iter().any(|&l| !(l > 0.0)) {
            return Err(invalid("gateaux-lambda entries must be positive".into()));
        }
        if self.eval_points.is_empty() || self.eval_points.iter().any(|x| !x.is_finite()) {
            return Err(invalid("eval-points must be finite and non-empty".into()));
        }
        self.cg.validate()?;
        if !(self.map.step_size > 0.0 && self.map.grad_tolerance > 0.0) || self.map.max_iters == 0
        {
            return Err(invalid("MAP settings must be positive".into()));
        }
        if !(self.tmle.margin > 0.0 && self.tmle.margin < 1.0)
            || !(self.tmle.step_size > 0.0)
            || self.tmle.samples == 0
        {
            return Err(invalid("TMLE settings out of range".into()));
        }
        Ok(())
    }
}

fn invalid(msg: String) -> CliError {
    CliError::InvalidSpec(msg)
}

fn parse<V: std::str::FromStr>(key: &str, v: &str) -> Result<V> {
    v.parse()
        .map_err(|_| invalid(format!("cannot parse {key} = {v:?}")))
}

fn parse_list<V: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<V>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse(key, s.trim()))
        .collect()
}

/// Reads a UTF-8 `key=value` file. Blank lines and `#` comments are skipped;
/// keys may use `-` or `_`.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("config line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(invalid(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        out.insert(key, v.trim().to_owned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_then_flags() {
        let mut o = parse_config("# comment\nseed = 3 # trailing\nm_grid=10,20\n\nreplicates=4\n").unwrap();
        o.insert("seed".into(), "9".into());
        let s = ExperimentSpec::build(Experiment::McDecay, &o).unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.m_grid, vec![10, 20]);
        assert_eq!(s.replicates, 4);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(parse_config("bogus=1").is_err());
        assert!(parse_config("seed").is_err());
        let o: BTreeMap<String, String> = [("m".to_string(), "0".to_string())].into();
        assert!(ExperimentSpec::build(Experiment::McDecay, &o).is_err());
        let o: BTreeMap<String, String> = [("m".to_string(), "x".to_string())].into();
        assert!(ExperimentSpec::build(Experiment::McDecay, &o).is_err());
        let o: BTreeMap<String, String> = [("gateaux-eps".to_string(), "1.5".to_string())].into();
        assert!(ExperimentSpec::build(Experiment::DensityCompare, &o).is_err());
    }
}
