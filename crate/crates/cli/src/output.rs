//! `results.csv`, `summary.json` and `metadata.json` writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::spec::ExperimentSpec;

/// One row of the long-format results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub replicate: usize,
    pub estimator: String,
    pub metric: String,
    pub value: f64,
}

impl Record {
    pub fn new(replicate: usize, estimator: impl Into<String>, metric: impl Into<String>, value: f64) -> Self {
        Self {
            replicate,
            estimator: estimator.into(),
            metric: metric.into(),
            value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub estimator: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub aggregates: Vec<Aggregate>,
    /// Experiment-level statistics such as fitted slopes or correlations.
    pub extras: BTreeMap<String, f64>,
}

impl Summary {
    pub fn aggregate(&self, estimator: &str, metric: &str) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.estimator == estimator && a.metric == metric)
    }
}

/// Mean and sample standard deviation per `(estimator, metric)`, in order of
/// first appearance.
pub fn aggregate(records: &[Record]) -> Vec<Aggregate> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    for r in records {
        let key = (r.estimator.clone(), r.metric.clone());
        let slot = groups.entry(key.clone()).or_default();
        if slot.is_empty() {
            order.push(key);
        }
        slot.push(r.value);
    }
    order
        .into_iter()
        .map(|key| {
            let v = &groups[&key];
            let (mean, std) = mean_std(v);
            Aggregate {
                estimator: key.0,
                metric: key.1,
                mean,
                std,
                count: v.len(),
            }
        })
        .collect()
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

pub fn write_results(path: &Path, records: &[Record]) -> Result<()> {
    let mut s = String::from("replicate,estimator,metric,value\n");
    for r in records {
        // `{:?}` is the shortest round-tripping form, so reruns are byte-identical.
        writeln!(s, "{},{},{},{:?}", r.replicate, r.estimator, r.metric, r.value).unwrap();
    }
    fs::write(path, s)?;
    Ok(())
}

pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn version_string() -> String {
    let base = format!("v{}", env!("CARGO_PKG_VERSION"));
    match option_env!("MCEIF_GIT_REV") {
        Some(rev) if !rev.is_empty() => format!("{base}-g{rev}"),
        _ => base,
    }
}

#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub version: String,
    pub spec: &'a ExperimentSpec,
    /// Fixed choices that are not exposed as flags.
    pub constants: BTreeMap<&'static str, serde_json::Value>,
}

pub fn metadata(spec: &ExperimentSpec) -> Metadata<'_> {
    use serde_json::json;
    let mut c = BTreeMap::new();
    c.insert("cg_initial_guess", json!("zero vector"));
    c.insert("cg_preconditioner", json!("none"));
    c.insert("cg_max_iters_default", json!("min(p, 1000)"));
    c.insert("damping_rule", json!("relative * trace(I_M) / p"));
    c.insert("fisher_chunk_rows", json!(256));
    c.insert("gradient_budget", json!("same as M"));
    c.insert("data_split", json!("first floor(N/2) rows fit, remaining rows correct"));
    c.insert("gaussian_parameterization", json!("(mu, sigma), sigma > 0"));
    c.insert("causal_glm_prior", json!("N(0,1) on mu0 and tau, N(0,1/F) on xi and pi"));
    c.insert(
        "causal_glm_truth",
        json!("xi_j = pi_j = 1/sqrt(s) for j < s = min(F, 50), mu0 = tau = 0"),
    );
    c.insert("ate_mc_confounders", json!("drawn from the model"));
    c.insert("mvn_parameterization", json!("Cholesky factor, log diagonal, known zero mean"));
    c.insert("markowitz_fit", json!("MAP under a flat prior on the training half (gradient ascent from zeros); closed-form maximum likelihood reported as \"mle\""));
    c.insert("markowitz_gradient", json!("central differences, h_j = 1e-5 (1 + |phi_j|)"));
    c.insert("lkj_shape", json!(1.0));
    c.insert("lkj_variances", json!("unit"));
    c.insert("tmle_weights", json!("max(1 + eps * eif, margin)"));
    c.insert(
        "tmle_value",
        json!("plug-in + G(weights) - G(1) over fresh model samples"),
    );
    c.insert("tmle_ate_reweighting", json!("weighted least squares of y on (1, c, t)"));
    c.insert("gateaux_kernel", json!("gaussian"));
    c.insert("gateaux_grid", json!({"min": -8.0, "max": 8.0, "nodes": 4001}));
    Metadata {
        version: version_string(),
        spec,
        constants: c,
    }
}
