//! The six experiments. Each returns long-format records plus
//! experiment-level statistics; file output happens in [`crate::run`].

mod causal;
mod density;
mod markowitz;
mod scaling;

use std::collections::BTreeMap;

use mceif::{Batch, SeededRng};
use rayon::prelude::*;

use crate::error::Result;
use crate::output::Record;
use crate::spec::{Experiment, ExperimentSpec};

pub use causal::{causal_replicate, CausalReplicate};
pub use density::GateauxRow;
pub use markowitz::{markowitz_replicate, MarkowitzReplicate};
pub use scaling::eif_error;

/// A dataset kept for export.
#[derive(Debug, Clone)]
pub struct SavedDataset {
    pub replicate: usize,
    pub columns: Vec<String>,
    pub data: Batch,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub records: Vec<Record>,
    pub extras: BTreeMap<String, f64>,
    pub gateaux: Vec<GateauxRow>,
    pub datasets: Vec<SavedDataset>,
}

pub fn execute(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    match spec.experiment {
        Experiment::DensityCompare => density::density_compare(spec),
        Experiment::McDecay => density::mc_decay(spec),
        Experiment::DimScaling => scaling::dim_scaling(spec),
        Experiment::EstimatorParity => causal::estimator_parity(spec),
        Experiment::EstimatorMse => causal::estimator_mse(spec),
        Experiment::Markowitz => markowitz::markowitz(spec),
    }
}

/// Seed of replicate `r`.
pub fn replicate_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(r as u64)
}

/// Runs `f` for every replicate in parallel; results keep replicate order.
fn par_replicates<R: Send>(
    spec: &ExperimentSpec,
    f: impl Fn(usize, SeededRng) -> Result<R> + Sync,
) -> Result<Vec<R>> {
    (0..spec.replicates)
        .into_par_iter()
        .map(|r| f(r, SeededRng::new(replicate_seed(spec.seed, r))))
        .collect()
}

/// Least-squares slope of `ys` on `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    sxy / (sxx * syy).sqrt()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
