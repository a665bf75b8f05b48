//! Global minimum variance portfolio with an LKJ ground-truth covariance.

use mceif::estimators::{map_fit, one_step_with, SplitData};
use mceif::{
    lkj_onion, Batch, FlatPrior, EifConfig, EifEvaluator, Functional, Mat, MinVariancePortfolio, Model, MvnCov, Params, SeededRng,
};

use super::{par_replicates, ExperimentOutput, SavedDataset};
use crate::error::Result;
use crate::output::{Record, mean_std};
use crate::spec::ExperimentSpec;

#[derive(Debug, Clone)]
pub struct MarkowitzReplicate {
    pub rev_plug_in: f64,
    pub rev_one_step: f64,
    pub rmse_plug_in: f64,
    pub rmse_one_step: f64,
    /// Same metrics for the closed-form maximum-likelihood fit.
    pub rev_mle: f64,
    pub rmse_mle: f64,
    pub map_iterations: usize,
    pub map_converged: bool,
    pub cg_iterations_max: usize,
    pub dataset: Option<SavedDataset>,
}

/// Maximum-likelihood covariance around the known zero mean.
fn sample_covariance(data: &Batch) -> Mat {
    let d = data.dim();
    let mut s = Mat::zeros(d, d);
    for x in data.rows() {
        for i in 0..d {
            for j in 0..=i {
                s[(i, j)] += x[i] * x[j];
            }
        }
    }
    let n = data.len() as f64;
    for i in 0..d {
        for j in 0..=i {
            let v = s[(i, j)] / n;
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    s
}

/// `theta^T Sigma theta / theta*^T Sigma theta*`.
fn rev(theta: &[f64], optimum: &[f64], sigma: &Mat) -> Result<f64> {
    let quad = |t: &[f64]| -> Result<f64> {
        let st = sigma.matvec(t)?;
        Ok(t.iter().zip(&st).map(|(a, b)| a * b).sum())
    };
    Ok(quad(theta)? / quad(optimum)?)
}

fn rmse(theta: &[f64], optimum: &[f64]) -> f64 {
    let ss: f64 = theta.iter().zip(optimum).map(|(a, b)| (a - b).powi(2)).sum();
    (ss / theta.len() as f64).sqrt()
}

pub fn markowitz_replicate(spec: &ExperimentSpec, replicate: usize, rng: &SeededRng) -> Result<MarkowitzReplicate> {
    let d = spec.d;
    let model = MvnCov::new(d)?;
    let sigma: Mat = lkj_onion(d, &mut rng.fork(1))?;
    let truth = model.params_from_covariance(&sigma)?;
    let data = model.sample(&truth, &mut rng.fork(2), spec.n)?;
    let split = SplitData::split(&data)?;
    let fit = map_fit(&model, &FlatPrior, &split.train, &spec.map, &Params::zeros(MvnCov::param_count(d)))?;
    let phi = fit.params;
    let mle = model.params_from_covariance(&sample_covariance(&split.train))?;

    let functional = MinVariancePortfolio::new(model.clone());
    let optimum = MinVariancePortfolio::weights_for_covariance(&sigma)?;
    let cfg = EifConfig {
        cg: spec.cg,
        fisher_mode: spec.fisher_mode,
        gradient_budget: None,
    };
    let eif = EifEvaluator::build(&model, &functional, &phi, spec.m, &mut rng.fork(3), &cfg)?;
    let plug = Functional::<f64>::value(&functional, &phi)?;
    let os = one_step_with(&functional, &phi, &eif, &split.holdout)?.estimate;
    let mle_weights = Functional::<f64>::value(&functional, &mle)?;
    let dataset = spec.save_datasets.then(|| SavedDataset {
        replicate,
        columns: Model::<f64>::column_names(&model),
        data,
    });
    Ok(MarkowitzReplicate {
        rev_plug_in: rev(&plug, &optimum, &sigma)?,
        rev_one_step: rev(&os, &optimum, &sigma)?,
        rmse_plug_in: rmse(&plug, &optimum),
        rmse_one_step: rmse(&os, &optimum),
        rev_mle: rev(&mle_weights, &optimum, &sigma)?,
        rmse_mle: rmse(&mle_weights, &optimum),
        map_iterations: fit.iterations,
        map_converged: fit.converged,
        cg_iterations_max: eif.diagnostics().cg_iters_per_row.iter().copied().max().unwrap_or(0),
        dataset,
    })
}

pub(super) fn markowitz(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let reps = par_replicates(spec, |r, rng| markowitz_replicate(spec, r, &rng))?;
    let mut out = ExperimentOutput::default();
    for (r, rep) in reps.iter().enumerate() {
        out.records.push(Record::new(r, "plug_in", "rev", rep.rev_plug_in));
        out.records.push(Record::new(r, "plug_in", "rmse", rep.rmse_plug_in));
        out.records.push(Record::new(r, "one_step", "rev", rep.rev_one_step));
        out.records.push(Record::new(r, "one_step", "rmse", rep.rmse_one_step));
        out.records.push(Record::new(r, "mle", "rev", rep.rev_mle));
        out.records.push(Record::new(r, "mle", "rmse", rep.rmse_mle));
        out.records.push(Record::new(r, "diagnostics", "map_iterations", rep.map_iterations as f64));
        out.records.push(Record::new(r, "diagnostics", "map_converged", f64::from(u8::from(rep.map_converged))));
        out.records.push(Record::new(r, "diagnostics", "cg_iterations_max", rep.cg_iterations_max as f64));
    }
    let col = |f: fn(&MarkowitzReplicate) -> f64| mean_std(&reps.iter().map(f).collect::<Vec<_>>()).0;
    out.extras.insert("mean_rev_plug_in".into(), col(|r| r.rev_plug_in));
    out.extras.insert("mean_rev_one_step".into(), col(|r| r.rev_one_step));
    out.extras.insert("mean_rmse_plug_in".into(), col(|r| r.rmse_plug_in));
    out.extras.insert("mean_rmse_one_step".into(), col(|r| r.rmse_one_step));
    out.extras.insert("mean_rev_mle".into(), col(|r| r.rev_mle));
    out.extras.insert("mean_rmse_mle".into(), col(|r| r.rmse_mle));
    out.datasets = reps.into_iter().filter_map(|r| r.dataset).collect();
    Ok(out)
}
