//! ATE estimators on the causal GLM: parity between MC and exact influence
//! functions, and mean squared error against the truth.

use mceif::analytic::{causal_glm_fisher, ExactEif};
use mceif::estimators::{
    dml_linear_with, map_fit, one_step_with, tmle_with, Estimate, IpwMoment, LinearMoment, PlugInMoment,
    RegressionDifferenceMoment, SplitData,
};
use mceif::{
    AteFunctional, CausalGlm, EifConfig, EifEvaluator, Functional, GradientMode, InfluenceFunction, Model, Params,
    SeededRng,
};

use super::{par_replicates, pearson, ExperimentOutput, SavedDataset};
use crate::error::{CliError, Result};
use crate::output::{mean_std, Record};
use crate::spec::{DmlMoment, ExperimentSpec};

pub const ESTIMATORS: [&str; 3] = ["one_step", "dml", "tmle"];

/// Estimates from one simulated dataset.
#[derive(Debug, Clone)]
pub struct CausalReplicate {
    pub truth: f64,
    pub plug_in: f64,
    /// `(one_step, dml, tmle)` with the MC-EIF.
    pub mc: [f64; 3],
    /// Same estimators with the exact influence function, when requested.
    pub exact: Option<[f64; 3]>,
    pub map_iterations: usize,
    pub map_converged: bool,
    pub cg_iterations: usize,
    pub tmle_steps: usize,
    pub dataset: Option<SavedDataset>,
}

fn estimates(
    model: &CausalGlm,
    functional: &AteFunctional,
    moment: &dyn LinearMoment<f64>,
    phi: &Params,
    eif: &dyn InfluenceFunction<f64>,
    split: &SplitData<f64>,
    spec: &ExperimentSpec,
    tmle_rng: &SeededRng,
) -> Result<([f64; 3], usize)> {
    let first = |e: Estimate<f64>| e.estimate[0];
    let os = first(one_step_with(functional, phi, eif, &split.holdout)?);
    let dml = first(dml_linear_with(functional, moment, phi, eif, &split.holdout)?);
    let (tm, diag) = tmle_with(model, functional, phi, eif, &split.holdout, &spec.tmle, &mut tmle_rng.clone())?;
    Ok(([os, dml, first(tm)], diag.steps))
}

/// Simulates, fits and estimates one replicate with `f` confounders.
pub fn causal_replicate(
    spec: &ExperimentSpec,
    f: usize,
    replicate: usize,
    rng: &SeededRng,
    with_exact: bool,
) -> Result<CausalReplicate> {
    let model = CausalGlm::new(f)?;
    let truth_phi = model.sparse_truth::<f64>(f.min(50));
    let truth = truth_phi[model.layout().treatment()];
    let data = model.sample(&truth_phi, &mut rng.fork(1), spec.n)?;
    let split = SplitData::split(&data)?;
    let fit = map_fit(&model, &model.prior::<f64>(), &split.train, &spec.map, &Params::zeros(model.layout().param_dim()))?;
    let phi = fit.params;

    let functional = AteFunctional::new(model, GradientMode::MonteCarlo);
    let plug_in = Functional::<f64>::value(&functional, &phi)?[0];
    let moment: Box<dyn LinearMoment<f64>> = match spec.dml_moment {
        DmlMoment::PlugIn => Box::new(PlugInMoment::new(&functional)),
        DmlMoment::RegressionDifference => Box::new(RegressionDifferenceMoment::new(model)),
        DmlMoment::Ipw => Box::new(IpwMoment::new(model)),
    };
    let cfg = EifConfig {
        cg: spec.cg,
        fisher_mode: spec.fisher_mode,
        gradient_budget: None,
    };
    let tmle_rng = rng.fork(3);
    let mc_eif = EifEvaluator::build(&model, &functional, &phi, spec.m, &mut rng.fork(2), &cfg)?;
    let (mc, tmle_steps) = estimates(&model, &functional, moment.as_ref(), &phi, &mc_eif, &split, spec, &tmle_rng)?;

    let exact = if with_exact {
        let grad = Functional::<f64>::gradient(&functional, &phi, 1, &mut SeededRng::new(0))?;
        let eif = ExactEif::new(&model, &phi, &grad, &causal_glm_fisher(&model, &phi)?)?;
        Some(estimates(&model, &functional, moment.as_ref(), &phi, &eif, &split, spec, &tmle_rng)?.0)
    } else {
        None
    };
    let dataset = spec.save_datasets.then(|| SavedDataset {
        replicate,
        columns: Model::<f64>::column_names(&model),
        data,
    });
    Ok(CausalReplicate {
        truth,
        plug_in,
        mc,
        exact,
        map_iterations: fit.iterations,
        map_converged: fit.converged,
        cg_iterations: mc_eif.diagnostics().cg_iters_per_row[0],
        tmle_steps,
        dataset,
    })
}

fn diagnostics(r: usize, rep: &CausalReplicate, recs: &mut Vec<Record>) {
    recs.push(Record::new(r, "diagnostics", "map_iterations", rep.map_iterations as f64));
    recs.push(Record::new(r, "diagnostics", "map_converged", f64::from(u8::from(rep.map_converged))));
    recs.push(Record::new(r, "diagnostics", "cg_iterations", rep.cg_iterations as f64));
    recs.push(Record::new(r, "diagnostics", "tmle_steps", rep.tmle_steps as f64));
}

fn finish(reps: Vec<CausalReplicate>, mut out: ExperimentOutput) -> ExperimentOutput {
    out.datasets = reps.into_iter().filter_map(|r| r.dataset).collect();
    out
}

pub(super) fn estimator_parity(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let reps = par_replicates(spec, |r, rng| causal_replicate(spec, spec.f, r, &rng, true))?;
    let mut out = ExperimentOutput::default();
    for (r, rep) in reps.iter().enumerate() {
        let exact = rep.exact.expect("requested");
        out.records.push(Record::new(r, "plug_in", "estimate", rep.plug_in));
        for (k, name) in ESTIMATORS.iter().enumerate() {
            out.records.push(Record::new(r, format!("{name}_mc"), "estimate", rep.mc[k]));
            out.records.push(Record::new(r, format!("{name}_analytic"), "estimate", exact[k]));
        }
        diagnostics(r, rep, &mut out.records);
    }
    for (k, name) in ESTIMATORS.iter().enumerate() {
        let mc: Vec<f64> = reps.iter().map(|r| r.mc[k]).collect();
        let ex: Vec<f64> = reps.iter().map(|r| r.exact.expect("requested")[k]).collect();
        let mad = mc.iter().zip(&ex).map(|(a, b)| (a - b).abs()).sum::<f64>() / mc.len() as f64;
        out.extras.insert(format!("pearson_{name}"), pearson(&mc, &ex));
        out.extras.insert(format!("mean_abs_diff_{name}"), mad);
    }
    Ok(finish(reps, out))
}

pub(super) fn estimator_mse(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    if spec.replicates < 2 {
        return Err(CliError::InvalidSpec("estimator-mse needs at least 2 replicates".into()));
    }
    let reps = par_replicates(spec, |r, rng| causal_replicate(spec, spec.f, r, &rng, false))?;
    let mut out = ExperimentOutput::default();
    let mut sq: Vec<Vec<f64>> = vec![Vec::new(); 4];
    for (r, rep) in reps.iter().enumerate() {
        let values = [rep.plug_in, rep.mc[0], rep.mc[1], rep.mc[2]];
        for (k, name) in ["plug_in"].iter().chain(ESTIMATORS.iter()).enumerate() {
            let e2 = (values[k] - rep.truth).powi(2);
            out.records.push(Record::new(r, *name, "estimate", values[k]));
            out.records.push(Record::new(r, *name, "squared_error", e2));
            sq[k].push(e2);
        }
        diagnostics(r, rep, &mut out.records);
    }
    let base = mean_std(&sq[0]).0;
    out.extras.insert("mse_plug_in".into(), base);
    for (k, name) in ESTIMATORS.iter().enumerate() {
        let mse = mean_std(&sq[k + 1]).0;
        out.extras.insert(format!("mse_{name}"), mse);
        out.extras.insert(format!("mse_ratio_{name}"), mse / base);
    }
    Ok(finish(reps, out))
}
