//! MC-EIF error against the exact ATE influence function as the parameter
//! dimension grows.

use mceif::analytic::{causal_glm_fisher, ExactEif};
use mceif::{
    AteFunctional, CausalGlm, EifConfig, EifEvaluator, Functional, GradientMode, InfluenceFunction, Model, SeededRng,
};

use super::{par_replicates, ExperimentOutput};
use crate::error::Result;
use crate::output::Record;
use crate::spec::ExperimentSpec;

/// Fresh draws used to compare two influence functions.
const EVAL_DRAWS: usize = 2000;

/// Relative RMS difference `|mc - exact|_2 / |exact|_2` over `draws`
/// observations from the model.
pub fn eif_error(
    mc: &dyn InfluenceFunction<f64>,
    exact: &dyn InfluenceFunction<f64>,
    model: &dyn Model<f64>,
    phi: &[f64],
    draws: usize,
    rng: &mut SeededRng,
) -> Result<f64> {
    let xs = model.sample(phi, rng, draws)?;
    let (mut num, mut den) = (0.0, 0.0);
    for x in xs.rows() {
        let a = mc.evaluate(x)?;
        let b = exact.evaluate(x)?;
        for (u, v) in a.iter().zip(&b) {
            num += (u - v) * (u - v);
            den += v * v;
        }
    }
    Ok((num / den).sqrt())
}

pub(super) fn dim_scaling(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let cfg = EifConfig {
        cg: spec.cg,
        fisher_mode: spec.fisher_mode,
        gradient_budget: None,
    };
    let mut out = ExperimentOutput::default();
    let mut means = Vec::new();
    for &f in &spec.f_grid {
        let model = CausalGlm::new(f)?;
        let p = model.layout().param_dim();
        let phi = model.sparse_truth::<f64>(f.min(50));
        let functional = AteFunctional::new(model, GradientMode::MonteCarlo);
        let grad = Functional::<f64>::gradient(&functional, &phi, 1, &mut SeededRng::new(0))?;
        let exact = ExactEif::new(&model, &phi, &grad, &causal_glm_fisher(&model, &phi)?)?;
        let errs = par_replicates(spec, |r, mut rng| {
            let mc = EifEvaluator::build(&model, &functional, &phi, spec.m, &mut rng, &cfg)?;
            let e = eif_error(&mc, &exact, &model, &phi, EVAL_DRAWS, &mut rng)?;
            let iters = mc.diagnostics().cg_iters_per_row[0] as f64;
            Ok([
                Record::new(r, format!("mc_eif_p{p}"), "relative_eif_error", e),
                Record::new(r, format!("mc_eif_p{p}"), "cg_iterations", iters),
            ])
        })?;
        let mean = errs.iter().map(|r| r[0].value).sum::<f64>() / spec.replicates as f64;
        out.extras.insert(format!("mean_error_p{p}"), mean);
        means.push((p as f64, mean));
        out.records.extend(errs.into_iter().flatten());
    }
    let (p0, e0) = means[0];
    let curve = |p: f64| (p * p.ln() / spec.m as f64).sqrt();
    let mut monotone = true;
    let mut worst: f64 = 1.0;
    for (i, &(p, e)) in means.iter().enumerate() {
        let ratio = (e / e0) / (curve(p) / curve(p0));
        out.extras.insert(format!("bound_ratio_p{p}"), ratio);
        worst = worst.max(ratio).max(1.0 / ratio);
        if i > 0 && e < means[i - 1].1 {
            monotone = false;
        }
    }
    out.extras.insert("monotone".into(), if monotone { 1.0 } else { 0.0 });
    out.extras.insert("worst_bound_factor".into(), worst);
    Ok(out)
}
