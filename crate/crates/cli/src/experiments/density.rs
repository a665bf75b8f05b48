//! One-dimensional expected-density experiments: influence-function
//! comparison against the empirical Gateaux baseline, and Monte Carlo decay.

use mceif::analytic::{expected_density_eif, nonparametric_expected_density_if};
use mceif::gateaux::{gateaux_if, DensityGrid, GateauxConfig};
use mceif::{EifConfig, EifEvaluator, ExpectedDensity, Gaussian1D, GradientMode, InfluenceFunction, Params, SeededRng};
use serde::Serialize;

use super::{median, par_replicates, slope, ExperimentOutput};
use crate::error::Result;
use crate::output::Record;
use crate::spec::ExperimentSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GateauxRow {
    pub epsilon: f64,
    pub lambda: f64,
    pub x0: f64,
    pub value: f64,
}

fn eif_config(spec: &ExperimentSpec) -> EifConfig<f64> {
    EifConfig {
        cg: spec.cg,
        fisher_mode: spec.fisher_mode,
        gradient_budget: None,
    }
}

fn standard_setup() -> Result<(Gaussian1D, ExpectedDensity, Params)> {
    let model = Gaussian1D::unknown_sigma();
    let functional = ExpectedDensity::new(model, GradientMode::MonteCarlo);
    Ok((model, functional, Params::from_f64(&[0.0, 1.0])?))
}

/// MC-EIF values at `points` from a fresh build with `m` samples.
pub(crate) fn mc_eif_values(
    spec: &ExperimentSpec,
    m: usize,
    points: &[f64],
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    let (model, functional, phi) = standard_setup()?;
    let eif = EifEvaluator::build(&model, &functional, &phi, m, rng, &eif_config(spec))?;
    points.iter().map(|&x| Ok(eif.evaluate(&[x])?[0])).collect()
}

/// Median over `points` of `|mc - exact| / |exact|` at `phi = (0, 1)`.
pub fn median_relative_error(values: &[f64], points: &[f64]) -> f64 {
    let errs: Vec<f64> = values
        .iter()
        .zip(points)
        .map(|(&v, &x)| {
            let exact = expected_density_eif(0.0, 1.0, x);
            (v - exact).abs() / exact.abs()
        })
        .collect();
    median(&errs)
}

/// Index of the evaluation point used for spread statistics: 0 if present.
fn anchor(points: &[f64]) -> usize {
    points.iter().position(|&x| x == 0.0).unwrap_or(0)
}

pub(super) fn density_compare(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let points = &spec.eval_points;
    let per_rep = par_replicates(spec, |r, mut rng| {
        let mut recs = Vec::new();
        for &m in &spec.m_grid {
            let vals = mc_eif_values(spec, m, points, &mut rng)?;
            for (&x, v) in points.iter().zip(vals) {
                recs.push(Record::new(r, format!("mc_eif_m{m}"), format!("if_at_{x}"), v));
            }
        }
        Ok(recs)
    })?;
    let mut out = ExperimentOutput::default();
    for &x in points {
        out.records.push(Record::new(0, "analytic_eif", format!("if_at_{x}"), expected_density_eif(0.0, 1.0, x)));
        out.records.push(Record::new(
            0,
            "nonparametric_if",
            format!("if_at_{x}"),
            nonparametric_expected_density_if(0.0, 1.0, x),
        ));
    }
    out.records.extend(per_rep.iter().flatten().cloned());

    let base = DensityGrid::gaussian(0.0, 1.0, &GateauxConfig::default())?;
    for &eps in &spec.gateaux_eps {
        for &lambda in &spec.gateaux_lambda {
            let cfg = GateauxConfig::new(eps, lambda)?;
            for &x0 in points {
                let value = gateaux_if(&base, x0, &cfg)?;
                out.gateaux.push(GateauxRow { epsilon: eps, lambda, x0, value });
                out.records.push(Record::new(0, format!("gateaux_eps{eps}_lambda{lambda}"), format!("if_at_{x0}"), value));
            }
        }
    }

    let a = anchor(points);
    let x0 = points[a];
    let spread = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        hi - lo
    };
    let g = spread(&mut out.gateaux.iter().filter(|row| row.x0 == x0).map(|row| row.value));
    // Replicate 0 only: one MC-EIF per M, as in a single hyperparameter sweep.
    let k = points.len();
    let mc = spread(&mut (0..spec.m_grid.len()).map(|i| per_rep[0][i * k + a].value));
    out.extras.insert("anchor_x0".into(), x0);
    out.extras.insert("gateaux_spread".into(), g);
    out.extras.insert("mc_eif_spread".into(), mc);
    out.extras.insert("spread_ratio".into(), g / mc);
    Ok(out)
}

pub(super) fn mc_decay(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let points = &spec.eval_points;
    let per_rep = par_replicates(spec, |r, mut rng| {
        spec.m_grid
            .iter()
            .map(|&m| {
                let vals = mc_eif_values(spec, m, points, &mut rng)?;
                Ok(Record::new(r, format!("mc_eif_m{m}"), "median_rel_error", median_relative_error(&vals, points)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut out = ExperimentOutput::default();
    let nm = spec.m_grid.len();
    let mut log_m = Vec::with_capacity(nm);
    let mut log_err = Vec::with_capacity(nm);
    for (i, &m) in spec.m_grid.iter().enumerate() {
        let mean = per_rep.iter().map(|recs| recs[i].value).sum::<f64>() / spec.replicates as f64;
        out.extras.insert(format!("mean_median_rel_error_m{m}"), mean);
        log_m.push((m as f64).ln());
        log_err.push(mean.ln());
    }
    if nm >= 2 {
        out.extras.insert("slope".into(), slope(&log_m, &log_err));
    }
    out.records = per_rep.into_iter().flatten().collect();
    Ok(out)
}
