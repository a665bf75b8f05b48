use super::Estimate;
use crate::contract::{Functional, InfluenceFunction, Model};
use crate::eif::{EifConfig, EifEvaluator};
use crate::error::{check_dim, Error, Result};
use crate::models::CausalGlm;
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::types::{ObservationBatch, ParamVector};

/// Moment `m(x; phi)` whose expectation identifies the target, used by the
/// debiased estimator `mean_n[m(x_n; phi) + eif(x_n)]`.
pub trait LinearMoment<T: Real>: Sync {
    fn name(&self) -> &'static str;

    fn output_dim(&self) -> usize;

    fn evaluate(&self, phi: &[T], x: &[T]) -> Result<Vec<T>>;
}

/// Constant moment equal to the functional's value; the debiased estimate
/// then coincides with one-step.
pub struct PlugInMoment<'a, T: Real> {
    functional: &'a dyn Functional<T>,
}

impl<'a, T: Real> PlugInMoment<'a, T> {
    pub fn new(functional: &'a dyn Functional<T>) -> Self {
        Self { functional }
    }
}

impl<T: Real> LinearMoment<T> for PlugInMoment<'_, T> {
    fn name(&self) -> &'static str {
        "plug-in"
    }

    fn output_dim(&self) -> usize {
        self.functional.output_dim()
    }

    fn evaluate(&self, phi: &[T], _x: &[T]) -> Result<Vec<T>> {
        self.functional.value(phi)
    }
}

/// `Q(1, c) - Q(0, c)` for the fitted outcome regression `Q`.
#[derive(Debug, Clone, Copy)]
pub struct RegressionDifferenceMoment {
    model: CausalGlm,
}

impl RegressionDifferenceMoment {
    pub fn new(model: CausalGlm) -> Self {
        Self { model }
    }
}

impl<T: Real> LinearMoment<T> for RegressionDifferenceMoment {
    fn name(&self) -> &'static str {
        "regression-difference"
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, phi: &[T], x: &[T]) -> Result<Vec<T>> {
        let f = self.model.confounders();
        check_dim("CausalGlm observation", f + 2, x.len())?;
        let c = &x[..f];
        Ok(vec![
            self.model.outcome_mean(phi, c, T::one()) - self.model.outcome_mean(phi, c, T::zero()),
        ])
    }
}

/// Inverse propensity weighted outcome `y (t / e(c) - (1 - t) / (1 - e(c)))`.
#[derive(Debug, Clone, Copy)]
pub struct IpwMoment {
    model: CausalGlm,
}

impl IpwMoment {
    pub fn new(model: CausalGlm) -> Self {
        Self { model }
    }
}

impl<T: Real> LinearMoment<T> for IpwMoment {
    fn name(&self) -> &'static str {
        "ipw"
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, phi: &[T], x: &[T]) -> Result<Vec<T>> {
        let f = self.model.confounders();
        check_dim("CausalGlm observation", f + 2, x.len())?;
        let (c, t, y) = (&x[..f], x[f], x[f + 1]);
        let e = self.model.propensity(phi, c);
        if !(e > T::zero() && e < T::one()) {
            return Err(Error::Numerical("propensity saturated at 0 or 1".into()));
        }
        Ok(vec![y * (t / e - (T::one() - t) / (T::one() - e))])
    }
}

/// Debiased estimate: holdout mean of the moment plus holdout mean of the
/// influence function. With the influence values fixed, the estimating
/// equation is linear in the target, so this is its exact root.
pub fn dml_linear_with<T: Real>(
    functional: &dyn Functional<T>,
    moment: &dyn LinearMoment<T>,
    phi: &[T],
    eif: &dyn InfluenceFunction<T>,
    holdout: &ObservationBatch<T>,
) -> Result<Estimate<T>> {
    let l = moment.output_dim();
    check_dim("influence function output", l, eif.output_dim())?;
    check_dim("moment output", functional.output_dim(), l)?;
    if holdout.is_empty() {
        return Err(Error::InvalidConfig("holdout is empty".into()));
    }
    let plug = functional.value(phi)?;
    let mut initial = vec![T::zero(); l];
    for x in holdout.rows() {
        for (a, v) in initial.iter_mut().zip(moment.evaluate(phi, x)?) {
            *a += v;
        }
    }
    let n = T::of_usize(holdout.len());
    initial.iter_mut().for_each(|a| *a /= n);
    let eif_mean = eif.mean_over(holdout)?;
    let estimate: Vec<T> = initial.iter().zip(&eif_mean).map(|(&a, &b)| a + b).collect();
    let correction = estimate.iter().zip(&plug).map(|(&e, &p)| e - p).collect();
    Ok(Estimate {
        estimate,
        plug_in: plug,
        initial,
        correction,
    })
}

/// Debiased estimator with an MC-EIF built at `phi` from `m` samples.
#[allow(clippy::too_many_arguments)]
pub fn dml_linear<'a, T: Real>(
    model: &'a dyn Model<T>,
    functional: &dyn Functional<T>,
    moment: &dyn LinearMoment<T>,
    phi: &ParamVector<T>,
    holdout: &ObservationBatch<T>,
    m: usize,
    rng: &mut SeededRng,
    cfg: &EifConfig<T>,
) -> Result<(Estimate<T>, EifEvaluator<'a, T>)> {
    let eif = EifEvaluator::build(model, functional, phi, m, rng, cfg)?;
    let est = dml_linear_with(functional, moment, phi, &eif, holdout)?;
    Ok((est, eif))
}
