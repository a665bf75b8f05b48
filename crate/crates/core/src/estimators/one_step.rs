use super::Estimate;
use crate::contract::{Functional, InfluenceFunction, Model};
use crate::eif::{EifConfig, EifEvaluator};
use crate::error::{check_dim, Result};
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::types::{ObservationBatch, ParamVector};

/// `psi(phi)` at the fitted parameters.
pub fn plug_in<T: Real>(functional: &dyn Functional<T>, phi: &[T]) -> Result<Estimate<T>> {
    let value = functional.value(phi)?;
    let zero = vec![T::zero(); value.len()];
    Ok(Estimate {
        estimate: value.clone(),
        plug_in: value.clone(),
        initial: value,
        correction: zero,
    })
}

/// Plug-in plus the holdout mean of a given influence function.
pub fn one_step_with<T: Real>(
    functional: &dyn Functional<T>,
    phi: &[T],
    eif: &dyn InfluenceFunction<T>,
    holdout: &ObservationBatch<T>,
) -> Result<Estimate<T>> {
    let value = functional.value(phi)?;
    check_dim("influence function output", value.len(), eif.output_dim())?;
    let correction = eif.mean_over(holdout)?;
    let estimate = value.iter().zip(&correction).map(|(&v, &c)| v + c).collect();
    Ok(Estimate {
        estimate,
        plug_in: value.clone(),
        initial: value,
        correction,
    })
}

/// One-step estimator with an MC-EIF built at `phi` from `m` samples.
pub fn one_step<'a, T: Real>(
    model: &'a dyn Model<T>,
    functional: &dyn Functional<T>,
    phi: &ParamVector<T>,
    holdout: &ObservationBatch<T>,
    m: usize,
    rng: &mut SeededRng,
    cfg: &EifConfig<T>,
) -> Result<(Estimate<T>, EifEvaluator<'a, T>)> {
    let eif = EifEvaluator::build(model, functional, phi, m, rng, cfg)?;
    let est = one_step_with(functional, phi, &eif, holdout)?;
    Ok((est, eif))
}
