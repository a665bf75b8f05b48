use serde::{Deserialize, Serialize};

use crate::contract::{LogPrior, Model};
use crate::error::{check_dim, Error, Result};
use crate::scalar::{dot, norm, Real};
use crate::types::{ObservationBatch, ParamVector};

/// Gradient ascent on the log posterior with backtracking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapConfig {
    pub max_iters: usize,
    /// Largest step tried; halved on every rejected step.
    pub step_size: f64,
    /// Convergence threshold on the log-posterior gradient norm.
    pub grad_tolerance: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step_size: 1e-2,
            grad_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapOutcome<T> {
    pub params: ParamVector<T>,
    pub iterations: usize,
    pub grad_norm: T,
    pub log_posterior: T,
    pub converged: bool,
}

fn log_posterior<T: Real>(
    model: &dyn Model<T>,
    prior: &dyn LogPrior<T>,
    data: &ObservationBatch<T>,
    phi: &[T],
    grad: &mut [T],
    score: &mut [T],
) -> Result<T> {
    let mut lp = prior.log_density(phi, grad);
    for x in data.rows() {
        lp += model.log_prob(phi, x)?;
        model.score_into(phi, x, score)?;
        for (g, &s) in grad.iter_mut().zip(score.iter()) {
            *g += s;
        }
    }
    Ok(lp)
}

/// Maximum a posteriori fit starting from `init`.
///
/// Stops when the gradient norm drops below the tolerance, when `max_iters`
/// is reached, or when no step along the gradient increases the posterior;
/// `converged` tells which.
pub fn map_fit<T: Real>(
    model: &dyn Model<T>,
    prior: &dyn LogPrior<T>,
    data: &ObservationBatch<T>,
    cfg: &MapConfig,
    init: &ParamVector<T>,
) -> Result<MapOutcome<T>> {
    let p = model.param_dim();
    check_dim("initial parameters", p, init.len())?;
    check_dim("observation", model.obs_dim(), data.dim())?;
    if !(cfg.step_size > 0.0) || !(cfg.grad_tolerance > 0.0) || cfg.max_iters == 0 {
        return Err(Error::InvalidConfig("MAP config values must be positive".into()));
    }
    let tol = T::of(cfg.grad_tolerance);
    let max_step = T::of(cfg.step_size);
    let min_step = T::of(1e-30);
    let armijo = T::of(1e-4);

    let mut phi = init.to_vec();
    let mut grad = vec![T::zero(); p];
    let mut score = vec![T::zero(); p];
    let mut lp = log_posterior(model, prior, data, &phi, &mut grad, &mut score)?;
    if !lp.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical("log posterior is not finite at the start".into()));
    }

    let mut cand = vec![T::zero(); p];
    let mut cand_grad = vec![T::zero(); p];
    let mut step = max_step;
    let mut iters = 0;
    let mut gn = norm(&grad);
    while iters < cfg.max_iters {
        if gn <= tol {
            break;
        }
        let mut trial = step;
        let mut accepted = None;
        while trial >= min_step {
            for j in 0..p {
                cand[j] = phi[j] + trial * grad[j];
            }
            if let Ok(lp_c) = log_posterior(model, prior, data, &cand, &mut cand_grad, &mut score)
            {
                // Near the optimum the increase drops below rounding error in
                // `lp`; then accept any step that stays short of the maximum
                // along the search direction.
                let noise = T::epsilon() * T::of(64.0) * (T::one() + lp.abs());
                if lp_c.is_finite()
                    && cand_grad.iter().all(|g| g.is_finite())
                    && (lp_c >= lp + armijo * trial * gn * gn
                        || (lp_c >= lp - noise && dot(&grad, &cand_grad) > T::zero()))
                {
                    accepted = Some(lp_c);
                    break;
                }
            }
            trial /= T::of(2.0);
        }
        let Some(lp_c) = accepted else {
            break;
        };
        std::mem::swap(&mut phi, &mut cand);
        std::mem::swap(&mut grad, &mut cand_grad);
        lp = lp_c;
        gn = norm(&grad);
        step = (trial * T::of(2.0)).min(max_step);
        iters += 1;
    }
    let converged = gn <= tol;
    Ok(MapOutcome {
        params: ParamVector::new(phi)?,
        iterations: iters,
        grad_norm: gn,
        log_posterior: lp,
        converged,
    })
}
