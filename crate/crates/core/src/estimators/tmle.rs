use serde::{Deserialize, Serialize};

use super::Estimate;
use crate::contract::{Functional, InfluenceFunction, Model};
use crate::eif::{EifConfig, EifEvaluator};
use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::rng::SeededRng;
use crate::scalar::{dot, norm, Real};
use crate::types::{ObservationBatch, ParamVector};

/// Fluctuation fit along `p_eps(x) ∝ (1 + eps^T eif(x)) p_phi(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TmleConfig {
    pub max_steps: usize,
    /// Initial ascent step; doubled after accepted steps, halved on rejection.
    pub step_size: f64,
    /// Every holdout point must keep `1 + eps^T eif(x) >= margin`.
    pub margin: f64,
    /// Samples used to evaluate the functional under the fluctuated density.
    pub samples: usize,
}

impl Default for TmleConfig {
    fn default() -> Self {
        Self {
            max_steps: 200,
            step_size: 1e-2,
            margin: 1e-6,
            samples: 10_000,
        }
    }
}

impl TmleConfig {
    fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) || !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(Error::InvalidConfig(
                "TMLE step size must be positive and margin in (0, 1)".into(),
            ));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("TMLE sample count must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmleDiagnostics {
    pub epsilon: Vec<f64>,
    pub steps: usize,
    /// Holdout mean of `log(1 + eps^T eif)`; zero at `eps = 0`.
    pub objective: f64,
    pub grad_norm: f64,
    pub samples: usize,
}

struct Fluctuation<T> {
    values: Matrix<T>,
    margin: T,
}

impl<T: Real> Fluctuation<T> {
    fn objective(&self, eps: &[T]) -> Option<T> {
        let mut acc = T::zero();
        for i in 0..self.values.rows() {
            let w = T::one() + dot(eps, self.values.row(i));
            if !(w >= self.margin) {
                return None;
            }
            acc += w.ln();
        }
        Some(acc / T::of_usize(self.values.rows()))
    }

    fn gradient(&self, eps: &[T]) -> Vec<T> {
        let l = self.values.cols();
        let mut g = vec![T::zero(); l];
        for i in 0..self.values.rows() {
            let row = self.values.row(i);
            let w = T::one() + dot(eps, row);
            for (gj, &v) in g.iter_mut().zip(row) {
                *gj += v / w;
            }
        }
        let n = T::of_usize(self.values.rows());
        g.iter_mut().for_each(|v| *v /= n);
        g
    }

    /// Feasible interval for a scalar fluctuation.
    fn interval(&self) -> (T, T) {
        let bound = self.margin - T::one();
        let (mut lo, mut hi) = (T::neg_infinity(), T::infinity());
        for i in 0..self.values.rows() {
            let v = self.values[(i, 0)];
            if v > T::zero() {
                lo = lo.max(bound / v);
            } else if v < T::zero() {
                hi = hi.min(bound / v);
            }
        }
        (lo, hi)
    }
}

/// Maximizes the holdout fluctuation log-likelihood over `eps`, starting at 0.
fn fit_epsilon<T: Real>(fl: &Fluctuation<T>, cfg: &TmleConfig) -> (Vec<T>, usize, T, T) {
    let l = fl.values.cols();
    let mut eps = vec![T::zero(); l];
    let mut obj = T::zero();
    let interval = (l == 1).then(|| fl.interval());
    let mut step = T::of(cfg.step_size);
    let min_step = T::of(1e-20);
    let mut steps = 0;
    let mut grad = fl.gradient(&eps);
    while steps < cfg.max_steps {
        if norm(&grad) <= T::of(1e-12) {
            break;
        }
        let mut trial = step;
        let mut accepted = None;
        while trial >= min_step {
            let mut cand: Vec<T> = eps.iter().zip(&grad).map(|(&e, &g)| e + trial * g).collect();
            if let Some((lo, hi)) = interval {
                cand[0] = cand[0].max(lo).min(hi);
            }
            if let Some(o) = fl.objective(&cand) {
                if o > obj {
                    accepted = Some((cand, o));
                    break;
                }
            }
            trial /= T::of(2.0);
        }
        let Some((cand, o)) = accepted else {
            break;
        };
        eps = cand;
        obj = o;
        grad = fl.gradient(&eps);
        step = trial * T::of(2.0);
        steps += 1;
    }
    let gn = norm(&grad);
    (eps, steps, obj, gn)
}

/// Functional under the fluctuated density at a fixed `eps`.
///
/// Draws `samples` points from `p_phi`, weights them by
/// `max(1 + eps^T eif(x), margin)` and returns
/// `psi(phi) + G(w) - G(1)`, where `G` is the functional's reweighted
/// estimator. The unit-weight term cancels the Monte Carlo error of `G`, so
/// `eps = 0` reproduces the plug-in exactly.
#[allow(clippy::too_many_arguments)]
pub fn tmle_value_at<T: Real>(
    model: &dyn Model<T>,
    functional: &dyn Functional<T>,
    phi: &[T],
    eif: &dyn InfluenceFunction<T>,
    epsilon: &[T],
    samples: usize,
    margin: T,
    rng: &mut SeededRng,
) -> Result<Vec<T>> {
    check_dim("fluctuation parameter", eif.output_dim(), epsilon.len())?;
    let plug = functional.value(phi)?;
    let draws = model.sample(phi, rng, samples)?;
    let values = eif.evaluate_batch(&draws)?;
    let weights: Vec<T> = (0..draws.len())
        .map(|i| (T::one() + dot(epsilon, values.row(i))).max(margin))
        .collect();
    let ones = vec![T::one(); draws.len()];
    let tilted = functional.reweighted_estimate(phi, &draws, &weights)?;
    let base = functional.reweighted_estimate(phi, &draws, &ones)?;
    check_dim("reweighted estimate", plug.len(), tilted.len())?;
    Ok(plug
        .iter()
        .zip(tilted.iter().zip(&base))
        .map(|(&p, (&t, &b))| p + (t - b))
        .collect())
}

/// Targeted estimate with a given influence function.
pub fn tmle_with<T: Real>(
    model: &dyn Model<T>,
    functional: &dyn Functional<T>,
    phi: &[T],
    eif: &dyn InfluenceFunction<T>,
    holdout: &ObservationBatch<T>,
    cfg: &TmleConfig,
    rng: &mut SeededRng,
) -> Result<(Estimate<T>, TmleDiagnostics)> {
    cfg.validate()?;
    if holdout.is_empty() {
        return Err(Error::InvalidConfig("holdout is empty".into()));
    }
    let fl = Fluctuation {
        values: eif.evaluate_batch(holdout)?,
        margin: T::of(cfg.margin),
    };
    let (eps, steps, obj, gn) = fit_epsilon(&fl, cfg);
    let plug = functional.value(phi)?;
    let estimate = tmle_value_at(
        model,
        functional,
        phi,
        eif,
        &eps,
        cfg.samples,
        fl.margin,
        rng,
    )?;
    let correction = estimate.iter().zip(&plug).map(|(&e, &p)| e - p).collect();
    let diag = TmleDiagnostics {
        epsilon: eps.iter().map(|e| e.to_f64_lossy()).collect(),
        steps,
        objective: obj.to_f64_lossy(),
        grad_norm: gn.to_f64_lossy(),
        samples: cfg.samples,
    };
    Ok((
        Estimate {
            estimate,
            plug_in: plug.clone(),
            initial: plug,
            correction,
        },
        diag,
    ))
}

/// TMLE with an MC-EIF built at `phi` from `m` samples.
#[allow(clippy::too_many_arguments)]
pub fn tmle_one_step<'a, T: Real>(
    model: &'a dyn Model<T>,
    functional: &dyn Functional<T>,
    phi: &ParamVector<T>,
    holdout: &ObservationBatch<T>,
    m: usize,
    rng: &mut SeededRng,
    eif_cfg: &EifConfig<T>,
    cfg: &TmleConfig,
) -> Result<(Estimate<T>, TmleDiagnostics, EifEvaluator<'a, T>)> {
    let eif = EifEvaluator::build(model, functional, phi, m, rng, eif_cfg)?;
    let (est, diag) = tmle_with(model, functional, phi, &eif, holdout, cfg, rng)?;
    Ok((est, diag, eif))
}
