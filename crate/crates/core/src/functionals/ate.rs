//! Average treatment effect `E[y | do(t=1)] - E[y | do(t=0)]` on [`CausalGlm`].

use super::GradientMode;
use crate::contract::{Functional, Model};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::models::{CausalGlm, CausalGlmLayout};
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::types::ObservationBatch;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AteFunctional {
    model: CausalGlm,
    mode: GradientMode,
}

impl AteFunctional {
    pub fn new(model: CausalGlm, mode: GradientMode) -> Self {
        Self { model, mode }
    }

    pub fn model(&self) -> &CausalGlm {
        &self.model
    }

    /// Mean simulated outcome contrast under forced `t = 1` versus `t = 0`.
    /// Confounders are drawn from the model and shared between the arms;
    /// outcome noise is drawn independently per arm.
    pub fn mc_value<T: Real>(&self, phi: &[T], m: usize, rng: &mut SeededRng) -> Result<T> {
        Model::<T>::check_params(&self.model, phi)?;
        if m == 0 {
            return Err(Error::InvalidConfig("sample budget must be >= 1".into()));
        }
        let f = self.model.confounders();
        let mut c = vec![T::zero(); f];
        let mut total = T::zero();
        for _ in 0..m {
            c.iter_mut().for_each(|v| *v = T::of(rng.standard_normal()));
            let y1 = self.model.outcome_mean(phi, &c, T::one()) + T::of(rng.standard_normal());
            let y0 = self.model.outcome_mean(phi, &c, T::zero()) + T::of(rng.standard_normal());
            total += y1 - y0;
        }
        Ok(total / T::of_usize(m))
    }

    fn mc_gradient<T: Real>(&self, phi: &[T], m: usize, rng: &mut SeededRng) -> Result<Vec<T>> {
        Model::<T>::check_params(&self.model, phi)?;
        if m == 0 {
            return Err(Error::InvalidConfig("sample budget must be >= 1".into()));
        }
        let lay = self.model.layout();
        let f = self.model.confounders();
        let mut c = vec![T::zero(); f];
        let mut grad = vec![T::zero(); lay.param_dim()];
        for _ in 0..m {
            c.iter_mut().for_each(|v| *v = T::of(rng.standard_normal()));
            let _noise1 = rng.standard_normal();
            let _noise0 = rng.standard_normal();
            // d(y1 - y0)/d phi along the sampling path.
            grad[CausalGlmLayout::INTERCEPT] += T::one() - T::one();
            for (j, &cj) in c.iter().enumerate() {
                grad[lay.outcome_weights().start + j] += cj - cj;
            }
            grad[lay.treatment()] += T::one();
        }
        let mm = T::of_usize(m);
        grad.iter_mut().for_each(|g| *g /= mm);
        Ok(grad)
    }
}

impl<T: Real> Functional<T> for AteFunctional {
    fn name(&self) -> &'static str {
        "ate"
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn param_dim(&self) -> usize {
        self.model.layout().param_dim()
    }

    fn value(&self, phi: &[T]) -> Result<Vec<T>> {
        Model::<T>::check_params(&self.model, phi)?;
        Ok(vec![phi[self.model.layout().treatment()]])
    }

    fn gradient(&self, phi: &[T], m: usize, rng: &mut SeededRng) -> Result<Matrix<T>> {
        let p = self.model.layout().param_dim();
        let row = match self.mode {
            GradientMode::Analytic => {
                Model::<T>::check_params(&self.model, phi)?;
                let mut row = vec![T::zero(); p];
                row[self.model.layout().treatment()] = T::one();
                row
            }
            GradientMode::MonteCarlo => self.mc_gradient(phi, m, rng)?,
        };
        Matrix::from_vec(1, p, row)
    }

    /// Treatment coefficient of the weighted least-squares outcome regression
    /// of `y` on `(1, c, t)`.
    fn reweighted_estimate(
        &self,
        _phi: &[T],
        samples: &ObservationBatch<T>,
        weights: &[T],
    ) -> Result<Vec<T>> {
        check_dim("reweighting weights", samples.len(), weights.len())?;
        let f = self.model.confounders();
        check_dim("CausalGlm observation", f + 2, samples.dim())?;
        let k = f + 2;
        let mut gram = Matrix::zeros(k, k);
        let mut rhs = vec![T::zero(); k];
        let mut z = vec![T::zero(); k];
        for (x, &w) in samples.rows().zip(weights) {
            z[0] = T::one();
            z[1..=f].copy_from_slice(&x[..f]);
            z[k - 1] = x[f];
            let y = x[f + 1];
            for i in 0..k {
                let wzi = w * z[i];
                if wzi == T::zero() {
                    continue;
                }
                rhs[i] += wzi * y;
                for j in 0..=i {
                    gram[(i, j)] += wzi * z[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                gram[(j, i)] = gram[(i, j)];
            }
        }
        let beta = Cholesky::factor(&gram)?.solve(&rhs)?;
        Ok(vec![beta[k - 1]])
    }
}
