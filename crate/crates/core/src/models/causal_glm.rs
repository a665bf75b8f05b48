//! Linear-Gaussian outcome, logistic propensity model with `F` confounders.
//!
//! ```text
//! c ~ N(0, I_F)
//! t | c ~ Bernoulli(sigmoid(pi . c))
//! y | c, t ~ N(tau * t + xi . c + mu0, 1)
//! ```
//!
//! Parameter layout (`p = 2F + 2`): `[mu0, xi_1..xi_F, pi_1..pi_F, tau]`.
//! Observation layout (`D = F + 2`): `[c_1..c_F, t, y]`.
//! The prior is `mu0, tau ~ N(0, 1)` and `xi_j, pi_j ~ N(0, (1/sqrt F)^2)`.

use crate::contract::{GaussianPrior, Model};
use crate::error::{check_dim, Error, Result};
use crate::rng::SeededRng;
use crate::scalar::{dot, sigmoid, softplus, Real};
use crate::types::ParamVector;

use super::half_ln_2pi;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CausalGlm {
    confounders: usize,
}

/// Index helpers for the frozen parameter layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CausalGlmLayout {
    pub confounders: usize,
}

impl CausalGlmLayout {
    pub const INTERCEPT: usize = 0;

    pub fn outcome_weights(&self) -> std::ops::Range<usize> {
        1..1 + self.confounders
    }

    pub fn propensity_weights(&self) -> std::ops::Range<usize> {
        1 + self.confounders..1 + 2 * self.confounders
    }

    pub fn treatment(&self) -> usize {
        1 + 2 * self.confounders
    }

    pub fn param_dim(&self) -> usize {
        2 * self.confounders + 2
    }

    pub fn treatment_column(&self) -> usize {
        self.confounders
    }

    pub fn outcome_column(&self) -> usize {
        self.confounders + 1
    }
}

impl CausalGlm {
    pub fn new(confounders: usize) -> Result<Self> {
        if confounders == 0 {
            return Err(Error::InvalidConfig("need at least one confounder".into()));
        }
        Ok(Self { confounders })
    }

    pub fn confounders(&self) -> usize {
        self.confounders
    }

    pub fn layout(&self) -> CausalGlmLayout {
        CausalGlmLayout {
            confounders: self.confounders,
        }
    }

    pub fn prior<T: Real>(&self) -> GaussianPrior<T> {
        let lay = self.layout();
        let weight_std = T::one() / T::of_usize(self.confounders).sqrt();
        let mut std = vec![weight_std; lay.param_dim()];
        std[CausalGlmLayout::INTERCEPT] = T::one();
        std[lay.treatment()] = T::one();
        GaussianPrior {
            mean: vec![T::zero(); lay.param_dim()],
            std,
        }
    }

    /// Ground truth with strong confounding: the first `sparsity` outcome and
    /// propensity weights equal `1/sqrt(sparsity)`, the rest are zero, and the
    /// intercept and treatment effect are zero.
    pub fn sparse_truth<T: Real>(&self, sparsity: usize) -> ParamVector<T> {
        let lay = self.layout();
        let s = sparsity.clamp(1, self.confounders);
        let w = T::one() / T::of_usize(s).sqrt();
        let mut phi = vec![T::zero(); lay.param_dim()];
        for j in 0..s {
            phi[lay.outcome_weights().start + j] = w;
            phi[lay.propensity_weights().start + j] = w;
        }
        ParamVector::from_vec_unchecked(phi)
    }

    /// `E[y | c, do(t)]` under `phi`.
    pub fn outcome_mean<T: Real>(&self, phi: &[T], c: &[T], t: T) -> T {
        let lay = self.layout();
        phi[CausalGlmLayout::INTERCEPT] + dot(&phi[lay.outcome_weights()], c) + phi[lay.treatment()] * t
    }

    /// `P(t = 1 | c)` under `phi`.
    pub fn propensity<T: Real>(&self, phi: &[T], c: &[T]) -> T {
        sigmoid(dot(&phi[self.layout().propensity_weights()], c))
    }

    fn split_obs<'x, T: Real>(&self, x: &'x [T]) -> Result<(&'x [T], T, T)> {
        check_dim("CausalGlm observation", self.confounders + 2, x.len())?;
        let t = x[self.confounders];
        if t != T::zero() && t != T::one() {
            return Err(Error::Domain(format!("treatment must be 0 or 1, got {t}")));
        }
        Ok((&x[..self.confounders], t, x[self.confounders + 1]))
    }
}

impl<T: Real> Model<T> for CausalGlm {
    fn name(&self) -> &'static str {
        "causal-glm"
    }

    fn param_dim(&self) -> usize {
        2 * self.confounders + 2
    }

    fn obs_dim(&self) -> usize {
        self.confounders + 2
    }

    fn check_params(&self, phi: &[T]) -> Result<()> {
        check_dim("CausalGlm parameters", 2 * self.confounders + 2, phi.len())?;
        if phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("CausalGlm parameters"));
        }
        Ok(())
    }

    fn column_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.confounders).map(|j| format!("c{j}")).collect();
        names.push("t".into());
        names.push("y".into());
        names
    }

    fn sample_into(
        &self,
        phi: &[T],
        rng: &mut SeededRng,
        n: usize,
        out: &mut Vec<T>,
    ) -> Result<()> {
        Model::<T>::check_params(self, phi)?;
        let f = self.confounders;
        for _ in 0..n {
            let start = out.len();
            for _ in 0..f {
                out.push(T::of(rng.standard_normal()));
            }
            let c = &out[start..start + f];
            let e = self.propensity(phi, c);
            let t = if T::of(rng.uniform()) < e { T::one() } else { T::zero() };
            let mean = self.outcome_mean(phi, c, t);
            let y = mean + T::of(rng.standard_normal());
            out.push(t);
            out.push(y);
        }
        Ok(())
    }

    fn log_prob(&self, phi: &[T], x: &[T]) -> Result<T> {
        Model::<T>::check_params(self, phi)?;
        let (c, t, y) = self.split_obs(x)?;
        let half = T::of(0.5);
        let lp_c = -half * dot(c, c) - T::of_usize(self.confounders) * half_ln_2pi::<T>();
        let u = dot(&phi[self.layout().propensity_weights()], c);
        let lp_t = t * u - softplus(u);
        let r = y - self.outcome_mean(phi, c, t);
        let lp_y = -half * r * r - half_ln_2pi::<T>();
        Ok(lp_c + lp_t + lp_y)
    }

    fn score_into(&self, phi: &[T], x: &[T], out: &mut [T]) -> Result<()> {
        Model::<T>::check_params(self, phi)?;
        check_dim("CausalGlm score", 2 * self.confounders + 2, out.len())?;
        let (c, t, y) = self.split_obs(x)?;
        let lay = self.layout();
        let r = y - self.outcome_mean(phi, c, t);
        let resid_t = t - self.propensity(phi, c);
        out[CausalGlmLayout::INTERCEPT] = r;
        for (j, &cj) in c.iter().enumerate() {
            out[lay.outcome_weights().start + j] = r * cj;
            out[lay.propensity_weights().start + j] = resid_t * cj;
        }
        out[lay.treatment()] = r * t;
        Ok(())
    }
}
