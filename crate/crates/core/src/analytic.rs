//! Exact influence functions used as references for the Monte Carlo ones.
//!
//! [`ExactEif`] evaluates `grad psi^T I^-1 score` with the population Fisher
//! information and a closed-form gradient, solved by a dense Cholesky
//! factorization. The Fisher matrices below are derived per model.

use std::f64::consts::PI;

use crate::contract::{InfluenceFunction, Model};
use crate::error::{check_dim, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::models::{CausalGlm, CausalGlmLayout, Gaussian1D};
use crate::scalar::{dot, sigmoid, Real};
use crate::types::ParamVector;

/// Closed-form efficient influence function of `int p^2` in the
/// location-scale normal family: `-((x - mu)^2 - sigma^2) / (4 sqrt(pi) sigma^3)`.
pub fn expected_density_eif(mu: f64, sigma: f64, x: f64) -> f64 {
    let d = x - mu;
    -(d * d - sigma * sigma) / (4.0 * PI.sqrt() * sigma.powi(3))
}

/// Nonparametric influence function of `int p^2`: `2 (p(x) - Psi(p))`.
pub fn nonparametric_expected_density_if(mu: f64, sigma: f64, x: f64) -> f64 {
    let z = (x - mu) / sigma;
    let pdf = (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt());
    2.0 * (pdf - 1.0 / (2.0 * sigma * PI.sqrt()))
}

/// Population Fisher information of [`Gaussian1D`]: `diag(1, 2) / sigma^2`
/// (or `1 / sigma^2` with known scale).
pub fn gaussian_fisher<T: Real>(model: &Gaussian1D, phi: &[T]) -> Result<Matrix<T>> {
    let (_, sigma) = model.location_scale(phi)?;
    let inv = T::one() / (sigma * sigma);
    Ok(if model.fixed_sigma().is_some() {
        Matrix::from_vec(1, 1, vec![inv])?
    } else {
        Matrix::from_vec(2, 2, vec![inv, T::zero(), T::zero(), T::of(2.0) * inv])?
    })
}

/// `E[g(u)]` for `u ~ N(0, s^2)`, trapezoid rule on `[-12, 12]` standard
/// deviations (spectrally accurate for smooth `g`).
fn normal_expectation(s: f64, g: impl Fn(f64) -> f64) -> f64 {
    const NODES: usize = 4001;
    const HALF_WIDTH: f64 = 12.0;
    let h = 2.0 * HALF_WIDTH / (NODES - 1) as f64;
    let norm = 1.0 / (2.0 * PI).sqrt();
    let mut acc = 0.0;
    for k in 0..NODES {
        let z = -HALF_WIDTH + k as f64 * h;
        let w = if k == 0 || k == NODES - 1 { 0.5 } else { 1.0 };
        acc += w * g(s * z) * (-0.5 * z * z).exp();
    }
    acc * h * norm
}

/// Population Fisher information of [`CausalGlm`] at `phi`.
///
/// With `u = pi . c ~ N(0, s^2)`, `s = |pi|`, the matrix is block diagonal:
/// the outcome block over `(mu0, xi, tau)` is `E[z z^T]` for `z = (1, c, t)`,
/// using `E[t] = E[sigmoid(u)]` and `E[c t] = pi E[sigmoid'(u)]` (Stein's
/// lemma); the propensity block is `E[sigmoid'(u) c c^T]
/// = a (I - P) + b P` with `P = pi pi^T / s^2`, `a = E[sigmoid'(u)]` and
/// `b = E[sigmoid'(u) u^2] / s^2`.
pub fn causal_glm_fisher<T: Real>(model: &CausalGlm, phi: &[T]) -> Result<Matrix<T>> {
    Model::<T>::check_params(model, phi)?;
    let lay = model.layout();
    let f = model.confounders();
    let p = lay.param_dim();
    let pi: Vec<f64> = phi[lay.propensity_weights()].iter().map(|v| v.to_f64_lossy()).collect();
    let s2: f64 = pi.iter().map(|v| v * v).sum();
    let s = s2.sqrt();
    let dsig = |u: f64| {
        let e = sigmoid(u);
        e * (1.0 - e)
    };
    let mean_t = normal_expectation(s, sigmoid);
    let a = normal_expectation(s, dsig);
    let b = if s2 > 0.0 {
        normal_expectation(s, |u| dsig(u) * u * u) / s2
    } else {
        a
    };

    let mut fisher = Matrix::zeros(p, p);
    let tau = lay.treatment();
    let mu0 = CausalGlmLayout::INTERCEPT;
    let xi0 = lay.outcome_weights().start;
    let pi0 = lay.propensity_weights().start;
    fisher[(mu0, mu0)] = T::one();
    fisher[(mu0, tau)] = T::of(mean_t);
    fisher[(tau, mu0)] = T::of(mean_t);
    fisher[(tau, tau)] = T::of(mean_t);
    for j in 0..f {
        fisher[(xi0 + j, xi0 + j)] = T::one();
        let ct = T::of(pi[j] * a);
        fisher[(xi0 + j, tau)] = ct;
        fisher[(tau, xi0 + j)] = ct;
        for k in 0..f {
            let proj = if s2 > 0.0 { pi[j] * pi[k] / s2 } else { 0.0 };
            let id = if j == k { 1.0 } else { 0.0 };
            fisher[(pi0 + j, pi0 + k)] = T::of(a * (id - proj) + b * proj);
        }
    }
    Ok(fisher)
}

/// `x -> grad^T I^-1 score(phi, x)` with an exact Fisher matrix.
pub struct ExactEif<'a, T: Real> {
    model: &'a dyn Model<T>,
    phi: ParamVector<T>,
    directions: Matrix<T>,
}

impl<'a, T: Real> ExactEif<'a, T> {
    pub fn new(
        model: &'a dyn Model<T>,
        phi: &ParamVector<T>,
        grad: &Matrix<T>,
        fisher: &Matrix<T>,
    ) -> Result<Self> {
        let p = model.param_dim();
        check_dim("gradient columns", p, grad.cols())?;
        check_dim("Fisher rows", p, fisher.rows())?;
        let ch = Cholesky::factor(fisher)?;
        let mut directions = Matrix::zeros(grad.rows(), p);
        for r in 0..grad.rows() {
            let w = ch.solve(grad.row(r))?;
            directions.row_mut(r).copy_from_slice(&w);
        }
        Ok(Self {
            model,
            phi: phi.clone(),
            directions,
        })
    }

    pub fn directions(&self) -> &Matrix<T> {
        &self.directions
    }
}

impl<T: Real> InfluenceFunction<T> for ExactEif<'_, T> {
    fn output_dim(&self) -> usize {
        self.directions.rows()
    }

    fn evaluate(&self, x: &[T]) -> Result<Vec<T>> {
        let s = self.model.score(&self.phi, x)?;
        Ok((0..self.directions.rows())
            .map(|r| dot(self.directions.row(r), &s))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_eif_values() {
        assert!(expected_density_eif(0.0, 1.0, 1.0).abs() < 1e-15);
        assert!((expected_density_eif(0.0, 1.0, 0.0) - 1.0 / (4.0 * PI.sqrt())).abs() < 1e-15);
        let np = nonparametric_expected_density_if(0.0, 1.0, 0.0);
        assert!((np - 2.0 * (0.398_942_280_401_432_7 - 0.282_094_791_773_878_14)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_is_exact_on_moments() {
        assert!((normal_expectation(2.0, |u| u * u) - 4.0).abs() < 1e-12);
        assert!((normal_expectation(1.3, sigmoid) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_propensity_weights_give_quarter_block() {
        let m = CausalGlm::new(2).unwrap();
        let phi = vec![0.0f64; 6];
        let fi = causal_glm_fisher(&m, &phi).unwrap();
        assert!((fi[(3, 3)] - 0.25).abs() < 1e-12);
        assert!((fi[(3, 4)]).abs() < 1e-12);
        assert!((fi[(5, 5)] - 0.5).abs() < 1e-12);
    }
}
