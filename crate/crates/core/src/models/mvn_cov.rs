//! Zero-mean (or fixed-mean) multivariate normal with unknown covariance.
//!
//! The covariance is parameterized by its lower Cholesky factor `L`
//! (`Sigma = L L^T`), stored row by row over the lower triangle: entry
//! `(i, j)` with `j <= i` lives at index `i (i + 1) / 2 + j`. Diagonal entries
//! hold `log L_ii`, so every real vector of length `D (D + 1) / 2` maps to a
//! positive definite covariance.

use crate::contract::Model;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::types::ParamVector;

use super::half_ln_2pi;

#[derive(Debug, Clone, PartialEq)]
pub struct MvnCov {
    dim: usize,
    mean: Vec<f64>,
}

impl MvnCov {
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_mean(vec![0.0; dim])
    }

    pub fn with_mean(mean: Vec<f64>) -> Result<Self> {
        if mean.is_empty() {
            return Err(Error::InvalidConfig("MvnCov needs dimension >= 1".into()));
        }
        if mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite("MvnCov mean"));
        }
        Ok(Self {
            dim: mean.len(),
            mean,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn index(i: usize, j: usize) -> usize {
        debug_assert!(j <= i);
        i * (i + 1) / 2 + j
    }

    pub fn param_count(dim: usize) -> usize {
        dim * (dim + 1) / 2
    }

    /// Lower Cholesky factor encoded by `phi`.
    pub fn cholesky_factor<T: Real>(&self, phi: &[T]) -> Result<Cholesky<T>> {
        check_dim("MvnCov parameters", Self::param_count(self.dim), phi.len())?;
        let d = self.dim;
        let mut l = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..i {
                l[(i, j)] = phi[Self::index(i, j)];
            }
            let diag = phi[Self::index(i, i)].exp();
            if !(diag > T::zero()) || !diag.is_finite() {
                return Err(Error::Domain(format!(
                    "log-diagonal entry {i} gives a degenerate factor"
                )));
            }
            l[(i, i)] = diag;
        }
        Cholesky::from_lower(l)
    }

    pub fn covariance<T: Real>(&self, phi: &[T]) -> Result<Matrix<T>> {
        Ok(self.cholesky_factor(phi)?.reconstruct())
    }

    /// Inverse of [`MvnCov::covariance`].
    pub fn params_from_covariance<T: Real>(&self, sigma: &Matrix<T>) -> Result<ParamVector<T>> {
        check_dim("covariance rows", self.dim, sigma.rows())?;
        let ch = Cholesky::factor(sigma)?;
        let l = ch.lower();
        let mut phi = vec![T::zero(); Self::param_count(self.dim)];
        for i in 0..self.dim {
            for j in 0..i {
                phi[Self::index(i, j)] = l[(i, j)];
            }
            phi[Self::index(i, i)] = l[(i, i)].ln();
        }
        ParamVector::new(phi)
    }

    fn centered<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim("MvnCov observation", self.dim, x.len())?;
        Ok(x.iter().zip(&self.mean).map(|(&xi, &m)| xi - T::of(m)).collect())
    }
}

impl<T: Real> Model<T> for MvnCov {
    fn name(&self) -> &'static str {
        "mvn-cov"
    }

    fn param_dim(&self) -> usize {
        Self::param_count(self.dim)
    }

    fn obs_dim(&self) -> usize {
        self.dim
    }

    fn check_params(&self, phi: &[T]) -> Result<()> {
        self.cholesky_factor(phi).map(|_| ())
    }

    fn sample_into(
        &self,
        phi: &[T],
        rng: &mut SeededRng,
        n: usize,
        out: &mut Vec<T>,
    ) -> Result<()> {
        let ch = self.cholesky_factor(phi)?;
        let l = ch.lower();
        let d = self.dim;
        let mut z = vec![T::zero(); d];
        for _ in 0..n {
            z.iter_mut().for_each(|v| *v = T::of(rng.standard_normal()));
            for i in 0..d {
                let mut s = T::of(self.mean[i]);
                for k in 0..=i {
                    s += l[(i, k)] * z[k];
                }
                out.push(s);
            }
        }
        Ok(())
    }

    fn log_prob(&self, phi: &[T], x: &[T]) -> Result<T> {
        let ch = self.cholesky_factor(phi)?;
        let u = ch.solve_lower(&self.centered(x)?);
        let quad: T = u.iter().map(|&v| v * v).sum();
        let log_diag: T = (0..self.dim).map(|i| phi[Self::index(i, i)]).sum();
        Ok(-T::of(0.5) * quad - log_diag - T::of_usize(self.dim) * half_ln_2pi::<T>())
    }

    fn score_into(&self, phi: &[T], x: &[T], out: &mut [T]) -> Result<()> {
        check_dim("MvnCov score", Self::param_count(self.dim), out.len())?;
        let ch = self.cholesky_factor(phi)?;
        let u = ch.solve_lower(&self.centered(x)?);
        let v = ch.solve_upper(&u);
        let l = ch.lower();
        for i in 0..self.dim {
            for j in 0..i {
                out[Self::index(i, j)] = v[i] * u[j];
            }
            out[Self::index(i, i)] = l[(i, i)] * v[i] * u[i] - T::one();
        }
        Ok(())
    }
}
