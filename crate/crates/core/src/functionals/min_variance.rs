//! Global minimum-variance portfolio `theta = Sigma^-1 1 / (1^T Sigma^-1 1)`.

use crate::contract::Functional;
use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::models::MvnCov;
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Condition-number bound (estimated from the Cholesky diagonal) above which
/// the covariance is treated as singular.
const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct MinVariancePortfolio {
    model: MvnCov,
}

impl MinVariancePortfolio {
    pub fn new(model: MvnCov) -> Self {
        Self { model }
    }

    /// Weights for an explicit covariance factorization.
    pub fn weights_from_cholesky<T: Real>(ch: &Cholesky<T>) -> Result<Vec<T>> {
        let l = ch.lower();
        let n = ch.dim();
        let (lo, hi) = (0..n).fold((T::infinity(), T::zero()), |(lo, hi), i| {
            (lo.min(l[(i, i)]), hi.max(l[(i, i)]))
        });
        if (hi / lo).powi(2) > T::of(MAX_CONDITION) {
            return Err(Error::Numerical("covariance is near-singular".into()));
        }
        let v = ch.solve(&vec![T::one(); n])?;
        let s: T = v.iter().copied().sum();
        if !(s > T::zero()) || !s.is_finite() {
            return Err(Error::Numerical("degenerate portfolio normalization".into()));
        }
        Ok(v.into_iter().map(|vi| vi / s).collect())
    }

    pub fn weights_for_covariance<T: Real>(sigma: &Matrix<T>) -> Result<Vec<T>> {
        Self::weights_from_cholesky(&Cholesky::factor(sigma)?)
    }

    /// Matrix-calculus derivative `d theta = -(I - theta 1^T) Sigma^-1 dSigma theta`
    /// pushed through the Cholesky parameterization.
    pub fn analytic_gradient<T: Real>(&self, phi: &[T]) -> Result<Matrix<T>> {
        let ch = self.model.cholesky_factor(phi)?;
        let theta = Self::weights_from_cholesky(&ch)?;
        let l = ch.lower();
        let d = self.model.dim();
        let p = MvnCov::param_count(d);
        // L^T theta
        let lt_theta: Vec<T> = (0..d)
            .map(|j| (j..d).map(|i| l[(i, j)] * theta[i]).sum())
            .collect();
        let mut grad = Matrix::zeros(d, p);
        for i in 0..d {
            for j in 0..=i {
                let a = if i == j { l[(i, i)] } else { T::one() };
                // dSigma theta = a (e_i (L^T theta)_j + theta_i L[:, j])
                let mut ds_theta = vec![T::zero(); d];
                ds_theta[i] += a * lt_theta[j];
                for r in j..d {
                    ds_theta[r] += a * theta[i] * l[(r, j)];
                }
                let w = ch.solve(&ds_theta)?;
                let total: T = w.iter().copied().sum();
                let k = MvnCov::index(i, j);
                for r in 0..d {
                    grad[(r, k)] = -(w[r] - theta[r] * total);
                }
            }
        }
        Ok(grad)
    }
}

impl<T: Real> Functional<T> for MinVariancePortfolio {
    fn name(&self) -> &'static str {
        "min-variance-portfolio"
    }

    fn output_dim(&self) -> usize {
        self.model.dim()
    }

    fn param_dim(&self) -> usize {
        MvnCov::param_count(self.model.dim())
    }

    fn value(&self, phi: &[T]) -> Result<Vec<T>> {
        Self::weights_from_cholesky(&self.model.cholesky_factor(phi)?)
    }

    /// Central differences with step `1e-5 (1 + |phi_j|)`.
    fn gradient(&self, phi: &[T], _m: usize, _rng: &mut SeededRng) -> Result<Matrix<T>> {
        let d = self.model.dim();
        let p = MvnCov::param_count(d);
        let mut grad = Matrix::zeros(d, p);
        let mut work = phi.to_vec();
        for k in 0..p {
            let h = T::of(1e-5) * (T::one() + phi[k].abs());
            work[k] = phi[k] + h;
            let plus = <Self as Functional<T>>::value(self, &work)?;
            work[k] = phi[k] - h;
            let minus = <Self as Functional<T>>::value(self, &work)?;
            work[k] = phi[k];
            for r in 0..d {
                grad[(r, k)] = (plus[r] - minus[r]) / (T::of(2.0) * h);
            }
        }
        Ok(grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_uniform_weights() {
        let f = MinVariancePortfolio::new(MvnCov::new(4).unwrap());
        let w: Vec<f64> = f.value(&vec![0.0; 10]).unwrap();
        for wi in w {
            assert!((wi - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_example() {
        let sigma = Matrix::from_vec(2, 2, vec![1.0f64, 0.0, 0.0, 4.0]).unwrap();
        let w = MinVariancePortfolio::weights_for_covariance(&sigma).unwrap();
        assert!((w[0] - 0.8).abs() < 1e-14 && (w[1] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn near_singular_is_reported() {
        let sigma = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1e-14]).unwrap();
        assert!(matches!(
            MinVariancePortfolio::weights_for_covariance(&sigma),
            Err(Error::Numerical(_))
        ));
    }

    #[test]
    fn finite_difference_matches_matrix_calculus() {
        for (d, phi) in [
            (2usize, vec![0.1, 0.4, -0.3]),
            (3, vec![0.2, -0.5, 0.1, 0.3, 0.6, -0.2]),
        ] {
            let f = MinVariancePortfolio::new(MvnCov::new(d).unwrap());
            let fd = f.gradient(&phi, 0, &mut SeededRng::new(0)).unwrap();
            let an = f.analytic_gradient(&phi).unwrap();
            assert!(fd.max_abs_diff(&an) < 1e-8, "d = {d}");
        }
    }
}
