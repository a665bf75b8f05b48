//! `Psi(P) = integral of p(x)^2 dx` for the univariate normal family.

use std::f64::consts::PI;

use super::GradientMode;
use crate::contract::Functional;
use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::models::Gaussian1D;
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::types::ObservationBatch;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedDensity {
    model: Gaussian1D,
    mode: GradientMode,
}

impl ExpectedDensity {
    pub fn new(model: Gaussian1D, mode: GradientMode) -> Self {
        Self { model, mode }
    }

    pub fn mode(&self) -> GradientMode {
        self.mode
    }

    fn normal_pdf<T: Real>(z: T, sigma: T) -> T {
        (-T::of(0.5) * z * z).exp() / (sigma * T::of((2.0 * PI).sqrt()))
    }

    /// Reparameterized estimate `(1/m) sum p_phi(mu + sigma z_m)`.
    pub fn mc_value<T: Real>(&self, phi: &[T], m: usize, rng: &mut SeededRng) -> Result<T> {
        let (_, sigma) = self.model.location_scale(phi)?;
        if m == 0 {
            return Err(Error::InvalidConfig("sample budget must be >= 1".into()));
        }
        let total: T = (0..m)
            .map(|_| Self::normal_pdf(T::of(rng.standard_normal()), sigma))
            .sum();
        Ok(total / T::of_usize(m))
    }

    /// Pathwise derivative of [`ExpectedDensity::mc_value`] with respect to
    /// `(mu, sigma)`, through both the sample location and the density.
    fn mc_gradient<T: Real>(&self, phi: &[T], m: usize, rng: &mut SeededRng) -> Result<(T, T)> {
        let (mu, sigma) = self.model.location_scale(phi)?;
        if m == 0 {
            return Err(Error::InvalidConfig("sample budget must be >= 1".into()));
        }
        let s2 = sigma * sigma;
        let (mut d_mu, mut d_sigma) = (T::zero(), T::zero());
        for _ in 0..m {
            let z = T::of(rng.standard_normal());
            let x = mu + sigma * z;
            let dx = x - mu;
            let p = Self::normal_pdf(dx / sigma, sigma);
            // d p(x)/dx and the explicit parameter partials at fixed x.
            let dp_dx = -p * dx / s2;
            let dp_dmu = p * dx / s2;
            let dp_dsigma = p * (dx * dx / (s2 * sigma) - T::one() / sigma);
            d_mu += dp_dx + dp_dmu;
            d_sigma += dp_dx * z + dp_dsigma;
        }
        let mm = T::of_usize(m);
        Ok((d_mu / mm, d_sigma / mm))
    }
}

impl<T: Real> Functional<T> for ExpectedDensity {
    fn name(&self) -> &'static str {
        "expected-density"
    }

    fn output_dim(&self) -> usize {
        1
    }

    fn param_dim(&self) -> usize {
        if self.model.fixed_sigma().is_some() {
            1
        } else {
            2
        }
    }

    fn value(&self, phi: &[T]) -> Result<Vec<T>> {
        let (_, sigma) = self.model.location_scale(phi)?;
        Ok(vec![T::one() / (T::of(2.0) * sigma * T::PI().sqrt())])
    }

    fn gradient(&self, phi: &[T], m: usize, rng: &mut SeededRng) -> Result<Matrix<T>> {
        let (_, sigma) = self.model.location_scale(phi)?;
        let (d_mu, d_sigma) = match self.mode {
            GradientMode::Analytic => (
                T::zero(),
                -T::one() / (T::of(2.0) * sigma * sigma * T::PI().sqrt()),
            ),
            GradientMode::MonteCarlo => self.mc_gradient(phi, m, rng)?,
        };
        let row = if self.model.fixed_sigma().is_some() {
            vec![d_mu]
        } else {
            vec![d_mu, d_sigma]
        };
        let p = row.len();
        Matrix::from_vec(1, p, row)
    }

    /// `int (w p)^2 / (int w p)^2 = E_p[w^2 p] / E_p[w]^2`.
    fn reweighted_estimate(
        &self,
        phi: &[T],
        samples: &ObservationBatch<T>,
        weights: &[T],
    ) -> Result<Vec<T>> {
        let (mu, sigma) = self.model.location_scale(phi)?;
        check_dim("reweighting weights", samples.len(), weights.len())?;
        let (mut num, mut den) = (T::zero(), T::zero());
        for (x, &w) in samples.rows().zip(weights) {
            let p = Self::normal_pdf((x[0] - mu) / sigma, sigma);
            num += w * w * p;
            den += w;
        }
        let n = T::of_usize(samples.len());
        let den = den / n;
        Ok(vec![(num / n) / (den * den)])
    }
}
