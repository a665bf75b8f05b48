use crate::contract::Model;
use crate::error::{check_dim, Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Real;

use super::half_ln_2pi;

/// Univariate normal family.
///
/// Parameter layout: `[mu]` when the scale is known, `[mu, sigma]` otherwise.
/// `sigma` is the standard deviation itself (not its logarithm) and must be
/// strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    known_sigma: Option<f64>,
}

impl Gaussian1D {
    /// `mu` unknown, `sigma` fixed.
    pub fn known_sigma(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
        }
        Ok(Self {
            known_sigma: Some(sigma),
        })
    }

    /// Both `mu` and `sigma` unknown.
    pub fn unknown_sigma() -> Self {
        Self { known_sigma: None }
    }

    pub fn fixed_sigma(&self) -> Option<f64> {
        self.known_sigma
    }

    /// `(mu, sigma)` for a parameter vector of this family.
    pub fn location_scale<T: Real>(&self, phi: &[T]) -> Result<(T, T)> {
        match self.known_sigma {
            Some(s) => {
                check_dim("Gaussian1D parameters", 1, phi.len())?;
                Ok((phi[0], T::of(s)))
            }
            None => {
                check_dim("Gaussian1D parameters", 2, phi.len())?;
                let sigma = phi[1];
                if !(sigma > T::zero()) {
                    return Err(Error::Domain(format!("sigma must be > 0, got {sigma}")));
                }
                Ok((phi[0], sigma))
            }
        }
    }
}

impl<T: Real> Model<T> for Gaussian1D {
    fn name(&self) -> &'static str {
        match self.known_sigma {
            Some(_) => "gaussian1d-known-sigma",
            None => "gaussian1d",
        }
    }

    fn param_dim(&self) -> usize {
        if self.known_sigma.is_some() {
            1
        } else {
            2
        }
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn check_params(&self, phi: &[T]) -> Result<()> {
        self.location_scale(phi).map(|_| ())
    }

    fn sample_into(
        &self,
        phi: &[T],
        rng: &mut SeededRng,
        n: usize,
        out: &mut Vec<T>,
    ) -> Result<()> {
        let (mu, sigma) = self.location_scale(phi)?;
        for _ in 0..n {
            out.push(mu + sigma * T::of(rng.standard_normal()));
        }
        Ok(())
    }

    fn log_prob(&self, phi: &[T], x: &[T]) -> Result<T> {
        let (mu, sigma) = self.location_scale(phi)?;
        check_dim("Gaussian1D observation", 1, x.len())?;
        let z = (x[0] - mu) / sigma;
        Ok(-T::of(0.5) * z * z - sigma.ln() - half_ln_2pi())
    }

    fn score_into(&self, phi: &[T], x: &[T], out: &mut [T]) -> Result<()> {
        let (mu, sigma) = self.location_scale(phi)?;
        check_dim("Gaussian1D observation", 1, x.len())?;
        check_dim("Gaussian1D score", <Self as Model<T>>::param_dim(self), out.len())?;
        let dx = x[0] - mu;
        let s2 = sigma * sigma;
        out[0] = dx / s2;
        if self.known_sigma.is_none() {
            out[1] = (dx * dx - s2) / (s2 * sigma);
        }
        Ok(())
    }
}
