//! Central finite-difference checks for analytic scores and gradients.

use crate::contract::{Functional, Model};
use crate::error::{check_dim, Result};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Default step and relative-error threshold.
pub const FD_STEP: f64 = 1e-6;
pub const FD_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    /// Largest `|analytic - fd| / max(1, |analytic|)` over all entries.
    pub max_rel_error: f64,
    pub worst_index: usize,
}

impl FdReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error <= tol
    }
}

fn compare(analytic: &[f64], numeric: &[f64]) -> FdReport {
    let mut worst = (0.0, 0);
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let e = (a - n).abs() / a.abs().max(1.0);
        if !(e <= worst.0) {
            worst = (e, i);
        }
    }
    FdReport {
        max_rel_error: worst.0,
        worst_index: worst.1,
    }
}

fn fd_at<T: Real>(phi: &[T], j: usize, h: f64, mut f: impl FnMut(&[T]) -> Result<Vec<f64>>) -> Result<Vec<f64>> {
    let mut p = phi.to_vec();
    let step = h * (1.0 + phi[j].to_f64_lossy().abs());
    let base = phi[j];
    p[j] = base + T::of(step);
    let up = f(&p)?;
    p[j] = base - T::of(step);
    let down = f(&p)?;
    Ok(up
        .iter()
        .zip(&down)
        .map(|(u, d)| (u - d) / (2.0 * step))
        .collect())
}

/// Compares `model.score` against differences of `model.log_prob` at `x`.
pub fn check_score<T: Real>(model: &dyn Model<T>, phi: &[T], x: &[T], h: f64) -> Result<FdReport> {
    check_dim("parameter vector", model.param_dim(), phi.len())?;
    let analytic: Vec<f64> = model.score(phi, x)?.iter().map(|v| v.to_f64_lossy()).collect();
    let mut numeric = Vec::with_capacity(phi.len());
    for j in 0..phi.len() {
        let d = fd_at(phi, j, h, |p| Ok(vec![model.log_prob(p, x)?.to_f64_lossy()]))?;
        numeric.push(d[0]);
    }
    Ok(compare(&analytic, &numeric))
}

/// Compares `functional.gradient` against differences of `functional.value`.
/// For Monte Carlo gradient modes the comparison includes the Monte Carlo
/// error, so pass a large budget `m`.
pub fn check_gradient<T: Real>(
    functional: &dyn Functional<T>,
    phi: &[T],
    m: usize,
    rng: &mut SeededRng,
    h: f64,
) -> Result<FdReport> {
    let p = functional.param_dim();
    check_dim("parameter vector", p, phi.len())?;
    let l = functional.output_dim();
    let grad = functional.gradient(phi, m, rng)?;
    let analytic: Vec<f64> = grad.as_slice().iter().map(|v| v.to_f64_lossy()).collect();
    // Row-major L x p, matching the gradient layout.
    let mut numeric = vec![0.0; l * p];
    for j in 0..p {
        let d = fd_at(phi, j, h, |q| {
            Ok(functional.value(q)?.iter().map(|v| v.to_f64_lossy()).collect())
        })?;
        for (i, v) in d.into_iter().enumerate() {
            numeric[i * p + j] = v;
        }
    }
    Ok(compare(&analytic, &numeric))
}
