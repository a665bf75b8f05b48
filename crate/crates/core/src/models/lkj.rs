//! Random correlation matrices from the LKJ distribution via the onion method.

use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, Matrix};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Draws a `dim x dim` correlation matrix from LKJ with shape `eta = 1`,
/// i.e. uniformly over correlation matrices.
pub fn lkj_onion<T: Real>(dim: usize, rng: &mut SeededRng) -> Result<Matrix<T>> {
    if dim < 2 {
        return Err(Error::InvalidConfig(format!("LKJ needs dim >= 2, got {dim}")));
    }
    let eta = 1.0;
    let mut beta = eta + (dim as f64 - 2.0) / 2.0;
    let first = Beta::new(beta, beta).map_err(|e| Error::Numerical(e.to_string()))?;
    let r12 = 2.0 * first.sample(rng) - 1.0;
    let mut corr = vec![vec![1.0, r12], vec![r12, 1.0]];

    for k in 2..dim {
        beta -= 0.5;
        let y = Beta::new(k as f64 / 2.0, beta)
            .map_err(|e| Error::Numerical(e.to_string()))?
            .sample(rng);
        let mut u: Vec<f64> = (0..k).map(|_| rng.standard_normal()).collect();
        let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let scale = y.sqrt() / un;
        u.iter_mut().for_each(|v| *v *= scale);

        let current = Matrix::from_fn(k, k, |i, j| corr[i][j]);
        let ch = Cholesky::factor(&current)?;
        let l = ch.lower();
        let z: Vec<f64> = (0..k)
            .map(|i| (0..=i).map(|j| l[(i, j)] * u[j]).sum())
            .collect();
        for (i, row) in corr.iter_mut().enumerate() {
            row.push(z[i]);
        }
        let mut last = z;
        last.push(1.0);
        corr.push(last);
    }
    Ok(Matrix::from_fn(dim, dim, |i, j| T::of(corr[i][j])))
}
