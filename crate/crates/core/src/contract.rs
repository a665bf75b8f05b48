//! The model and functional contracts every other module consumes.

use crate::error::{check_dim, Error, Result};
use crate::linalg::Matrix;
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::types::ObservationBatch;

/// A parametric family `p_phi(x)` with an analytic score.
///
/// Implementations must draw each sampled row from `rng` sequentially, so that
/// drawing `a` rows and then `b` rows yields the same data as drawing `a + b`
/// rows at once. The streaming Fisher operator relies on this to regenerate
/// its samples chunk by chunk.
pub trait Model<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;

    fn param_dim(&self) -> usize;

    fn obs_dim(&self) -> usize;

    /// Rejects parameters outside the family's domain.
    fn check_params(&self, phi: &[T]) -> Result<()>;

    /// Appends `n` draws (row-major) to `out`.
    fn sample_into(&self, phi: &[T], rng: &mut SeededRng, n: usize, out: &mut Vec<T>)
        -> Result<()>;

    fn log_prob(&self, phi: &[T], x: &[T]) -> Result<T>;

    /// Writes `grad_phi log p_phi(x)` into `out` (length `param_dim`).
    fn score_into(&self, phi: &[T], x: &[T], out: &mut [T]) -> Result<()>;

    /// CSV column names for exported datasets.
    fn column_names(&self) -> Vec<String> {
        (1..=self.obs_dim()).map(|j| format!("x{j}")).collect()
    }

    fn sample(&self, phi: &[T], rng: &mut SeededRng, n: usize) -> Result<ObservationBatch<T>> {
        if n == 0 {
            return Err(Error::InvalidConfig("sample count must be >= 1".into()));
        }
        check_dim("parameter vector", self.param_dim(), phi.len())?;
        let mut out = Vec::with_capacity(n * self.obs_dim());
        self.sample_into(phi, rng, n, &mut out)?;
        Ok(ObservationBatch::from_flat_unchecked(self.obs_dim(), out))
    }

    fn score(&self, phi: &[T], x: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.param_dim()];
        self.score_into(phi, x, &mut out)?;
        Ok(out)
    }
}

/// A target functional `psi(phi) = Psi(p_phi)` with values in `R^L`.
pub trait Functional<T: Real>: Send + Sync {
    fn name(&self) -> &'static str;

    fn output_dim(&self) -> usize;

    fn param_dim(&self) -> usize;

    fn value(&self, phi: &[T]) -> Result<Vec<T>>;

    /// `L x p` gradient estimate using a sample budget `m`. Closed-form
    /// gradients ignore `m` and `rng`.
    fn gradient(&self, phi: &[T], m: usize, rng: &mut SeededRng) -> Result<Matrix<T>>;

    /// Estimate of the functional under the distribution with density
    /// proportional to `w(x) p_phi(x)`, from `samples` drawn from `p_phi` and
    /// their weights. Only functionals expressible through expectations
    /// support this.
    fn reweighted_estimate(
        &self,
        _phi: &[T],
        _samples: &ObservationBatch<T>,
        _weights: &[T],
    ) -> Result<Vec<T>> {
        Err(Error::Unsupported(format!(
            "{} has no reweighted estimator",
            self.name()
        )))
    }
}

/// Anything that maps an observation to an influence value in `R^L`.
pub trait InfluenceFunction<T: Real>: Sync {
    fn output_dim(&self) -> usize;

    fn evaluate(&self, x: &[T]) -> Result<Vec<T>>;

    /// Row `n` holds the value at observation `n`.
    fn evaluate_batch(&self, batch: &ObservationBatch<T>) -> Result<Matrix<T>> {
        let l = self.output_dim();
        let mut data = Vec::with_capacity(batch.len() * l);
        for x in batch.rows() {
            data.extend(self.evaluate(x)?);
        }
        Matrix::from_vec(batch.len(), l, data)
    }

    fn mean_over(&self, batch: &ObservationBatch<T>) -> Result<Vec<T>> {
        let mut acc = vec![T::zero(); self.output_dim()];
        for x in batch.rows() {
            for (a, v) in acc.iter_mut().zip(self.evaluate(x)?) {
                *a += v;
            }
        }
        let n = T::of_usize(batch.len());
        acc.iter_mut().for_each(|a| *a /= n);
        Ok(acc)
    }
}

/// Log prior density with gradient, used by MAP fitting.
pub trait LogPrior<T: Real>: Sync {
    /// Returns `log pi(phi)` and writes its gradient into `grad`.
    fn log_density(&self, phi: &[T], grad: &mut [T]) -> T;
}

/// Improper flat prior; MAP reduces to maximum likelihood.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatPrior;

impl<T: Real> LogPrior<T> for FlatPrior {
    fn log_density(&self, _phi: &[T], grad: &mut [T]) -> T {
        grad.iter_mut().for_each(|g| *g = T::zero());
        T::zero()
    }
}

/// Independent normal prior on every parameter coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPrior<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Real> GaussianPrior<T> {
    pub fn isotropic(p: usize, std: T) -> Self {
        Self {
            mean: vec![T::zero(); p],
            std: vec![std; p],
        }
    }
}

impl<T: Real> LogPrior<T> for GaussianPrior<T> {
    fn log_density(&self, phi: &[T], grad: &mut [T]) -> T {
        let half_ln_2pi = T::of(0.5 * (2.0 * std::f64::consts::PI).ln());
        let mut lp = T::zero();
        for (j, &v) in phi.iter().enumerate() {
            let s = self.std[j];
            let z = (v - self.mean[j]) / s;
            lp -= T::of(0.5) * z * z + s.ln() + half_ln_2pi;
            grad[j] = -z / s;
        }
        lp
    }
}
