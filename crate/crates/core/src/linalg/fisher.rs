//! Empirical Fisher information as a matrix-free operator.
//!
//! The operator represents `(1/M) J^T J + lambda I`, where row `m` of `J` is the
//! score of the `m`-th Monte Carlo draw from `p_phi`. It is never materialized:
//! `apply(v)` accumulates `g_m (g_m . v)` over the draws. In cached mode the
//! scores are stored (`O(Mp)` memory); in streaming mode the draws are
//! regenerated from the stored generator state on every application
//! (`O(p)` working memory beyond one chunk of draws). Both modes visit the
//! draws in the same order with the same arithmetic, so they agree bit for bit.

use serde::{Deserialize, Serialize};

use super::cg::LinearOperator;
use super::dense::Matrix;
use crate::contract::Model;
use crate::error::{check_dim, Error, Result};
use crate::rng::SeededRng;
use crate::scalar::{dot, Real};

const CHUNK_ROWS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FisherMode {
    #[default]
    Cached,
    Streaming,
}

/// Tikhonov damping added to the empirical Fisher.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping<T> {
    /// `lambda = factor * trace(I_M) / p`.
    Relative(T),
    Absolute(T),
}

impl<T: Real> Default for Damping<T> {
    fn default() -> Self {
        Damping::Relative(T::of(1e-6))
    }
}

impl<T: Real> Damping<T> {
    fn resolve(self, trace: T, p: usize) -> Result<T> {
        let lambda = match self {
            Damping::Relative(f) => f * trace / T::of_usize(p),
            Damping::Absolute(l) => l,
        };
        if lambda < T::zero() || !lambda.is_finite() {
            return Err(Error::InvalidConfig(format!("damping must be >= 0, got {lambda}")));
        }
        Ok(lambda)
    }
}

enum Storage<'a, T: Real> {
    Cached(Vec<T>),
    Streaming {
        model: &'a dyn Model<T>,
        phi: Vec<T>,
        rng: SeededRng,
    },
}

pub struct FisherOperator<'a, T: Real> {
    p: usize,
    samples: usize,
    damping: T,
    trace: T,
    storage: Storage<'a, T>,
}

impl<'a, T: Real> FisherOperator<'a, T> {
    /// Draws `m` samples from `p_phi` using `rng` and builds the operator.
    ///
    /// `rng` is advanced by exactly the draws consumed, in either mode.
    pub fn build(
        model: &'a dyn Model<T>,
        phi: &[T],
        m: usize,
        rng: &mut SeededRng,
        mode: FisherMode,
        damping: Damping<T>,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidConfig("Fisher sample count must be >= 1".into()));
        }
        let p = model.param_dim();
        check_dim("parameter vector", p, phi.len())?;
        model.check_params(phi)?;

        let start = rng.clone();
        let mut trace = T::zero();
        let mut cached = match mode {
            FisherMode::Cached => Some(Vec::with_capacity(m * p)),
            FisherMode::Streaming => None,
        };
        let mut g = vec![T::zero(); p];
        for_each_score(model, phi, m, rng, &mut g, |g| {
            trace += dot(g, g);
            if let Some(j) = cached.as_mut() {
                j.extend_from_slice(g);
            }
        })?;
        trace /= T::of_usize(m);
        let damping = damping.resolve(trace, p)?;
        let storage = match cached {
            Some(j) => Storage::Cached(j),
            None => Storage::Streaming {
                model,
                phi: phi.to_vec(),
                rng: start,
            },
        };
        Ok(Self {
            p,
            samples: m,
            damping,
            trace,
            storage,
        })
    }

    /// Operator over an explicit `m x p` score matrix (row-major).
    pub fn from_scores(p: usize, scores: Vec<T>, damping: Damping<T>) -> Result<Self> {
        if p == 0 || scores.is_empty() || scores.len() % p != 0 {
            return Err(Error::InvalidConfig(format!(
                "score matrix of {} entries is not a non-empty multiple of p = {p}",
                scores.len()
            )));
        }
        let m = scores.len() / p;
        let trace = scores.iter().map(|&v| v * v).sum::<T>() / T::of_usize(m);
        let damping = damping.resolve(trace, p)?;
        Ok(Self {
            p,
            samples: m,
            damping,
            trace,
            storage: Storage::Cached(scores),
        })
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn damping(&self) -> T {
        self.damping
    }

    /// Trace of the undamped empirical Fisher.
    pub fn trace(&self) -> T {
        self.trace
    }

    pub fn mode(&self) -> FisherMode {
        match self.storage {
            Storage::Cached(_) => FisherMode::Cached,
            Storage::Streaming { .. } => FisherMode::Streaming,
        }
    }

    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.p];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, v: &[T], out: &mut [T]) -> Result<()> {
        check_dim("Fisher-vector product input", self.p, v.len())?;
        check_dim("Fisher-vector product output", self.p, out.len())?;
        out.iter_mut().for_each(|o| *o = T::zero());
        let mut accumulate = |g: &[T]| {
            let jv = dot(g, v);
            for (o, &gi) in out.iter_mut().zip(g) {
                *o += jv * gi;
            }
        };
        match &self.storage {
            Storage::Cached(j) => j.chunks_exact(self.p).for_each(&mut accumulate),
            Storage::Streaming { model, phi, rng } => {
                let mut rng = rng.clone();
                let mut g = vec![T::zero(); self.p];
                for_each_score(*model, phi, self.samples, &mut rng, &mut g, accumulate)?;
            }
        }
        let inv_m = T::one() / T::of_usize(self.samples);
        for (o, &vi) in out.iter_mut().zip(v) {
            *o = *o * inv_m + self.damping * vi;
        }
        Ok(())
    }

    /// Materializes the operator. Intended for diagnostics and small `p`.
    pub fn to_dense(&self) -> Result<Matrix<T>> {
        let mut dense = Matrix::zeros(self.p, self.p);
        let mut e = vec![T::zero(); self.p];
        for j in 0..self.p {
            e[j] = T::one();
            let col = self.apply(&e)?;
            e[j] = T::zero();
            for i in 0..self.p {
                dense[(i, j)] = col[i];
            }
        }
        Ok(dense)
    }
}

impl<T: Real> LinearOperator<T> for FisherOperator<'_, T> {
    fn dim(&self) -> usize {
        self.p
    }

    fn apply_into(&self, v: &[T], out: &mut [T]) -> Result<()> {
        FisherOperator::apply_into(self, v, out)
    }
}

fn for_each_score<T: Real>(
    model: &dyn Model<T>,
    phi: &[T],
    m: usize,
    rng: &mut SeededRng,
    g: &mut [T],
    mut f: impl FnMut(&[T]),
) -> Result<()> {
    let d = model.obs_dim();
    let mut buf = Vec::with_capacity(CHUNK_ROWS.min(m) * d);
    let mut remaining = m;
    while remaining > 0 {
        let take = remaining.min(CHUNK_ROWS);
        buf.clear();
        model.sample_into(phi, rng, take, &mut buf)?;
        for x in buf.chunks_exact(d) {
            model.score_into(phi, x, g)?;
            f(g);
        }
        remaining -= take;
    }
    Ok(())
}
