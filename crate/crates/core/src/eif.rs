//! Monte Carlo efficient influence functions.
//!
//! For a model `p_phi` and functional `psi`, the efficient influence function
//! at `phi` is `x -> grad psi(phi)^T I(phi)^-1 score(phi, x)`. The Monte Carlo
//! version replaces `grad psi` with an estimate from `m` samples and `I` with
//! the damped empirical Fisher over `m` model draws.
//!
//! Because the Fisher is symmetric, `grad psi^T I^-1 s = (I^-1 grad psi^T)^T s`.
//! [`EifEvaluator::build`] therefore runs one conjugate-gradient solve per
//! output coordinate (`L` solves in total) and stores the solved directions
//! `W` (`L x p`); evaluating at a point is then a single score computation and
//! a small matrix-vector product.

use serde::{Deserialize, Serialize};

use crate::contract::{Functional, InfluenceFunction, Model};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{cg_solve, CgConfig, FisherMode, FisherOperator, Matrix};
use crate::rng::SeededRng;
use crate::scalar::{dot, Real};
use crate::types::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EifConfig<T> {
    pub cg: CgConfig<T>,
    pub fisher_mode: FisherMode,
    /// Sample budget for the functional gradient; `None` reuses the Fisher
    /// sample count.
    pub gradient_budget: Option<usize>,
}

impl<T: Real> Default for EifConfig<T> {
    fn default() -> Self {
        Self {
            cg: CgConfig::default(),
            fisher_mode: FisherMode::Cached,
            gradient_budget: None,
        }
    }
}

/// Solve diagnostics, exported alongside estimator results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EifDiagnostics {
    #[serde(rename = "M")]
    pub samples: usize,
    #[serde(rename = "L")]
    pub output_dim: usize,
    pub p: usize,
    pub cg_iters_per_row: Vec<usize>,
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    pub damping: f64,
}

impl EifDiagnostics {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

pub struct EifEvaluator<'a, T: Real> {
    model: &'a dyn Model<T>,
    phi: ParamVector<T>,
    directions: Matrix<T>,
    diagnostics: EifDiagnostics,
}

impl<'a, T: Real> EifEvaluator<'a, T> {
    /// Builds the evaluator at `phi` from `m` Monte Carlo samples.
    ///
    /// CG non-convergence is recorded per row in the diagnostics rather than
    /// failing the build.
    pub fn build(
        model: &'a dyn Model<T>,
        functional: &dyn Functional<T>,
        phi: &ParamVector<T>,
        m: usize,
        rng: &mut SeededRng,
        cfg: &EifConfig<T>,
    ) -> Result<Self> {
        let p = model.param_dim();
        check_dim("functional parameter dimension", p, functional.param_dim())?;
        check_dim("parameter vector", p, phi.len())?;
        cfg.cg.validate()?;
        if m == 0 {
            return Err(Error::InvalidConfig("Monte Carlo sample count must be >= 1".into()));
        }
        let mut fisher_rng = SeededRng::new(rng.next_seed());
        let mut grad_rng = SeededRng::new(rng.next_seed());

        let grad = functional.gradient(phi, cfg.gradient_budget.unwrap_or(m), &mut grad_rng)?;
        let l = functional.output_dim();
        if grad.rows() != l || grad.cols() != p {
            return Err(Error::DimensionMismatch {
                what: "functional gradient",
                expected: l * p,
                got: grad.rows() * grad.cols(),
            });
        }
        if grad.as_slice().iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("functional gradient"));
        }

        let fisher = FisherOperator::build(
            model,
            phi,
            m,
            &mut fisher_rng,
            cfg.fisher_mode,
            cfg.cg.damping,
        )?;
        Self::from_fisher(model, phi, &grad, &fisher, &cfg.cg)
    }

    /// Builds the evaluator from an existing gradient and Fisher operator.
    pub fn from_fisher(
        model: &'a dyn Model<T>,
        phi: &ParamVector<T>,
        grad: &Matrix<T>,
        fisher: &FisherOperator<'_, T>,
        cg: &CgConfig<T>,
    ) -> Result<Self> {
        let p = model.param_dim();
        check_dim("functional gradient columns", p, grad.cols())?;
        check_dim("Fisher operator dimension", p, fisher.dim())?;
        let l = grad.rows();
        let mut directions = Matrix::zeros(l, p);
        let mut iters = Vec::with_capacity(l);
        let mut residuals = Vec::with_capacity(l);
        let mut converged = Vec::with_capacity(l);
        for row in 0..l {
            let out = cg_solve(fisher, grad.row(row), cg)?;
            directions.row_mut(row).copy_from_slice(&out.solution);
            iters.push(out.iterations);
            residuals.push(out.relative_residual.to_f64_lossy());
            converged.push(out.converged);
        }
        Ok(Self {
            model,
            phi: phi.clone(),
            directions,
            diagnostics: EifDiagnostics {
                samples: fisher.samples(),
                output_dim: l,
                p,
                cg_iters_per_row: iters,
                residuals,
                converged,
                damping: fisher.damping().to_f64_lossy(),
            },
        })
    }

    pub fn params(&self) -> &ParamVector<T> {
        &self.phi
    }

    /// `W = I_M^-1 grad psi^T`, stored as `L x p`.
    pub fn directions(&self) -> &Matrix<T> {
        &self.directions
    }

    pub fn diagnostics(&self) -> &EifDiagnostics {
        &self.diagnostics
    }

    /// Monte Carlo mean of the influence function over `k` fresh draws from
    /// `p_phi`, with the per-coordinate sample standard deviation.
    pub fn mean_zero_check(&self, rng: &mut SeededRng, k: usize) -> Result<MeanZeroCheck<T>> {
        let draws = self.model.sample(&self.phi, rng, k)?;
        let values = self.evaluate_batch(&draws)?;
        let l = self.directions.rows();
        let n = T::of_usize(k);
        let mut mean = vec![T::zero(); l];
        for i in 0..k {
            for (m, &v) in mean.iter_mut().zip(values.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![T::zero(); l];
        for i in 0..k {
            for (j, &v) in values.row(i).iter().enumerate() {
                var[j] += (v - mean[j]) * (v - mean[j]);
            }
        }
        let denom = T::of_usize(k.saturating_sub(1).max(1));
        let std = var.into_iter().map(|v| (v / denom).sqrt()).collect();
        Ok(MeanZeroCheck { mean, std, draws: k })
    }
}

impl<T: Real> InfluenceFunction<T> for EifEvaluator<'_, T> {
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

#[derive(Debug, Clone, PartialEq)]
pub struct MeanZeroCheck<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
    pub draws: usize,
}

impl<T: Real> MeanZeroCheck<T> {
    /// Every coordinate of the mean lies within `z` standard errors of zero.
    pub fn within_band(&self, z: T) -> bool {
        let root_k = T::of_usize(self.draws).sqrt();
        self.mean
            .iter()
            .zip(&self.std)
            .all(|(&m, &s)| m.abs() <= z * s / root_k)
    }
}
