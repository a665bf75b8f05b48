//! Conjugate gradient for symmetric positive (semi)definite operators.

use serde::{Deserialize, Serialize};

use super::fisher::Damping;
use crate::error::{check_dim, Error, Result};
use crate::scalar::{axpy, dot, norm, Real};

pub trait LinearOperator<T: Real> {
    fn dim(&self) -> usize;
    fn apply_into(&self, v: &[T], out: &mut [T]) -> Result<()>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgConfig<T> {
    /// Stop when `||A x - b|| <= rel_tolerance * ||b||`.
    pub rel_tolerance: T,
    /// `None` means `min(p, 1000)`.
    pub max_iters: Option<usize>,
    /// Damping added to the empirical Fisher the solver is applied to.
    pub damping: Damping<T>,
}

impl<T: Real> Default for CgConfig<T> {
    fn default() -> Self {
        Self {
            rel_tolerance: T::of(1e-6),
            max_iters: None,
            damping: Damping::default(),
        }
    }
}

impl<T: Real> CgConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > T::zero()) {
            return Err(Error::InvalidConfig("CG tolerance must be > 0".into()));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidConfig("CG max_iters must be >= 1".into()));
        }
        Ok(())
    }

    pub fn iteration_budget(&self, p: usize) -> usize {
        self.max_iters.unwrap_or_else(|| p.clamp(1, 1000))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgOutcome<T> {
    pub solution: Vec<T>,
    pub iterations: usize,
    /// `||A x - b|| / ||b||` of the returned solution (0 when `b = 0`).
    pub relative_residual: T,
    pub converged: bool,
}

/// Solves `A x = b` from `x0 = 0` without preconditioning.
///
/// Hitting the iteration budget is reported through `converged`, not as an
/// error. A NaN appearing mid-iteration is a [`Error::Numerical`].
pub fn cg_solve<T: Real, A: LinearOperator<T> + ?Sized>(
    op: &A,
    rhs: &[T],
    cfg: &CgConfig<T>,
) -> Result<CgOutcome<T>> {
    cfg.validate()?;
    let n = op.dim();
    check_dim("CG right-hand side", n, rhs.len())?;
    let budget = cfg.iteration_budget(n);
    let b_norm = norm(rhs);
    let mut x = vec![T::zero(); n];
    if b_norm == T::zero() {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            relative_residual: T::zero(),
            converged: true,
        });
    }
    if !b_norm.is_finite() {
        return Err(Error::NonFinite("CG right-hand side"));
    }
    let target = cfg.rel_tolerance * b_norm;

    let mut r = rhs.to_vec();
    let mut d = r.clone();
    let mut ad = vec![T::zero(); n];
    let mut rr = dot(&r, &r);
    let mut iters = 0;
    while iters < budget {
        op.apply_into(&d, &mut ad)?;
        let dad = dot(&d, &ad);
        if !dad.is_finite() || !rr.is_finite() {
            return Err(Error::Numerical(format!("NaN in CG at iteration {iters}")));
        }
        if dad <= T::zero() {
            // Direction in the null space of a semidefinite operator.
            break;
        }
        let alpha = rr / dad;
        axpy(alpha, &d, &mut x);
        axpy(-alpha, &ad, &mut r);
        iters += 1;
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            // Confirm with the true residual; the recurrence can drift.
            op.apply_into(&x, &mut ad)?;
            for i in 0..n {
                r[i] = rhs[i] - ad[i];
            }
            let true_rr = dot(&r, &r);
            if true_rr.sqrt() <= target {
                rr = true_rr;
                break;
            }
            // Restart from the current iterate.
            d.copy_from_slice(&r);
            rr = true_rr;
            continue;
        }
        let beta = rr_new / rr;
        for i in 0..n {
            d[i] = r[i] + beta * d[i];
        }
        rr = rr_new;
    }

    op.apply_into(&x, &mut ad)?;
    let res = (0..n)
        .map(|i| {
            let e = rhs[i] - ad[i];
            e * e
        })
        .sum::<T>()
        .sqrt();
    if !res.is_finite() {
        return Err(Error::Numerical("non-finite CG residual".into()));
    }
    let _ = rr;
    Ok(CgOutcome {
        solution: x,
        iterations: iters,
        relative_residual: res / b_norm,
        converged: res <= target,
    })
}
