//! Dense helpers, the matrix-free empirical Fisher operator and conjugate gradient.

mod cg;
mod dense;
mod fisher;

pub use cg::{cg_solve, CgConfig, CgOutcome, LinearOperator};
pub use dense::{Cholesky, Matrix};
pub use fisher::{Damping, FisherMode, FisherOperator};
