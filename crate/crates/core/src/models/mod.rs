//! Bundled parametric families.

mod causal_glm;
mod gaussian;
mod lkj;
mod mvn_cov;

pub use causal_glm::{CausalGlm, CausalGlmLayout};
pub use gaussian::Gaussian1D;
pub use lkj::lkj_onion;
pub use mvn_cov::MvnCov;

use crate::scalar::Real;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[inline]
pub(crate) fn half_ln_2pi<T: Real>() -> T {
    T::of(HALF_LN_2PI)
}
