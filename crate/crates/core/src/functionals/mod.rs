//! Bundled target functionals.

mod ate;
mod expected_density;
mod min_variance;

pub use ate::AteFunctional;
pub use expected_density::ExpectedDensity;
pub use min_variance::MinVariancePortfolio;

use serde::{Deserialize, Serialize};

/// How a functional estimates its gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMode {
    /// Closed form; ignores the sample budget.
    Analytic,
    /// Pathwise (reparameterized) Monte Carlo with the given sample budget.
    MonteCarlo,
}
