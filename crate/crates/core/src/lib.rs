//! Monte Carlo efficient influence functions for parametric models.
//!
//! The core types are generic over the scalar (`f32` or `f64`) through
//! [`Real`]; the aliases at the crate root fix the scalar to `f64`, which is
//! what the experiments use.
//!
//! ```
//! use mceif::{EifConfig, EifEvaluator, ExpectedDensity, Gaussian1D, GradientMode, ParamVector, SeededRng};
//! use mceif::InfluenceFunction;
//!
//! let model = Gaussian1D::unknown_sigma();
//! let functional = ExpectedDensity::new(model, GradientMode::Analytic);
//! let phi = ParamVector::<f64>::from_f64(&[0.0, 1.0]).unwrap();
//! let mut rng = SeededRng::new(1);
//! let eif = EifEvaluator::build(&model, &functional, &phi, 10_000, &mut rng, &EifConfig::default()).unwrap();
//! let at_zero = eif.evaluate(&[0.0]).unwrap()[0];
//! assert!((at_zero - 0.141).abs() < 0.01);
//! ```

pub mod analytic;
pub mod contract;
pub mod dataset;
pub mod eif;
pub mod error;
pub mod estimators;
pub mod fdcheck;
pub mod functionals;
pub mod gateaux;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod scalar;
pub mod types;

pub use contract::{FlatPrior, Functional, GaussianPrior, InfluenceFunction, LogPrior, Model};
pub use eif::{EifConfig, EifDiagnostics, EifEvaluator, MeanZeroCheck};
pub use error::{Error, Result};
pub use functionals::{AteFunctional, ExpectedDensity, GradientMode, MinVariancePortfolio};
pub use linalg::{cg_solve, CgConfig, CgOutcome, Cholesky, Damping, FisherMode, FisherOperator, LinearOperator, Matrix};
pub use models::{lkj_onion, CausalGlm, CausalGlmLayout, Gaussian1D, MvnCov};
pub use rng::SeededRng;
pub use scalar::Real;
pub use types::{Observation, ObservationBatch, ParamVector};

pub type Params = ParamVector<f64>;
pub type Batch = ObservationBatch<f64>;
pub type Mat = Matrix<f64>;
pub type Eif<'a> = EifEvaluator<'a, f64>;
pub type Fisher<'a> = FisherOperator<'a, f64>;
pub type CgOptions = CgConfig<f64>;
pub type EifOptions = EifConfig<f64>;
