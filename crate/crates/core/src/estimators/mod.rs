//! Plug-in baseline, MAP fitting and the three MC-EIF corrected estimators.
//!
//! All corrected estimators work on a single split of the data: the first
//! half fits the initial parameters, the second half (the holdout) is only
//! used to average influence values, moments or the fluctuation likelihood.

mod dml;
mod map;
mod one_step;
mod tmle;

pub use dml::{dml_linear, dml_linear_with, IpwMoment, LinearMoment, PlugInMoment, RegressionDifferenceMoment};
pub use map::{map_fit, MapConfig, MapOutcome};
pub use one_step::{one_step, one_step_with, plug_in};
pub use tmle::{tmle_one_step, tmle_value_at, tmle_with, TmleConfig, TmleDiagnostics};

use serde::{Deserialize, Serialize};

use crate::eif::EifDiagnostics;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::ObservationBatch;

/// Disjoint halves of a dataset: `train` holds the first `floor(N/2)` rows,
/// `holdout` the remaining `ceil(N/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitData<T> {
    pub train: ObservationBatch<T>,
    pub holdout: ObservationBatch<T>,
}

impl<T: Real> SplitData<T> {
    pub fn split(data: &ObservationBatch<T>) -> Result<Self> {
        let n = data.len();
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 observations to split, got {n}"
            )));
        }
        let half = n / 2;
        Ok(Self {
            train: data.slice_rows(0, half)?,
            holdout: data.slice_rows(half, n)?,
        })
    }
}

/// Point estimate with its decomposition into an initial value and a
/// correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate<T> {
    pub estimate: Vec<T>,
    pub plug_in: Vec<T>,
    /// The value the correction is added to: the plug-in for one-step and
    /// TMLE, the holdout moment average for debiased ML.
    pub initial: Vec<T>,
    pub correction: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eif: Option<EifDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tmle: Option<TmleDiagnostics>,
}

/// Serializable estimator output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub estimator: String,
    pub functional: String,
    pub model: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub p: usize,
    pub estimate: Vec<f64>,
    pub plug_in: Vec<f64>,
    pub correction: Vec<f64>,
    pub diagnostics: EstimateDiagnostics,
}

impl EstimateResult {
    #[allow(clippy::too_many_arguments)]
    pub fn from_estimate<T: Real>(
        estimator: &str,
        functional: &str,
        model: &str,
        n: usize,
        m: usize,
        p: usize,
        est: &Estimate<T>,
        diagnostics: EstimateDiagnostics,
    ) -> Self {
        let conv = |v: &[T]| v.iter().map(|x| x.to_f64_lossy()).collect::<Vec<_>>();
        Self {
            estimator: estimator.to_owned(),
            functional: functional.to_owned(),
            model: model.to_owned(),
            n,
            m,
            p,
            estimate: conv(&est.estimate),
            plug_in: conv(&est.plug_in),
            correction: conv(&est.correction),
            diagnostics,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sizes_and_disjointness() {
        let rows: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64]).collect();
        let data = ObservationBatch::from_rows(&rows).unwrap();
        let s = SplitData::split(&data).unwrap();
        assert_eq!(s.train.len(), 3);
        assert_eq!(s.holdout.len(), 4);
        let train: Vec<f64> = s.train.rows().map(|r| r[0]).collect();
        let hold: Vec<f64> = s.holdout.rows().map(|r| r[0]).collect();
        assert!(train.iter().all(|t| !hold.contains(t)));
        assert_eq!(train.len() + hold.len(), 7);
    }

    #[test]
    fn split_needs_two_rows() {
        let data = ObservationBatch::from_rows(&[vec![1.0]]).unwrap();
        assert!(SplitData::split(&data).is_err());
    }
}
