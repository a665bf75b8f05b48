//! Parameter vectors and observation containers.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

/// Flat parameter vector indexing one member of a parametric family.
///
/// The layout of the entries is fixed per model and documented on each
/// model type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector<T>(Vec<T>);

impl<T: Real> ParamVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameter vector"));
        }
        Ok(Self(values))
    }

    pub fn zeros(p: usize) -> Self {
        Self(vec![T::zero(); p])
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| T::of(v)).collect())
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub(crate) fn from_vec_unchecked(values: Vec<T>) -> Self {
        Self(values)
    }
}

impl<T> Deref for ParamVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for ParamVector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

/// A single data point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation<T>(Vec<T>);

impl<T: Real> Observation<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observation"));
        }
        Ok(Self(values))
    }
}

impl<T> Deref for Observation<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// `N x D` block of observations stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationBatch<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> ObservationBatch<T> {
    /// Builds a batch from row-major data. Requires at least one row.
    pub fn from_flat(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("observation dimension must be >= 1".into()));
        }
        if data.is_empty() || data.len() % dim != 0 {
            return Err(Error::InvalidConfig(format!(
                "batch of {} values is not a non-empty multiple of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observation batch"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            check_dim("batch row", dim, r.as_ref().len())?;
            data.extend_from_slice(r.as_ref());
        }
        Self::from_flat(dim, data)
    }

    pub(crate) fn from_flat_unchecked(dim: usize, data: Vec<T>) -> Self {
        debug_assert!(dim > 0 && !data.is_empty() && data.len() % dim == 0);
        Self { dim, data }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    /// Batches always hold at least one row.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    /// Rows `start..end` as a new batch.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidConfig(format!(
                "row range {start}..{end} invalid for batch of {}",
                self.len()
            )));
        }
        Ok(Self {
            dim: self.dim,
            data: self.data[start * self.dim..end * self.dim].to_vec(),
        })
    }

    /// Column-wise sample mean.
    pub fn mean(&self) -> Vec<T> {
        let mut acc = vec![T::zero(); self.dim];
        for r in self.rows() {
            for (a, &v) in acc.iter_mut().zip(r) {
                *a += v;
            }
        }
        let n = T::of_usize(self.len());
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_params() {
        assert!(ParamVector::new(vec![0.0, f64::NAN]).is_err());
        assert!(ParamVector::new(vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn batch_must_be_rectangular_and_nonempty() {
        assert!(ObservationBatch::<f64>::from_flat(2, vec![]).is_err());
        assert!(ObservationBatch::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
        let b = ObservationBatch::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b.row(1), &[3.0, 4.0]);
        assert_eq!(b.mean(), vec![2.0, 3.0]);
        assert!(ObservationBatch::from_rows(&[vec![1.0], vec![3.0, 4.0]]).is_err());
    }
}
