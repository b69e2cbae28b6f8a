//! Dense state vector with a finiteness invariant.

use std::ops::Deref;

use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A point of ℝⁿ whose entries are all finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(DVector<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(entries))
    }

    pub fn from_dvector(v: DVector<f64>) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::invalid("vector", "dimension must be at least 1"));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite { context: "vector" });
        }
        Ok(Vector(v))
    }

    pub fn zeros(n: usize) -> Self {
        Vector(DVector::zeros(n))
    }

    pub fn from_element(n: usize, value: f64) -> Self {
        assert!(value.is_finite());
        Vector(DVector::from_element(n, value))
    }

    /// Wraps a vector the caller has produced from finite inputs. Checked in
    /// debug builds only.
    pub(crate) fn from_raw(v: DVector<f64>) -> Self {
        debug_assert!(v.iter().all(|x| x.is_finite()));
        Vector(v)
    }

    /// Wraps a computed vector, mapping overflow to an error.
    pub(crate) fn checked(v: DVector<f64>, context: &'static str) -> Result<Self> {
        if v.iter().all(|x| x.is_finite()) {
            Ok(Vector(v))
        } else {
            Err(Error::NonFinite { context })
        }
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.0.iter().copied().collect()
    }

    pub fn ensure_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            })
        }
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        (&self.0 - &other.0).norm()
    }
}

impl Deref for Vector {
    type Target = DVector<f64>;

    fn deref(&self) -> &DVector<f64> {
        &self.0
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<f64>::deserialize(deserializer)?;
        Vector::new(entries).map_err(serde::de::Error::custom)
    }
}
