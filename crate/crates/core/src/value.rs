use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};

/// A point of the value set: `m` finite real components.
///
/// Equality and hashing are exact on the bit pattern of each component
/// (with `-0.0` folded onto `0.0`), so values decoded from 8-bit channels
/// can key a rank map without any tolerance.
#[derive(Clone, PartialEq)]
pub struct VectorValue(Vec<f64>);

impl VectorValue {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut components = components;
        for (index, c) in components.iter_mut().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite { index, value: *c });
            }
            if *c == 0.0 {
                *c = 0.0;
            }
        }
        Ok(Self(components))
    }

    pub fn from_slice(components: &[f64]) -> Result<Self> {
        Self::new(components.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|c| c * c).sum::<f64>().sqrt()
}

impl Eq for VectorValue {}

impl Hash for VectorValue {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.len().hash(state);
        for c in &self.0 {
            c.to_bits().hash(state);
        }
    }
}

impl AsRef<[f64]> for VectorValue {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl fmt::Debug for VectorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("VectorValue").field(&self.0).finish()
    }
}

impl TryFrom<Vec<f64>> for VectorValue {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        Err(Error::DimensionMismatch { expected, found })
    } else {
        Ok(())
    }
}
