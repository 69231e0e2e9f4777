use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::IrError;

/// A value written back through a by-reference kernel argument.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RefValue {
    Bool(bool),
    Int(i64),
    Float(f64),
}

impl fmt::Display for RefValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefValue::Bool(b) => write!(f, "{b}"),
            RefValue::Int(i) => write!(f, "{i}"),
            RefValue::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Results attached to a register after execution.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QRegResults {
    /// Bitstring counts; q[0] is the leftmost character.
    pub counts: BTreeMap<String, u64>,
    /// Exact outcome probabilities, populated when running without shots.
    pub probabilities: BTreeMap<String, f64>,
    pub expectations: BTreeMap<String, f64>,
    pub byref: BTreeMap<String, RefValue>,
}

/// A quantum register handle passed to a kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QReg {
    pub name: String,
    pub size: usize,
    pub results: QRegResults,
}

impl QReg {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self, IrError> {
        if size == 0 {
            return Err(IrError::EmptyRegister);
        }
        Ok(QReg {
            name: name.into(),
            size,
            results: QRegResults::default(),
        })
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.results.counts
    }

    /// Total number of recorded shots.
    pub fn shots(&self) -> u64 {
        self.results.counts.values().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_size_rejected() {
        assert!(matches!(QReg::new("q", 0), Err(IrError::EmptyRegister)));
        let q = QReg::new("q", 3).unwrap();
        assert_eq!(q.shots(), 0);
    }

    #[test]
    fn ref_values_serialize_untagged() {
        let v = bincode::serialize(&RefValue::Int(3)).unwrap();
        assert!(!v.is_empty());
        assert_eq!(RefValue::Float(0.5).to_string(), "0.5");
    }
}
