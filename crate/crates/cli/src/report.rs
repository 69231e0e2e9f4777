//! The results document printed by `qk run`.

use std::collections::BTreeMap;

use qk_core::{Execution, Mode, QReg, RefValue};
use serde::{Deserialize, Serialize};

/// Bumped on any incompatible change to [`ResultsDocument`].
pub const SCHEMA_VERSION: u32 = 1;

/// Wall-clock nanoseconds per stage. Parse and lower are zero when every
/// kernel came from the in-memory cache.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub parse_ns: u64,
    pub lower_ns: u64,
    pub execute_ns: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema_version: u32,
    pub kernel: String,
    pub backend: String,
    pub mode: Mode,
    pub shots: u64,
    pub seed: u64,
    /// Counts of the first register; q[0] is the leftmost bit.
    pub counts: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub probabilities: BTreeMap<String, f64>,
    pub expectations: BTreeMap<String, f64>,
    pub byref: BTreeMap<String, RefValue>,
    /// Every register, present only when the kernel takes more than one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub registers: Vec<QReg>,
    pub log: Vec<String>,
    pub instruction_count: usize,
    pub timing: Timing,
}

impl ResultsDocument {
    pub fn new(kernel: &str, backend: &str, mode: Mode, shots: u64, seed: u64, ex: Execution) -> Self {
        let primary = ex.primary().results.clone();
        let registers = if ex.registers.len() > 1 { ex.registers } else { Vec::new() };
        ResultsDocument {
            schema_version: SCHEMA_VERSION,
            kernel: kernel.to_string(),
            backend: backend.to_string(),
            mode,
            shots,
            seed,
            counts: primary.counts,
            probabilities: primary.probabilities,
            expectations: primary.expectations,
            byref: primary.byref,
            registers,
            log: ex.log,
            instruction_count: ex.instruction_count,
            timing: Timing::default(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results document serializes")
    }
}
