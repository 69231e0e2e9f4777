//! Execution backends. Both bundled backends share the state-vector engine
//! and differ in the capabilities they advertise.

use std::collections::BTreeMap;
use std::fmt;

use super::RuntimeError;

pub const DEFAULT_BACKEND: &str = "qpp";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Capability {
    Shots,
    ExactExpectation,
    MidCircuitMeasurement,
}

impl fmt::Display for Capability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Capability::Shots => "shot sampling",
            Capability::ExactExpectation => "exact expectation values",
            Capability::MidCircuitMeasurement => "mid-circuit measurement (ftqc mode)",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Capabilities {
    pub shots: bool,
    pub exact_expectation: bool,
    pub mid_circuit_measurement: bool,
}

impl Capabilities {
    pub fn supports(&self, c: Capability) -> bool {
        match c {
            Capability::Shots => self.shots,
            Capability::ExactExpectation => self.exact_expectation,
            Capability::MidCircuitMeasurement => self.mid_circuit_measurement,
        }
    }
}

/// `key: value` settings read from a configuration file. Blank lines and
/// lines starting with `#` are ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BackendConfig {
    pub entries: BTreeMap<String, String>,
}

impl BackendConfig {
    pub fn parse(text: &str) -> Result<Self, RuntimeError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(':')
                .ok_or_else(|| RuntimeError::Config(format!("line {}: expected `key: value`", i + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(RuntimeError::Config(format!("line {}: empty key", i + 1)));
            }
            entries.insert(k.to_string(), v.trim().to_string());
        }
        Ok(BackendConfig { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>, RuntimeError> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| RuntimeError::Config(format!("`{key}` must be a non-negative integer, got `{v}`")))
            })
            .transpose()
    }

    pub fn get_bool(&self, key: &str) -> Result<Option<bool>, RuntimeError> {
        self.get(key)
            .map(|v| match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" | "on" => Ok(true),
                "false" | "no" | "0" | "off" => Ok(false),
                _ => Err(RuntimeError::Config(format!("`{key}` must be a boolean, got `{v}`"))),
            })
            .transpose()
    }
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn capabilities(&self) -> Capabilities;
    fn config(&self) -> &BackendConfig;

    fn require(&self, c: Capability) -> Result<(), RuntimeError> {
        if self.capabilities().supports(c) {
            Ok(())
        } else {
            Err(RuntimeError::BackendCapability {
                backend: self.name().to_string(),
                capability: c.to_string(),
            })
        }
    }
}

/// The bundled simulator backends.
#[derive(Clone, Debug)]
pub struct SimBackend {
    name: &'static str,
    caps: Capabilities,
    config: BackendConfig,
}

impl SimBackend {
    /// Circuit-mode simulator: shots and exact expectations, no feed-forward.
    pub fn qpp(config: BackendConfig) -> Self {
        SimBackend {
            name: "qpp",
            caps: Capabilities {
                shots: true,
                exact_expectation: true,
                mid_circuit_measurement: false,
            },
            config,
        }
    }

    /// Shot-by-shot simulator with mid-circuit measurement.
    pub fn ftqc(config: BackendConfig) -> Self {
        SimBackend {
            name: "ftqc",
            caps: Capabilities {
                shots: true,
                exact_expectation: true,
                mid_circuit_measurement: true,
            },
            config,
        }
    }
}

impl Backend for SimBackend {
    fn name(&self) -> &str {
        self.name
    }

    fn capabilities(&self) -> Capabilities {
        self.caps
    }

    fn config(&self) -> &BackendConfig {
        &self.config
    }
}

pub fn backend_by_name(name: &str, config: BackendConfig) -> Result<Box<dyn Backend>, RuntimeError> {
    match name {
        "qpp" | "qpp-like" => Ok(Box::new(SimBackend::qpp(config))),
        "ftqc" => Ok(Box::new(SimBackend::ftqc(config))),
        other => Err(RuntimeError::BackendNotFound(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let c = BackendConfig::parse("# sim\nshots: 100\n\nseed : 7\noptimize: false\n").unwrap();
        assert_eq!(c.get_u64("shots").unwrap(), Some(100));
        assert_eq!(c.get_u64("seed").unwrap(), Some(7));
        assert_eq!(c.get_bool("optimize").unwrap(), Some(false));
        assert_eq!(c.get("missing"), None);
        assert!(BackendConfig::parse("shots 100").is_err());
        assert!(c.get_bool("shots").is_err());
    }

    #[test]
    fn lookup_and_capabilities() {
        let q = backend_by_name("qpp", BackendConfig::default()).unwrap();
        assert!(q.require(Capability::Shots).is_ok());
        assert!(matches!(
            q.require(Capability::MidCircuitMeasurement),
            Err(RuntimeError::BackendCapability { .. })
        ));
        let f = backend_by_name("ftqc", BackendConfig::default()).unwrap();
        assert!(f.require(Capability::MidCircuitMeasurement).is_ok());
        assert!(matches!(
            backend_by_name("ibm", BackendConfig::default()),
            Err(RuntimeError::BackendNotFound(n)) if n == "ibm"
        ));
    }
}
