//! The JSON args file: one entry per kernel parameter, in call order, using
//! the [`ArgValue`] encoding. The reserved `__seed__` key supplies a default
//! seed so a frontend can pin a run with a single file.

use std::path::Path;

use qk_core::{ArgPack, ArgValue};
use serde_json::{Map, Value};

use crate::error::CliError;

pub const SEED_KEY: &str = "__seed__";

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArgsFile {
    pub pack: ArgPack,
    pub seed: Option<u64>,
}

impl ArgsFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text).map_err(|source| CliError::ArgsFile {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        let mut map: Map<String, Value> = serde_json::from_str(text)?;
        let seed = match map.shift_remove(SEED_KEY) {
            None => None,
            Some(v) => Some(serde_json::from_value::<u64>(v)?),
        };
        let pack = map
            .into_iter()
            .map(|(k, v)| Ok((k, serde_json::from_value::<ArgValue>(v)?)))
            .collect::<Result<ArgPack, serde_json::Error>>()?;
        Ok(ArgsFile { pack, seed })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qk_core::RefValue;

    #[test]
    fn keeps_order_and_pulls_out_the_seed() {
        let a = ArgsFile::parse(
            r#"{"q": {"size": 3}, "__seed__": 11, "theta": 0.5, "n": 2,
                "oracle": {"kernel": "cz_oracle"}, "parity": {"ref": 0},
                "ops": [{"pauli": "X(0) * Z(1)"}]}"#,
        )
        .unwrap();
        assert_eq!(a.seed, Some(11));
        let keys: Vec<_> = a.pack.keys().map(String::as_str).collect();
        assert_eq!(keys, ["q", "theta", "n", "oracle", "parity", "ops"]);
        assert_eq!(a.pack["q"], ArgValue::Qreg(3));
        assert_eq!(a.pack["theta"], ArgValue::Float(0.5));
        assert_eq!(a.pack["n"], ArgValue::Int(2));
        assert_eq!(a.pack["oracle"], ArgValue::Kernel("cz_oracle".into()));
        assert_eq!(a.pack["parity"], ArgValue::Ref(RefValue::Int(0)));
        assert!(matches!(&a.pack["ops"], ArgValue::List(v) if v.len() == 1));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ArgsFile::parse("[1, 2]").is_err());
        assert!(ArgsFile::parse(r#"{"__seed__": -1}"#).is_err());
        assert!(ArgsFile::parse(r#"{"h": {"pauli": "Q(0)"}}"#).is_err());
    }

    #[test]
    fn empty_object_is_an_empty_pack() {
        assert_eq!(ArgsFile::parse("{}").unwrap(), ArgsFile::default());
    }
}
