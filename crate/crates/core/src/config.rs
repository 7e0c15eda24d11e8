//! Engine configuration: every tunable of the stack, detector and learner.
//!
//! Files use TOML with dotted keys (`stack.alpha = 0.5`). Overrides are
//! single `key = value` assignments deep-merged over the file, which in turn
//! is merged over the defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::drift::DriftConfig;
use crate::error::{Error, Result};
use crate::escn::EscnConfig;
use crate::scn::ScnParams;
use crate::stack::StackConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub stack: StackConfig,
    pub drift: DriftConfig,
    pub escn: EscnConfig,
    pub scn: ScnParams,
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        self.stack.validate()?;
        self.drift.validate()?;
        self.escn.validate()?;
        self.scn.validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::build(parse_table(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Applies `key = value` overrides (also accepted as `key=value`).
    /// Values that are not valid TOML are taken as strings.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut base = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            let o = o.as_ref();
            let Some((key, value)) = o.split_once('=') else {
                return Err(Error::Config(format!("override `{o}` is not key=value")));
            };
            let (key, value) = (key.trim(), value.trim());
            let table = parse_table(&format!("{key} = {value}"))
                .or_else(|_| parse_table(&format!("{key} = {}", toml::Value::String(value.into()))))?;
            merge(&mut base, table);
        }
        Self::build(base)
    }

    /// Fully resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("engine config serializes")
    }

    fn build(table: toml::Table) -> Result<Self> {
        let mut base = toml::Table::try_from(Self::default()).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, table);
        let cfg: Self = base
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Config(e.to_string()))
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(EngineConfig::from_toml_str("").unwrap(), EngineConfig::default());
    }

    #[test]
    fn dotted_keys_and_overrides() {
        let cfg = EngineConfig::from_toml_str("stack.alpha = 0.25\nscn.scopes = [1.0, 2.0]\n").unwrap();
        assert_eq!(cfg.stack.alpha, 0.25);
        assert_eq!(cfg.scn.scopes, vec![1.0, 2.0]);
        assert_eq!(cfg.escn.q, 0.5);
        let cfg = cfg.with_overrides(&["escn.q=0.3", "stack.alpha = 0.75"]).unwrap();
        assert_eq!(cfg.escn.q, 0.3);
        assert_eq!(cfg.stack.alpha, 0.75);
        assert_eq!(cfg.scn.scopes, vec![1.0, 2.0]);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(EngineConfig::from_toml_str("stack.beta = 1").is_err());
        assert!(EngineConfig::from_toml_str("escn.q = 2.0").is_err());
        assert!(EngineConfig::default().with_overrides(&["noequals"]).is_err());
        assert!(EngineConfig::default().with_overrides(&["scn.r = 1.5"]).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = EngineConfig::default().with_overrides(&["drift.tau = 50"]).unwrap();
        assert_eq!(EngineConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
    }
}
