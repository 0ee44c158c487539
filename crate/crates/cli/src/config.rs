//! Flat `key=value` run configuration files.
//!
//! Keys are the long flag names without the leading dashes. Blank lines and
//! lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, CliResult};

pub const KNOWN_KEYS: [&str; 12] = [
    "means",
    "arm-kind",
    "alpha",
    "allow-unstable-alpha",
    "horizon",
    "reps",
    "seed",
    "out",
    "per-decade",
    "fit-window",
    "audit",
    "fault",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected key=value", i + 1))
            })?;
            let key = key.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Config(format!(
                    "config line {}: unknown key `{key}`",
                    i + 1
                )));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parsed value for `key`, if present.
    pub fn parsed<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::Config(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let cfg = ConfigFile::parse("# demo\nmeans = 0.2,0.5\n\nalpha=0.3\naudit=true\n").unwrap();
        assert_eq!(cfg.get("means"), Some("0.2,0.5"));
        assert_eq!(cfg.parsed::<f64>("alpha").unwrap(), Some(0.3));
        assert_eq!(cfg.parsed::<bool>("audit").unwrap(), Some(true));
        assert_eq!(cfg.parsed::<usize>("horizon").unwrap(), None);
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(ConfigFile::parse("colour=blue").is_err());
        assert!(ConfigFile::parse("alpha").is_err());
        let cfg = ConfigFile::parse("alpha=abc").unwrap();
        assert!(cfg.parsed::<f64>("alpha").is_err());
    }
}
