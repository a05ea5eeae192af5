//! Flat `key = value` configuration files and flag/file/default resolution.
//!
//! Keys are the long flag names without dashes (`max-len = 200`). Blank lines
//! and lines starting with `#` are ignored. A flag given on the command line
//! wins over the file, which wins over the built-in default. Keys that a
//! subcommand does not use are ignored.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, Value>,
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`, got `{raw}`", i + 1);
        };
        let key = k.trim();
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        if out.insert(key.to_string(), v.trim().to_string()).is_some() {
            bail!("config line {}: duplicate key `{key}`", i + 1);
        }
    }
    Ok(out)
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                parse_config(&text).with_context(|| format!("in {}", p.display()))?
            }
            None => BTreeMap::new(),
        };
        Ok(Settings { file, resolved: BTreeMap::new() })
    }

    fn file_value<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.file
            .get(key)
            .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("config key `{key}`: {e}")))
            .transpose()
    }

    fn record<T: Serialize>(&mut self, key: &str, v: &T) {
        self.resolved.insert(key.to_string(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => v,
            None => self.file_value(key)?.unwrap_or(default),
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => self.file_value(key)?,
        };
        self.record(key, &v);
        Ok(v)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T: FromStr + Serialize,
        T::Err: Display,
    {
        match self.get_opt(key, flag)? {
            Some(v) => Ok(v),
            None => bail!("missing required option --{key}"),
        }
    }

    /// Everything resolved so far, keyed by option name.
    pub fn resolved(&self) -> Value {
        Value::Object(self.resolved.clone().into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let mut s = Settings { file: parse_config("# c\nseed = 7\n\nepsilon=0.5\n").unwrap(), ..Default::default() };
        assert_eq!(s.get("seed", Some(1u64), 0).unwrap(), 1);
        assert_eq!(s.get("epsilon", None, 1.0).unwrap(), 0.5);
        assert_eq!(s.get("trials", None, 100usize).unwrap(), 100);
        assert_eq!(s.resolved()["seed"], 1);
        assert!(s.get::<u64>("epsilon", None, 0).is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("novalue\n").is_err());
        assert!(parse_config("a=1\na=2\n").is_err());
        assert!(parse_config(" = 3").is_err());
    }
}
