//! `key = value` configuration file and flag/file/default resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};

/// Keys accepted in a config file; each matches the long flag of the same name.
pub const KNOWN_KEYS: &[&str] = &[
    "threads",
    "log-level",
    "l-min",
    "l-max",
    "bm25-k1",
    "bm25-b",
    "top-k",
    "source-cap",
    "semantic",
    "embeddings",
    "delta",
    "stopwords",
    "dedup",
    "alpha",
    "beta",
    "heuristic-judge",
    "format",
    "top-n",
    "theta",
];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", n + 1))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{key}`", n + 1);
            }
            if values.insert(key.clone(), value.trim().to_string()).is_some() {
                bail!("line {}: `{key}` set twice", n + 1);
            }
        }
        Ok(ConfigFile { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "{key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("config key `{key}`: {e}")))
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<Option<bool>> {
        match self.raw(key) {
            None => Ok(None),
            Some("true" | "yes" | "on" | "1") => Ok(Some(true)),
            Some("false" | "no" | "off" | "0") => Ok(Some(false)),
            Some(other) => bail!("config key `{key}`: expected true or false, got `{other}`"),
        }
    }

    /// Command-line value if given, else the file's value, else `default`.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match flag {
            Some(v) => v,
            None => self.get(key)?.unwrap_or(default),
        })
    }

    pub fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        Ok(match flag {
            Some(v) => Some(v),
            None => self.get(key)?,
        })
    }

    pub fn resolve_flag(&self, flag: Option<bool>, key: &str, default: bool) -> Result<bool> {
        Ok(match flag {
            Some(v) => v,
            None => self.flag(key)?.unwrap_or(default),
        })
    }
}
