//! Flat key=value run configuration. A config file supplies defaults and
//! command-line flags override it; the merged map is echoed into every
//! output header.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Usage or domain problem, reported with exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected key=value, got '{raw}'", i + 1)))?;
            values.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(RunConfig { values })
    }

    pub fn read(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Keeps only the keys a command understands, so unrelated entries of a
    /// shared config file do not leak into headers.
    pub fn restrict(&mut self, keys: &[&str]) -> Vec<String> {
        let unknown: Vec<String> = self.values.keys().filter(|k| !keys.contains(&k.as_str())).cloned().collect();
        for k in &unknown {
            self.values.remove(k);
        }
        unknown
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| UsageError(format!("invalid value for {key}: '{v}' ({e})"))),
        }
    }

    /// Reads `key`, recording `default` in the effective config if absent.
    pub fn or<T: FromStr + fmt::Display>(&mut self, key: &str, default: T) -> Result<T, UsageError>
    where
        T::Err: fmt::Display,
    {
        match self.get(key)? {
            Some(v) => Ok(v),
            None => {
                self.set(key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T, UsageError>
    where
        T::Err: fmt::Display,
    {
        self.get(key)?.ok_or_else(|| UsageError(format!("missing required --{key}")))
    }

    pub fn out_dir(&mut self) -> Result<PathBuf, UsageError> {
        let dir = PathBuf::from(self.or("out", ".".to_string())?);
        std::fs::create_dir_all(&dir).map_err(|e| UsageError(format!("cannot create {}: {e}", dir.display())))?;
        Ok(dir)
    }

    /// `key=value` pairs in key order, comma separated.
    pub fn line(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(", ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.values
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }

    /// Comment header placed at the top of every output file.
    pub fn header(&self, command: &str) -> String {
        let seed = self.raw("seed").unwrap_or("none");
        format!(
            "# stable-ldp {}\n# command: {command}\n# config: {}\n# seed: {seed}\n",
            env!("CARGO_PKG_VERSION"),
            self.line()
        )
    }
}
