//! Flat `key = value` configuration merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{usage, CliResult};

/// Keys are stored with `-` folded to `_`.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

/// Parses `key = value` lines; `#` starts a comment line.
pub fn parse_config(text: &str, origin: &Path) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(usage(format!("{}:{}: expected key = value", origin.display(), i + 1)));
        };
        let k = normalize(k);
        if k.is_empty() {
            return Err(usage(format!("{}:{}: empty key", origin.display(), i + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn from_config(values: BTreeMap<String, String>) -> Self {
        Self { values }
    }

    /// A flag given on the command line replaces the config value.
    pub fn set_flag<T: ToString>(&mut self, key: &str, value: Option<T>) {
        if let Some(v) = value {
            self.values.insert(normalize(key), v.to_string());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn get<T>(&self, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|e| usage(format!("invalid value {v:?} for {key}: {e}"))))
            .transpose()
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> CliResult<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn flag(&self, key: &str) -> CliResult<bool> {
        match self.raw(key) {
            None => Ok(false),
            Some("1" | "true" | "yes" | "on") => Ok(true),
            Some("0" | "false" | "no" | "off") => Ok(false),
            Some(v) => Err(usage(format!("invalid boolean {v:?} for {key}"))),
        }
    }

    /// Path-valued key that, when present, must name an existing file.
    pub fn input(&self, key: &str) -> CliResult<Option<PathBuf>> {
        match self.raw(key) {
            None => Ok(None),
            Some(p) => {
                let p = PathBuf::from(p);
                if p.exists() {
                    Ok(Some(p))
                } else {
                    Err(usage(format!("input file not found: {}", p.display())))
                }
            }
        }
    }

    pub fn require_input(&self, key: &str) -> CliResult<PathBuf> {
        self.input(key)?.ok_or_else(|| usage(format!("missing required --{}", key.replace('_', "-"))))
    }

    /// `key` if given, else `default` inside the output directory; either way
    /// the file must exist.
    pub fn input_or_default(&self, key: &str, out: &Path, default: &str) -> CliResult<PathBuf> {
        if let Some(p) = self.input(key)? {
            return Ok(p);
        }
        let p = out.join(default);
        if p.exists() {
            Ok(p)
        } else {
            Err(usage(format!("input file not found: {} (pass --{})", p.display(), key.replace('_', "-"))))
        }
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }
}
