//! Flat `key=value` run configuration.
//!
//! Values are resolved per key from, in increasing priority: built-in
//! default, config file, `GLASSYDICKE_<KEY>` environment variable, command
//! line flag. The resolved set is echoed into every output so a run can be
//! reproduced by passing that output back as `--config`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use glassydicke::fmt::real;

#[derive(Debug)]
pub enum ConfigError {
    UnknownKey { key: String, origin: String },
    Malformed { line: usize, origin: String, text: String },
    Duplicate { key: String, origin: String },
    Missing { key: String },
    Invalid { key: String, value: String, reason: String },
    WrongCommand { expected: String, found: String },
    Io { path: String, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey { key, origin } => {
                write!(f, "unknown config key `{key}` in {origin}")
            }
            ConfigError::Malformed { line, origin, text } => {
                write!(f, "{origin}, line {line}: expected key=value, got `{text}`")
            }
            ConfigError::Duplicate { key, origin } => {
                write!(f, "config key `{key}` given twice in {origin}")
            }
            ConfigError::Missing { key } => write!(f, "missing required parameter `{key}`"),
            ConfigError::Invalid { key, value, reason } => {
                write!(f, "invalid value `{value}` for `{key}`: {reason}")
            }
            ConfigError::WrongCommand { expected, found } => write!(
                f,
                "config was written by `{found}` but is being used for `{expected}`"
            ),
            ConfigError::Io { path, reason } => write!(f, "cannot read config `{path}`: {reason}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// One configurable parameter. An empty default means "not set".
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

pub const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key { name, default, help }
}

pub fn env_name(key: &str) -> String {
    format!("GLASSYDICKE_{}", key.replace('-', "_").to_ascii_uppercase())
}

/// Reads `key=value` pairs. Output files are accepted too: a CSV's `#@`
/// header lines or a JSON document's `config` object.
pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, origin: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    if text.trim_start().starts_with('{') {
        return parse_json(text, origin);
    }
    let echoed = text.lines().any(|l| l.starts_with(ECHO_PREFIX));
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = if echoed {
            match raw.strip_prefix(ECHO_PREFIX) {
                Some(rest) => rest.trim(),
                None => continue,
            }
        } else {
            raw.trim()
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                line: idx + 1,
                origin: origin.to_owned(),
                text: line.to_owned(),
            });
        };
        let k = k.trim().to_owned();
        if out.insert(k.clone(), v.trim().to_owned()).is_some() {
            return Err(ConfigError::Duplicate {
                key: k,
                origin: origin.to_owned(),
            });
        }
    }
    Ok(out)
}

fn parse_json(text: &str, origin: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let malformed = |msg: String| ConfigError::Malformed {
        line: 1,
        origin: origin.to_owned(),
        text: msg,
    };
    let doc: serde_json::Value = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    let Some(obj) = doc.get("config").and_then(|c| c.as_object()) else {
        return Err(malformed("JSON without a `config` object".into()));
    };
    obj.iter()
        .map(|(k, v)| match v {
            serde_json::Value::String(s) => Ok((k.clone(), s.clone())),
            other => Ok((k.clone(), other.to_string())),
        })
        .collect()
}

pub const ECHO_PREFIX: &str = "#@ ";

/// The fully resolved configuration of one subcommand, in declaration order.
#[derive(Debug, Clone)]
pub struct Resolved {
    command: &'static str,
    values: Vec<(&'static str, String)>,
}

impl Resolved {
    /// `file` values must name known keys; `overrides` (environment and
    /// flags, already merged) win over the file.
    pub fn new(
        command: &'static str,
        keys: &[Key],
        mut file: BTreeMap<String, String>,
        file_origin: &str,
        overrides: &BTreeMap<&'static str, String>,
    ) -> Result<Self, ConfigError> {
        if let Some(found) = file.remove("command") {
            if found != command {
                return Err(ConfigError::WrongCommand {
                    expected: command.to_owned(),
                    found,
                });
            }
        }
        if let Some(unknown) = file.keys().find(|k| !keys.iter().any(|key| key.name == k.as_str())) {
            return Err(ConfigError::UnknownKey {
                key: unknown.clone(),
                origin: file_origin.to_owned(),
            });
        }
        let values = keys
            .iter()
            .map(|k| {
                let v = overrides
                    .get(k.name)
                    .cloned()
                    .or_else(|| file.get(k.name).cloned())
                    .unwrap_or_else(|| k.default.to_owned());
                (k.name, v)
            })
            .collect();
        Ok(Self { command, values })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| v.as_str())
            .unwrap_or_else(|| panic!("key `{key}` is not declared for `{}`", self.command))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let raw = self.raw(key);
        if raw.is_empty() {
            return Err(ConfigError::Missing { key: key.to_owned() });
        }
        raw.parse().map_err(|e: T::Err| ConfigError::Invalid {
            key: key.to_owned(),
            value: raw.to_owned(),
            reason: e.to_string(),
        })
    }

    pub fn optional(&self, key: &str) -> Option<&str> {
        Some(self.raw(key)).filter(|v| !v.is_empty())
    }

    pub fn real(&self, key: &str) -> Result<f64, ConfigError> {
        let v: f64 = self.get(key)?;
        if !v.is_finite() {
            return Err(ConfigError::Invalid {
                key: key.to_owned(),
                value: self.raw(key).to_owned(),
                reason: "must be finite".into(),
            });
        }
        Ok(v)
    }

    pub fn reals(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        self.raw(key)
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| ConfigError::Invalid {
                    key: key.to_owned(),
                    value: self.raw(key).to_owned(),
                    reason: e.to_string(),
                })
            })
            .collect()
    }

    /// Rewrites every numeric value into its canonical spelling (reals at 17
    /// significant digits) so echoes of equivalent runs compare equal.
    pub fn canonicalize(&mut self, reals: &[&str], lists: &[&str]) -> Result<(), ConfigError> {
        for name in reals {
            if self.optional(name).is_some() {
                let v = self.real(name)?;
                self.set(name, real(v));
            }
        }
        for name in lists {
            if self.optional(name).is_some() {
                let v = self.reals(name)?;
                self.set(name, v.into_iter().map(real).collect::<Vec<_>>().join(","));
            }
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: String) {
        if let Some(slot) = self.values.iter_mut().find(|(k, _)| *k == key) {
            slot.1 = value;
        }
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&'static str, &str)> {
        std::iter::once(("command", self.command))
            .chain(self.values.iter().map(|(k, v)| (*k, v.as_str())))
    }

    pub fn echo_lines(&self) -> String {
        self.pairs().map(|(k, v)| format!("{ECHO_PREFIX}{k}={v}\n")).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.pairs()
                .map(|(k, v)| (k.to_owned(), serde_json::Value::String(v.to_owned())))
                .collect(),
        )
    }
}
