//! INI-style run configuration.
//!
//! ```text
//! # comment
//! [section]
//! key = value   ; trailing comment
//! ```
//!
//! Keys are looked up as `section.key`. Every lookup is recorded with its
//! resolved value so that outputs can echo the configuration actually used.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Keys accepted in a configuration file, with whether they name an input
/// file that must exist at load time.
const KNOWN_KEYS: &[(&str, bool)] = &[
    ("constants.hbar", false),
    ("constants.atom_mass", false),
    ("constants.g", false),
    ("pulse.rabi", false),
    ("pulse.detuning", false),
    ("pulse.phase", false),
    ("pulse.duration", false),
    ("pulse.dt", false),
    ("pulse.samples", false),
    ("sequence.T", false),
    ("sequence.tau_p", false),
    ("sequence.phi1", false),
    ("sequence.phi2", false),
    ("sequence.phi3", false),
    ("sequence.k_eff", false),
    ("scan.betas", false),
    ("scan.center", false),
    ("scan.half_width", false),
    ("scan.points", false),
    ("measurement.n_atoms", false),
    ("measurement.phase_noise", false),
    ("allan.input", true),
    ("allan.dt", false),
    ("allan.tau_min", false),
    ("allan.tau_max", false),
    ("allan.tau_points", false),
    ("allan.method", false),
    ("sensitivity.samples", false),
    ("sensitivity.points_per_fringe", false),
    ("sensitivity.fringes", false),
    ("noise.psd", true),
    ("noise.kind", false),
    ("noise.coverage", false),
    ("noise.cycle_time", false),
    ("noise.mc_shots", false),
    ("noise.mc_dt", false),
    ("synth.psd", true),
    ("synth.duration", false),
    ("synth.dt", false),
    ("run.seed", false),
    ("run.out", false),
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Syntax { path: String, line: usize, msg: String },

    #[error("{path}:{line}: unknown key '{key}'")]
    UnknownKey { path: String, line: usize, key: String },

    #[error("{path}:{line}: duplicate key '{key}' (first set on line {first})")]
    Duplicate {
        path: String,
        line: usize,
        key: String,
        first: usize,
    },

    #[error("{location}: field '{key}': {msg}")]
    Value { location: String, key: String, msg: String },

    #[error("missing required field '{0}'")]
    Missing(String),

    #[error("{location}: field '{key}': file '{file}' does not exist")]
    MissingFile { location: String, key: String, file: String },

    #[error("cannot read config '{path}': {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    value: String,
    line: usize,
}

#[derive(Debug, Default)]
pub struct RunConfig {
    source: String,
    base_dir: PathBuf,
    entries: BTreeMap<String, Entry>,
    resolved: RefCell<BTreeMap<String, String>>,
}

/// Values that can be read from a config entry.
pub trait FromConfig: Sized + fmt::Display {
    fn parse_value(s: &str) -> Result<Self, String>;
}

impl FromConfig for f64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("'{s}' is not finite"))
        }
    }
}

impl FromConfig for u64 {
    fn parse_value(s: &str) -> Result<Self, String> {
        s.parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
    }
}

impl FromConfig for usize {
    fn parse_value(s: &str) -> Result<Self, String> {
        s.parse().map_err(|_| format!("'{s}' is not a non-negative integer"))
    }
}

impl FromConfig for String {
    fn parse_value(s: &str) -> Result<Self, String> {
        Ok(s.to_string())
    }
}

/// Shortest round-trip representation, so echoed values reload exactly.
pub fn fmt_value<T: fmt::Display>(v: &T) -> String {
    v.to_string()
}

impl RunConfig {
    /// Empty configuration: every lookup falls back to its default.
    pub fn empty() -> Self {
        Self {
            source: "<defaults>".into(),
            base_dir: PathBuf::from("."),
            ..Default::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &path.display().to_string(), &base)
    }

    /// Parse `text`; relative file paths resolve against `base_dir`.
    pub fn parse(text: &str, source: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let syntax = |line: usize, msg: &str| ConfigError::Syntax {
            path: source.to_string(),
            line,
            msg: msg.to_string(),
        };
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(line, "section header is missing ']'"))?
                    .trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(syntax(line, &format!("invalid section name '{name}'")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax(line, "expected 'key = value'"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(syntax(line, "empty key"));
            }
            let sec = section
                .as_deref()
                .ok_or_else(|| syntax(line, "key outside of any [section]"))?;
            let full = format!("{sec}.{key}");
            let Some(&(_, is_file)) = KNOWN_KEYS.iter().find(|(k, _)| *k == full) else {
                return Err(ConfigError::UnknownKey {
                    path: source.to_string(),
                    line,
                    key: full,
                });
            };
            if let Some(prev) = entries.get(&full) {
                return Err(ConfigError::Duplicate {
                    path: source.to_string(),
                    line,
                    key: full,
                    first: prev.line,
                });
            }
            let value = value.trim().to_string();
            if is_file && !base_dir.join(&value).is_file() {
                return Err(ConfigError::MissingFile {
                    location: format!("{source}:{line}"),
                    key: full,
                    file: value,
                });
            }
            entries.insert(full, Entry { value, line });
        }
        Ok(Self {
            source: source.to_string(),
            base_dir: base_dir.to_path_buf(),
            entries,
            resolved: RefCell::new(BTreeMap::new()),
        })
    }

    fn location(&self, key: &str) -> String {
        match self.entries.get(key) {
            Some(e) => format!("{}:{}", self.source, e.line),
            None => self.source.clone(),
        }
    }

    fn record(&self, key: &str, value: String) {
        self.resolved.borrow_mut().insert(key.to_string(), value);
    }

    /// Error for a value that parsed but is out of range.
    pub fn invalid(&self, key: &str, msg: impl Into<String>) -> ConfigError {
        ConfigError::Value {
            location: self.location(key),
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get_opt<T: FromConfig>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        debug_assert!(KNOWN_KEYS.iter().any(|(k, _)| *k == key), "undeclared key {key}");
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => {
                let v = T::parse_value(&e.value).map_err(|msg| self.invalid(key, msg))?;
                self.record(key, fmt_value(&v));
                Ok(Some(v))
            }
        }
    }

    pub fn get_or<T: FromConfig>(&self, key: &str, default: T) -> Result<T, ConfigError> {
        match self.get_opt(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, fmt_value(&default));
                Ok(default)
            }
        }
    }

    pub fn require<T: FromConfig>(&self, key: &str) -> Result<T, ConfigError> {
        self.get_opt(key)?.ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    /// Strictly positive number, or the default.
    pub fn positive_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let v = self.get_or(key, default)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.invalid(key, format!("must be positive, got {v}")))
        }
    }

    /// Comma-separated list of numbers.
    pub fn list_opt(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(e) = self.entries.get(key) else {
            return Ok(None);
        };
        let vals = e
            .value
            .split(',')
            .map(|s| f64::parse_value(s.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|msg| self.invalid(key, msg))?;
        let echo: Vec<String> = vals.iter().map(fmt_value).collect();
        self.record(key, echo.join(", "));
        Ok(Some(vals))
    }

    /// Path of an input file, resolved against the config directory.
    pub fn path(&self, key: &str) -> Result<PathBuf, ConfigError> {
        let raw: String = self.require(key)?;
        Ok(self.base_dir.join(raw))
    }

    /// Raw value without echoing it into outputs.
    pub fn get_unrecorded(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    /// Record a value supplied from outside the file (command-line flag).
    pub fn set_resolved(&self, key: &str, value: impl fmt::Display) {
        self.record(key, value.to_string());
    }

    /// Every value looked up so far, in key order.
    pub fn resolved(&self) -> Vec<(String, String)> {
        self.resolved.borrow().iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find(['#', ';']).unwrap_or(line.len());
    &line[..cut]
}
