//! Flat `key = value` text documents.
//!
//! One pair per line, `#` starts a comment, blank lines are ignored. Keys are
//! case-sensitive and may contain dots (`rmse.tmb`). Values are written with
//! Rust's shortest round-trip float formatting so a document reloads to the
//! identical bits.

use std::fmt::Write as _;

use thiserror::Error;

use crate::pathloss::PathLossParams;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KvError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("key `{key}`: cannot parse `{value}` as a number")]
    Number { key: String, value: String },
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

/// An ordered list of key/value pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDocument {
    entries: Vec<(String, String)>,
}

impl KvDocument {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, KvError> {
        let mut doc = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(KvError::Syntax { line })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(KvError::Syntax { line });
            }
            if doc.get(key).is_some() {
                return Err(KvError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            doc.entries
                .push((key.to_string(), value.trim().to_string()));
        }
        Ok(doc)
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn push_f64(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, format!("{value:?}"));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, KvError> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| KvError::Number {
                    key: key.to_string(),
                    value: v.to_string(),
                })
            })
            .transpose()
    }

    pub fn require_f64(&self, key: &str) -> Result<f64, KvError> {
        self.get_f64(key)?
            .ok_or_else(|| KvError::Missing(key.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

impl PathLossParams {
    pub fn to_kv(&self) -> KvDocument {
        let mut doc = KvDocument::new();
        for key in Self::KEYS {
            doc.push_f64(key, self.get(key).expect("canonical key"));
        }
        doc
    }

    /// Reads all seven coefficients. Other keys (for example the `rmse.*`
    /// lines of a fit report) are ignored, so a report doubles as a params
    /// file.
    pub fn from_kv(doc: &KvDocument) -> Result<Self, KvError> {
        let mut params = Self::default();
        for key in Self::KEYS {
            params.set(key, doc.require_f64(key)?);
        }
        params.validate().map_err(|e| KvError::Invalid {
            key: "params".into(),
            reason: e.to_string(),
        })?;
        Ok(params)
    }

    pub fn to_text(&self) -> String {
        self.to_kv().render()
    }

    pub fn from_text(text: &str) -> Result<Self, KvError> {
        Self::from_kv(&KvDocument::parse(text)?)
    }
}
