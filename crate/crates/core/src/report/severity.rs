use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Declared from most to least severe; `Ord` follows declaration order, so
/// the minimum of a set is its most severe member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Severity {
    Critical,
    High,
    Medium,
    Low,
}

impl Severity {
    pub const ALL: [Severity; 4] = [Severity::Critical, Severity::High, Severity::Medium, Severity::Low];

    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Critical => "Critical",
            Severity::High => "High",
            Severity::Medium => "Medium",
            Severity::Low => "Low",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Severity::ALL
            .into_iter()
            .find(|v| v.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown severity `{s}`"))
    }
}

/// Case-insensitive, like the command line.
impl<'de> Deserialize<'de> for Severity {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityRule {
    pub key: String,
    pub severity: Severity,
}

impl SeverityRule {
    fn matches(&self, key: &str) -> bool {
        match self.key.strip_suffix('*') {
            Some(prefix) => key.starts_with(prefix),
            None => self.key == key,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeverityMap {
    pub rules: Vec<SeverityRule>,
}

#[derive(Debug, thiserror::Error)]
pub enum SeverityMapError {
    #[error("reading severity map: {0}")]
    Io(#[from] std::io::Error),
    #[error("severity map: {0}")]
    Toml(#[from] toml::de::Error),
}

pub const DEFAULT_SEVERITY_TOML: &str = include_str!("data/severity.toml");

impl Default for SeverityMap {
    fn default() -> Self {
        SeverityMap::parse(DEFAULT_SEVERITY_TOML).expect("bundled severity map parses")
    }
}

impl SeverityMap {
    pub fn parse(text: &str) -> Result<Self, SeverityMapError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, SeverityMapError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn lookup(&self, key: &str) -> Option<Severity> {
        self.rules.iter().find(|r| r.matches(key)).map(|r| r.severity)
    }

    /// Unknown keys are Low, with a warning.
    pub fn severity_for(&self, key: &str) -> Severity {
        self.lookup(key).unwrap_or_else(|| {
            log::warn!("category `{key}` is not in the severity map; using Low");
            Severity::Low
        })
    }
}
