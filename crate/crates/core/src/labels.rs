//! The six-category sensitivity taxonomy for comment content.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Sensitivity class of a snippet.
///
/// Variants are declared in alphabetical order of their wire names so that
/// `Ord` yields the canonical "CONF, PEER, PII" rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CategoryLabel {
    #[serde(rename = "CONF")]
    Conf,
    #[serde(rename = "CRED")]
    Cred,
    #[serde(rename = "NETID")]
    Netid,
    #[serde(rename = "OTHER")]
    Other,
    #[serde(rename = "PEER")]
    Peer,
    #[serde(rename = "PII")]
    Pii,
}

impl CategoryLabel {
    pub const ALL: [CategoryLabel; 6] = [
        CategoryLabel::Conf,
        CategoryLabel::Cred,
        CategoryLabel::Netid,
        CategoryLabel::Other,
        CategoryLabel::Peer,
        CategoryLabel::Pii,
    ];

    /// The five labels that denote an actual disclosure.
    pub const SENSITIVE: [CategoryLabel; 5] =
        [CategoryLabel::Cred, CategoryLabel::Pii, CategoryLabel::Netid, CategoryLabel::Peer, CategoryLabel::Conf];

    pub fn as_str(self) -> &'static str {
        match self {
            CategoryLabel::Conf => "CONF",
            CategoryLabel::Cred => "CRED",
            CategoryLabel::Netid => "NETID",
            CategoryLabel::Other => "OTHER",
            CategoryLabel::Peer => "PEER",
            CategoryLabel::Pii => "PII",
        }
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown category label `{0}`")]
pub struct UnknownLabel(pub String);

impl FromStr for CategoryLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "CONF" => Ok(CategoryLabel::Conf),
            "CRED" => Ok(CategoryLabel::Cred),
            "NETID" => Ok(CategoryLabel::Netid),
            "OTHER" => Ok(CategoryLabel::Other),
            "PEER" => Ok(CategoryLabel::Peer),
            "PII" => Ok(CategoryLabel::Pii),
            _ => Err(UnknownLabel(s.to_string())),
        }
    }
}

/// A normalized, non-empty prediction set.
///
/// `OTHER` never co-occurs with another label: adding a sensitive label drops
/// it, and an empty set reads as `{OTHER}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelSet(BTreeSet<CategoryLabel>);

impl LabelSet {
    pub fn other() -> Self {
        LabelSet(BTreeSet::from([CategoryLabel::Other]))
    }

    pub fn new<I: IntoIterator<Item = CategoryLabel>>(labels: I) -> Self {
        let mut set: BTreeSet<CategoryLabel> = labels.into_iter().collect();
        if set.len() > 1 {
            set.remove(&CategoryLabel::Other);
        }
        if set.is_empty() {
            set.insert(CategoryLabel::Other);
        }
        LabelSet(set)
    }

    pub fn is_other(&self) -> bool {
        self.0.len() == 1 && self.0.contains(&CategoryLabel::Other)
    }

    pub fn contains(&self, label: CategoryLabel) -> bool {
        self.0.contains(&label)
    }

    pub fn iter(&self) -> impl Iterator<Item = CategoryLabel> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn intersects(&self, other: &LabelSet) -> bool {
        self.0.iter().any(|l| other.0.contains(l))
    }

    /// Canonical comma-joined rendering, e.g. `CONF, PEER`.
    pub fn combination_key(&self) -> String {
        self.0.iter().map(|l| l.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        LabelSet::other()
    }
}

impl fmt::Display for LabelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.combination_key())
    }
}

impl FromIterator<CategoryLabel> for LabelSet {
    fn from_iter<T: IntoIterator<Item = CategoryLabel>>(iter: T) -> Self {
        LabelSet::new(iter)
    }
}

impl Serialize for LabelSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.0.iter())
    }
}

impl<'de> Deserialize<'de> for LabelSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: Vec<String> = Vec::deserialize(deserializer)?;
        raw.iter()
            .map(|s| s.parse::<CategoryLabel>())
            .collect::<Result<Vec<_>, _>>()
            .map(LabelSet::new)
            .map_err(serde::de::Error::custom)
    }
}
