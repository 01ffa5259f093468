//! Rule files and the compiled, prefiltered rule set.

use std::collections::HashSet;
use std::path::Path;

use aho_corasick::{AhoCorasick, AhoCorasickBuilder, MatchKind};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::prefilter::{required_prefixes, FOLD_HAZARDS};
use crate::categories;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    High,
    Low,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PatternRule {
    pub id: String,
    pub name: String,
    pub pattern: String,
    pub confidence: Confidence,
    pub category_hint: String,
}

#[derive(Debug, thiserror::Error)]
pub enum RuleFileError {
    #[error("reading rule file {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("rule file is not valid YAML: {0}")]
    Yaml(#[from] serde_yaml::Error),
}

#[derive(Deserialize)]
struct RawRule {
    name: String,
    regex: String,
    #[serde(default)]
    confidence: Option<String>,
}

#[derive(Deserialize)]
struct Wrapped {
    pattern: RawRule,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Wrapped(Wrapped),
    Flat(RawRule),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RuleFile {
    Keyed { patterns: Vec<Entry> },
    List(Vec<Entry>),
}

pub fn slug(name: &str) -> String {
    let mut s = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            s.push(c.to_ascii_lowercase());
        } else if !s.ends_with('-') && !s.is_empty() {
            s.push('-');
        }
    }
    while s.ends_with('-') {
        s.pop();
    }
    if s.is_empty() {
        s.push_str("rule");
    }
    s
}

fn category_for(name: &str, confidence: Confidence) -> &'static str {
    let lower = name.to_ascii_lowercase();
    if lower.contains("aws") && (lower.contains("access key") || lower.contains("key id") || lower.contains("api key"))
    {
        categories::AWS_ACCESS_KEYS
    } else if lower.contains("password") || (lower.contains("credential") && lower.contains("url")) {
        categories::LOGIN_CREDENTIALS
    } else if confidence == Confidence::High {
        categories::SECRET_TOKEN
    } else {
        categories::SECRET_PATTERN_LOW
    }
}

/// A rule that failed to compile, reported by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectedRule {
    pub name: String,
    pub error: String,
}

#[derive(Debug)]
pub struct LoadedRules {
    pub rules: Vec<PatternRule>,
    pub rejected: Vec<RejectedRule>,
}

/// Parses the YAML layout `patterns: [{pattern: {name, regex, confidence}}]`
/// (or a bare list of entries). Non-compiling patterns are rejected by name;
/// they never abort the set.
pub fn parse_rules(text: &str) -> Result<LoadedRules, RuleFileError> {
    let file: RuleFile = serde_yaml::from_str(text)?;
    let entries = match file {
        RuleFile::Keyed { patterns } | RuleFile::List(patterns) => patterns,
    };
    let mut ids = HashSet::new();
    let mut rules = Vec::with_capacity(entries.len());
    let mut rejected = Vec::new();
    for entry in entries {
        let raw = match entry {
            Entry::Wrapped(w) => w.pattern,
            Entry::Flat(r) => r,
        };
        if let Err(e) = Regex::new(&raw.regex) {
            log::warn!("skipping rule `{}`: {}", raw.name, first_line(&e.to_string()));
            rejected.push(RejectedRule { name: raw.name, error: e.to_string() });
            continue;
        }
        let confidence = match raw.confidence.as_deref().map(str::to_ascii_lowercase).as_deref() {
            Some("low") => Confidence::Low,
            _ => Confidence::High,
        };
        let base = slug(&raw.name);
        let mut id = base.clone();
        let mut n = 2;
        while !ids.insert(id.clone()) {
            id = format!("{base}-{n}");
            n += 1;
        }
        rules.push(PatternRule {
            id,
            category_hint: category_for(&raw.name, confidence).to_string(),
            name: raw.name,
            pattern: raw.regex,
            confidence,
        });
    }
    log::info!("loaded {} rules ({} rejected)", rules.len(), rejected.len());
    Ok(LoadedRules { rules, rejected })
}

fn first_line(s: &str) -> &str {
    s.lines().find(|l| !l.trim().is_empty()).unwrap_or(s)
}

pub fn load_rules(path: &Path) -> Result<LoadedRules, RuleFileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| RuleFileError::Io { path: path.display().to_string(), source })?;
    parse_rules(&text)
}

pub const DEFAULT_RULES_YAML: &str = include_str!("data/default_rules.yml");

pub fn default_rules() -> LoadedRules {
    parse_rules(DEFAULT_RULES_YAML).expect("bundled rule file parses")
}

pub struct CompiledRule {
    pub rule: PatternRule,
    pub regex: Regex,
    /// Report capture group 1 instead of the whole match when present.
    pub has_group: bool,
}

/// Immutable compiled rules. Rules with usable literal prefixes are gated by
/// one case-insensitive Aho-Corasick pass; the rest run on every text.
pub struct RuleSet {
    pub rules: Vec<CompiledRule>,
    prefilter: Option<AhoCorasick>,
    /// Pattern index of the automaton to the rules it gates.
    literal_rules: Vec<Vec<usize>>,
    always: Vec<usize>,
}

impl RuleSet {
    pub fn compile(rules: Vec<PatternRule>) -> Self {
        let mut compiled = Vec::with_capacity(rules.len());
        let mut literals: Vec<Vec<u8>> = Vec::new();
        let mut literal_rules: Vec<Vec<usize>> = Vec::new();
        let mut index: std::collections::HashMap<Vec<u8>, usize> = std::collections::HashMap::new();
        let mut always = Vec::new();
        for rule in rules {
            let Ok(regex) = Regex::new(&rule.pattern) else {
                log::warn!("skipping rule `{}`: pattern does not compile", rule.name);
                continue;
            };
            let i = compiled.len();
            let prefixes = regex_syntax::parse(&rule.pattern).ok().and_then(|h| required_prefixes(&h, 3));
            match prefixes {
                Some(ps) => {
                    for p in ps {
                        let slot = *index.entry(p.clone()).or_insert_with(|| {
                            literals.push(p);
                            literal_rules.push(Vec::new());
                            literals.len() - 1
                        });
                        literal_rules[slot].push(i);
                    }
                }
                None => always.push(i),
            }
            let has_group = regex.captures_len() > 1;
            compiled.push(CompiledRule { rule, regex, has_group });
        }
        let prefilter = (!literals.is_empty()).then(|| {
            AhoCorasickBuilder::new()
                .ascii_case_insensitive(true)
                .match_kind(MatchKind::Standard)
                .build(&literals)
                .expect("literal automaton builds")
        });
        log::debug!("{} rules gated by {} literals; {} always run", compiled.len(), literals.len(), always.len());
        RuleSet { rules: compiled, prefilter, literal_rules, always }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn always_run_count(&self) -> usize {
        self.always.len()
    }

    /// Indices of rules that may match `text`, ascending.
    pub fn candidates(&self, text: &str) -> Vec<usize> {
        if !text.is_ascii() && text.contains(FOLD_HAZARDS) {
            return (0..self.rules.len()).collect();
        }
        let mut hit = vec![false; self.rules.len()];
        for &i in &self.always {
            hit[i] = true;
        }
        if let Some(ac) = &self.prefilter {
            for m in ac.find_overlapping_iter(text) {
                for &r in &self.literal_rules[m.pattern().as_usize()] {
                    hit[r] = true;
                }
            }
        }
        hit.iter().enumerate().filter(|(_, h)| **h).map(|(i, _)| i).collect()
    }

    /// `(rule index, byte range)` for every leftmost non-overlapping match of
    /// every rule, ordered by start then rule index.
    pub fn find_all(&self, text: &str) -> Vec<(usize, std::ops::Range<usize>)> {
        let mut out = Vec::new();
        for r in self.candidates(text) {
            let rule = &self.rules[r];
            if rule.has_group {
                for caps in rule.regex.captures_iter(text) {
                    let m = caps.get(1).or_else(|| caps.get(0)).expect("group 0 always present");
                    out.push((r, m.range()));
                }
            } else {
                out.extend(rule.regex.find_iter(text).map(|m| (r, m.range())));
            }
        }
        out.sort_by_key(|a| (a.1.start, a.0));
        out
    }
}
