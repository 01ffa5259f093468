//! Known demo values, documentation domains and credential placeholders.

use std::collections::HashSet;

use super::url::host_matches;

#[derive(Debug, Clone, Default)]
pub struct SuppressionList {
    domains: Vec<String>,
    tokens: Vec<String>,
    placeholders: HashSet<String>,
}

#[derive(Debug, thiserror::Error)]
#[error("suppression list line {line}: {message}")]
pub struct SuppressionParseError {
    pub line: usize,
    pub message: String,
}

pub const DEFAULT_SUPPRESSIONS: &str = include_str!("data/suppressions.txt");

impl SuppressionList {
    pub fn parse(text: &str) -> Result<Self, SuppressionParseError> {
        let mut list = SuppressionList::default();
        list.extend(text)?;
        Ok(list)
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_SUPPRESSIONS).expect("bundled suppression list parses")
    }

    /// Adds the entries of another list file.
    pub fn extend(&mut self, text: &str) -> Result<(), SuppressionParseError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: &str| SuppressionParseError { line: i + 1, message: message.to_string() };
            let (kind, value) = line.split_once(char::is_whitespace).ok_or_else(|| err("expected `<kind> <value>`"))?;
            let value = value.trim();
            match kind {
                "domain" => self.domains.push(value.trim_start_matches('.').to_ascii_lowercase()),
                "token" => self.tokens.push(value.to_string()),
                "placeholder" => {
                    self.placeholders.insert(value.to_lowercase());
                }
                other => return Err(err(&format!("unknown kind `{other}`"))),
            }
        }
        Ok(())
    }

    pub fn domain_reason(&self, host: &str) -> Option<String> {
        let host = host.to_ascii_lowercase();
        self.domains.iter().find(|d| host_matches(&host, d)).map(|d| format!("documentation domain {d}"))
    }

    pub fn token_reason(&self, matched: &str) -> Option<String> {
        self.tokens.iter().find(|t| matched.contains(t.as_str())).map(|_| "known demo value".to_string())
    }

    /// Values that stand in for a credential rather than being one.
    pub fn is_placeholder(&self, value: &str) -> bool {
        let v = value.trim_matches(|c: char| matches!(c, '"' | '\'' | '`' | '.' | ',' | ';' | ')'));
        if v.is_empty() || self.placeholders.contains(&v.to_lowercase()) {
            return true;
        }
        let first = v.chars().next().unwrap_or(' ');
        if matches!(first, '<' | '{' | '$' | '[' | '\\') {
            return true;
        }
        let mut chars = v.chars();
        let c0 = chars.next().unwrap_or(' ');
        chars.all(|c| c == c0) || v.chars().all(|c| matches!(c, 'x' | 'X' | '*' | '.' | '#' | '-' | '_' | '\u{2022}'))
    }
}
