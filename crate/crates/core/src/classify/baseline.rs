//! Offline backend: pattern-engine hits and small lexicons mapped to labels.

use std::sync::Arc;

use once_cell::sync::Lazy;
use regex::Regex;

use super::{BackendError, DetectorBackend, Pricing};
use crate::categories;
use crate::labels::{CategoryLabel, LabelSet};
use crate::patterns::{Engine, Locus, Origin};

static NETID_WORDS: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)\b(?:machine[_ -]?id|device[_ -]?id|host[_ -]?name|mac[_ -]?addr(?:ess)?|ssh\s+\S+@|port\s+\d{2,5}\b)|\b(?:[0-9a-f]{2}:){5}[0-9a-f]{2}\b",
    )
    .expect("lexicon compiles")
});

static CRED_WORDS: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"(?i)\b(?:api[_ -]?key|access[_ -]?token|secret[_ -]?key|private[_ -]?key|passwords?|passwd)\s*[:=]")
        .expect("lexicon compiles")
});

static PII_WORDS: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)\b(?:date of birth|born on|home address|passport (?:no|number)|my (?:cell|phone|mobile) (?:is|number))\b",
    )
    .expect("lexicon compiles")
});

static PEER_WORDS: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)\b(?:reviewers?|rebuttal|meta-?review|area chair|camera-ready response|response to (?:the )?reviewers)\b",
    )
    .expect("lexicon compiles")
});

static CONF_WORDS: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"(?i)\b(?:co-?authors?|advisor|supervisor|collaborators?)\b[^.\n]{0,60}\b(?:refuses?|insists?|ignores?|blames?|is wrong|incompetent|lazy|annoying|without asking|behind my back)\b|\bi (?:strongly )?disagree with (?:him|her|them|my co-?authors?)\b",
    )
    .expect("lexicon compiles")
});

pub struct BaselineBackend {
    engine: Arc<Engine>,
}

impl BaselineBackend {
    pub fn new(engine: Arc<Engine>) -> Self {
        BaselineBackend { engine }
    }

    pub fn with_default_engine() -> Self {
        BaselineBackend::new(Arc::new(Engine::with_defaults()))
    }

    pub fn classify_one(&self, snippet: &str) -> LabelSet {
        let locus = Locus { paper_id: String::new(), file: String::new(), line: 1, origin: Origin::Comment };
        let mut labels = Vec::new();
        for m in self.engine.scan(snippet, &locus) {
            if m.suppressed {
                continue;
            }
            let label = match (m.rule_id.as_str(), m.category.as_deref()) {
                ("email" | "po-box" | "iban", _) => Some(CategoryLabel::Pii),
                (id, _) if id.starts_with("phone.") || id.starts_with("ssn.") => Some(CategoryLabel::Pii),
                (id, _) if id.starts_with("jwt.") => Some(CategoryLabel::Cred),
                ("ip.public" | "ip.private" | "url.scp-git", _) => Some(CategoryLabel::Netid),
                (_, Some(categories::LOGIN_CREDENTIALS | categories::AWS_ACCESS_KEYS | categories::SECRET_TOKEN)) => {
                    Some(CategoryLabel::Cred)
                }
                _ => None,
            };
            labels.extend(label);
        }
        for (re, label) in [
            (&*NETID_WORDS, CategoryLabel::Netid),
            (&*CRED_WORDS, CategoryLabel::Cred),
            (&*PII_WORDS, CategoryLabel::Pii),
            (&*PEER_WORDS, CategoryLabel::Peer),
            (&*CONF_WORDS, CategoryLabel::Conf),
        ] {
            if re.is_match(snippet) {
                labels.push(label);
            }
        }
        LabelSet::new(labels)
    }
}

impl DetectorBackend for BaselineBackend {
    fn name(&self) -> &str {
        "baseline"
    }

    fn pricing(&self) -> Pricing {
        Pricing::free()
    }

    fn classify(&self, snippets: &[&str]) -> Result<Vec<LabelSet>, BackendError> {
        Ok(snippets.iter().map(|s| self.classify_one(s)).collect())
    }
}
