//! Prompt construction and token-budget batching.

use std::ops::Range;

use crate::clean::TokenEstimator;

/// Category definitions shown to the model, one per label.
pub const CATEGORY_DEFINITIONS: &[(&str, &str)] = &[
    ("PII", "Personal data about an identifiable person: names tied to contact details, email addresses, phone numbers, postal addresses, identity document or social security numbers, dates of birth."),
    ("CRED", "Anything that grants access: usernames with passwords, API keys, access tokens, private keys, connection strings with secrets, shared account logins."),
    ("NETID", "Identifiers of machines or network endpoints: IP addresses, hostnames of internal servers, ports, MAC addresses, machine or device IDs, account identifiers of systems."),
    ("PEER", "Content about the review of a submission: reviewer comments, rebuttal drafts, reviewer identities or scores, discussion of how to answer reviewers."),
    ("CONF", "Disagreement or tension between authors or collaborators: complaints about a co-author, disputes over credit, ordering or content, unprofessional remarks about colleagues."),
    ("OTHER", "None of the above. Ordinary writing notes, disabled LaTeX, TODOs and drafts."),
];

const INSTRUCTIONS: &str = "You review comments left in the LaTeX sources of research papers and decide which kinds of sensitive information each one discloses.\n\nCategories:\n";

const OUTPUT_FORMAT: &str = "Answer with JSON only: an array holding one object per snippet, in order, of the form {\"id\": <snippet number>, \"labels\": [<category names>]}. Use [\"OTHER\"] when a snippet discloses nothing sensitive. OTHER never appears together with another category.";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("no snippets to classify")]
    Empty,
}

/// System message shared by every request.
pub fn system_prompt() -> String {
    let mut s = String::from(INSTRUCTIONS);
    for (label, def) in CATEGORY_DEFINITIONS {
        s.push_str(&format!("- {label}: {def}\n"));
    }
    s.push('\n');
    s.push_str(OUTPUT_FORMAT);
    s
}

/// User message: the snippets numbered from 1.
pub fn build_prompt(snippets: &[&str]) -> Result<String, PromptError> {
    if snippets.is_empty() {
        return Err(PromptError::Empty);
    }
    let mut s = format!("Classify these {} snippets.\n", snippets.len());
    for (i, text) in snippets.iter().enumerate() {
        s.push_str(&format!("\n### Snippet {}\n{}\n", i + 1, text.trim_end()));
    }
    Ok(s)
}

/// Tokens a batch will cost besides its snippets.
pub fn prompt_overhead(estimator: &dyn TokenEstimator) -> u64 {
    estimator.estimate(&system_prompt()) + estimator.estimate("Classify these 0000 snippets.\n")
}

fn snippet_cost(i: usize, text: &str, estimator: &dyn TokenEstimator) -> u64 {
    estimator.estimate(&format!("\n### Snippet {}\n{}\n", i + 1, text.trim_end()))
}

/// Consecutive ranges whose prompts stay within `budget` tokens. A snippet
/// too large for any batch gets a range of its own.
pub fn split_batches(snippets: &[&str], budget: u64, estimator: &dyn TokenEstimator) -> Vec<Range<usize>> {
    let overhead = prompt_overhead(estimator);
    let mut out = Vec::new();
    let mut start = 0;
    let mut used = overhead;
    for (i, text) in snippets.iter().enumerate() {
        let cost = snippet_cost(i - start, text, estimator);
        if i > start && used + cost > budget {
            out.push(start..i);
            start = i;
            used = overhead + snippet_cost(0, text, estimator);
        } else {
            used += cost;
        }
        if i == start && used > budget {
            log::warn!("snippet {i} alone exceeds the token budget ({used} > {budget})");
        }
    }
    if start < snippets.len() {
        out.push(start..snippets.len());
    }
    out
}
