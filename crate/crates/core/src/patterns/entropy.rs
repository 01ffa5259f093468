/// Shannon entropy of the character distribution, in bits per character.
pub fn shannon_entropy(s: &str) -> f64 {
    let mut counts = std::collections::HashMap::new();
    let mut n = 0usize;
    for c in s.chars() {
        *counts.entry(c).or_insert(0usize) += 1;
        n += 1;
    }
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

pub fn is_base64url_alphabet(s: &str) -> bool {
    s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TokenHeuristic {
    pub min_len: usize,
    pub min_entropy: f64,
}

impl Default for TokenHeuristic {
    fn default() -> Self {
        TokenHeuristic { min_len: 20, min_entropy: 3.5 }
    }
}

impl TokenHeuristic {
    /// Long, drawn from base64url (hex is a subset), and high-entropy.
    pub fn is_token(&self, segment: &str) -> bool {
        segment.len() >= self.min_len && is_base64url_alphabet(segment) && shannon_entropy(segment) >= self.min_entropy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(shannon_entropy(""), 0.0);
        assert_eq!(shannon_entropy("aaaa"), 0.0);
        assert!((shannon_entropy("abcd") - 2.0).abs() < 1e-12);
    }

    #[test]
    fn token_heuristic() {
        let h = TokenHeuristic::default();
        assert!(h.is_token("1jC2xQ9bLmZ71kPqR0sTuVwX3yULw"));
        assert!(!h.is_token("aaaaaaaaaaaaaaaaaaaaaaaaa"));
        assert!(!h.is_token("short1X"));
        assert!(!h.is_token("has space in it but is long enough"));
    }
}
