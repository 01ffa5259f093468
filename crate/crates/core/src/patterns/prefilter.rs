//! Case-folded literal prefixes for regex prefiltering.
//!
//! `required_prefixes` returns a set P such that every match of the pattern
//! starts with some p in P, compared ASCII-case-insensitively, provided the
//! text contains neither U+212A KELVIN SIGN nor U+017F LATIN SMALL LETTER
//! LONG S. Those two are the only non-ASCII code points that case-fold onto
//! ASCII letters (`k`, `s`); callers must bypass the filter for texts that
//! contain them. Any other non-ASCII class member ends the prefix.

use regex_syntax::hir::{Class, Hir, HirKind};

const MAX_ALTERNATIVES: usize = 64;
const MAX_LEN: usize = 12;
const MAX_CLASS: usize = 12;

#[derive(Debug, Clone)]
struct Prefixes {
    items: Vec<Vec<u8>>,
    /// Every item is the complete match text of this sub-pattern.
    exact: bool,
}

impl Prefixes {
    fn empty_exact() -> Self {
        Prefixes { items: vec![Vec::new()], exact: true }
    }

    fn unknown() -> Self {
        Prefixes { items: vec![Vec::new()], exact: false }
    }
}

fn class_bytes(class: &Class) -> Option<Vec<u8>> {
    let mut out: Vec<u8> = Vec::new();
    match class {
        Class::Unicode(c) => {
            for r in c.ranges() {
                let (s, e) = (r.start() as u32, r.end() as u32);
                if s == e && (s == 0x212a || s == 0x17f) {
                    continue;
                }
                if e > 0x7f || (e - s) as usize >= MAX_CLASS * 2 {
                    return None;
                }
                out.extend((s..=e).map(|b| (b as u8).to_ascii_lowercase()));
            }
        }
        Class::Bytes(c) => {
            for r in c.ranges() {
                if r.end() > 0x7f || (r.end() - r.start()) as usize >= MAX_CLASS * 2 {
                    return None;
                }
                out.extend((r.start()..=r.end()).map(|b| b.to_ascii_lowercase()));
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    (!out.is_empty() && out.len() <= MAX_CLASS).then_some(out)
}

fn extract(hir: &Hir) -> Prefixes {
    match hir.kind() {
        HirKind::Empty | HirKind::Look(_) => Prefixes::empty_exact(),
        HirKind::Literal(lit) => {
            if lit.0.iter().any(|b| !b.is_ascii()) {
                return Prefixes::unknown();
            }
            Prefixes { items: vec![lit.0.to_ascii_lowercase()], exact: true }
        }
        HirKind::Class(c) => match class_bytes(c) {
            Some(bytes) => Prefixes { items: bytes.into_iter().map(|b| vec![b]).collect(), exact: true },
            None => Prefixes::unknown(),
        },
        HirKind::Capture(cap) => extract(&cap.sub),
        HirKind::Repetition(rep) => {
            if rep.min == 0 {
                return Prefixes::unknown();
            }
            let inner = extract(&rep.sub);
            let exact = inner.exact && rep.min == 1 && rep.max == Some(1);
            Prefixes { items: inner.items, exact }
        }
        HirKind::Alternation(alts) => {
            let mut items = Vec::new();
            let mut exact = true;
            for a in alts {
                let p = extract(a);
                exact &= p.exact;
                items.extend(p.items);
                if items.len() > MAX_ALTERNATIVES {
                    return Prefixes::unknown();
                }
            }
            items.sort();
            items.dedup();
            Prefixes { items, exact }
        }
        HirKind::Concat(parts) => {
            let mut acc = Prefixes::empty_exact();
            for part in parts {
                if !acc.exact {
                    break;
                }
                let next = extract(part);
                let product = acc.items.len() * next.items.len();
                if product > MAX_ALTERNATIVES || acc.items.iter().all(|i| i.len() >= MAX_LEN) {
                    acc.exact = false;
                    break;
                }
                let mut items = Vec::with_capacity(product);
                for a in &acc.items {
                    for b in &next.items {
                        let mut v = a.clone();
                        v.extend_from_slice(b);
                        v.truncate(MAX_LEN);
                        items.push(v);
                    }
                }
                items.sort();
                items.dedup();
                acc = Prefixes { items, exact: next.exact };
            }
            acc
        }
    }
}

pub const FOLD_HAZARDS: [char; 2] = ['\u{212a}', '\u{17f}'];

/// Lowercased literal prefixes, or `None` if some match could begin with
/// fewer than `min_len` known bytes.
pub fn required_prefixes(hir: &Hir, min_len: usize) -> Option<Vec<Vec<u8>>> {
    let p = extract(hir);
    if p.items.is_empty() || p.items.iter().any(|i| i.len() < min_len) {
        return None;
    }
    // A prefix that extends another is redundant for a superset filter.
    let mut items = p.items;
    items.sort_by_key(Vec::len);
    let mut kept: Vec<Vec<u8>> = Vec::new();
    for i in items {
        if !kept.iter().any(|k| i.starts_with(k)) {
            kept.push(i);
        }
    }
    Some(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pre(re: &str) -> Option<Vec<String>> {
        let hir = regex_syntax::parse(re).unwrap();
        required_prefixes(&hir, 3).map(|v| v.into_iter().map(|b| String::from_utf8(b).unwrap()).collect())
    }

    #[test]
    fn literal_prefix() {
        assert_eq!(pre("AKIA[0-9A-Z]{16}"), Some(vec!["akia".to_string()]));
    }

    #[test]
    fn case_insensitive_folds() {
        assert_eq!(pre("(?i)zendesk"), Some(vec!["zendesk".to_string()]));
        assert_eq!(pre("(?i)caf\u{e9}"), Some(vec!["caf".to_string()]));
        assert_eq!(pre("(?i)\\bmailgun[a-z]"), Some(vec!["mailgun".to_string()]));
    }

    #[test]
    fn alternation_and_short() {
        assert_eq!(pre("xox[bp]-"), Some(vec!["xoxb-".to_string(), "xoxp-".to_string()]));
        assert_eq!(pre("[a-f0-9]{32}"), None);
        assert_eq!(pre("(abc)?def"), None);
        assert_eq!(pre("ab"), None);
    }
}
