//! Parsing untrusted model output into label sets.

use serde_json::Value;

use crate::labels::{CategoryLabel, LabelSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no JSON array in response")]
    NoStructure,
    #[error("expected {expected} entries, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("entry {0}: {1}")]
    BadEntry(usize, String),
}

fn labels_of(v: &Value, idx: usize) -> Result<LabelSet, ParseError> {
    let arr = match v {
        Value::Array(a) => a,
        Value::Object(o) => match o.get("labels").or_else(|| o.get("categories")) {
            Some(Value::Array(a)) => a,
            _ => return Err(ParseError::BadEntry(idx, "missing labels array".into())),
        },
        _ => return Err(ParseError::BadEntry(idx, "not an object or array".into())),
    };
    let mut labels = Vec::with_capacity(arr.len());
    for l in arr {
        let s = l.as_str().ok_or_else(|| ParseError::BadEntry(idx, "label is not a string".into()))?;
        labels.push(s.parse::<CategoryLabel>().map_err(|e| ParseError::BadEntry(idx, e.to_string()))?);
    }
    Ok(LabelSet::new(labels))
}

fn entry_id(v: &Value) -> Option<u64> {
    v.as_object()?.get("id")?.as_u64()
}

fn from_value(v: &Value, n: usize) -> Result<Vec<LabelSet>, ParseError> {
    let entries = match v {
        Value::Array(a) => a,
        Value::Object(o) => match o.values().find(|x| x.is_array()) {
            Some(Value::Array(a)) => a,
            _ => return Err(ParseError::NoStructure),
        },
        _ => return Err(ParseError::NoStructure),
    };
    if entries.len() != n {
        return Err(ParseError::CountMismatch { expected: n, got: entries.len() });
    }
    let mut out: Vec<Option<LabelSet>> = vec![None; n];
    for (pos, e) in entries.iter().enumerate() {
        // Entries with ids are placed by id; ids must be exactly 1..=n.
        let slot = match entry_id(e) {
            Some(id) if id >= 1 && (id as usize) <= n => id as usize - 1,
            Some(id) => return Err(ParseError::BadEntry(pos, format!("id {id} out of range"))),
            None => pos,
        };
        if out[slot].is_some() {
            return Err(ParseError::BadEntry(pos, format!("duplicate id {}", slot + 1)));
        }
        out[slot] = Some(labels_of(e, pos)?);
    }
    Ok(out.into_iter().map(|s| s.expect("every slot filled")).collect())
}

/// First balanced `[...]` or `{...}` block, respecting JSON strings.
fn first_block(text: &str) -> Option<&str> {
    let start = text.find(['[', '{'])?;
    let mut depth = 0usize;
    let mut in_str = false;
    let mut esc = false;
    for (i, c) in text[start..].char_indices() {
        if in_str {
            match (esc, c) {
                (true, _) => esc = false,
                (false, '\\') => esc = true,
                (false, '"') => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_str = true,
            '[' | '{' => depth += 1,
            ']' | '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Strict parse of the whole response, then one repair pass over the first
/// structured block. Labels are never invented for missing entries.
pub fn parse_response(text: &str, n: usize) -> Result<Vec<LabelSet>, ParseError> {
    if let Ok(v) = serde_json::from_str::<Value>(text.trim()) {
        return from_value(&v, n);
    }
    let block = first_block(text).ok_or(ParseError::NoStructure)?;
    let v: Value = serde_json::from_str(block).map_err(|_| ParseError::NoStructure)?;
    from_value(&v, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use CategoryLabel::*;

    #[test]
    fn strict() {
        let r = r#"[{"id":1,"labels":["PII"]},{"id":2,"labels":["OTHER"]},{"id":3,"labels":["CRED","NETID"]}]"#;
        let sets = parse_response(r, 3).unwrap();
        assert_eq!(sets[0], LabelSet::new([Pii]));
        assert!(sets[1].is_other());
        assert_eq!(sets[2], LabelSet::new([Cred, Netid]));
    }

    #[test]
    fn repaired_from_prose() {
        let r = "Sure! Here is the result:\n```json\n[[\"PII\"], [\"OTHER\", \"PEER\"]]\n```\nLet me know.";
        let sets = parse_response(r, 2).unwrap();
        assert_eq!(sets[1], LabelSet::new([Peer]));
    }

    #[test]
    fn ids_reorder_and_wrapper_object() {
        let r = r#"{"results":[{"id":2,"labels":["CONF"]},{"id":1,"labels":[]}]}"#;
        let sets = parse_response(r, 2).unwrap();
        assert!(sets[0].is_other());
        assert_eq!(sets[1], LabelSet::new([Conf]));
    }

    #[test]
    fn failures() {
        assert_eq!(parse_response(r#"[["PII"],["CRED"]]"#, 3), Err(ParseError::CountMismatch { expected: 3, got: 2 }));
        assert_eq!(parse_response("no idea", 1), Err(ParseError::NoStructure));
        assert!(matches!(parse_response(r#"[["SECRET"]]"#, 1), Err(ParseError::BadEntry(0, _))));
        assert!(matches!(
            parse_response(r#"[{"id":1,"labels":["PII"]},{"id":1,"labels":["PII"]}]"#, 2),
            Err(ParseError::BadEntry(1, _))
        ));
    }
}
