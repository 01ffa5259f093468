use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;

fn decode_segment(seg: &str) -> Option<serde_json::Value> {
    let bytes = URL_SAFE_NO_PAD.decode(seg.trim_end_matches('=')).ok()?;
    serde_json::from_slice(&bytes).ok()
}

/// `(valid_shape, has_expiry)`. A valid shape is three dot-separated
/// base64url segments whose first two decode to JSON objects, the header
/// carrying `alg`. `has_expiry` is true iff the payload has a numeric `exp`.
pub fn analyze_jwt(candidate: &str) -> (bool, bool) {
    let parts: Vec<&str> = candidate.split('.').collect();
    if parts.len() != 3 || parts[..2].iter().any(|p| p.is_empty()) {
        return (false, false);
    }
    let (Some(header), Some(payload)) = (decode_segment(parts[0]), decode_segment(parts[1])) else {
        return (false, false);
    };
    if !header.is_object() || header.get("alg").is_none() || !payload.is_object() {
        return (false, false);
    }
    (true, payload.get("exp").is_some_and(serde_json::Value::is_number))
}
