//! Structural detectors: values recognised by shape plus a check (checksum,
//! decoding, address range, context words) rather than by a rule file.

use std::ops::Range;

use once_cell::sync::Lazy;
use regex::Regex;

use super::entropy::TokenHeuristic;
use super::iban::{compact, mod97, registered_length};
use super::ip::{classify_ip, IpKind};
use super::jwt::analyze_jwt;
use super::suppress::SuppressionList;
use super::url::{classify_url, host_matches, is_private_git, UrlRecord};
use crate::categories;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    pub rule_id: &'static str,
    /// `None` for values recorded for statistics only.
    pub category: Option<&'static str>,
    pub range: Range<usize>,
    pub suppressed: Option<String>,
    pub host: Option<String>,
}

impl Detection {
    fn new(rule_id: &'static str, category: Option<&'static str>, range: Range<usize>) -> Self {
        Detection { rule_id, category, range, suppressed: None, host: None }
    }

    fn suppress(mut self, reason: Option<String>) -> Self {
        self.suppressed = reason;
        self
    }
}

macro_rules! re {
    ($name:ident, $pat:expr) => {
        static $name: Lazy<Regex> = Lazy::new(|| Regex::new($pat).expect("detector regex compiles"));
    };
}

re!(EMAIL, r"(?i)\b[a-z0-9][a-z0-9._%+\-]*@((?:[a-z0-9](?:[a-z0-9\-]*[a-z0-9])?\.)+[a-z]{2,24})\b");
re!(URL, r#"(?i)\b(?:https?|ftp|git|ssh|git\+ssh)://[^\s<>"'{}|\\^`\[\]]+"#);
re!(SCP_GIT, r"(?i)\bgit@((?:[a-z0-9\-]+\.)+[a-z]{2,}):[\w./~\-]+");
re!(IPV4, r"\b(?:(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)\.){3}(?:25[0-5]|2[0-4]\d|1\d\d|[1-9]?\d)(?::\d{1,5})?\b");
re!(IBAN, r"\b[A-Z]{2}\d{2}(?: ?[A-Z0-9]){11,30}\b");
re!(JWT, r"\beyJ[A-Za-z0-9_\-]{5,}\.eyJ[A-Za-z0-9_\-]{5,}\.[A-Za-z0-9_\-]*");
re!(HEX_RUN, r"[0-9a-fA-F]+");
re!(PHONE_US, r"(?:\+1[\s.\-]?)?(?:\(\d{3}\)|\b[2-9]\d{2})[\s.\-]\d{3}[\s.\-]\d{4}\b");
re!(PHONE_UK, r"(?:\+44\s?(?:\(0\)\s?)?|\b0)\d{2,4}[\s\-]?\d{3,4}[\s\-]?\d{3,4}\b");
re!(PHONE_CONTEXT, r"(?i)\b(?:phone|tel|telephone|mobile|cell|fax|whatsapp|call me|ring)\b");
re!(SSN_US, r"\b(\d{3})-(\d{2})-(\d{4})\b");
re!(SSN_CONTEXT, r"(?i)\b(?:ssn|social security|soc\.? sec)");
re!(NINO, r"\b[A-CEGHJ-PR-TW-Z][A-CEGHJ-NPR-TW-Z] ?\d{2} ?\d{2} ?\d{2} ?[A-D]\b");
re!(NINO_CONTEXT, r"(?i)\b(?:national insurance|ni number|nino)\b");
re!(PO_BOX, r"(?i)\bP\.? ?O\.? ?Box\s+\d{1,6}\b");
re!(
    PASSWORD,
    r#"(?i)\b(?:password|passwort|passwd|passcode|pwd|pw|pass)\b(?:[^\n:=]{0,40}?\bis\b|\s*[:=]|\s*->)?\s*["'`]?([^\s"'`,;]{4,64})"#
);

const CONTEXT_WINDOW: usize = 40;

#[derive(Debug, Clone, Default)]
pub struct DetectorConfig {
    pub token: TokenHeuristic,
}

fn floor_boundary(s: &str, mut i: usize) -> usize {
    while i > 0 && !s.is_char_boundary(i) {
        i -= 1;
    }
    i
}

fn ceil_boundary(s: &str, mut i: usize) -> usize {
    while i < s.len() && !s.is_char_boundary(i) {
        i += 1;
    }
    i
}

fn near(text: &str, range: &Range<usize>, context: &Regex) -> bool {
    let lo = floor_boundary(text, range.start.saturating_sub(CONTEXT_WINDOW));
    let hi = ceil_boundary(text, (range.end + CONTEXT_WINDOW).min(text.len()));
    context.is_match(&text[lo..hi])
}

fn prev_char(text: &str, at: usize) -> Option<char> {
    text[..at].chars().next_back()
}

fn next_char(text: &str, at: usize) -> Option<char> {
    text[at..].chars().next()
}

fn is_loopback_host(host: &str) -> bool {
    host_matches(host, "localhost")
        || classify_ip(host).map(|r| matches!(r.kind, IpKind::Loopback | IpKind::Reserved)).unwrap_or(false)
}

fn trim_url_end(s: &str) -> usize {
    let mut end = s.len();
    while let Some(c) = s[..end].chars().next_back() {
        let unbalanced_paren = c == ')' && s[..end].matches('(').count() < s[..end].matches(')').count();
        if matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '\'' | '"') || unbalanced_paren {
            end -= c.len_utf8();
        } else {
            break;
        }
    }
    end
}

/// Category for a classified URL. Precedence: CASA token, cloud share with a
/// non-trivial path, private git remote, token-bearing link.
pub fn url_category(rec: &UrlRecord) -> Option<&'static str> {
    if rec.casa_token {
        return Some(categories::CASA_TOKENS);
    }
    if rec.cloud_provider.is_some() && !rec.path_segments.is_empty() {
        let nontrivial = rec.token_like || rec.path_segments.len() >= 2 || rec.url.contains('?');
        if nontrivial {
            return Some(categories::PRIVATE_DOCUMENTS);
        }
    }
    if is_private_git(rec) {
        return Some(categories::PRIVATE_GIT);
    }
    if rec.token_like {
        return Some(categories::TOKEN_LIKE_URL);
    }
    None
}

fn detect_urls(text: &str, cfg: &DetectorConfig, supp: &SuppressionList, out: &mut Vec<Detection>) {
    for m in URL.find_iter(text) {
        let end = m.start() + trim_url_end(m.as_str());
        let url = &text[m.start()..end];
        let rec = classify_url(url, &cfg.token);
        let category = url_category(&rec);
        let mut d = Detection::new("url", category, m.start()..end);
        if let Some(host) = &rec.host {
            let reason = supp
                .domain_reason(host)
                .or_else(|| is_loopback_host(host).then(|| "loopback or reserved host".to_string()))
                .or_else(|| supp.token_reason(url));
            d = d.suppress(reason);
        } else {
            d.category = None;
        }
        d.host = rec.host;
        out.push(d);
    }
    for caps in SCP_GIT.captures_iter(text) {
        let m = caps.get(0).expect("group 0");
        let host = caps[1].to_ascii_lowercase();
        let public =
            ["github.com", "gitlab.com", "bitbucket.org", "codeberg.org"].iter().any(|f| host_matches(&host, f));
        let mut d = Detection::new("url.scp-git", (!public).then_some(categories::PRIVATE_GIT), m.range());
        d = d.suppress(supp.domain_reason(&host));
        d.host = Some(host);
        out.push(d);
    }
}

fn detect_emails(text: &str, supp: &SuppressionList, out: &mut Vec<Detection>) {
    for caps in EMAIL.captures_iter(text) {
        let m = caps.get(0).expect("group 0");
        // `git@host:path` is a remote, not a mailbox.
        if m.as_str().to_ascii_lowercase().starts_with("git@") && next_char(text, m.end()) == Some(':') {
            continue;
        }
        if prev_char(text, m.start()).is_some_and(|c| c == '/' || c == ':') {
            continue;
        }
        let domain = caps[1].to_ascii_lowercase();
        let mut d = Detection::new("email", Some(categories::UNIQUE_EMAILS), m.range());
        d = d.suppress(supp.domain_reason(&domain).or_else(|| supp.token_reason(m.as_str())));
        d.host = Some(domain);
        out.push(d);
    }
}

fn detect_ips(text: &str, supp: &SuppressionList, out: &mut Vec<Detection>) {
    for m in IPV4.find_iter(text) {
        let before = prev_char(text, m.start());
        if before.is_some_and(|c| c == '.' || c.is_ascii_alphanumeric()) {
            continue;
        }
        let after = &text[m.end()..];
        if after.starts_with('.') && after[1..].starts_with(|c: char| c.is_ascii_digit()) {
            continue;
        }
        let preceding = text[floor_boundary(text, m.start().saturating_sub(12))..m.start()].to_ascii_lowercase();
        if preceding.trim_end().ends_with("version") || preceding.trim_end().ends_with("ver.") {
            continue;
        }
        let Ok(rec) = classify_ip(m.as_str()) else { continue };
        let d = match rec.kind {
            IpKind::Public => Detection::new("ip.public", Some(categories::PUBLIC_IP), m.range())
                .suppress(supp.token_reason(m.as_str())),
            IpKind::Private => Detection::new("ip.private", None, m.range()),
            IpKind::Loopback => {
                Detection::new("ip.loopback", None, m.range()).suppress(Some("loopback address".into()))
            }
            IpKind::Reserved => {
                Detection::new("ip.reserved", None, m.range()).suppress(Some("reserved address range".into()))
            }
        };
        out.push(d);
    }
}

fn detect_ibans(text: &str, supp: &SuppressionList, out: &mut Vec<Detection>) {
    for m in IBAN.find_iter(text) {
        let s = m.as_str();
        // Trim to the country's registered length when text runs on.
        let want = registered_length(&s[..2]);
        let mut end = s.len();
        if let Some(want) = want {
            let mut seen = 0;
            for (i, c) in s.char_indices() {
                if c != ' ' {
                    seen += 1;
                    if seen == want {
                        end = i + c.len_utf8();
                        break;
                    }
                }
            }
            if seen < want {
                continue;
            }
        }
        let candidate = &s[..end];
        let Ok(c) = compact(candidate) else { continue };
        if mod97(&c) != 1 {
            continue;
        }
        let range = m.start()..m.start() + end;
        out.push(Detection::new("iban", Some(categories::VALIDATED_IBANS), range).suppress(supp.token_reason(&c)));
    }
}

fn detect_jwts(text: &str, supp: &SuppressionList, out: &mut Vec<Detection>) {
    for m in JWT.find_iter(text) {
        let (valid, has_exp) = analyze_jwt(m.as_str());
        if !valid {
            continue;
        }
        let category = (!has_exp).then_some(categories::JWT_WITHOUT_EXPIRY);
        let id = if has_exp { "jwt.with-expiry" } else { "jwt.no-expiry" };
        out.push(Detection::new(id, category, m.range()).suppress(supp.token_reason(m.as_str())));
    }
}

fn detect_hashes(text: &str, supp: &SuppressionList, out: &mut Vec<Detection>) {
    for m in HEX_RUN.find_iter(text) {
        let id = match m.len() {
            32 => "hash.md5",
            40 => "hash.sha1",
            64 => "hash.sha256",
            _ => continue,
        };
        let s = m.as_str();
        if !s.bytes().any(|b| b.is_ascii_digit()) || !s.bytes().any(|b| b.is_ascii_alphabetic()) {
            continue;
        }
        let glued = |c: Option<char>| c.is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if glued(prev_char(text, m.start())) || glued(next_char(text, m.end())) {
            continue;
        }
        out.push(Detection::new(id, Some(categories::HASHES), m.range()).suppress(supp.token_reason(s)));
    }
}

fn ssn_plausible(area: &str, group: &str, serial: &str) -> bool {
    area != "000" && area != "666" && !area.starts_with('9') && group != "00" && serial != "0000"
}

fn detect_personal(text: &str, supp: &SuppressionList, out: &mut Vec<Detection>) {
    let mut phone_ranges: Vec<Range<usize>> = Vec::new();
    for (re, id) in [(&*PHONE_US, "phone.us"), (&*PHONE_UK, "phone.uk")] {
        for m in re.find_iter(text) {
            let r = m.range();
            if phone_ranges.iter().any(|p| p.start < r.end && r.start < p.end) || !near(text, &r, &PHONE_CONTEXT) {
                continue;
            }
            phone_ranges.push(r.clone());
            out.push(Detection::new(id, Some(categories::PHONE_NUMBERS), r).suppress(supp.token_reason(m.as_str())));
        }
    }
    for caps in SSN_US.captures_iter(text) {
        let m = caps.get(0).expect("group 0");
        if !ssn_plausible(&caps[1], &caps[2], &caps[3]) || !near(text, &m.range(), &SSN_CONTEXT) {
            continue;
        }
        out.push(Detection::new("ssn.us", Some(categories::SSN), m.range()).suppress(supp.token_reason(m.as_str())));
    }
    for m in NINO.find_iter(text) {
        if near(text, &m.range(), &NINO_CONTEXT) {
            out.push(Detection::new("ssn.uk-nino", Some(categories::SSN), m.range()));
        }
    }
    for m in PO_BOX.find_iter(text) {
        out.push(Detection::new("po-box", Some(categories::PO_BOXES), m.range()));
    }
}

/// At least two of lowercase, uppercase, digit, symbol.
fn looks_like_secret(v: &str) -> bool {
    let classes = [
        v.chars().any(|c| c.is_lowercase()),
        v.chars().any(|c| c.is_uppercase()),
        v.chars().any(|c| c.is_ascii_digit()),
        v.chars().any(|c| !c.is_alphanumeric()),
    ];
    classes.iter().filter(|b| **b).count() >= 2
}

fn detect_passwords(text: &str, supp: &SuppressionList, out: &mut Vec<Detection>) {
    for caps in PASSWORD.captures_iter(text) {
        let g = caps.get(1).expect("value group");
        let value = g.as_str().trim_end_matches(['.', ')', ']', '}', ':']);
        if value.len() < 4 || !looks_like_secret(value) || value.contains("://") {
            continue;
        }
        let range = g.start()..g.start() + value.len();
        let reason = if supp.is_placeholder(value) {
            Some("placeholder credential".to_string())
        } else {
            supp.token_reason(value)
        };
        out.push(Detection::new("credential.password", Some(categories::LOGIN_CREDENTIALS), range).suppress(reason));
    }
}

/// Every structural detection in `text`, ordered by start offset then id.
pub fn detect_structural(text: &str, cfg: &DetectorConfig, supp: &SuppressionList) -> Vec<Detection> {
    let mut out = Vec::new();
    detect_urls(text, cfg, supp, &mut out);
    detect_emails(text, supp, &mut out);
    detect_ips(text, supp, &mut out);
    detect_ibans(text, supp, &mut out);
    detect_jwts(text, supp, &mut out);
    detect_hashes(text, supp, &mut out);
    detect_personal(text, supp, &mut out);
    detect_passwords(text, supp, &mut out);
    out.sort_by(|a, b| (a.range.start, a.rule_id, a.range.end).cmp(&(b.range.start, b.rule_id, b.range.end)));
    out
}
