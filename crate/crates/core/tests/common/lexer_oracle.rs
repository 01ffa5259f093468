//! Line-oriented reference lexer. It decides whether a `%` is escaped by
//! counting the backslash run in front of it, and finds verbatim and comment
//! environments by searching each line for the earliest event.

use std::ops::Range;

use latexposed::comments::{lex, CommentKind, COMMENT_ENVIRONMENT, VERBATIM_ENVIRONMENTS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleComment {
    pub kind: CommentKind,
    pub span: Range<usize>,
    pub body: Range<usize>,
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct OracleLex {
    pub comments: Vec<OracleComment>,
    pub verbatim: Vec<Range<usize>>,
}

fn line_col(src: &str, at: usize) -> (usize, usize) {
    let before = &src.as_bytes()[..at];
    let line = before.iter().filter(|b| **b == b'\n').count() + 1;
    let col = at - before.iter().rposition(|b| *b == b'\n').map_or(0, |p| p + 1);
    (line, col)
}

/// Backslashes immediately before `at`, not looking before `floor`.
fn run_before(bytes: &[u8], floor: usize, at: usize) -> usize {
    bytes[floor..at].iter().rev().take_while(|b| **b == b'\\').count()
}

fn control_word_at(src: &str, at: usize) -> &str {
    let end = src[at + 1..].bytes().position(|b| !b.is_ascii_alphabetic()).map_or(src.len(), |p| at + 1 + p);
    &src[at + 1..end]
}

enum Event {
    Percent(usize),
    Verb(usize),
    Begin { start: usize, name: String, after_open: usize },
}

fn next_event(src: &str, floor: usize, from: usize, line_end: usize) -> Option<Event> {
    let bytes = src.as_bytes();
    for q in from..line_end {
        let unescaped = run_before(bytes, floor, q).is_multiple_of(2);
        if !unescaped {
            continue;
        }
        match bytes[q] {
            b'%' => return Some(Event::Percent(q)),
            b'\\' => match control_word_at(src, q) {
                "verb" => return Some(Event::Verb(q)),
                "begin" => {
                    let rest = &src[q + 6..line_end];
                    let trimmed = rest.trim_start_matches([' ', '\t']);
                    if let Some(inner) = trimmed.strip_prefix('{') {
                        if let Some(close) = inner.find('}') {
                            let name = &inner[..close];
                            if name == COMMENT_ENVIRONMENT || VERBATIM_ENVIRONMENTS.contains(&name) {
                                let after_open = line_end - inner.len() + close + 1;
                                return Some(Event::Begin { start: q, name: name.to_string(), after_open });
                            }
                        }
                    }
                }
                _ => {}
            },
            _ => {}
        }
    }
    None
}

pub fn oracle_lex(src: &str) -> OracleLex {
    let bytes = src.as_bytes();
    let n = bytes.len();
    let mut out = OracleLex::default();
    // `floor` is where ordinary text last resumed; escapes never reach back
    // past it.
    let mut floor = 0;
    let mut pos = 0;
    while pos < n {
        let line_end = src[pos..].find('\n').map_or(n, |p| pos + p);
        match next_event(src, floor, pos, line_end) {
            None => {
                pos = line_end + 1;
                floor = pos.min(n);
            }
            Some(Event::Percent(q)) => {
                let mut end = line_end;
                if end > q + 1 && bytes[end - 1] == b'\r' {
                    end -= 1;
                }
                let (line, col) = line_col(src, q);
                out.comments.push(OracleComment { kind: CommentKind::Line, span: q..end, body: q + 1..end, line, col });
                pos = end;
                floor = pos;
            }
            Some(Event::Verb(q)) => {
                let mut j = q + 5;
                if j < n && bytes[j] == b'*' {
                    j += 1;
                }
                if j >= n || bytes[j] == b'\n' || bytes[j] == b'\r' {
                    pos = j;
                    continue;
                }
                let delim = src[j..].chars().next().expect("non-empty");
                let body_start = j + delim.len_utf8();
                let eol = src[body_start..].find('\n').map_or(n, |p| body_start + p);
                match src[body_start..eol].find(delim) {
                    Some(p) => {
                        out.verbatim.push(body_start..body_start + p);
                        pos = body_start + p + delim.len_utf8();
                    }
                    None => {
                        out.verbatim.push(body_start..eol);
                        pos = eol;
                    }
                }
                floor = pos;
            }
            Some(Event::Begin { start, name, after_open }) => {
                let term = format!("\\end{{{name}}}");
                // Search line by line; a terminator never spans lines.
                let mut cursor = after_open;
                let found = loop {
                    let eol = src[cursor..].find('\n').map_or(n, |p| cursor + p);
                    if let Some(p) = src[cursor..eol].find(&term) {
                        break Some(cursor + p);
                    }
                    if eol >= n {
                        break None;
                    }
                    cursor = eol + 1;
                };
                let (body_end, resume) = match found {
                    Some(p) => (p, p + term.len()),
                    None => (n, n),
                };
                if name == COMMENT_ENVIRONMENT {
                    let (line, col) = line_col(src, start);
                    out.comments.push(OracleComment {
                        kind: CommentKind::Environment,
                        span: start..resume,
                        body: after_open..body_end,
                        line,
                        col,
                    });
                } else {
                    out.verbatim.push(after_open..body_end);
                }
                pos = resume;
                floor = pos;
            }
        }
    }
    out
}

/// Compares the library lexer with the oracle and checks that splitting and
/// reassembling reproduces the source byte for byte.
pub fn check_agreement(src: &str) -> Result<(), String> {
    let lexed = lex(src);
    let got: Vec<OracleComment> = lexed
        .comments
        .iter()
        .map(|c| OracleComment { kind: c.kind, span: c.span.clone(), body: c.body.clone(), line: c.line, col: c.col })
        .collect();
    let want = oracle_lex(src);
    if got != want.comments {
        return Err(format!("comments differ\n got: {got:?}\nwant: {:?}", want.comments));
    }
    if lexed.verbatim != want.verbatim {
        return Err(format!("verbatim differ\n got: {:?}\nwant: {:?}", lexed.verbatim, want.verbatim));
    }
    if lexed.split().reassemble() != src {
        return Err("round trip changed the source".into());
    }
    Ok(())
}

pub fn fixture_paths() -> Vec<std::path::PathBuf> {
    let dir = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/lexer");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths
}
