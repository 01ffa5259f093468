//! Lexical comment extraction under default catcodes.
//!
//! A `%` starts a comment unless it is the second character of a control
//! symbol (`\%`). Because `\\` is itself a control symbol, consuming control
//! sequences left to right gives the backslash-parity rule for free. Bodies of
//! verbatim-like environments and `\verb` arguments are skipped, and
//! `\begin{comment}` ... `\end{comment}` blocks are reported as one
//! environment comment.

use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Environments whose bodies are typeset literally.
pub const VERBATIM_ENVIRONMENTS: &[&str] =
    &["verbatim", "verbatim*", "Verbatim", "Verbatim*", "BVerbatim", "LVerbatim", "lstlisting", "minted"];

pub const COMMENT_ENVIRONMENT: &str = "comment";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommentKind {
    Line,
    Environment,
}

/// A comment located in a decoded source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexedComment {
    pub kind: CommentKind,
    /// Bytes removed from the source when stripping this comment: the `%`
    /// through the end of the line, or the whole environment including its
    /// `\begin`/`\end` markers.
    pub span: Range<usize>,
    /// Comment text proper: after the `%`, or between the markers.
    pub body: Range<usize>,
    /// 1-based.
    pub line: usize,
    /// 0-based byte column of the `%` or `\begin`.
    pub col: usize,
}

#[derive(Debug, Clone)]
pub struct Lexed<'a> {
    source: &'a str,
    pub comments: Vec<LexedComment>,
    /// Skipped literal regions (verbatim bodies and `\verb` arguments).
    pub verbatim: Vec<Range<usize>>,
    pub warnings: Vec<String>,
}

/// Source text with comments cut out, plus what is needed to put them back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSource {
    pub code: String,
    /// `(offset into code, removed text)` in ascending offset order.
    pub removed: Vec<(usize, String)>,
}

impl SplitSource {
    pub fn reassemble(&self) -> String {
        let extra: usize = self.removed.iter().map(|(_, s)| s.len()).sum();
        let mut out = String::with_capacity(self.code.len() + extra);
        let mut cursor = 0;
        for (at, text) in &self.removed {
            out.push_str(&self.code[cursor..*at]);
            out.push_str(text);
            cursor = *at;
        }
        out.push_str(&self.code[cursor..]);
        out
    }
}

impl<'a> Lexed<'a> {
    pub fn source(&self) -> &'a str {
        self.source
    }

    pub fn body(&self, comment: &LexedComment) -> &'a str {
        &self.source[comment.body.clone()]
    }

    pub fn split(&self) -> SplitSource {
        let mut code = String::with_capacity(self.source.len());
        let mut removed = Vec::with_capacity(self.comments.len());
        let mut cursor = 0;
        for c in &self.comments {
            code.push_str(&self.source[cursor..c.span.start]);
            removed.push((code.len(), self.source[c.span.clone()].to_string()));
            cursor = c.span.end;
        }
        code.push_str(&self.source[cursor..]);
        SplitSource { code, removed }
    }

    /// The source with comment spans and verbatim regions blanked out.
    /// Newlines survive so line numbers stay aligned; every other byte in a
    /// masked region becomes a space.
    pub fn masked(&self) -> String {
        let mut bytes = self.source.as_bytes().to_vec();
        let regions = self.comments.iter().map(|c| c.span.clone()).chain(self.verbatim.iter().cloned());
        for r in regions {
            for b in &mut bytes[r] {
                if *b != b'\n' {
                    *b = b' ';
                }
            }
        }
        // Only ASCII bytes were replaced, by ASCII, but a masked region may
        // have cut through a multi-byte character; lossy conversion repairs it.
        String::from_utf8(bytes).unwrap_or_else(|e| String::from_utf8_lossy(e.as_bytes()).into_owned())
    }
}

struct LineIndex(Vec<usize>);

impl LineIndex {
    fn new(src: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(src.bytes().enumerate().filter(|(_, b)| *b == b'\n').map(|(i, _)| i + 1));
        LineIndex(starts)
    }

    fn locate(&self, offset: usize) -> (usize, usize) {
        let idx = self.0.partition_point(|&s| s <= offset) - 1;
        (idx + 1, offset - self.0[idx])
    }
}

fn is_letter(b: u8) -> bool {
    b.is_ascii_alphabetic()
}

fn char_len_at(src: &str, i: usize) -> usize {
    src[i..].chars().next().map_or(1, char::len_utf8)
}

pub fn lex(source: &str) -> Lexed<'_> {
    let bytes = source.as_bytes();
    let n = bytes.len();
    let lines = LineIndex::new(source);
    let mut out = Lexed { source, comments: Vec::new(), verbatim: Vec::new(), warnings: Vec::new() };
    let mut i = 0;

    while i < n {
        match bytes[i] {
            b'%' => {
                let eol = memchr_newline(bytes, i);
                let mut end = eol;
                if end > i + 1 && bytes[end - 1] == b'\r' {
                    end -= 1;
                }
                let (line, col) = lines.locate(i);
                out.comments.push(LexedComment { kind: CommentKind::Line, span: i..end, body: i + 1..end, line, col });
                i = end;
            }
            b'\\' => {
                if i + 1 >= n {
                    i += 1;
                    continue;
                }
                let next = bytes[i + 1];
                if !is_letter(next) {
                    // Control symbol. A backslash before a line break consumes
                    // nothing further.
                    i += if next == b'\n' || next == b'\r' { 1 } else { 1 + char_len_at(source, i + 1) };
                    continue;
                }
                let mut j = i + 1;
                while j < n && is_letter(bytes[j]) {
                    j += 1;
                }
                match &source[i + 1..j] {
                    "verb" => i = skip_verb(source, j, &lines, &mut out),
                    "begin" => i = handle_begin(source, i, j, &lines, &mut out),
                    _ => i = j,
                }
            }
            _ => i += 1,
        }
    }
    out
}

fn memchr_newline(bytes: &[u8], from: usize) -> usize {
    bytes[from..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |p| from + p)
}

/// `j` points just past `\verb`. Returns the resume offset.
fn skip_verb(source: &str, mut j: usize, lines: &LineIndex, out: &mut Lexed<'_>) -> usize {
    let bytes = source.as_bytes();
    if j < bytes.len() && bytes[j] == b'*' {
        j += 1;
    }
    if j >= bytes.len() || bytes[j] == b'\n' || bytes[j] == b'\r' {
        return j;
    }
    let delim_len = char_len_at(source, j);
    let delim = &source[j..j + delim_len];
    let body_start = j + delim_len;
    let line_end = memchr_newline(bytes, body_start);
    match source[body_start..line_end].find(delim) {
        Some(p) => {
            out.verbatim.push(body_start..body_start + p);
            body_start + p + delim_len
        }
        None => {
            let (line, _) = lines.locate(j);
            out.warnings.push(format!("line {line}: \\verb not closed before end of line"));
            out.verbatim.push(body_start..line_end);
            line_end
        }
    }
}

/// `start` is the backslash of `\begin`, `j` just past the word.
fn handle_begin(source: &str, start: usize, j: usize, lines: &LineIndex, out: &mut Lexed<'_>) -> usize {
    let bytes = source.as_bytes();
    let mut k = j;
    while k < bytes.len() && (bytes[k] == b' ' || bytes[k] == b'\t') {
        k += 1;
    }
    if k >= bytes.len() || bytes[k] != b'{' {
        return j;
    }
    let line_end = memchr_newline(bytes, k);
    let Some(close) = source[k + 1..line_end].find('}') else { return j };
    let name = &source[k + 1..k + 1 + close];
    let after_open = k + 1 + close + 1;

    let is_comment = name == COMMENT_ENVIRONMENT;
    if !is_comment && !VERBATIM_ENVIRONMENTS.contains(&name) {
        return j;
    }
    let terminator = format!("\\end{{{name}}}");
    let (body_end, resume) = match source[after_open..].find(&terminator) {
        Some(p) => (after_open + p, after_open + p + terminator.len()),
        None => {
            let (line, _) = lines.locate(start);
            out.warnings.push(format!("line {line}: environment `{name}` not closed; runs to end of file"));
            (source.len(), source.len())
        }
    };
    if is_comment {
        let (line, col) = lines.locate(start);
        out.comments.push(LexedComment {
            kind: CommentKind::Environment,
            span: start..resume,
            body: after_open..body_end,
            line,
            col,
        });
    } else {
        out.verbatim.push(after_open..body_end);
    }
    resume
}
