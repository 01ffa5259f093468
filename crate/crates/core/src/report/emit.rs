use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{AggregateStats, Finding, Severity};
use crate::categories;
use crate::jsonl::{JsonlError, JsonlWriter};

/// Stable report order: paper, locus, rule, then category and evidence for
/// findings that share all three.
pub fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| {
        (&a.paper_id, &a.locus, &a.rule_or_backend, &a.category, &a.evidence_redacted).cmp(&(
            &b.paper_id,
            &b.locus,
            &b.rule_or_backend,
            &b.category,
            &b.evidence_redacted,
        ))
    });
}

#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub findings: PathBuf,
    pub summary_json: PathBuf,
    pub summary_md: PathBuf,
}

/// Category rows in severity order, then in the fixed category order.
/// Categories with no findings are omitted.
pub fn render_markdown(stats: &AggregateStats, findings: &[Finding]) -> String {
    let mut out = String::from("# Findings summary\n\n");
    let _ = writeln!(out, "{} findings in {} papers.\n", stats.total, stats.papers_with_findings);
    out.push_str("| Severity | Category | Method | Count |\n|---|---|---|---:|\n");
    let mut rows: Vec<(Severity, usize, &str, String, usize)> = Vec::new();
    for (cat, count) in &stats.by_category {
        let in_cat: Vec<&Finding> = findings.iter().filter(|f| &f.category == cat).collect();
        let severity = in_cat.first().map_or(Severity::Low, |f| f.severity);
        let mut methods: Vec<&str> = in_cat.iter().map(|f| f.method.as_str()).collect();
        methods.sort_unstable();
        methods.dedup();
        let order = categories::ALL.iter().position(|(k, _)| k == cat).unwrap_or(usize::MAX);
        rows.push((severity, order, cat, methods.join(", "), *count));
    }
    rows.sort();
    for (sev, _, cat, methods, count) in rows {
        let _ = writeln!(out, "| {sev} | {} | {methods} | {count} |", categories::title(cat));
    }
    out.push_str("\n## By severity\n\n| Severity | Count |\n|---|---:|\n");
    for (s, c) in &stats.by_severity {
        let _ = writeln!(out, "| {s} | {c} |");
    }
    out.push_str("\n## By method\n\n| Method | Count |\n|---|---:|\n");
    for (m, c) in &stats.by_method {
        let _ = writeln!(out, "| {} | {c} |", m.as_str());
    }
    if !stats.top_domains.is_empty() {
        out.push_str("\n## Top URL domains in findings\n\n| Domain | Count |\n|---|---:|\n");
        for r in &stats.top_domains {
            let _ = writeln!(out, "| {} | {} |", r.key, r.count);
        }
    }
    if !stats.label_combinations.is_empty() {
        out.push_str("\n## Label combinations\n\n| Labels | Count |\n|---|---:|\n");
        for r in &stats.label_combinations {
            let _ = writeln!(out, "| {} | {} |", r.key, r.count);
        }
    }
    out
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> JsonlError + '_ {
    move |source| JsonlError::Io { path: path.to_path_buf(), source }
}

/// Writes `findings.jsonl`, `summary.json` and `summary.md` into `dir`.
/// `findings` is sorted in place first so the output is reproducible.
pub fn emit_reports(findings: &mut [Finding], stats: &AggregateStats, dir: &Path) -> Result<ReportPaths, JsonlError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    sort_findings(findings);
    let paths = ReportPaths {
        findings: dir.join("findings.jsonl"),
        summary_json: dir.join("summary.json"),
        summary_md: dir.join("summary.md"),
    };
    let mut w = JsonlWriter::create(&paths.findings)?;
    for f in findings.iter() {
        w.write(f)?;
    }
    let mut json = serde_json::to_string_pretty(stats)?;
    json.push('\n');
    std::fs::write(&paths.summary_json, json).map_err(io_err(&paths.summary_json))?;
    std::fs::write(&paths.summary_md, render_markdown(stats, findings)).map_err(io_err(&paths.summary_md))?;
    Ok(paths)
}
