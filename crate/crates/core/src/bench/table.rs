use std::fmt::Write as _;

use super::EvalReport;
use crate::labels::CategoryLabel;

const COLUMNS: [CategoryLabel; 5] =
    [CategoryLabel::Cred, CategoryLabel::Pii, CategoryLabel::Netid, CategoryLabel::Peer, CategoryLabel::Conf];

/// Aligned leaderboard: EMA, ONE, TP/FP/FN per label, price per million
/// input tokens and the cost of the whole run.
pub fn render_table(reports: &[EvalReport]) -> String {
    let mut header = vec!["Backend".to_string(), "EMA".into(), "ONE".into()];
    header.extend(COLUMNS.iter().map(|l| format!("{l} TP/FP/FN")));
    header.extend(["$/M in".to_string(), "ALL $".into()]);
    let mut rows = vec![header];
    for r in reports {
        let mut row = vec![r.backend.clone(), format!("{:.3}", r.ema), format!("{:.3}", r.one)];
        for l in COLUMNS {
            let c = r.per_category.get(&l).copied().unwrap_or_default();
            row.push(format!("{}/{}/{}", c.tp, c.fp, c.fn_));
        }
        row.push(r.price_per_m_input.to_string());
        row.push(r.est_cost_all.to_string());
        rows.push(row);
    }
    let widths: Vec<usize> =
        (0..rows[0].len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (n, row) in rows.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        if n == 0 {
            let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
        }
    }
    out
}
