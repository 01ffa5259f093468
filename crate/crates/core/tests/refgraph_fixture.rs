mod common;

use std::collections::BTreeSet;

use common::refgraph_fixture::{access_log_reads, closure_oracle, excluded_by_name, record, EXPECTED_EDGES};
use latexposed::refgraph::{analyze_submission, RefgraphConfig};

#[test]
fn project_has_twelve_files() {
    assert_eq!(record().files.len(), 12);
}

#[test]
fn edges_match_hand_reading() {
    let report = analyze_submission(&record(), &RefgraphConfig::default());
    let got: BTreeSet<(String, String)> = report.edges.iter().map(|e| (e.from.clone(), e.to.clone())).collect();
    let want: BTreeSet<(String, String)> = EXPECTED_EDGES.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    assert_eq!(got, want);
    assert_eq!(report.roots, vec!["main.tex".to_string()]);
}

#[test]
fn sets_match_closure_oracle_and_access_log() {
    let rec = record();
    let inventory: BTreeSet<String> = rec.files.iter().map(|f| f.path.clone()).collect();
    let report = analyze_submission(&rec, &RefgraphConfig::default());

    let oracle = closure_oracle(&["main.tex"], EXPECTED_EDGES);
    let logged = access_log_reads();
    assert_eq!(oracle, logged);
    assert_eq!(report.reachable, oracle);

    let unreferenced: BTreeSet<String> = inventory.difference(&oracle).cloned().collect();
    assert_eq!(report.unreferenced, unreferenced);
    let want_candidates: BTreeSet<String> = unreferenced.iter().filter(|p| !excluded_by_name(p)).cloned().collect();
    let got_candidates: BTreeSet<String> = report.candidates.iter().map(|c| c.path.clone()).collect();
    assert_eq!(got_candidates, want_candidates);
    assert_eq!(got_candidates, BTreeSet::from(["notes.txt".to_string(), "old_draft.tex".to_string()]));
}

#[test]
fn bbl_bib_eps_never_candidates() {
    let report = analyze_submission(&record(), &RefgraphConfig::default());
    for p in ["stale.bbl", "backup.bib", "figs/unused.eps"] {
        assert!(report.unreferenced.contains(p), "{p} should be unreferenced");
        assert!(report.candidates.iter().all(|c| c.path != p), "{p} must not be a candidate");
    }
}
