//! Runs every acceptance criterion against the pinned presets.
//!
//! The invasion run is shared by criteria 8, 9, 10 and 13, so everything
//! runs in one test and prints one line per criterion before asserting.

use frontlab_core::harness::{check_artifact_hashes, select, verify, Presets, CRITERIA};

#[test]
fn acceptance_criteria() {
    let presets = Presets::builtin().expect("pinned presets parse");
    let ids = select(None).unwrap();
    assert_eq!(ids.len(), CRITERIA.len());
    let dir = tempfile::tempdir().unwrap();
    let verdict = verify(&presets, &ids, Some(dir.path())).expect("suite runs");

    for r in &verdict.criteria {
        let value = r
            .value
            .map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        println!(
            "criterion {:>2} {:<28} {} value={} tolerance={}{}",
            r.id,
            r.name,
            if r.pass { "PASS" } else { "FAIL" },
            value,
            r.tolerance,
            r.error
                .as_deref()
                .map(|e| format!(" error={e}"))
                .unwrap_or_default()
        );
    }
    eprint!("{}", verdict.table());

    for name in [
        "verdict.json",
        "front_position.csv",
        "profile_vs_closed_form.csv",
        "lambda0_vs_R.csv",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    check_artifact_hashes(dir.path()).unwrap();

    let failed: Vec<String> = verdict
        .criteria
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} ({}): {}", r.id, r.name, r.details))
        .collect();
    assert!(failed.is_empty(), "failed criteria:\n{}", failed.join("\n"));
}
