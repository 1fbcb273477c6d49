use std::io::Write;

use omegacat::acceptance::{run_all, Profile};

const SEED: u64 = 7;

#[test]
fn acceptance_criteria() {
    let results = run_all(Profile::Desk, SEED);
    // written past the harness capture so the lines show in every run
    let mut err = std::io::stderr();
    for c in &results {
        let _ = writeln!(err, "{}", c.line());
    }
    let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
    assert_eq!(results.len(), 9);
    assert!(failed.is_empty(), "failed: {failed:?}");
}
