//! The thirteen acceptance criteria on the default configuration, one line each.

use paqft_core::config::RunConfig;
use paqft_core::suite::{run_all, CRITERIA};

#[test]
fn acceptance() {
    let cfg = RunConfig::default();
    let reports = run_all(&cfg);
    assert_eq!(reports.len(), CRITERIA.len());
    for r in &reports {
        println!("{}", r.line());
        for c in r.checks.iter().filter(|c| !c.passed) {
            println!("       {}: {}", c.name, c.value);
        }
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!("{} of {} criteria passed", reports.len() - failed.len(), reports.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
