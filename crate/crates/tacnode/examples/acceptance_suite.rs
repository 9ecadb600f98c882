//! Runs selected acceptance criteria and prints every check.
//!
//! cargo run --release --example acceptance_suite -- 3 7

use tacnode::suite::{run_criterion, SuiteConfig, CRITERIA};

fn main() -> tacnode::Result<()> {
    let ids: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let ids = if ids.is_empty() { CRITERIA.iter().map(|c| c.id).collect() } else { ids };
    let cfg = SuiteConfig::default();
    for id in ids {
        let rep = run_criterion(id, &cfg)?;
        println!("{}", rep.summary());
        for c in &rep.checks {
            println!("    {}", c.line());
        }
    }
    Ok(())
}
