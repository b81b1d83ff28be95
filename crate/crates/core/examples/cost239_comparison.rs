//! Coded designs against their baselines on seeded COST239 demand sets.
//!
//! `cargo run --release --example cost239_comparison -- rwnca 5` compares
//! RWNCA with RWA over seeds 1..=5; the full canonical sweep is the CLI's
//! `compare` default.

use ncopt::bench::{cmd_compare, ExperimentConfig};
use ncopt::design::{Objective, ProblemKind};

fn main() -> ncopt::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ProblemKind = args
        .next()
        .as_deref()
        .unwrap_or("rnca")
        .parse()
        .unwrap_or(ProblemKind::Rnca);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let mut config = ExperimentConfig::canonical(kind, Objective::MinCost);
    config.seeds = (1..=seeds).collect();
    config.sizes = vec![5, 10];
    let report = cmd_compare(&config)?;
    print!("{}", report.to_text(true));
    Ok(())
}
