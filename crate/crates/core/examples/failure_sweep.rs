//! Cuts every COST239 fiber under a coded transparent design and tallies how
//! each demand survives.

use std::collections::BTreeMap;

use ncopt::design::{build_instance, ProblemKind, ProblemMode};
use ncopt::model::{builtin_cost239, generate_demands};
use ncopt::solver::{solve_exact, SolverBudget};
use ncopt::verify::{failure_sweep, random_payloads, SWEEP_PAYLOAD_BITS};

fn main() -> ncopt::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let topo = builtin_cost239(8);
    let demands = generate_demands(&topo, 10, seed, 1);
    let inst = build_instance(&topo, &demands, ProblemMode::min_cost(ProblemKind::Rwnca), 4)?;
    let report = solve_exact(&inst, SolverBudget::default())?;
    let sol = &report.solution;
    println!(
        "seed {seed}: {} wavelength-links, {} coding groups, optimal {}",
        sol.metrics.wavelength_cost,
        sol.coding_groups.len(),
        report.proved_optimal
    );

    let traces = failure_sweep(&inst, sol, &random_payloads(&inst, SWEEP_PAYLOAD_BITS, seed))?;
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &traces {
        for o in &t.outcomes {
            *tally.entry(o.outcome.as_str()).or_default() += 1;
        }
    }
    println!("{} scenarios:", traces.len());
    for (outcome, n) in tally {
        println!("  {outcome:<24} {n}");
    }
    Ok(())
}
