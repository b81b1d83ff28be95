//! Two protected demands into one destination, with and without coding of
//! their protection signals, then a cut of A's working fiber.

use ncopt::design::{build_instance, transponders_by_node, ProblemKind, ProblemMode};
use ncopt::scenarios::{self, A, C, X};
use ncopt::solver::{solve_exact, SolverBudget};
use ncopt::verify::{random_payloads, simulate_failure, FailureScenario, Outcome};

fn main() -> ncopt::Result<()> {
    let (topo, demands) = scenarios::protected_pair(4);
    for kind in [ProblemKind::Routing, ProblemKind::Rnca] {
        let inst = build_instance(&topo, &demands, ProblemMode::min_cost(kind), 4)?;
        let sol = solve_exact(&inst, SolverBudget::default())?.solution;
        let at_x = transponders_by_node(&inst, &sol).get(&X).copied().unwrap_or(0);
        println!(
            "{kind}: routing cost {}, transponders at X {at_x}",
            sol.metrics.routing_cost
        );
        for a in &sol.assignments {
            let prot = a.protection.as_ref().map(|p| p.to_string()).unwrap_or_default();
            println!("  demand {}: working {} protection {prot}", a.demand, a.working);
        }
        for g in &sol.coding_groups {
            println!(
                "  demands {} and {} coded at node {} onto {}",
                g.demand_a, g.demand_b, g.coding_node, g.encoded_segment
            );
        }

        if kind.is_coded() {
            let payloads = random_payloads(&inst, 8, 3);
            let cut = topo.edge_between(A, C).expect("A-C fiber");
            let trace = simulate_failure(&inst, &sol, FailureScenario { failed_edge: cut }, &payloads)?;
            for o in &trace.outcomes {
                print!("  cut A-C, demand {}: {}", o.demand, o.outcome.as_str());
                if let Outcome::RecoveredByDecode {
                    surviving_working,
                    encoded,
                } = &o.outcome
                {
                    print!(" ({surviving_working} xor {encoded})");
                }
                if let Some(bits) = &o.recovered {
                    print!(" -> {bits}");
                }
                println!();
            }
        }
    }
    Ok(())
}
