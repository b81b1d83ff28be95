//! The matching-based heuristic against branch and bound on COST239.

use ncopt::design::{build_instance, ProblemKind, ProblemMode};
use ncopt::model::{builtin_cost239, generate_demands};
use ncopt::solver::{solve_exact, solve_greedy, SolverBudget};

fn main() -> ncopt::Result<()> {
    let topo = builtin_cost239(8);
    println!(
        "{:>4} {:>6} {:>6} {:>9} {:>9}",
        "seed", "exact", "greedy", "exact_s", "greedy_s"
    );
    for seed in 1..=10 {
        let demands = generate_demands(&topo, 10, seed, 1);
        let inst = build_instance(&topo, &demands, ProblemMode::min_cost(ProblemKind::Rnca), 4)?;
        let exact = solve_exact(&inst, SolverBudget::default())?;
        let greedy = solve_greedy(&inst, 0)?;
        println!(
            "{seed:>4} {:>6} {:>6} {:>9.3} {:>9.3}",
            exact.solution.metrics.routing_cost,
            greedy.solution.metrics.routing_cost,
            exact.wall_time.as_secs_f64(),
            greedy.wall_time.as_secs_f64()
        );
    }
    Ok(())
}
