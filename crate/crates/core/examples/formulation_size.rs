//! Decision-variable counts of every design problem as demands and nodes grow.

use ncopt::design::{build_instance, variable_count, ProblemKind, ProblemMode};
use ncopt::model::{bidirectional, builtin_cost239, generate_demands, Spectrum};
use ncopt::scenarios;

fn main() -> ncopt::Result<()> {
    let cost239 = builtin_cost239(8);
    println!(
        "{:<8} {:<18} {:>8} {:>8} {:>8}",
        "mode", "family", "|D|=2", "|D|=4", "|D|=8"
    );
    for kind in ProblemKind::ALL {
        let counts = [2, 4, 8]
            .iter()
            .map(|&n| {
                let ds = generate_demands(&cost239, n, 1, 1);
                build_instance(&cost239, &ds, ProblemMode::max_throughput(kind), 4).map(|i| variable_count(&i))
            })
            .collect::<ncopt::Result<Vec<_>>>()?;
        println!(
            "{:<8} {:<18} {:>8} {:>8} {:>8}",
            kind,
            kind.complexity_family(),
            counts[0],
            counts[1],
            counts[2]
        );
    }

    let ring = bidirectional(
        "ring6",
        Spectrum::Wdm,
        &[1, 2, 3, 4, 5, 6],
        &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1)],
        8,
    )?;
    println!();
    for topo in [scenarios::butterfly(8), ring, cost239] {
        let ds = generate_demands(&topo, 4, 1, 1);
        let count = |kind| build_instance(&topo, &ds, ProblemMode::max_throughput(kind), 4).map(|i| variable_count(&i));
        let (coded, plain) = (count(ProblemKind::Rnca)?, count(ProblemKind::Routing)?);
        println!(
            "{:<10} |V| {:>2}: rnca / routing = {}",
            topo.name(),
            topo.nodes().len(),
            coded / plain
        );
    }
    Ok(())
}
