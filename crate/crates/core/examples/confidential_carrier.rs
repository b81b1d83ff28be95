//! A confidential demand XOR-encrypted with another demand's signal, checked
//! for taps, decoding, key balance and channel overhead.

use ncopt::design::{build_instance, ProblemKind, ProblemMode};
use ncopt::scenarios;
use ncopt::solver::{solve_exact, SolverBudget};
use ncopt::verify::{check_security, random_payloads, SECURITY_MIN_BITS};

fn main() -> ncopt::Result<()> {
    let (topo, demands) = scenarios::confidential_pair(4);
    let inst = build_instance(&topo, &demands, ProblemMode::min_cost(ProblemKind::Rwa), 4)?;
    let sol = solve_exact(&inst, SolverBudget::default())?.solution;
    for f in &sol.encrypted_flows {
        println!(
            "demand {} encrypted with demand {} at node {} along {}",
            f.confidential_demand, f.carrier_demand, f.encoding_node, f.shared_route
        );
    }
    let report = check_security(&inst, &sol, &random_payloads(&inst, SECURITY_MIN_BITS, 11))?;
    for s in &report.outcomes {
        println!(
            "taps checked on {} links, ciphertext ones {:.4}, disagreement with plaintext {:.4}, decode {}, extra channel-links {}",
            s.tapped_links,
            s.ciphertext_ones_fraction,
            s.plaintext_disagreement,
            if s.decoded_ok { "ok" } else { "wrong" },
            s.extra_channel_links
        );
    }

    // Coding the confidential demand with its only candidate carrier leaves
    // it without a key.
    let coded = build_instance(&topo, &demands, ProblemMode::min_cost(ProblemKind::Rwnca), 4)?;
    let sol = solve_exact(&coded, SolverBudget::default())?.solution;
    match check_security(&coded, &sol, &random_payloads(&coded, SECURITY_MIN_BITS, 11)) {
        Ok(_) => println!("rwnca design passed"),
        Err(e) => println!("rwnca design: {e}"),
    }
    Ok(())
}
