mod common;

use common::{brute_force, demands, random_instance, FULL_POOL};
use std::collections::BTreeSet;

use ncopt::design::{build_instance, Objective, ProblemKind, ProblemMode};
use ncopt::pathing::{candidate_pairs_between, k_shortest_paths};
use ncopt::solver::{solve_exact, SolverBudget};
use ncopt::verify::validate_solution;
use ncopt::Error;

fn exact(seed: u64, kind: ProblemKind, objective: Objective) -> Option<(u64, u64)> {
    let (net, reqs) = random_instance(seed);
    let topo = net.topology(kind);
    let inst = match build_instance(&topo, &demands(&reqs), ProblemMode::new(kind, objective), FULL_POOL) {
        Ok(i) => i,
        Err(Error::Infeasible { .. }) => return None,
        Err(e) => panic!("seed {seed}: {e}"),
    };
    match solve_exact(&inst, SolverBudget::default()) {
        Ok(r) => {
            assert!(r.proved_optimal, "seed {seed} {kind}");
            let v = validate_solution(&inst, &r.solution);
            assert!(v.is_empty(), "seed {seed} {kind}: {v:?}");
            let m = r.solution.metrics;
            Some((m.served_rate, m.routing_cost))
        }
        Err(Error::Infeasible { .. }) => None,
        Err(e) => panic!("seed {seed} {kind}: {e}"),
    }
}

#[test]
fn exact_matches_brute_force_min_cost() {
    for seed in 0..100 {
        let (net, reqs) = random_instance(seed);
        for kind in ProblemKind::ALL {
            let want = brute_force(&net, &reqs, kind, Objective::MinCost);
            assert_eq!(
                exact(seed, kind, Objective::MinCost),
                want,
                "seed {seed} {kind} {net:?} {reqs:?}"
            );
        }
    }
}

#[test]
fn exact_matches_brute_force_throughput() {
    for seed in 1000..1100 {
        let (net, reqs) = random_instance(seed);
        for kind in ProblemKind::ALL {
            let want = brute_force(&net, &reqs, kind, Objective::MaxThroughput);
            assert_eq!(
                exact(seed, kind, Objective::MaxThroughput),
                want,
                "seed {seed} {kind} {net:?} {reqs:?}"
            );
        }
    }
}

#[test]
fn full_pools_match_enumeration() {
    for seed in 0..200 {
        let (net, reqs) = random_instance(seed);
        let topo = net.topology(ProblemKind::Routing);
        for r in &reqs {
            let paths = net.simple_paths(r.src, r.dst);
            let got = k_shortest_paths(&topo, r.src, r.dst, FULL_POOL).unwrap();
            assert_eq!(got.len(), paths.len(), "seed {seed}");
            assert!(got.windows(2).all(|w| w[0].total_cost <= w[1].total_cost));
            let got: BTreeSet<Vec<u32>> = got.into_iter().map(|p| p.links).collect();
            assert_eq!(got, paths.into_iter().collect::<BTreeSet<_>>(), "seed {seed}");

            let want: BTreeSet<(Vec<u32>, Vec<u32>)> = net
                .options(&common::Req { protected: true, ..*r })
                .into_iter()
                .map(|o| (o.working, o.protection.unwrap()))
                .collect();
            match candidate_pairs_between(&topo, r.src, r.dst, FULL_POOL) {
                Ok(pairs) => {
                    assert!(pairs.windows(2).all(|w| w[0].combined_cost() <= w[1].combined_cost()));
                    let got: BTreeSet<_> = pairs
                        .into_iter()
                        .map(|p| (p.working.links, p.protection.links))
                        .collect();
                    assert_eq!(got, want, "seed {seed}");
                }
                Err(_) => assert!(want.is_empty(), "seed {seed}"),
            }
        }
    }
}

#[test]
fn truncated_pools_keep_the_cheapest() {
    for seed in 0..200 {
        let (net, reqs) = random_instance(seed);
        let topo = net.topology(ProblemKind::Routing);
        for r in &reqs {
            let mut costs: Vec<u64> = net
                .options(&common::Req { protected: true, ..*r })
                .iter()
                .map(|o| net.cost(&o.working) + net.cost(o.protection.as_ref().unwrap()))
                .collect();
            costs.sort_unstable();
            for k in 1..=4 {
                if let Ok(pairs) = candidate_pairs_between(&topo, r.src, r.dst, k) {
                    let got: Vec<u64> = pairs.iter().map(|p| p.combined_cost()).collect();
                    assert_eq!(got, costs[..k.min(costs.len())], "seed {seed} k {k}");
                }
            }
        }
    }
}
