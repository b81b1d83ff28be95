//! Acceptance run: one line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the report is always printed.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path as FsPath;
use std::time::{Duration, Instant};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::{brute_force, demands, random_instance, Net, Req, FULL_POOL};
use ncopt::bench::{cmd_compare, DemandSource, ExperimentConfig, TopologySource};
use ncopt::coding::{decode_lost, encrypt_route, xor_combine, BitStream};
use ncopt::design::{
    build_instance, transponders_by_node, variable_count, DesignSolution, Instance, Objective, ProblemKind,
    ProblemMode, Technology,
};
use ncopt::model::{
    bidirectional, builtin_cost239, generate_demands, render_demands, Demand, Spectrum, COST239_DEFAULT_CAPACITY,
};
use ncopt::scenarios::{self, X};
use ncopt::solver::{solve_exact, SolverBudget};
use ncopt::verify::{
    check_security, failure_sweep, random_payloads, validate_solution, Outcome, SECURITY_MIN_BITS, SWEEP_PAYLOAD_BITS,
};
use ncopt::Error;

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

/// Solutions gathered by earlier criteria for the recovery sweep.
#[derive(Default)]
struct Pool {
    solved: Vec<(String, Instance, DesignSolution)>,
}

fn solve(label: String, inst: Instance, pool: &mut Pool) -> std::result::Result<DesignSolution, String> {
    let r = solve_exact(&inst, SolverBudget::default()).map_err(|e| format!("{label}: {e}"))?;
    if !r.proved_optimal {
        return Err(format!("{label}: not proved optimal"));
    }
    let v = validate_solution(&inst, &r.solution);
    if let Some(v) = v.first() {
        return Err(format!("{label}: invalid solution: {v}"));
    }
    pool.solved.push((label, inst, r.solution.clone()));
    Ok(r.solution)
}

fn pair_net(capacity: u32) -> (Net, Vec<Req>) {
    let (topo, ds) = scenarios::protected_pair(capacity);
    let edges = topo.edges().iter().map(|e| (e.a, e.b, 1)).collect();
    let reqs = ds
        .iter()
        .map(|d| Req {
            id: d.id,
            src: d.src,
            dst: d.dst,
            rate: d.rate_slots,
            protected: true,
        })
        .collect();
    (
        Net {
            nodes: topo.nodes().to_vec(),
            edges,
            capacity,
        },
        reqs,
    )
}

fn criterion_1(pool: &mut Pool) -> Check {
    let (topo, ds) = scenarios::protected_pair(4);
    let (net, reqs) = pair_net(4);
    let mut cost = BTreeMap::new();
    let mut at_x = BTreeMap::new();
    for kind in [ProblemKind::Rnca, ProblemKind::Routing] {
        let inst = build_instance(&topo, &ds, ProblemMode::min_cost(kind), 4).map_err(|e| e.to_string())?;
        let sol = solve(format!("protected_pair {kind}"), inst.clone(), pool)?;
        let oracle = brute_force(&net, &reqs, kind, Objective::MinCost).map(|(_, c)| c);
        ensure!(
            oracle == Some(sol.metrics.routing_cost),
            "{kind}: exact {} vs oracle {oracle:?}",
            sol.metrics.routing_cost
        );
        cost.insert(kind, sol.metrics.routing_cost);
        at_x.insert(kind, transponders_by_node(&inst, &sol).get(&X).copied().unwrap_or(0));
    }
    let (coded, plain) = (cost[&ProblemKind::Rnca], cost[&ProblemKind::Routing]);
    ensure!(
        (coded, plain) == (5, 6),
        "routing cost rnca {coded} routing {plain}, expected 5 and 6"
    );
    let (tc, tp) = (at_x[&ProblemKind::Rnca], at_x[&ProblemKind::Routing]);
    ensure!(
        (tc, tp) == (1, 2),
        "transponders at the coding node {tc} vs {tp}, expected 1 vs 2"
    );

    // Same numbers through the comparison report.
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (topo_file, demand_file) = (dir.path().join("pair.topo"), dir.path().join("pair.demands"));
    std::fs::write(&topo_file, topo.render()).map_err(|e| e.to_string())?;
    std::fs::write(&demand_file, render_demands(&ds)).map_err(|e| e.to_string())?;
    let mut config = ExperimentConfig::canonical(ProblemKind::Rnca, Objective::MinCost);
    config.topology = TopologySource::File(topo_file);
    config.demands = DemandSource::File(demand_file);
    config.capacity = None;
    let report = cmd_compare(&config).map_err(|e| e.to_string())?;
    let saving = report.rows[0].saving(Objective::MinCost).ok_or("no saving in report")?;
    ensure!((saving - 100.0 / 6.0).abs() < 1e-9, "report saving {saving}");
    Ok(format!(
        "routing cost 5 vs 6 (saving {saving:.1}%), transponders at X 1 vs 2"
    ))
}

fn criterion_2(pool: &mut Pool) -> Check {
    let (topo, ds) = scenarios::protected_pair(1);
    let (net, reqs) = pair_net(1);
    let mut served = BTreeMap::new();
    for kind in [ProblemKind::Rwnca, ProblemKind::Rwa] {
        let inst = build_instance(&topo, &ds, ProblemMode::max_throughput(kind), 4).map_err(|e| e.to_string())?;
        let sol = solve(format!("protected_pair W=1 {kind}"), inst, pool)?;
        let oracle = brute_force(&net, &reqs, kind, Objective::MaxThroughput).map(|(r, _)| r);
        ensure!(
            oracle == Some(sol.metrics.served_rate),
            "{kind}: exact {} vs oracle {oracle:?}",
            sol.metrics.served_rate
        );
        served.insert(kind, sol.metrics.served_demands);
    }
    let (c, b) = (served[&ProblemKind::Rwnca], served[&ProblemKind::Rwa]);
    ensure!((c, b) == (2, 1), "served rwnca {c} rwa {b}, expected 2 and 1");
    Ok("rwnca serves 2 protected demands, rwa serves 1".into())
}

fn criterion_3(pool: &mut Pool) -> Check {
    let mut compared = 0;
    let mut feasible = 0;
    for seed in 0..200u64 {
        let (net, reqs) = random_instance(seed);
        for kind in ProblemKind::ALL {
            for objective in [Objective::MinCost, Objective::MaxThroughput] {
                let want = brute_force(&net, &reqs, kind, objective);
                let topo = net.topology(kind);
                let label = format!("seed {seed} {kind} {}", objective.as_str());
                let got = match build_instance(&topo, &demands(&reqs), ProblemMode::new(kind, objective), FULL_POOL) {
                    Err(Error::Infeasible { .. }) => None,
                    Err(e) => return Err(format!("{label}: {e}")),
                    Ok(inst) => match solve_exact(&inst, SolverBudget::default()) {
                        Err(Error::Infeasible { .. }) => None,
                        Err(e) => return Err(format!("{label}: {e}")),
                        Ok(_) => {
                            let sol = solve(label.clone(), inst, pool)?;
                            Some((sol.metrics.served_rate, sol.metrics.routing_cost))
                        }
                    },
                };
                let key = |v: Option<(u64, u64)>| match objective {
                    Objective::MinCost => v.map(|(_, c)| c),
                    Objective::MaxThroughput => v.map(|(r, _)| r),
                };
                ensure!(key(got) == key(want), "{label}: exact {got:?} vs brute force {want:?}");
                compared += 1;
                feasible += usize::from(got.is_some());
            }
        }
    }
    Ok(format!(
        "{compared} solves over 200 instances agree ({feasible} feasible)"
    ))
}

fn xor_bits(a: &BitStream, b: &BitStream) -> Vec<bool> {
    (0..a.len()).map(|i| a.bit(i) != b.bit(i)).collect()
}

fn bits(s: &BitStream) -> Vec<bool> {
    (0..s.len()).map(|i| s.bit(i)).collect()
}

/// Cuts every fiber and checks each protected demand's bits, re-deriving
/// decoded streams with a plain bitwise XOR.
fn sweep_one(label: &str, inst: &Instance, sol: &DesignSolution, seed: u64) -> std::result::Result<usize, String> {
    let payloads = random_payloads(inst, SWEEP_PAYLOAD_BITS, seed);
    let traces = failure_sweep(inst, sol, &payloads).map_err(|e| format!("{label}: {e}"))?;
    let mut rows = 0;
    for t in &traces {
        for o in &t.outcomes {
            rows += 1;
            let d = inst.demand(o.demand).ok_or("unknown demand")?;
            if !d.protected {
                continue;
            }
            let want = bits(&payloads[&d.id]);
            let got = o.recovered.as_ref().map(bits);
            ensure!(
                got.as_ref() == Some(&want),
                "{label}: demand {} wrong after cut {}",
                d.id,
                t.scenario.failed_edge
            );
            if let Outcome::RecoveredByDecode {
                surviving_working,
                encoded,
            } = &o.outcome
            {
                if !sol.encrypted_flows.iter().any(|f| f.confidential_demand == d.id) {
                    ensure!(
                        xor_bits(surviving_working, encoded) == want,
                        "{label}: decode identity fails"
                    );
                }
            }
        }
    }
    Ok(rows)
}

fn cost239_demands(kind: ProblemKind, seed: u64) -> Vec<Demand> {
    let rate_max = if kind.technology() == Technology::Elastic { 4 } else { 1 };
    generate_demands(&builtin_cost239(COST239_DEFAULT_CAPACITY), 10, seed, rate_max)
}

fn criterion_4(pool: &mut Pool) -> Check {
    let mut rows = 0;
    let micro = pool.solved.len();
    for (i, (label, inst, sol)) in pool.solved.iter().enumerate() {
        rows += sweep_one(label, inst, sol, i as u64)?;
    }
    let jobs: Vec<(ProblemKind, u64)> = [ProblemKind::Rnca, ProblemKind::Rwnca, ProblemKind::Rsnca]
        .into_iter()
        .flat_map(|k| (1..=20).map(move |s| (k, s)))
        .collect();
    let results: Vec<std::result::Result<(usize, usize), String>> = jobs
        .par_iter()
        .map(|&(kind, seed)| {
            let spectrum = if kind.technology() == Technology::Elastic {
                Spectrum::Eon
            } else {
                Spectrum::Wdm
            };
            let topo = builtin_cost239(COST239_DEFAULT_CAPACITY).with_spectrum(spectrum);
            let label = format!("cost239 {kind} seed {seed}");
            let inst = build_instance(&topo, &cost239_demands(kind, seed), ProblemMode::min_cost(kind), 4)
                .map_err(|e| format!("{label}: {e}"))?;
            match solve_exact(&inst, SolverBudget::default()) {
                Ok(r) => {
                    let v = validate_solution(&inst, &r.solution);
                    ensure!(v.is_empty(), "{label}: {:?}", v);
                    let n = sweep_one(&label, &inst, &r.solution, seed)?;
                    ensure!(n == 26 * inst.demands.len(), "{label}: {n} trace rows");
                    Ok((n, 1))
                }
                Err(Error::Infeasible { .. }) => Ok((0, 0)),
                Err(e) => Err(format!("{label}: {e}")),
            }
        })
        .collect();
    let mut designs = 0;
    for r in results {
        let (n, d) = r?;
        rows += n;
        designs += d;
    }
    Ok(format!(
        "{micro} micro solutions and {designs}/60 feasible cost239 designs, {rows} outcome rows, 0 failures"
    ))
}

fn canonical_report(
    kind: ProblemKind,
    dir: &FsPath,
) -> std::result::Result<(ncopt::bench::ComparisonReport, Vec<u8>, Vec<u8>), String> {
    let mut config = ExperimentConfig::canonical(kind, Objective::MinCost);
    let out = dir.join(format!("{kind}.csv"));
    config.out = Some(out.clone());
    let report = cmd_compare(&config).map_err(|e| e.to_string())?;
    let csv = std::fs::read(&out).map_err(|e| e.to_string())?;
    let txt = std::fs::read(out.with_extension("txt")).map_err(|e| e.to_string())?;
    Ok((report, csv, txt))
}

fn criterion_5(dir: &FsPath) -> Check {
    let mut parts = Vec::new();
    for (kind, reference) in [
        (ProblemKind::Rnca, 30),
        (ProblemKind::Rwnca, 25),
        (ProblemKind::Rsnca, 30),
    ] {
        let (report, _, _) = canonical_report(kind, dir)?;
        let mut unproved = 0;
        for r in &report.rows {
            match (&r.coded, &r.baseline) {
                (Ok(_), Ok(_)) if !r.fair() => unproved += 1,
                (Ok(_), Ok(_)) => {
                    let s = r.saving(Objective::MinCost).unwrap_or(0.0);
                    ensure!(s >= 0.0, "{kind} seed {} |D| {}: saving {s:.2}%", r.seed, r.demands);
                }
                _ => {}
            }
        }
        ensure!(unproved == 0, "{kind}: {unproved} rows without proved optima");
        let agg = report.aggregate();
        let mean = agg.codable_mean.ok_or(format!("{kind}: no rows with codable pairs"))?;
        ensure!(mean > 0.0, "{kind}: mean saving {mean:.2}% on codable rows");
        parts.push(format!(
            "{kind} {mean:.2}% over {} codable rows of {} fair (reference about {reference}%)",
            agg.codable_rows, agg.fair_rows
        ));
    }
    Ok(parts.join("; "))
}

fn criterion_6() -> Check {
    let topo = builtin_cost239(COST239_DEFAULT_CAPACITY);
    for kind in ProblemKind::ALL {
        let counts: Vec<u64> = [2usize, 4, 8]
            .iter()
            .map(|&n| {
                let ds = generate_demands(&topo, n, 1, 1);
                build_instance(&topo, &ds, ProblemMode::max_throughput(kind), 4).map(|i| variable_count(&i))
            })
            .collect::<ncopt::Result<_>>()
            .map_err(|e| e.to_string())?;
        ensure!(
            counts[1] == 2 * counts[0] && counts[2] == 2 * counts[1],
            "{kind}: counts {counts:?}"
        );
    }
    let six = bidirectional(
        "six",
        Spectrum::Wdm,
        &[1, 2, 3, 4, 5, 6],
        &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 1), (1, 4), (2, 5)],
        8,
    )
    .map_err(|e| e.to_string())?;
    let topologies = [scenarios::butterfly(8), six, topo];
    let mut ratios = Vec::new();
    for t in &topologies {
        let ds = vec![Demand::new(1, t.nodes()[0], t.nodes()[1], 1)];
        for kind in [ProblemKind::Rnca, ProblemKind::Rwnca, ProblemKind::Rsnca] {
            let count = |k| {
                build_instance(t, &ds, ProblemMode::max_throughput(k), 4)
                    .map(|i| variable_count(&i))
                    .map_err(|e| e.to_string())
            };
            let (c, b) = (count(kind)?, count(kind.baseline())?);
            let v = t.nodes().len() as u64;
            ensure!(c == v * b, "{kind} on {} nodes: coded {c} vs uncoded {b}", v);
        }
        ratios.push(t.nodes().len());
    }
    Ok(format!(
        "|D| doubling doubles every count; coded/uncoded ratio = |V| for |V| in {ratios:?}"
    ))
}

fn criterion_7() -> Check {
    let (topo, ds) = scenarios::confidential_pair(4);
    let inst = build_instance(&topo, &ds, ProblemMode::min_cost(ProblemKind::Rwa), 4).map_err(|e| e.to_string())?;
    let sol = solve_exact(&inst, SolverBudget::default())
        .map_err(|e| e.to_string())?
        .solution;
    let flow = sol.encrypted_flows.first().ok_or("no encrypted flow")?;
    let payloads = random_payloads(&inst, SECURITY_MIN_BITS, 5);
    let (plain, key) = (&payloads[&flow.confidential_demand], &payloads[&flow.carrier_demand]);
    let cipher = encrypt_route(key, plain).map_err(|e| e.to_string())?;
    let expected = xor_bits(plain, key);
    ensure!(bits(&cipher) == expected, "ciphertext differs from plaintext xor key");

    // Every link of the confidential demand's routes carries the ciphertext.
    let a = sol
        .assignment(flow.confidential_demand)
        .ok_or("confidential demand unserved")?;
    let mut taps = a.working.links.clone();
    taps.extend(a.protection.iter().flat_map(|p| p.links.clone()));
    ensure!(sol.group_of(a.demand).is_none(), "confidential demand is coded");
    let report = check_security(&inst, &sol, &payloads).map_err(|e| e.to_string())?;
    let outcome = &report.outcomes[0];
    ensure!(
        outcome.tapped_links == taps.len(),
        "{} of {} links tapped",
        outcome.tapped_links,
        taps.len()
    );

    let decoded = decode_lost(key, &cipher).map_err(|e| e.to_string())?;
    ensure!(
        bits(&decoded) == bits(plain),
        "destination decode differs from plaintext"
    );
    let ones = expected.iter().filter(|&&b| b).count() as f64 / expected.len() as f64;
    ensure!(
        expected.len() >= 100_000 && (0.49..=0.51).contains(&ones),
        "ones fraction {ones:.4}"
    );

    let (_, plain_ds) = scenarios::protected_pair(4);
    let baseline =
        build_instance(&topo, &plain_ds, ProblemMode::min_cost(ProblemKind::Rwa), 4).map_err(|e| e.to_string())?;
    let base = solve_exact(&baseline, SolverBudget::default())
        .map_err(|e| e.to_string())?
        .solution;
    ensure!(
        base.metrics.routing_cost == sol.metrics.routing_cost && outcome.extra_channel_links == 0,
        "encryption costs {} channel-links vs {}",
        sol.metrics.routing_cost,
        base.metrics.routing_cost
    );
    Ok(format!(
        "{} tapped links carry the ciphertext, decode exact, ones fraction {ones:.4} over {} bits, 0 extra channels",
        taps.len(),
        expected.len()
    ))
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..10_000 {
        let len = 1 + (rng.next_u32() % 256) as usize;
        let a = BitStream::random(len, &mut rng);
        let b = BitStream::random(len, &mut rng);
        let c = BitStream::random(len, &mut rng);
        let x = |p: &BitStream, q: &BitStream| xor_combine(p, q).expect("equal lengths");
        ensure!(x(&a, &b) == x(&b, &a), "pair {i}: not commutative");
        ensure!(x(&x(&a, &b), &c) == x(&a, &x(&b, &c)), "pair {i}: not associative");
        ensure!(x(&a, &a).is_zero(), "pair {i}: not self-inverse");
        ensure!(
            bits(&x(&a, &b)) == xor_bits(&a, &b),
            "pair {i}: differs from bitwise xor"
        );
        ensure!(
            decode_lost(&a, &x(&a, &b)).expect("equal lengths") == b,
            "pair {i}: decode identity"
        );
    }
    Ok("commutativity, associativity, self-inverse and decode identity hold on 10000 pairs".into())
}

fn criterion_9(dir: &FsPath) -> Check {
    let first = (
        std::fs::read(dir.join("rwnca.csv")),
        std::fs::read(dir.join("rwnca.txt")),
    );
    let (Ok(csv), Ok(txt)) = first else {
        return Err("no earlier report to compare against".into());
    };
    let again = dir.join("again");
    std::fs::create_dir_all(&again).map_err(|e| e.to_string())?;
    let (_, csv2, txt2) = canonical_report(ProblemKind::Rwnca, &again)?;
    ensure!(csv == csv2 && txt == txt2, "repeated comparison differs");
    Ok(format!(
        "two canonical rwnca/rwa comparisons are byte-identical ({} + {} bytes)",
        csv.len(),
        txt.len()
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut pool = Pool::default();
    let mut failed = 0;
    let mut run = |n: u32, name: &str, limit: Duration, f: &mut dyn FnMut(&mut Pool) -> Check| {
        let started = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(|| f(&mut pool)))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let took = started.elapsed();
        let (status, detail) = match result {
            Ok(d) if took <= limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; took longer than {:.0}s", limit.as_secs_f64())),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {n} {status} {name}: {detail} [{:.2}s]", took.as_secs_f64());
    };
    run(
        1,
        "protected_pair routing cost and transponders",
        Duration::from_secs(1),
        &mut criterion_1,
    );
    run(
        2,
        "protected_pair throughput at one wavelength",
        Duration::from_secs(1),
        &mut criterion_2,
    );
    run(
        3,
        "exact solver vs brute force",
        Duration::from_secs(300),
        &mut criterion_3,
    );
    run(4, "single-fiber recovery", Duration::from_secs(600), &mut criterion_4);
    run(
        5,
        "coded designs dominate their baselines",
        Duration::from_secs(1800),
        &mut |_| criterion_5(dir.path()),
    );
    run(6, "variable-count families", Duration::from_secs(60), &mut |_| {
        criterion_6()
    });
    run(
        7,
        "encryption with a carrier signal",
        Duration::from_secs(10),
        &mut |_| criterion_7(),
    );
    run(8, "xor algebra", Duration::from_secs(5), &mut |_| criterion_8());
    run(9, "deterministic reports", Duration::from_secs(1800), &mut |_| {
        criterion_9(dir.path())
    });
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
