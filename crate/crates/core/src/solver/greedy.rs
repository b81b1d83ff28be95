//! Sequential routing followed by coding-pair selection via maximum-weight
//! matching.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::matching::max_weight_matching;
use super::{assign_channels, search, Model, SolveReport, SolverBudget};
use crate::design::{Instance, Objective};
use crate::error::{Error, Result};

/// Demand pair with its positive-saving coding groups, best first.
type PairOption = (usize, usize, Vec<(i64, usize)>);

struct Plan {
    choice: Vec<Option<usize>>,
    groups: Vec<usize>,
}

impl Plan {
    fn feasible(&self, model: &Model<'_>) -> bool {
        let items = model.items(&self.choice, &self.groups);
        assign_channels(&model.inst.topology, model.inst.technology(), &items).is_some()
    }

    fn coded(&self, model: &Model<'_>, i: usize) -> bool {
        self.groups
            .iter()
            .any(|&g| model.groups[g].a.0 == i || model.groups[g].b.0 == i)
    }
}

/// Heuristic design: route demands one by one on their cheapest feasible
/// candidate, weight every pair of demands by the channel-links their best
/// codable combination would save, pick pairs by maximum-weight matching and
/// apply each pair whose rerouting keeps the design feasible.
///
/// `seed = 0` keeps the canonical demand order; any other seed shuffles it.
/// Never claims optimality.
pub fn solve_greedy(instance: &Instance, seed: u64) -> Result<SolveReport> {
    let started = Instant::now();
    let model = Model::new(instance);
    let n = instance.demands.len();
    let mut order = model.order.clone();
    if seed != 0 {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let mut plan = Plan {
        choice: vec![None; n],
        groups: Vec::new(),
    };
    let mut stranded = false;
    for &i in &order {
        let placed = (0..model.uncoded[i].len()).any(|c| {
            plan.choice[i] = Some(c);
            plan.feasible(&model) || {
                plan.choice[i] = None;
                false
            }
        });
        stranded |= !placed;
    }
    let mut nodes = 0;
    if stranded && instance.mode.objective == Objective::MinCost {
        // Sequential routing blocked itself; fall back to a feasibility search.
        let first = search(instance, SolverBudget::default(), true)?;
        nodes = first.nodes_explored;
        plan.choice = instance
            .demands
            .iter()
            .zip(&instance.candidates)
            .map(|(d, routes)| {
                let a = first.solution.assignment(d.id)?;
                routes
                    .iter()
                    .position(|r| r.working == a.working && r.protection == a.protection)
            })
            .collect();
        plan.groups = first
            .solution
            .coding_groups
            .iter()
            .map(|g| {
                instance.coding.iter().position(|c| {
                    c.group == *g && plan.choice[c.a.0] == Some(c.a.1) && plan.choice[c.b.0] == Some(c.b.1)
                })
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Inconsistent("fallback group not in candidate pool".into()))?;
    }

    // Best saving per demand pair relative to the current routes.
    let current = |plan: &Plan, i: usize| plan.choice[i].map(|c| model.uncoded[i][c]);
    let mut options: Vec<PairOption> = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (Some(ca), Some(cb)) = (current(&plan, a), current(&plan, b)) else {
                continue;
            };
            let mut combos: Vec<(i64, usize)> = model
                .groups
                .iter()
                .enumerate()
                .filter(|(_, g)| (g.a.0 == a && g.b.0 == b) || (g.a.0 == b && g.b.0 == a))
                .map(|(k, g)| ((ca + cb) as i64 - g.pair_cost as i64, k))
                .filter(|&(s, _)| s > 0)
                .collect();
            combos.sort_by_key(|&(s, k)| (std::cmp::Reverse(s), k));
            if !combos.is_empty() {
                options.push((a, b, combos));
            }
        }
    }
    let edges: Vec<(usize, usize, i64)> = options.iter().map(|(a, b, c)| (*a, *b, c[0].0)).collect();
    let mut matched: Vec<&PairOption> = max_weight_matching(&edges)
        .into_iter()
        .filter_map(|(a, b)| options.iter().find(|o| o.0 == a && o.1 == b))
        .collect();
    matched.sort_by_key(|(a, b, c)| (std::cmp::Reverse(c[0].0), *a, *b));

    for (a, b, combos) in matched {
        for &(_, g) in combos {
            let info = &model.groups[g];
            let saved = (plan.choice[*a], plan.choice[*b]);
            plan.choice[info.a.0] = Some(info.a.1);
            plan.choice[info.b.0] = Some(info.b.1);
            plan.groups.push(g);
            if plan.feasible(&model) {
                break;
            }
            plan.groups.pop();
            plan.choice[*a] = saved.0;
            plan.choice[*b] = saved.1;
        }
    }

    if instance.mode.objective == Objective::MaxThroughput {
        for &i in &order {
            if plan.choice[i].is_some() || plan.coded(&model, i) {
                continue;
            }
            for c in 0..model.uncoded[i].len() {
                plan.choice[i] = Some(c);
                if plan.feasible(&model) {
                    break;
                }
                plan.choice[i] = None;
            }
            if plan.choice[i].is_some() {
                continue;
            }
            // Admit the demand by coding it with a served, uncoded partner.
            'groups: for (g, info) in model.groups.iter().enumerate() {
                let (mine, other) = if info.a.0 == i {
                    (info.a, info.b)
                } else if info.b.0 == i {
                    (info.b, info.a)
                } else {
                    continue;
                };
                if plan.choice[other.0].is_none() || plan.coded(&model, other.0) {
                    continue;
                }
                let saved = plan.choice[other.0];
                plan.choice[mine.0] = Some(mine.1);
                plan.choice[other.0] = Some(other.1);
                plan.groups.push(g);
                if plan.feasible(&model) {
                    break 'groups;
                }
                plan.groups.pop();
                plan.choice[mine.0] = None;
                plan.choice[other.0] = saved;
            }
        }
    }

    plan.groups.sort_unstable();
    let solution = model
        .realize(&plan.choice, &plan.groups, false)
        .ok_or_else(|| Error::Inconsistent("heuristic produced an unassignable plan".into()))?;
    let best_bound = match instance.mode.objective {
        Objective::MinCost => 0.0,
        Objective::MaxThroughput => model.rate.iter().map(|&r| f64::from(r)).sum(),
    };
    Ok(SolveReport {
        solution,
        proved_optimal: false,
        nodes_explored: nodes,
        wall_time: started.elapsed(),
        best_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_instance, ProblemKind, ProblemMode};
    use crate::scenarios;

    #[test]
    fn protected_pair_greedy_codes_the_pair() {
        let (t, d) = scenarios::protected_pair(4);
        let inst = build_instance(&t, &d, ProblemMode::min_cost(ProblemKind::Rnca), 4).unwrap();
        let r = solve_greedy(&inst, 0).unwrap();
        assert_eq!(r.solution.metrics.routing_cost, 5);
        assert!(!r.proved_optimal);
    }

    #[test]
    fn no_codable_pairs_means_sequential_routing() {
        let (t, d) = scenarios::protected_pair(4);
        let coded = build_instance(&t, &d, ProblemMode::min_cost(ProblemKind::Rnca), 4).unwrap();
        let plain = build_instance(&t, &d, ProblemMode::min_cost(ProblemKind::Routing), 4).unwrap();
        let r = solve_greedy(&plain, 0).unwrap();
        assert!(r.solution.coding_groups.is_empty());
        assert_eq!(r.solution.metrics.routing_cost, 6);
        // Same routes as the coded run before its matching step would change them.
        assert!(solve_greedy(&coded, 0).unwrap().solution.metrics.routing_cost <= 6);
    }

    #[test]
    fn throughput_greedy_fills_single_wavelength() {
        let (t, d) = scenarios::protected_pair(1);
        let inst = build_instance(&t, &d, ProblemMode::max_throughput(ProblemKind::Rwnca), 4).unwrap();
        let r = solve_greedy(&inst, 0).unwrap();
        assert!(r.solution.metrics.served_demands >= 1);
    }
}
