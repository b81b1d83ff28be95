//! Exact branch-and-bound and a matching-based heuristic over design
//! instances.
//!
//! The search fixes demands one at a time. Each demand is left unserved
//! (throughput objective only), routed uncoded, routed and left *open*
//! for coding with a later demand, or routed and coded with an earlier open
//! demand. Every (route choice, pairing) combination is reached exactly
//! once. Channel indices are fixed only at leaves by an exact assignment;
//! inner nodes check per-link loads.

mod channels;
mod greedy;
pub mod matching;

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::design::{
    assign_encryption, compute_metrics, Channel, DemandAssignment, DesignSolution, Instance, Objective,
};
use crate::error::{Error, Result};

pub(crate) use channels::{assign_channels, Item, Occupancy};
pub use greedy::solve_greedy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverBudget {
    pub max_nodes: u64,
    pub time_limit: Duration,
    /// Seed for randomized restarts of the heuristic.
    pub seed: Option<u64>,
}

impl Default for SolverBudget {
    fn default() -> Self {
        SolverBudget {
            max_nodes: 10_000_000,
            time_limit: Duration::from_secs(300),
            seed: None,
        }
    }
}

impl SolverBudget {
    pub fn nodes(max_nodes: u64) -> Self {
        SolverBudget {
            max_nodes,
            ..SolverBudget::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: DesignSolution,
    pub proved_optimal: bool,
    pub nodes_explored: u64,
    pub wall_time: Duration,
    /// Lower bound on cost (min-cost) or upper bound on served rate
    /// (throughput). Equals the objective when `proved_optimal`.
    pub best_bound: f64,
}

/// The fate of one demand in a (partial) assignment. Candidate indices refer
/// to `Instance::candidates`, partners to demand indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    Unserved,
    Uncoded(usize),
    /// Routed; its protection will be coded with a demand decided later.
    Open(usize),
    /// Routed and coded with `partner`, whose decision mirrors this one.
    Coded {
        partner: usize,
        candidate: usize,
    },
}

impl Decision {
    pub fn candidate(self) -> Option<usize> {
        match self {
            Decision::Unserved => None,
            Decision::Uncoded(c) | Decision::Open(c) => Some(c),
            Decision::Coded { candidate, .. } => Some(candidate),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment {
    pub decisions: Vec<Option<Decision>>,
}

impl PartialAssignment {
    pub fn empty(instance: &Instance) -> Self {
        PartialAssignment {
            decisions: vec![None; instance.demands.len()],
        }
    }
}

/// Precomputed costs and coding tables for one instance.
pub(crate) struct Model<'a> {
    pub inst: &'a Instance,
    pub rate: Vec<u32>,
    /// Uncoded cost per (demand, candidate).
    pub uncoded: Vec<Vec<u64>>,
    pub work_items: Vec<Vec<Item>>,
    pub prot_items: Vec<Vec<Option<Item>>>,
    pub groups: Vec<GroupInfo>,
    lookup: HashMap<(usize, usize, usize, usize), usize>,
    /// Best nonnegative coding saving of (demand, candidate) with a partner
    /// demand over all of the partner's candidates.
    best_save: Vec<Vec<Vec<u64>>>,
    can_partner: Vec<Vec<Vec<bool>>>,
    /// Branching order over demand indices.
    pub order: Vec<usize>,
}

pub(crate) struct GroupInfo {
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub item: Item,
    /// Cost of both demands when coded together.
    pub pair_cost: u64,
    /// Uncoded cost of both minus `pair_cost`; negative when padding costs
    /// more than sharing saves.
    pub saving: i64,
}

impl<'a> Model<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let topo = &inst.topology;
        let pos = |links: &[u32]| -> Vec<usize> {
            links
                .iter()
                .map(|&l| topo.link_position(l).expect("known link"))
                .collect()
        };
        let n = inst.demands.len();
        let rate: Vec<u32> = inst.demands.iter().map(|d| d.rate_slots).collect();
        let mut uncoded: Vec<Vec<u64>> = Vec::with_capacity(n);
        let mut work_items = Vec::with_capacity(n);
        let mut prot_items = Vec::with_capacity(n);
        for (i, routes) in inst.candidates.iter().enumerate() {
            uncoded.push(routes.iter().map(|r| r.cost() * u64::from(rate[i])).collect());
            work_items.push(
                routes
                    .iter()
                    .map(|r| Item {
                        links: pos(&r.working.links),
                        width: rate[i],
                    })
                    .collect(),
            );
            prot_items.push(
                routes
                    .iter()
                    .map(|r| {
                        r.protection.as_ref().map(|p| Item {
                            links: pos(&p.links),
                            width: rate[i],
                        })
                    })
                    .collect(),
            );
        }
        let link_cost: Vec<u64> = topo.links().iter().map(|l| u64::from(l.cost)).collect();
        let mut groups = Vec::with_capacity(inst.coding.len());
        let mut lookup = HashMap::new();
        let mut best_save: Vec<Vec<Vec<u64>>> = inst.candidates.iter().map(|r| vec![vec![0; n]; r.len()]).collect();
        let mut can_partner: Vec<Vec<Vec<bool>>> =
            inst.candidates.iter().map(|r| vec![vec![false; n]; r.len()]).collect();
        for (g, cand) in inst.coding.iter().enumerate() {
            let ((ia, ca), (ib, cb)) = (cand.a, cand.b);
            let width = rate[ia].max(rate[ib]);
            let mut links = pos(&cand.group.branch_a);
            links.extend(pos(&cand.group.branch_b));
            links.extend(pos(&cand.group.encoded_segment.links));
            let item_cost: u64 = links.iter().map(|&l| link_cost[l]).sum::<u64>() * u64::from(width);
            let routes = &inst.candidates;
            let pair_cost = routes[ia][ca].working.total_cost * u64::from(rate[ia])
                + routes[ib][cb].working.total_cost * u64::from(rate[ib])
                + item_cost;
            let saving = (uncoded[ia][ca] + uncoded[ib][cb]) as i64 - pair_cost as i64;
            lookup.insert((ia, ca, ib, cb), g);
            lookup.insert((ib, cb, ia, ca), g);
            let s = saving.max(0) as u64;
            best_save[ia][ca][ib] = best_save[ia][ca][ib].max(s);
            best_save[ib][cb][ia] = best_save[ib][cb][ia].max(s);
            can_partner[ia][ca][ib] = true;
            can_partner[ib][cb][ia] = true;
            groups.push(GroupInfo {
                a: cand.a,
                b: cand.b,
                item: Item { links, width },
                pair_cost,
                saving,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| {
            let cheapest = uncoded[i].iter().min().copied();
            (cheapest.is_none(), std::cmp::Reverse(cheapest.unwrap_or(0)), i)
        });
        Model {
            inst,
            rate,
            uncoded,
            work_items,
            prot_items,
            groups,
            lookup,
            best_save,
            can_partner,
            order,
        }
    }

    pub fn group(&self, i: usize, ci: usize, j: usize, cj: usize) -> Option<usize> {
        self.lookup.get(&(i, ci, j, cj)).copied()
    }

    fn exact_save(&self, i: usize, ci: usize, j: usize, cj: usize) -> u64 {
        self.group(i, ci, j, cj)
            .map_or(0, |g| self.groups[g].saving.max(0) as u64)
    }

    /// Doubled cost lower bound and served-rate upper bound of every
    /// completion of `decisions`, assuming every undecided routable demand is
    /// served. `None` when no completion exists.
    ///
    /// Each coding group's saving is split evenly between its two members,
    /// so an undecided or open demand can be credited at most half of the
    /// best saving any still-available partner offers it.
    pub fn bound(&self, decisions: &[Option<Decision>]) -> Option<(u64, u64)> {
        self.bound_live(decisions, None)
    }

    /// [`Model::bound`] restricted to what can still be placed: only the
    /// candidates and coding groups marked in `live` are considered for
    /// undecided and open demands. Under min-cost an undecided demand
    /// without a live candidate has no completion; under throughput it stays
    /// unserved.
    pub fn bound_live(&self, decisions: &[Option<Decision>], live: Option<&Live>) -> Option<(u64, u64)> {
        let n = decisions.len();
        let mut cost2: u64 = 0;
        let mut rate: u64 = 0;
        let alive = |i: usize, c: usize| live.is_none_or(|l| l.candidates[i][c]);
        let mut undecided = Vec::new();
        for i in (0..n).filter(|&i| decisions[i].is_none()) {
            if (0..self.uncoded[i].len()).any(|c| alive(i, c)) {
                undecided.push(i);
            } else if self.inst.mode.objective == Objective::MinCost {
                return None;
            }
        }
        // Best saving of (demand, candidate) with each partner demand.
        let live_table: Option<HashMap<(usize, usize, usize), u64>> = live.map(|l| {
            let mut t = HashMap::new();
            for (g, info) in self.groups.iter().enumerate() {
                if !l.groups[g] {
                    continue;
                }
                let s = info.saving.max(0) as u64;
                for (me, other) in [(info.a, info.b), (info.b, info.a)] {
                    let e = t.entry((me.0, me.1, other.0)).or_insert(0);
                    *e = (*e).max(s);
                }
            }
            t
        });
        let save_with = |i: usize, c: usize, j: usize| -> Option<u64> {
            match &live_table {
                None => self.can_partner[i][c][j].then(|| self.best_save[i][c][j]),
                Some(t) => t.get(&(i, c, j)).copied(),
            }
        };
        let mut open: Vec<(usize, usize)> = Vec::new();
        for (i, d) in decisions.iter().enumerate() {
            let Some(d) = d else { continue };
            match *d {
                Decision::Unserved => {}
                Decision::Uncoded(c) => {
                    cost2 += 2 * *self.uncoded[i].get(c)?;
                    rate += u64::from(self.rate[i]);
                }
                Decision::Coded { partner, candidate } => {
                    rate += u64::from(self.rate[i]);
                    if i < partner {
                        let Some(Decision::Coded {
                            partner: back,
                            candidate: pc,
                        }) = decisions.get(partner)?
                        else {
                            return None;
                        };
                        if *back != i {
                            return None;
                        }
                        let g = self.group(i, candidate, partner, *pc)?;
                        cost2 += 2 * self.groups[g].pair_cost;
                    }
                }
                Decision::Open(c) => {
                    rate += u64::from(self.rate[i]);
                    let best = undecided.iter().filter_map(|&j| save_with(i, c, j)).max();
                    cost2 += 2 * self.uncoded[i][c] - best?;
                    open.push((i, c));
                }
            }
        }
        for &i in &undecided {
            rate += u64::from(self.rate[i]);
            let m = (0..self.uncoded[i].len())
                .filter(|&c| alive(i, c))
                .map(|c| {
                    let mut save = 0;
                    for &j in &undecided {
                        if j != i {
                            save = save.max(save_with(i, c, j).unwrap_or(0));
                        }
                    }
                    for &(j, cj) in &open {
                        let g = self.group(i, c, j, cj);
                        if g.is_some_and(|g| live.is_none_or(|l| l.groups[g])) {
                            save = save.max(self.exact_save(i, c, j, cj));
                        }
                    }
                    2 * self.uncoded[i][c] - save
                })
                .min()
                .expect("undecided demands have live candidates");
            cost2 += m;
        }
        Some((cost2, rate))
    }

    /// Lightpaths of a complete plan, with each item's role.
    pub fn items(&self, choice: &[Option<usize>], groups: &[usize]) -> Vec<Item> {
        let mut coded = vec![false; choice.len()];
        for &g in groups {
            coded[self.groups[g].a.0] = true;
            coded[self.groups[g].b.0] = true;
        }
        let mut items = Vec::new();
        for (i, c) in choice.iter().enumerate() {
            let Some(c) = *c else { continue };
            items.push(self.work_items[i][c].clone());
            if !coded[i] {
                if let Some(p) = &self.prot_items[i][c] {
                    items.push(p.clone());
                }
            }
        }
        items.extend(groups.iter().map(|&g| self.groups[g].item.clone()));
        items
    }

    pub fn plan_cost(&self, choice: &[Option<usize>], groups: &[usize]) -> u64 {
        let mut coded = vec![false; choice.len()];
        let mut cost = 0;
        for &g in groups {
            coded[self.groups[g].a.0] = true;
            coded[self.groups[g].b.0] = true;
            cost += self.groups[g].pair_cost;
        }
        for (i, c) in choice.iter().enumerate() {
            if let (Some(c), false) = (*c, coded[i]) {
                cost += self.uncoded[i][c];
            }
        }
        cost
    }

    pub fn plan_rate(&self, choice: &[Option<usize>]) -> u64 {
        choice
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_some())
            .map(|(i, _)| u64::from(self.rate[i]))
            .sum()
    }

    /// Assigns channels to a plan and builds the solution, if feasible.
    pub fn realize(&self, choice: &[Option<usize>], groups: &[usize], proved: bool) -> Option<DesignSolution> {
        let items = self.items(choice, groups);
        let starts = assign_channels(&self.inst.topology, self.inst.technology(), &items)?;
        let channel = |k: usize| Channel {
            start: starts[k],
            width: items[k].width,
        };
        let mut group_of = vec![None; choice.len()];
        for &g in groups {
            group_of[self.groups[g].a.0] = Some(g);
            group_of[self.groups[g].b.0] = Some(g);
        }
        let group_item_base = items.len() - groups.len();
        let mut next = 0;
        let mut assignments = Vec::new();
        for (i, c) in choice.iter().enumerate() {
            let Some(c) = *c else { continue };
            let route = &self.inst.candidates[i][c];
            let working_channel = channel(next);
            next += 1;
            let protection_channel = match (group_of[i], &route.protection) {
                (Some(g), _) => {
                    let k = groups.iter().position(|&x| x == g).expect("group listed");
                    Some(channel(group_item_base + k))
                }
                (None, Some(_)) => {
                    next += 1;
                    Some(channel(next - 1))
                }
                (None, None) => None,
            };
            assignments.push(DemandAssignment {
                demand: self.inst.demands[i].id,
                working: route.working.clone(),
                working_channel,
                protection: route.protection.clone(),
                protection_channel,
            });
        }
        let mut coding_groups: Vec<_> = groups.iter().map(|&g| self.inst.coding[g].group.clone()).collect();
        coding_groups.sort_by_key(|g| (g.demand_a, g.demand_b));
        let mut solution = DesignSolution {
            assignments,
            coding_groups,
            encrypted_flows: Vec::new(),
            metrics: Default::default(),
            proved_optimal: proved,
        };
        assign_encryption(self.inst, &mut solution);
        solution.metrics = compute_metrics(self.inst, &solution);
        Some(solution)
    }
}

/// Candidates and coding groups that still fit beside the committed
/// lightpaths.
pub(crate) struct Live {
    pub candidates: Vec<Vec<bool>>,
    pub groups: Vec<bool>,
}

/// Converts complete decisions into route choices and group indices.
fn plan_of(model: &Model<'_>, decisions: &[Option<Decision>]) -> (Vec<Option<usize>>, Vec<usize>) {
    let choice: Vec<Option<usize>> = decisions.iter().map(|d| d.and_then(Decision::candidate)).collect();
    let mut groups = Vec::new();
    for (i, d) in decisions.iter().enumerate() {
        if let Some(Decision::Coded { partner, candidate }) = *d {
            if i < partner {
                let pc = choice[partner].expect("partner routed");
                groups.push(model.group(i, candidate, partner, pc).expect("validated group"));
            }
        }
    }
    groups.sort_unstable();
    (choice, groups)
}

/// Admissible bound for a partial assignment: a cost lower bound under
/// min-cost, the negated served-rate upper bound under throughput.
/// Infinite when the partial assignment has no completion.
pub fn lower_bound(instance: &Instance, partial: &PartialAssignment) -> f64 {
    let model = Model::new(instance);
    match model.bound(&partial.decisions) {
        None => f64::INFINITY,
        Some((cost2, rate)) => match instance.mode.objective {
            Objective::MinCost => cost2 as f64 / 2.0,
            Objective::MaxThroughput => -(rate as f64),
        },
    }
}

struct Search<'m, 'a> {
    model: &'m Model<'a>,
    objective: Objective,
    decisions: Vec<Option<Decision>>,
    loads: Vec<u32>,
    occupancy: Occupancy,
    best: Option<(u64, u64, DesignSolution)>,
    nodes: u64,
    node_limit: u64,
    budget: SolverBudget,
    started: Instant,
    aborted: bool,
    stop_at_first: bool,
    /// Whether coding decisions are offered.
    coding: bool,
}

impl Search<'_, '_> {
    fn better(&self, rate: u64, cost: u64) -> bool {
        match &self.best {
            None => true,
            Some((br, bc, _)) => match self.objective {
                Objective::MinCost => cost < *bc,
                Objective::MaxThroughput => rate > *br || (rate == *br && cost < *bc),
            },
        }
    }

    /// Whether a subtree with these bounds can still beat the incumbent.
    fn promising(&self, cost2: u64, rate_ub: u64) -> bool {
        match &self.best {
            None => true,
            Some((br, bc, _)) => match self.objective {
                Objective::MinCost => cost2 < 2 * bc,
                Objective::MaxThroughput => rate_ub > *br || (rate_ub == *br && cost2 < 2 * bc),
            },
        }
    }

    fn add_items(&mut self, items: &[&Item], sign: i64) -> bool {
        let topo = &self.model.inst.topology;
        let mut ok = true;
        for item in items {
            for &l in &item.links {
                let v = self.loads[l] as i64 + sign * item.width as i64;
                self.loads[l] = v as u32;
                if self.loads[l] > topo.links()[l].capacity {
                    ok = false;
                }
            }
        }
        ok
    }

    fn children(&self, i: usize) -> Vec<Vec<(usize, Decision)>> {
        let m = self.model;
        let mut out = Vec::new();
        let later_partner = |c: usize| {
            (0..self.decisions.len()).any(|j| j != i && self.decisions[j].is_none() && m.can_partner[i][c][j])
        };
        for c in 0..m.uncoded[i].len() {
            for (j, d) in self.decisions.iter().enumerate() {
                if let Some(Decision::Open(cj)) = *d {
                    if m.group(i, c, j, cj).is_some() {
                        out.push(vec![
                            (
                                i,
                                Decision::Coded {
                                    partner: j,
                                    candidate: c,
                                },
                            ),
                            (
                                j,
                                Decision::Coded {
                                    partner: i,
                                    candidate: cj,
                                },
                            ),
                        ]);
                    }
                }
            }
            if !self.coding {
                out.push(vec![(i, Decision::Uncoded(c))]);
                continue;
            }
            if m.prot_items[i][c].is_some() && later_partner(c) {
                out.push(vec![(i, Decision::Open(c))]);
            }
            out.push(vec![(i, Decision::Uncoded(c))]);
        }
        if self.objective == Objective::MaxThroughput || m.uncoded[i].is_empty() {
            out.push(vec![(i, Decision::Unserved)]);
        }
        out
    }

    /// Items whose channels become fixed by a change.
    fn committed_items(&self, change: &[(usize, Decision)]) -> Vec<&Item> {
        let m = self.model;
        let mut items = Vec::new();
        let (i, d) = change[0];
        match d {
            Decision::Unserved => {}
            Decision::Uncoded(c) => {
                items.push(&m.work_items[i][c]);
                if let Some(p) = &m.prot_items[i][c] {
                    items.push(p);
                }
            }
            Decision::Open(c) => items.push(&m.work_items[i][c]),
            Decision::Coded { partner, candidate } => {
                items.push(&m.work_items[i][candidate]);
                let Decision::Coded { candidate: pc, .. } = change[1].1 else {
                    unreachable!()
                };
                let g = m.group(i, candidate, partner, pc).expect("child built from a group");
                items.push(&m.groups[g].item);
            }
        }
        items
    }

    /// Candidates of undecided demands whose lightpaths can still be added,
    /// and coding groups whose shared protection can still be added. A
    /// candidate's working path must fit, and its protection path too
    /// unless a live group could carry it.
    fn live(&self) -> Live {
        let m = self.model;
        let topo = &m.inst.topology;
        let fits = |item: &Item| {
            item.links
                .iter()
                .all(|&l| self.loads[l] + item.width <= topo.links()[l].capacity)
                && self.occupancy.can_place(item)
        };
        let n = self.decisions.len();
        let working: Vec<Vec<bool>> = (0..n)
            .map(|i| match self.decisions[i] {
                None => m.work_items[i].iter().map(fits).collect(),
                _ => Vec::new(),
            })
            .collect();
        let member_ok = |(i, c): (usize, usize)| match self.decisions[i] {
            None => working[i][c],
            Some(Decision::Open(o)) => o == c,
            _ => false,
        };
        let groups: Vec<bool> = m
            .groups
            .iter()
            .map(|g| self.coding && member_ok(g.a) && member_ok(g.b) && fits(&g.item))
            .collect();
        let mut codable: Vec<Vec<bool>> = working.iter().map(|w| vec![false; w.len()]).collect();
        for (g, info) in m.groups.iter().enumerate() {
            if groups[g] {
                for (i, c) in [info.a, info.b] {
                    if self.decisions[i].is_none() {
                        codable[i][c] = true;
                    }
                }
            }
        }
        let candidates = (0..n)
            .map(|i| {
                (0..working[i].len())
                    .map(|c| working[i][c] && (codable[i][c] || m.prot_items[i][c].as_ref().is_none_or(fits)))
                    .collect()
            })
            .collect();
        Live { candidates, groups }
    }

    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if self.nodes >= self.node_limit
            || (self.nodes.is_multiple_of(1024) && self.started.elapsed() >= self.budget.time_limit)
        {
            self.aborted = true;
        }
        self.aborted
    }

    fn run(&mut self, depth: usize) {
        let m = self.model;
        if depth == m.order.len() {
            self.leaf();
            return;
        }
        let i = m.order[depth];
        let mut scored = Vec::new();
        for change in self.children(i) {
            let saved: Vec<_> = change.iter().map(|&(d, _)| (d, self.decisions[d])).collect();
            for &(d, dec) in &change {
                self.decisions[d] = Some(dec);
            }
            if let Some((cost2, rate)) = m.bound(&self.decisions) {
                scored.push((cost2, rate, change));
            }
            for (d, dec) in saved {
                self.decisions[d] = dec;
            }
        }
        match self.objective {
            Objective::MinCost => scored.sort_by_key(|&(c, _, _)| c),
            Objective::MaxThroughput => scored.sort_by_key(|&(c, r, _)| (std::cmp::Reverse(r), c)),
        }
        for (cost2, rate, change) in scored {
            if self.out_of_budget() || (self.stop_at_first && self.best.is_some()) {
                return;
            }
            if !self.promising(cost2, rate) {
                continue;
            }
            self.nodes += 1;
            let items: Vec<Item> = self.committed_items(&change).into_iter().cloned().collect();
            let refs: Vec<&Item> = items.iter().collect();
            let fits = self.add_items(&refs, 1);
            if fits && self.occupancy.push(&m.inst.topology, &refs) {
                let saved: Vec<_> = change.iter().map(|&(d, _)| (d, self.decisions[d])).collect();
                for &(d, dec) in &change {
                    self.decisions[d] = Some(dec);
                }
                let live = self.live();
                if let Some((cost2, rate)) = m.bound_live(&self.decisions, Some(&live)) {
                    if self.promising(cost2, rate) {
                        self.run(depth + 1);
                    }
                }
                for (d, dec) in saved {
                    self.decisions[d] = dec;
                }
                self.occupancy.pop();
            }
            self.add_items(&refs, -1);
        }
    }

    fn leaf(&mut self) {
        let m = self.model;
        if self.decisions.iter().any(|d| matches!(d, Some(Decision::Open(_)))) {
            return;
        }
        let (choice, groups) = plan_of(m, &self.decisions);
        let cost = m.plan_cost(&choice, &groups);
        let rate = m.plan_rate(&choice);
        if !self.better(rate, cost) {
            return;
        }
        if let Some(solution) = m.realize(&choice, &groups, false) {
            self.best = Some((rate, cost, solution));
        }
    }
}

pub(crate) fn search(instance: &Instance, budget: SolverBudget, stop_at_first: bool) -> Result<SolveReport> {
    let started = Instant::now();
    let model = Model::new(instance);
    let objective = instance.mode.objective;
    if objective == Objective::MinCost {
        if let Some(i) = model.uncoded.iter().position(Vec::is_empty) {
            let id = instance.demands[i].id;
            return Err(Error::Infeasible {
                demand: Some(id),
                reason: format!("demand {id} has no route"),
            });
        }
    }
    let root = model.bound(&vec![None; instance.demands.len()]);
    let mut s = Search {
        model: &model,
        objective,
        decisions: vec![None; instance.demands.len()],
        loads: vec![0; instance.topology.links().len()],
        occupancy: Occupancy::new(&instance.topology, instance.technology()),
        best: None,
        nodes: 0,
        node_limit: budget.max_nodes,
        budget,
        started,
        aborted: false,
        stop_at_first,
        coding: instance.mode.kind.is_coded(),
    };
    if root.is_some() {
        if s.coding && !model.groups.is_empty() {
            // Every uncoded design is also a coded one: find the best of
            // those first so the full search starts with a strong incumbent.
            s.coding = false;
            s.node_limit = budget.max_nodes / 4;
            s.run(0);
            s.coding = true;
            s.node_limit = budget.max_nodes;
            s.aborted = false;
        }
        if !(stop_at_first && s.best.is_some()) {
            s.run(0);
        }
    }
    let proved = !s.aborted && !(stop_at_first && s.best.is_some());
    let nodes = s.nodes;
    match s.best {
        Some((rate, cost, mut solution)) => {
            solution.proved_optimal = proved;
            let best_bound = match (proved, objective) {
                (true, Objective::MinCost) => cost as f64,
                (true, Objective::MaxThroughput) => rate as f64,
                (false, Objective::MinCost) => root.map_or(0.0, |(c, _)| c as f64 / 2.0),
                (false, Objective::MaxThroughput) => root.map_or(0.0, |(_, r)| r as f64),
            };
            Ok(SolveReport {
                solution,
                proved_optimal: proved,
                nodes_explored: nodes,
                wall_time: started.elapsed(),
                best_bound,
            })
        }
        None if s.aborted => Err(Error::BudgetExhausted),
        None => Err(Error::Infeasible {
            demand: None,
            reason: "no feasible assignment among the candidate routes".into(),
        }),
    }
}

/// Depth-first branch-and-bound. Returns a proved optimum when the budget
/// suffices, otherwise the best incumbent with `proved_optimal = false`.
pub fn solve_exact(instance: &Instance, budget: SolverBudget) -> Result<SolveReport> {
    search(instance, budget, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{build_instance, ProblemKind, ProblemMode};
    use crate::scenarios;

    fn protected_pair(kind: ProblemKind, capacity: u32, objective: Objective) -> Instance {
        let (t, d) = scenarios::protected_pair(capacity);
        build_instance(&t, &d, ProblemMode::new(kind, objective), 4).unwrap()
    }

    #[test]
    fn protected_pair_costs() {
        let r = solve_exact(
            &protected_pair(ProblemKind::Rnca, 4, Objective::MinCost),
            SolverBudget::default(),
        )
        .unwrap();
        assert!(r.proved_optimal);
        assert_eq!(r.solution.metrics.routing_cost, 5);
        assert_eq!(r.best_bound, 5.0);
        assert_eq!(r.solution.coding_groups.len(), 1);
        assert_eq!(r.solution.coding_groups[0].coding_node, scenarios::X);
        let r = solve_exact(
            &protected_pair(ProblemKind::Routing, 4, Objective::MinCost),
            SolverBudget::default(),
        )
        .unwrap();
        assert_eq!(r.solution.metrics.routing_cost, 6);
        assert!(r.solution.coding_groups.is_empty());
    }

    #[test]
    fn protected_pair_single_wavelength_throughput() {
        let rwa = protected_pair(ProblemKind::Rwa, 1, Objective::MaxThroughput);
        let r = solve_exact(&rwa, SolverBudget::default()).unwrap();
        assert_eq!(r.solution.metrics.served_demands, 1);
        let rwnca = protected_pair(ProblemKind::Rwnca, 1, Objective::MaxThroughput);
        let r = solve_exact(&rwnca, SolverBudget::default()).unwrap();
        assert_eq!(r.solution.metrics.served_demands, 2);
        assert!(r.proved_optimal);
    }

    #[test]
    fn protected_pair_min_cost_infeasible_at_one_wavelength_without_coding() {
        let rwa = protected_pair(ProblemKind::Rwa, 1, Objective::MinCost);
        assert!(matches!(
            solve_exact(&rwa, SolverBudget::default()),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn bounds_on_protected_pair() {
        let inst = protected_pair(ProblemKind::Rnca, 4, Objective::MinCost);
        assert!(lower_bound(&inst, &PartialAssignment::empty(&inst)) <= 5.0);
        let best = solve_exact(&inst, SolverBudget::default()).unwrap();
        let model = Model::new(&inst);
        // Rebuild the optimum's decisions and check the bound is exact.
        let mut decisions = vec![None; 2];
        let g = &best.solution.coding_groups[0];
        let ia = inst.demand_index(g.demand_a).unwrap();
        let ib = inst.demand_index(g.demand_b).unwrap();
        let cand = |i: usize| {
            let a = best.solution.assignment(inst.demands[i].id).unwrap();
            inst.candidates[i]
                .iter()
                .position(|r| r.working == a.working && r.protection == a.protection)
                .unwrap()
        };
        decisions[ia] = Some(Decision::Coded {
            partner: ib,
            candidate: cand(ia),
        });
        decisions[ib] = Some(Decision::Coded {
            partner: ia,
            candidate: cand(ib),
        });
        assert_eq!(model.bound(&decisions).unwrap().0, 10);
        assert_eq!(lower_bound(&inst, &PartialAssignment { decisions }), 5.0);
    }

    #[test]
    fn tiny_node_budget_reports_unproved() {
        let t = crate::model::builtin_cost239(8);
        let d = crate::model::generate_demands(&t, 6, 3, 1);
        let inst = build_instance(&t, &d, ProblemMode::min_cost(ProblemKind::Rnca), 4).unwrap();
        match solve_exact(&inst, SolverBudget::nodes(3)) {
            Ok(r) => assert!(!r.proved_optimal),
            Err(e) => assert_eq!(e, Error::BudgetExhausted),
        }
    }
}
