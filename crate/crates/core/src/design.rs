//! Problem instances, solutions and their metrics for the six design
//! problems: routing, RWA and RSA, each with and without XOR coding of
//! protection signals.
//!
//! The formulation is path based. Each demand picks one candidate route
//! (working path plus protection path), each pair of demands may be coded
//! together when their chosen routes are codable, and every lightpath gets a
//! channel: a count in opaque networks, one wavelength in transparent WDM,
//! one contiguous slot interval in elastic networks. A coded pair's two
//! protection branches and its encoded segment share one channel, whose
//! width in elastic networks is the wider of the two demands.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::coding::{check_codable, CodingGroup, EncryptedFlow};
use crate::error::{Error, Result};
use crate::model::{model_stats, Demand, DemandId, LinkId, ModelStats, NodeId, Topology};
use crate::pathing::{candidate_pairs_between, k_shortest_paths, Path};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemKind {
    Routing,
    Rnca,
    Rwa,
    Rwnca,
    Rsa,
    Rsnca,
}

/// How channels are allocated along a lightpath.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technology {
    /// OEO at every node: only per-link channel counts matter.
    Opaque,
    /// One wavelength end to end.
    Transparent,
    /// One contiguous slot interval end to end.
    Elastic,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 6] = [
        ProblemKind::Routing,
        ProblemKind::Rnca,
        ProblemKind::Rwa,
        ProblemKind::Rwnca,
        ProblemKind::Rsa,
        ProblemKind::Rsnca,
    ];

    pub fn is_coded(self) -> bool {
        matches!(self, ProblemKind::Rnca | ProblemKind::Rwnca | ProblemKind::Rsnca)
    }

    pub fn technology(self) -> Technology {
        match self {
            ProblemKind::Routing | ProblemKind::Rnca => Technology::Opaque,
            ProblemKind::Rwa | ProblemKind::Rwnca => Technology::Transparent,
            ProblemKind::Rsa | ProblemKind::Rsnca => Technology::Elastic,
        }
    }

    /// The uncoded counterpart (identity for uncoded kinds).
    pub fn baseline(self) -> ProblemKind {
        match self {
            ProblemKind::Rnca => ProblemKind::Routing,
            ProblemKind::Rwnca => ProblemKind::Rwa,
            ProblemKind::Rsnca => ProblemKind::Rsa,
            other => other,
        }
    }

    /// The coded counterpart (identity for coded kinds).
    pub fn coded(self) -> ProblemKind {
        match self {
            ProblemKind::Routing => ProblemKind::Rnca,
            ProblemKind::Rwa => ProblemKind::Rwnca,
            ProblemKind::Rsa => ProblemKind::Rsnca,
            other => other,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Routing => "routing",
            ProblemKind::Rnca => "rnca",
            ProblemKind::Rwa => "rwa",
            ProblemKind::Rwnca => "rwnca",
            ProblemKind::Rsa => "rsa",
            ProblemKind::Rsnca => "rsnca",
        }
    }

    /// Asymptotic size of the formulation, as a human-readable family.
    pub fn complexity_family(self) -> &'static str {
        match self {
            ProblemKind::Routing => "O(|D||E|)",
            ProblemKind::Rnca => "O(|D||V||E|)",
            ProblemKind::Rwa => "O(|D||E||W|)",
            ProblemKind::Rwnca => "O(|D||V||E||W|)",
            ProblemKind::Rsa => "O(|D||E||S|)",
            ProblemKind::Rsnca => "O(|D||V||E||S|)",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ProblemKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    /// Serve every demand with the fewest channel-links.
    MinCost,
    /// Serve the largest total rate; ties go to the cheaper design.
    MaxThroughput,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::MinCost => "cost",
            Objective::MaxThroughput => "throughput",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "cost" | "min-cost" => Ok(Objective::MinCost),
            "throughput" | "max-throughput" => Ok(Objective::MaxThroughput),
            other => Err(format!("unknown objective `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemMode {
    pub kind: ProblemKind,
    pub objective: Objective,
}

impl ProblemMode {
    pub fn new(kind: ProblemKind, objective: Objective) -> Self {
        ProblemMode { kind, objective }
    }

    pub fn min_cost(kind: ProblemKind) -> Self {
        ProblemMode::new(kind, Objective::MinCost)
    }

    pub fn max_throughput(kind: ProblemKind) -> Self {
        ProblemMode::new(kind, Objective::MaxThroughput)
    }
}

/// One candidate routing for a demand. Unprotected demands have no
/// protection path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    pub working: Path,
    pub protection: Option<Path>,
}

impl Route {
    pub fn cost(&self) -> u64 {
        self.working.total_cost + self.protection.as_ref().map_or(0, |p| p.total_cost)
    }
}

/// A codable combination of two demands' candidate routes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingCandidate {
    /// (demand index, candidate index) of `group.demand_a`.
    pub a: (usize, usize),
    /// (demand index, candidate index) of `group.demand_b`.
    pub b: (usize, usize),
    pub group: CodingGroup,
}

/// The search space of one design problem.
#[derive(Debug, Clone)]
pub struct Instance {
    pub topology: Topology,
    pub demands: Vec<Demand>,
    pub mode: ProblemMode,
    pub k: usize,
    /// Candidate routes per demand, aligned with `demands`. Empty when the
    /// demand cannot be routed (only possible under throughput objectives).
    pub candidates: Vec<Vec<Route>>,
    pub coding: Vec<CodingCandidate>,
    pub stats: ModelStats,
    demand_index: HashMap<DemandId, usize>,
}

impl Instance {
    pub fn demand_index(&self, id: DemandId) -> Option<usize> {
        self.demand_index.get(&id).copied()
    }

    pub fn demand(&self, id: DemandId) -> Option<&Demand> {
        self.demand_index(id).map(|i| &self.demands[i])
    }

    pub fn technology(&self) -> Technology {
        self.mode.kind.technology()
    }
}

/// Builds the candidate pools for a design problem.
///
/// In WDM kinds every demand rate is normalized to one wavelength. A demand
/// without a usable route makes a min-cost instance infeasible; under a
/// throughput objective it simply stays unserved.
pub fn build_instance(topology: &Topology, demands: &[Demand], mode: ProblemMode, k: usize) -> Result<Instance> {
    assert!(k >= 1, "k must be positive");
    let mut demand_index = HashMap::new();
    let mut normalized = Vec::with_capacity(demands.len());
    for (i, d) in demands.iter().enumerate() {
        let invalid = |reason: &str| Error::InvalidDemand {
            demand: d.id,
            reason: reason.into(),
        };
        if demand_index.insert(d.id, i).is_some() {
            return Err(invalid("duplicate demand id"));
        }
        if !topology.has_node(d.src) || !topology.has_node(d.dst) {
            return Err(invalid("endpoint not in topology"));
        }
        if d.src == d.dst {
            return Err(invalid("identical endpoints"));
        }
        if d.rate_slots == 0 {
            return Err(invalid("zero rate"));
        }
        let mut d = *d;
        if mode.kind.technology() != Technology::Elastic {
            d.rate_slots = 1;
        }
        normalized.push(d);
    }

    let mut candidates = Vec::with_capacity(normalized.len());
    for d in &normalized {
        let routes = if d.protected {
            candidate_pairs_between(topology, d.src, d.dst, k).map(|pairs| {
                pairs
                    .into_iter()
                    .map(|p| Route {
                        working: p.working,
                        protection: Some(p.protection),
                    })
                    .collect::<Vec<_>>()
            })
        } else {
            k_shortest_paths(topology, d.src, d.dst, k).map(|paths| {
                paths
                    .into_iter()
                    .map(|p| Route {
                        working: p,
                        protection: None,
                    })
                    .collect()
            })
        };
        match routes {
            Ok(r) => candidates.push(r),
            Err(e @ (Error::NoDisjointPair { .. } | Error::NoPath { .. })) => {
                if mode.objective == Objective::MinCost {
                    return Err(Error::Infeasible {
                        demand: Some(d.id),
                        reason: format!("demand {} cannot be routed: {e}", d.id),
                    });
                }
                candidates.push(Vec::new());
            }
            Err(e) => return Err(e),
        }
    }

    let mut coding = Vec::new();
    if mode.kind.is_coded() {
        for i in 0..normalized.len() {
            for j in i + 1..normalized.len() {
                let (di, dj) = (&normalized[i], &normalized[j]);
                if !di.protected || !dj.protected || di.dst != dj.dst {
                    continue;
                }
                for (ci, ri) in candidates[i].iter().enumerate() {
                    for (cj, rj) in candidates[j].iter().enumerate() {
                        let (Some(pi), Some(pj)) = (pair_of(ri), pair_of(rj)) else {
                            continue;
                        };
                        if let Ok(group) = check_codable(topology, di.id, &pi, dj.id, &pj) {
                            let (a, b) = if group.demand_a == di.id {
                                ((i, ci), (j, cj))
                            } else {
                                ((j, cj), (i, ci))
                            };
                            coding.push(CodingCandidate { a, b, group });
                        }
                    }
                }
            }
        }
    }

    Ok(Instance {
        topology: topology.clone(),
        stats: model_stats(topology, &normalized, mode.kind),
        demands: normalized,
        mode,
        k,
        candidates,
        coding,
        demand_index,
    })
}

fn pair_of(route: &Route) -> Option<crate::pathing::PathPair> {
    route.protection.as_ref().map(|p| crate::pathing::PathPair {
        working: route.working.clone(),
        protection: p.clone(),
    })
}

/// Number of decision variables of the path formulation behind each kind:
/// two link-indicator families (working, protection) per demand, expanded
/// per candidate coding node in coded kinds and per channel in transparent
/// and elastic kinds.
pub fn variable_count_for(kind: ProblemKind, stats: &ModelStats) -> u64 {
    let d = stats.num_demands as u64;
    let v = stats.num_nodes as u64;
    let e = stats.num_links as u64;
    let channels = match kind.technology() {
        Technology::Opaque => 1,
        _ => u64::from(stats.capacity_per_link),
    };
    let coding = if kind.is_coded() { v } else { 1 };
    2 * d * e * coding * channels
}

pub fn variable_count(instance: &Instance) -> u64 {
    variable_count_for(instance.mode.kind, &instance.stats)
}

/// Constant factor of [`variable_count_for`] over its complexity family.
pub const VARIABLE_COUNT_FACTOR: u64 = 2;

/// A channel on a lightpath: the first wavelength or slot (absent in opaque
/// networks, where only counts matter) and the number of units used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Channel {
    pub start: Option<u32>,
    pub width: u32,
}

impl Channel {
    pub fn opaque(width: u32) -> Self {
        Channel { start: None, width }
    }

    pub fn at(start: u32, width: u32) -> Self {
        Channel {
            start: Some(start),
            width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandAssignment {
    pub demand: DemandId,
    pub working: Path,
    pub working_channel: Channel,
    pub protection: Option<Path>,
    /// For a coded demand this is the channel of the shared protection tree.
    pub protection_channel: Option<Channel>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Metrics {
    /// Channel-links consumed, weighted by link cost; an encoded segment
    /// counts once for its pair.
    pub routing_cost: u64,
    /// Same count in transparent networks; zero elsewhere.
    pub wavelength_cost: u64,
    /// Same count in elastic networks; zero elsewhere.
    pub spectrum_cost: u64,
    /// Highest wavelength or slot index used plus one; zero in opaque networks.
    pub max_channel_index: u32,
    pub served_rate: u64,
    pub served_demands: u32,
    pub transponder_count: u32,
}

impl Metrics {
    /// The primary objective value under `objective`.
    pub fn objective(&self, objective: Objective) -> u64 {
        match objective {
            Objective::MinCost => self.routing_cost,
            Objective::MaxThroughput => self.served_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSolution {
    pub assignments: Vec<DemandAssignment>,
    pub coding_groups: Vec<CodingGroup>,
    pub encrypted_flows: Vec<EncryptedFlow>,
    pub metrics: Metrics,
    pub proved_optimal: bool,
}

impl DesignSolution {
    pub fn served(&self) -> Vec<DemandId> {
        self.assignments.iter().map(|a| a.demand).collect()
    }

    pub fn assignment(&self, demand: DemandId) -> Option<&DemandAssignment> {
        self.assignments.iter().find(|a| a.demand == demand)
    }

    pub fn group_of(&self, demand: DemandId) -> Option<&CodingGroup> {
        self.coding_groups.iter().find(|g| g.involves(demand))
    }
}

/// Who a lightpath belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LightpathRole {
    Working(DemandId),
    Protection(DemandId),
    /// Both protection branches plus the encoded segment of a coded pair.
    CodedProtection(DemandId, DemandId),
}

/// A unit of channel allocation: every link in `links` carries `channel`.
/// A link listed twice consumes the channel twice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lightpath {
    pub role: LightpathRole,
    pub links: Vec<LinkId>,
    pub channel: Channel,
}

/// Expands a solution into its channel-consuming lightpaths.
pub fn lightpaths(solution: &DesignSolution) -> Vec<Lightpath> {
    let mut out = Vec::new();
    for a in &solution.assignments {
        out.push(Lightpath {
            role: LightpathRole::Working(a.demand),
            links: a.working.links.clone(),
            channel: a.working_channel,
        });
        if let (Some(p), Some(ch)) = (&a.protection, a.protection_channel) {
            if solution.group_of(a.demand).is_none() {
                out.push(Lightpath {
                    role: LightpathRole::Protection(a.demand),
                    links: p.links.clone(),
                    channel: ch,
                });
            }
        }
    }
    for g in &solution.coding_groups {
        let channel = solution
            .assignment(g.demand_a)
            .and_then(|a| a.protection_channel)
            .unwrap_or(Channel::opaque(0));
        let mut links = g.branch_a.clone();
        links.extend(&g.branch_b);
        links.extend(&g.encoded_segment.links);
        out.push(Lightpath {
            role: LightpathRole::CodedProtection(g.demand_a, g.demand_b),
            links,
            channel,
        });
    }
    out
}

/// Transponders needed at each node.
///
/// Every lightpath terminates in one transponder at each end; in opaque
/// networks every transit node regenerates it with one more. A coded pair
/// terminates both protection branches in a single transponder at the
/// coding node, which then drives the encoded segment.
pub fn transponders_by_node(instance: &Instance, solution: &DesignSolution) -> BTreeMap<NodeId, u32> {
    let topo = &instance.topology;
    let opaque = instance.technology() == Technology::Opaque;
    let mut count: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut lightpath = |nodes: &[NodeId], head: bool, tail: bool| {
        let last = nodes.len().saturating_sub(1);
        for (i, &node) in nodes.iter().enumerate() {
            let counted = if i == 0 {
                head
            } else if i == last {
                tail
            } else {
                opaque
            };
            if counted {
                *count.entry(node).or_default() += 1;
            }
        }
    };
    for a in &solution.assignments {
        lightpath(&a.working.nodes(topo), true, true);
        if let Some(p) = &a.protection {
            if solution.group_of(a.demand).is_none() {
                lightpath(&p.nodes(topo), true, true);
            }
        }
    }
    for g in &solution.coding_groups {
        for branch in [&g.branch_a, &g.branch_b] {
            if let Ok(path) = Path::from_links(topo, branch.clone()) {
                // Terminated by the coding node's shared transponder.
                lightpath(&path.nodes(topo), true, false);
            }
        }
        lightpath(&g.encoded_segment.nodes(topo), true, true);
    }
    count
}

/// Recomputes a solution's metrics from its assignments.
pub fn compute_metrics(instance: &Instance, solution: &DesignSolution) -> Metrics {
    let topo = &instance.topology;
    let mut cost = 0u64;
    let mut max_index = 0u32;
    for lp in lightpaths(solution) {
        for &l in &lp.links {
            cost += u64::from(topo.link(l).map_or(0, |l| l.cost)) * u64::from(lp.channel.width);
        }
        if let Some(start) = lp.channel.start {
            max_index = max_index.max(start + lp.channel.width);
        }
    }
    let tech = instance.technology();
    let served_rate = solution
        .assignments
        .iter()
        .filter_map(|a| instance.demand(a.demand))
        .map(|d| u64::from(d.rate_slots))
        .sum();
    Metrics {
        routing_cost: cost,
        wavelength_cost: if tech == Technology::Transparent { cost } else { 0 },
        spectrum_cost: if tech == Technology::Elastic { cost } else { 0 },
        max_channel_index: if tech == Technology::Opaque { 0 } else { max_index },
        served_rate,
        served_demands: solution.assignments.len() as u32,
        transponder_count: transponders_by_node(instance, solution).values().sum(),
    }
}

/// Recomputes the metrics and checks them against the stored ones.
pub fn objective_value(instance: &Instance, solution: &DesignSolution) -> Result<Metrics> {
    let metrics = compute_metrics(instance, solution);
    if metrics != solution.metrics {
        return Err(Error::Inconsistent(format!(
            "stored metrics {:?} disagree with recomputed {:?}",
            solution.metrics, metrics
        )));
    }
    Ok(metrics)
}

/// Pairs every served confidential demand with a carrier: the lowest-id
/// served non-confidential demand ending at the same node. The XOR is
/// applied at the confidential source. Confidential demands without such a
/// carrier get no flow.
///
/// A coding partner never serves as carrier: its protection stream would
/// cancel the key on the encoded segment and expose the plaintext there.
pub fn assign_encryption(instance: &Instance, solution: &mut DesignSolution) {
    let mut flows = Vec::new();
    for a in &solution.assignments {
        let Some(d) = instance.demand(a.demand) else { continue };
        if !d.confidential {
            continue;
        }
        let partner = solution.group_of(d.id).and_then(|g| g.partner_of(d.id));
        let carrier = solution
            .assignments
            .iter()
            .filter(|o| o.demand != d.id)
            .filter_map(|o| instance.demand(o.demand))
            .filter(|o| o.dst == d.dst && !o.confidential && partner != Some(o.id))
            .min_by_key(|o| o.id);
        if let Some(c) = carrier {
            flows.push(EncryptedFlow {
                confidential_demand: d.id,
                carrier_demand: c.id,
                shared_route: a.working.clone(),
                encoding_node: d.src,
            });
        }
    }
    solution.encrypted_flows = flows;
}
