//! Network and demand data model.
//!
//! A [`Topology`] is a directed graph of optical nodes and links. Links
//! normally come in opposite-direction pairs sharing one fiber; failures and
//! disjointness are reasoned about on the undirected *edge* (the fiber), so
//! every topology also carries a derived list of [`UndirectedEdge`]s.
//!
//! Text formats (one record per line, `#` starts a comment):
//!
//! ```text
//! topology <name> <wdm|eon>
//! node <id>
//! link <id> <src> <dst> <cost> <capacity>
//! demand <id> <src> <dst> <rate> <protected:0|1> <confidential:0|1>
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::design::ProblemKind;
use crate::error::{Error, Result};

pub type NodeId = u32;
pub type LinkId = u32;
pub type EdgeId = u32;
pub type DemandId = u32;

/// Channel granularity of a network: wavelengths or spectrum slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spectrum {
    Wdm,
    Eon,
}

impl Spectrum {
    pub fn as_str(self) -> &'static str {
        match self {
            Spectrum::Wdm => "wdm",
            Spectrum::Eon => "eon",
        }
    }
}

impl std::str::FromStr for Spectrum {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "wdm" => Ok(Spectrum::Wdm),
            "eon" => Ok(Spectrum::Eon),
            other => Err(format!("unknown spectrum mode `{other}` (expected wdm or eon)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Link {
    pub id: LinkId,
    pub src: NodeId,
    pub dst: NodeId,
    pub cost: u32,
    /// Number of wavelengths or slots on this link.
    pub capacity: u32,
}

/// A fiber: the unordered node pair behind one or two directed links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UndirectedEdge {
    pub id: EdgeId,
    pub a: NodeId,
    pub b: NodeId,
}

#[derive(Debug, Clone)]
pub struct Topology {
    name: String,
    spectrum: Spectrum,
    nodes: Vec<NodeId>,
    links: Vec<Link>,
    link_index: HashMap<LinkId, usize>,
    pair_index: HashMap<(NodeId, NodeId), usize>,
    out_links: HashMap<NodeId, Vec<usize>>,
    edges: Vec<UndirectedEdge>,
    /// Edge index of each link, aligned with `links`.
    link_edge: Vec<EdgeId>,
}

impl PartialEq for Topology {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.spectrum == other.spectrum
            && self.nodes == other.nodes
            && self.links == other.links
    }
}

impl Eq for Topology {}

impl Topology {
    /// Builds a topology and checks its structural invariants.
    pub fn new(name: impl Into<String>, spectrum: Spectrum, nodes: Vec<NodeId>, links: Vec<Link>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidTopology(format!("bad topology name `{name}`")));
        }
        let mut seen_nodes = BTreeSet::new();
        for &n in &nodes {
            if !seen_nodes.insert(n) {
                return Err(Error::InvalidTopology(format!("duplicate node {n}")));
            }
        }
        let mut link_index = HashMap::new();
        let mut pair_index = HashMap::new();
        let mut out_links: HashMap<NodeId, Vec<usize>> = nodes.iter().map(|&n| (n, Vec::new())).collect();
        for (i, l) in links.iter().enumerate() {
            if l.src == l.dst {
                return Err(Error::InvalidTopology(format!(
                    "link {} is a self-loop on node {}",
                    l.id, l.src
                )));
            }
            for end in [l.src, l.dst] {
                if !seen_nodes.contains(&end) {
                    return Err(Error::InvalidTopology(format!(
                        "link {} references unknown node {end}",
                        l.id
                    )));
                }
            }
            if l.capacity == 0 {
                return Err(Error::InvalidTopology(format!("link {} has zero capacity", l.id)));
            }
            if link_index.insert(l.id, i).is_some() {
                return Err(Error::InvalidTopology(format!("duplicate link id {}", l.id)));
            }
            if pair_index.insert((l.src, l.dst), i).is_some() {
                return Err(Error::InvalidTopology(format!(
                    "link {} duplicates the directed pair {}->{}",
                    l.id, l.src, l.dst
                )));
            }
            out_links.get_mut(&l.src).expect("checked above").push(i);
        }
        for list in out_links.values_mut() {
            list.sort_by_key(|&i| links[i].id);
        }

        let fibers: BTreeSet<(NodeId, NodeId)> = links.iter().map(|l| (l.src.min(l.dst), l.src.max(l.dst))).collect();
        let edges: Vec<UndirectedEdge> = fibers
            .into_iter()
            .enumerate()
            .map(|(i, (a, b))| UndirectedEdge { id: i as EdgeId, a, b })
            .collect();
        let edge_lookup: HashMap<(NodeId, NodeId), EdgeId> = edges.iter().map(|e| ((e.a, e.b), e.id)).collect();
        let link_edge = links
            .iter()
            .map(|l| edge_lookup[&(l.src.min(l.dst), l.src.max(l.dst))])
            .collect();

        Ok(Topology {
            name,
            spectrum,
            nodes,
            links,
            link_index,
            pair_index,
            out_links,
            edges,
            link_edge,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spectrum(&self) -> Spectrum {
        self.spectrum
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn has_node(&self, node: NodeId) -> bool {
        self.out_links.contains_key(&node)
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.link_index.get(&id).map(|&i| &self.links[i])
    }

    /// Position of a link in [`Topology::links`].
    pub fn link_position(&self, id: LinkId) -> Option<usize> {
        self.link_index.get(&id).copied()
    }

    pub fn link_between(&self, src: NodeId, dst: NodeId) -> Option<&Link> {
        self.pair_index.get(&(src, dst)).map(|&i| &self.links[i])
    }

    /// Outgoing links of `node`, ordered by link id.
    pub fn out_links(&self, node: NodeId) -> impl Iterator<Item = &Link> + '_ {
        self.out_links
            .get(&node)
            .into_iter()
            .flat_map(move |v| v.iter().map(move |&i| &self.links[i]))
    }

    pub fn edges(&self) -> &[UndirectedEdge] {
        &self.edges
    }

    /// Undirected edge carrying the given link.
    pub fn edge_of(&self, link: LinkId) -> Option<EdgeId> {
        self.link_index.get(&link).map(|&i| self.link_edge[i])
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.link_between(a, b)
            .or_else(|| self.link_between(b, a))
            .and_then(|l| self.edge_of(l.id))
    }

    /// Undirected degree (number of distinct neighbours).
    pub fn degree(&self, node: NodeId) -> usize {
        self.edges.iter().filter(|e| e.a == node || e.b == node).count()
    }

    /// Largest per-link capacity; the `|W|` or `|S|` of the network.
    pub fn max_capacity(&self) -> u32 {
        self.links.iter().map(|l| l.capacity).max().unwrap_or(0)
    }

    /// Returns a copy with every link's capacity set to `capacity`.
    pub fn with_uniform_capacity(&self, capacity: u32) -> Result<Topology> {
        let links = self.links.iter().map(|l| Link { capacity, ..*l }).collect();
        Topology::new(self.name.clone(), self.spectrum, self.nodes.clone(), links)
    }

    pub fn with_spectrum(&self, spectrum: Spectrum) -> Topology {
        Topology {
            spectrum,
            ..self.clone()
        }
    }

    /// Undirected edges whose removal disconnects the graph.
    pub fn bridges(&self) -> Vec<EdgeId> {
        let pos: HashMap<NodeId, usize> = self.nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let n = self.nodes.len();
        let mut adj: Vec<Vec<(usize, EdgeId)>> = vec![Vec::new(); n];
        for e in &self.edges {
            adj[pos[&e.a]].push((pos[&e.b], e.id));
            adj[pos[&e.b]].push((pos[&e.a], e.id));
        }
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut timer = 0;
        let mut bridges = Vec::new();
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            // iterative DFS: (node, parent edge, next neighbour index)
            let mut stack: Vec<(usize, Option<EdgeId>, usize)> = vec![(root, None, 0)];
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            while let Some(&mut (u, parent, ref mut next)) = stack.last_mut() {
                if *next < adj[u].len() {
                    let (v, eid) = adj[u][*next];
                    *next += 1;
                    if Some(eid) == parent {
                        continue;
                    }
                    if disc[v] == usize::MAX {
                        disc[v] = timer;
                        low[v] = timer;
                        timer += 1;
                        stack.push((v, Some(eid), 0));
                    } else {
                        low[u] = low[u].min(disc[v]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[u]);
                        if low[u] > disc[p] {
                            bridges.push(parent.expect("non-root has a parent edge"));
                        }
                    }
                }
            }
        }
        bridges.sort_unstable();
        bridges
    }

    pub fn is_connected(&self) -> bool {
        let Some(&first) = self.nodes.first() else { return true };
        let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for e in &self.edges {
            adj.entry(e.a).or_default().push(e.b);
            adj.entry(e.b).or_default().push(e.a);
        }
        let mut seen = BTreeSet::from([first]);
        let mut stack = vec![first];
        while let Some(u) = stack.pop() {
            for &v in adj.get(&u).into_iter().flatten() {
                if seen.insert(v) {
                    stack.push(v);
                }
            }
        }
        seen.len() == self.nodes.len()
    }

    /// Connected and bridgeless when viewed as an undirected graph.
    pub fn is_two_edge_connected(&self) -> bool {
        self.nodes.len() >= 2 && self.is_connected() && self.bridges().is_empty()
    }

    /// Renders the topology in the line format accepted by [`load_topology`].
    pub fn render(&self) -> String {
        let mut out = format!("topology {} {}\n", self.name, self.spectrum.as_str());
        for n in &self.nodes {
            out.push_str(&format!("node {n}\n"));
        }
        for l in &self.links {
            out.push_str(&format!(
                "link {} {} {} {} {}\n",
                l.id, l.src, l.dst, l.cost, l.capacity
            ));
        }
        out
    }
}

/// A protected (and optionally confidential) traffic request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Demand {
    pub id: DemandId,
    pub src: NodeId,
    pub dst: NodeId,
    pub rate_slots: u32,
    pub protected: bool,
    pub confidential: bool,
}

impl Demand {
    pub fn new(id: DemandId, src: NodeId, dst: NodeId, rate_slots: u32) -> Self {
        Demand {
            id,
            src,
            dst,
            rate_slots,
            protected: true,
            confidential: false,
        }
    }

    pub fn confidential(mut self) -> Self {
        self.confidential = true;
        self
    }

    pub fn unprotected(mut self) -> Self {
        self.protected = false;
        self
    }
}

pub fn render_demands(demands: &[Demand]) -> String {
    demands
        .iter()
        .map(|d| {
            format!(
                "demand {} {} {} {} {} {}\n",
                d.id,
                d.src,
                d.dst,
                d.rate_slots,
                u8::from(d.protected),
                u8::from(d.confidential)
            )
        })
        .collect()
}

/// Summary sizes of an instance (`|D|`, `|V|`, `|E|`, `|W|` or `|S|`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelStats {
    pub num_demands: usize,
    pub num_nodes: usize,
    pub num_links: usize,
    pub capacity_per_link: u32,
}

pub fn model_stats(topology: &Topology, demands: &[Demand], _kind: ProblemKind) -> ModelStats {
    ModelStats {
        num_demands: demands.len(),
        num_nodes: topology.nodes().len(),
        num_links: topology.links().len(),
        capacity_per_link: topology.max_capacity(),
    }
}

fn tokens(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then(|| (i + 1, line.split_whitespace().collect()))
    })
}

pub(crate) fn field<T: std::str::FromStr>(line: usize, what: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{raw}`")))
}

pub(crate) fn flag(line: usize, what: &str, raw: &str) -> Result<bool> {
    match raw {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::parse(
            line,
            format!("invalid {what} flag `{raw}` (expected 0 or 1)"),
        )),
    }
}

pub(crate) fn expect_arity(line: usize, parts: &[&str], n: usize) -> Result<()> {
    if parts.len() != n {
        return Err(Error::parse(
            line,
            format!(
                "`{}` record expects {} fields, found {}",
                parts[0],
                n - 1,
                parts.len() - 1
            ),
        ));
    }
    Ok(())
}

/// Parses and validates a topology document.
pub fn load_topology(text: &str) -> Result<Topology> {
    let mut header: Option<(String, Spectrum)> = None;
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    for (line, parts) in tokens(text) {
        match parts[0] {
            "topology" => {
                expect_arity(line, &parts, 3)?;
                if header.is_some() {
                    return Err(Error::parse(line, "duplicate topology header"));
                }
                let spectrum = parts[2].parse().map_err(|m: String| Error::parse(line, m))?;
                header = Some((parts[1].to_string(), spectrum));
            }
            "node" => {
                expect_arity(line, &parts, 2)?;
                nodes.push(field(line, "node id", parts[1])?);
            }
            "link" => {
                expect_arity(line, &parts, 6)?;
                let capacity: u32 = field(line, "capacity", parts[5])?;
                if capacity == 0 {
                    return Err(Error::parse(line, "link capacity must be positive"));
                }
                links.push(Link {
                    id: field(line, "link id", parts[1])?,
                    src: field(line, "source node", parts[2])?,
                    dst: field(line, "destination node", parts[3])?,
                    cost: field(line, "cost", parts[4])?,
                    capacity,
                });
            }
            other => return Err(Error::parse(line, format!("unknown record `{other}`"))),
        }
    }
    let (name, spectrum) = header.ok_or_else(|| Error::parse(1, "missing topology header"))?;
    Topology::new(name, spectrum, nodes, links)
}

/// Parses a demand document. Endpoints are not checked against a topology here.
pub fn load_demands(text: &str) -> Result<Vec<Demand>> {
    let mut demands = Vec::new();
    let mut ids = BTreeSet::new();
    for (line, parts) in tokens(text) {
        if parts[0] != "demand" {
            return Err(Error::parse(line, format!("unknown record `{}`", parts[0])));
        }
        expect_arity(line, &parts, 7)?;
        let d = Demand {
            id: field(line, "demand id", parts[1])?,
            src: field(line, "source node", parts[2])?,
            dst: field(line, "destination node", parts[3])?,
            rate_slots: field(line, "rate", parts[4])?,
            protected: flag(line, "protected", parts[5])?,
            confidential: flag(line, "confidential", parts[6])?,
        };
        if d.src == d.dst {
            return Err(Error::parse(line, format!("demand {} has identical endpoints", d.id)));
        }
        if d.rate_slots == 0 {
            return Err(Error::parse(line, format!("demand {} has zero rate", d.id)));
        }
        if !ids.insert(d.id) {
            return Err(Error::parse(line, format!("duplicate demand id {}", d.id)));
        }
        demands.push(d);
    }
    Ok(demands)
}

/// Undirected COST239 fiber list, 26 edges over nodes 1..=11.
pub const COST239_EDGES: [(NodeId, NodeId); 26] = [
    (1, 4),
    (1, 7),
    (1, 10),
    (1, 11),
    (2, 3),
    (2, 8),
    (2, 9),
    (2, 10),
    (3, 4),
    (3, 6),
    (3, 7),
    (3, 9),
    (4, 6),
    (4, 8),
    (5, 7),
    (5, 9),
    (5, 10),
    (5, 11),
    (6, 7),
    (6, 8),
    (6, 9),
    (6, 10),
    (7, 8),
    (8, 11),
    (9, 11),
    (10, 11),
];

pub const COST239_DEFAULT_CAPACITY: u32 = 8;

/// Builds a topology from an undirected edge list: every edge becomes two
/// opposite links of cost 1. Link `2i` runs `a -> b` and `2i + 1` runs `b -> a`.
pub fn bidirectional(
    name: &str,
    spectrum: Spectrum,
    nodes: &[NodeId],
    edges: &[(NodeId, NodeId)],
    capacity: u32,
) -> Result<Topology> {
    let links = edges
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, b))| {
            let i = i as LinkId;
            [
                Link {
                    id: 2 * i,
                    src: a,
                    dst: b,
                    cost: 1,
                    capacity,
                },
                Link {
                    id: 2 * i + 1,
                    src: b,
                    dst: a,
                    cost: 1,
                    capacity,
                },
            ]
        })
        .collect();
    Topology::new(name, spectrum, nodes.to_vec(), links)
}

/// The built-in 11-node, 26-fiber COST239 instance with uniform capacity.
pub fn builtin_cost239(capacity: u32) -> Topology {
    let nodes: Vec<NodeId> = (1..=11).collect();
    let topo = bidirectional("cost239", Spectrum::Wdm, &nodes, &COST239_EDGES, capacity)
        .expect("static COST239 data is valid");
    debug_assert_eq!(topo.links().len(), 52);
    debug_assert!(cost239_degrees_ok(&topo));
    debug_assert!(topo.is_two_edge_connected());
    topo
}

/// Degree self-check against the published node-degree table.
pub fn cost239_degrees_ok(topo: &Topology) -> bool {
    let expected: BTreeMap<NodeId, usize> = [
        (1, 4),
        (2, 4),
        (3, 5),
        (4, 4),
        (5, 4),
        (6, 6),
        (7, 5),
        (8, 5),
        (9, 5),
        (10, 5),
        (11, 5),
    ]
    .into_iter()
    .collect();
    topo.nodes().len() == expected.len() && expected.iter().all(|(&n, &d)| topo.degree(n) == d)
}

/// Draws `count` protected demands with uniform endpoints and uniform rates
/// in `1..=rate_max`. Demand ids are `1..=count`.
pub fn generate_demands(topology: &Topology, count: usize, seed: u64, rate_max: u32) -> Vec<Demand> {
    assert!(
        topology.nodes().len() >= 2,
        "demand generation needs at least two nodes"
    );
    assert!(rate_max >= 1, "rate_max must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = topology.nodes();
    (1..=count as DemandId)
        .map(|id| {
            let src = *nodes.choose(&mut rng).expect("nonempty");
            let dst = loop {
                let d = *nodes.choose(&mut rng).expect("nonempty");
                if d != src {
                    break d;
                }
            };
            Demand::new(id, src, dst, rng.random_range(1..=rate_max))
        })
        .collect()
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}): {} nodes, {} links, {} fibers",
            self.name,
            self.spectrum.as_str(),
            self.nodes.len(),
            self.links.len(),
            self.edges.len()
        )
    }
}
