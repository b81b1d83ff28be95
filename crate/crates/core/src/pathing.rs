//! Candidate routes: k-shortest simple paths and minimum-cost pairs of
//! fiber-disjoint paths for dedicated protection.
//!
//! Both searches enumerate simple paths under a cost threshold with a
//! depth-first walk pruned by exact distance-to-target, raising the threshold
//! until enough results are known to be complete. Results are ordered by
//! cost, then lexicographically by link-id sequence, so output never depends
//! on hash or iteration order.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Demand, EdgeId, LinkId, NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub src: NodeId,
    pub dst: NodeId,
    pub links: Vec<LinkId>,
    pub total_cost: u64,
}

impl Path {
    /// Builds a path from a link sequence, checking contiguity and simplicity.
    pub fn from_links(topo: &Topology, links: Vec<LinkId>) -> Result<Path> {
        let first = links
            .first()
            .and_then(|&l| topo.link(l))
            .ok_or_else(|| Error::Inconsistent("empty or unknown path".into()))?;
        let src = first.src;
        let mut at = src;
        let mut seen = BTreeSet::from([src]);
        let mut total_cost = 0u64;
        for &id in &links {
            let l = topo
                .link(id)
                .ok_or_else(|| Error::Inconsistent(format!("path uses unknown link {id}")))?;
            if l.src != at {
                return Err(Error::Inconsistent(format!(
                    "link {id} does not continue the path at node {at}"
                )));
            }
            if !seen.insert(l.dst) {
                return Err(Error::Inconsistent(format!("path revisits node {}", l.dst)));
            }
            total_cost += u64::from(l.cost);
            at = l.dst;
        }
        Ok(Path {
            src,
            dst: at,
            links,
            total_cost,
        })
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Node sequence from `src` to `dst`.
    pub fn nodes(&self, topo: &Topology) -> Vec<NodeId> {
        let mut nodes = vec![self.src];
        nodes.extend(self.links.iter().map(|&l| topo.link(l).expect("path link exists").dst));
        nodes
    }

    pub fn edges(&self, topo: &Topology) -> BTreeSet<EdgeId> {
        self.links
            .iter()
            .map(|&l| topo.edge_of(l).expect("path link exists"))
            .collect()
    }

    pub fn uses_edge(&self, topo: &Topology, edge: EdgeId) -> bool {
        self.links.iter().any(|&l| topo.edge_of(l) == Some(edge))
    }

    /// True when the two paths share no fiber (either direction).
    pub fn edge_disjoint(&self, other: &Path, topo: &Topology) -> bool {
        self.edges(topo).is_disjoint(&other.edges(topo))
    }

    /// Recomputes cost from the topology.
    pub fn recomputed_cost(&self, topo: &Topology) -> u64 {
        self.links
            .iter()
            .map(|&l| u64::from(topo.link(l).map_or(0, |l| l.cost)))
            .sum()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{} [", self.src, self.dst)?;
        for (i, l) in self.links.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "] cost {}", self.total_cost)
    }
}

/// A working path and a fiber-disjoint protection path for one demand.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathPair {
    pub working: Path,
    pub protection: Path,
}

impl PathPair {
    /// Orients two disjoint paths: the cheaper (then lexicographically
    /// smaller) one works, the other protects.
    pub fn oriented(a: Path, b: Path) -> PathPair {
        if path_order(&a, &b) == Ordering::Greater {
            PathPair {
                working: b,
                protection: a,
            }
        } else {
            PathPair {
                working: a,
                protection: b,
            }
        }
    }

    pub fn combined_cost(&self) -> u64 {
        self.working.total_cost + self.protection.total_cost
    }

    pub fn is_valid(&self, topo: &Topology) -> bool {
        self.working.src == self.protection.src
            && self.working.dst == self.protection.dst
            && self.working.edge_disjoint(&self.protection, topo)
    }
}

fn path_order(a: &Path, b: &Path) -> Ordering {
    a.total_cost.cmp(&b.total_cost).then_with(|| a.links.cmp(&b.links))
}

fn pair_order(a: &PathPair, b: &PathPair) -> Ordering {
    a.combined_cost()
        .cmp(&b.combined_cost())
        .then_with(|| a.working.links.cmp(&b.working.links))
        .then_with(|| a.protection.links.cmp(&b.protection.links))
}

/// Exact distance from every node to `target` over directed links.
fn distances_to(topo: &Topology, target: NodeId) -> HashMap<NodeId, u64> {
    let mut incoming: HashMap<NodeId, Vec<(NodeId, u64)>> = HashMap::new();
    for l in topo.links() {
        incoming.entry(l.dst).or_default().push((l.src, u64::from(l.cost)));
    }
    let mut dist = HashMap::from([(target, 0u64)]);
    let mut heap = BinaryHeap::from([std::cmp::Reverse((0u64, target))]);
    while let Some(std::cmp::Reverse((d, u))) = heap.pop() {
        if dist.get(&u).is_some_and(|&best| d > best) {
            continue;
        }
        for &(v, c) in incoming.get(&u).into_iter().flatten() {
            let nd = d + c;
            if dist.get(&v).is_none_or(|&best| nd < best) {
                dist.insert(v, nd);
                heap.push(std::cmp::Reverse((nd, v)));
            }
        }
    }
    dist
}

struct Enumeration {
    paths: Vec<Path>,
    /// Smallest path cost that the threshold cut off, if any.
    next_threshold: Option<u64>,
}

/// All simple `src -> dst` paths of cost at most `max_cost`.
fn paths_within(topo: &Topology, src: NodeId, dst: NodeId, max_cost: u64, dist: &HashMap<NodeId, u64>) -> Enumeration {
    struct Walk<'a> {
        topo: &'a Topology,
        dst: NodeId,
        max_cost: u64,
        dist: &'a HashMap<NodeId, u64>,
        on_path: BTreeSet<NodeId>,
        links: Vec<LinkId>,
        out: Vec<Path>,
        next: Option<u64>,
        src: NodeId,
    }
    impl Walk<'_> {
        fn go(&mut self, at: NodeId, cost: u64) {
            if at == self.dst {
                self.out.push(Path {
                    src: self.src,
                    dst: self.dst,
                    links: self.links.clone(),
                    total_cost: cost,
                });
                return;
            }
            for l in self.topo.out_links(at) {
                if self.on_path.contains(&l.dst) {
                    continue;
                }
                let Some(&rest) = self.dist.get(&l.dst) else { continue };
                let c = cost + u64::from(l.cost);
                let bound = c + rest;
                if bound > self.max_cost {
                    self.next = Some(self.next.map_or(bound, |n| n.min(bound)));
                    continue;
                }
                self.on_path.insert(l.dst);
                self.links.push(l.id);
                self.go(l.dst, c);
                self.links.pop();
                self.on_path.remove(&l.dst);
            }
        }
    }
    let mut walk = Walk {
        topo,
        dst,
        max_cost,
        dist,
        on_path: BTreeSet::from([src]),
        links: Vec::new(),
        out: Vec::new(),
        next: None,
        src,
    };
    walk.go(src, 0);
    Enumeration {
        paths: walk.out,
        next_threshold: walk.next,
    }
}

fn check_endpoints(topo: &Topology, src: NodeId, dst: NodeId) -> Result<()> {
    for n in [src, dst] {
        if !topo.has_node(n) {
            return Err(Error::InvalidTopology(format!("unknown node {n}")));
        }
    }
    if src == dst {
        return Err(Error::InvalidTopology(format!("identical endpoints {src}")));
    }
    Ok(())
}

/// Up to `k` simple paths in nondecreasing cost, ties by link-id sequence.
pub fn k_shortest_paths(topo: &Topology, src: NodeId, dst: NodeId, k: usize) -> Result<Vec<Path>> {
    check_endpoints(topo, src, dst)?;
    let dist = distances_to(topo, dst);
    let mut threshold = *dist.get(&src).ok_or(Error::NoPath { src, dst })?;
    loop {
        let mut found = paths_within(topo, src, dst, threshold, &dist);
        if found.paths.len() >= k || found.next_threshold.is_none() {
            found.paths.sort_by(path_order);
            found.paths.truncate(k);
            return Ok(found.paths);
        }
        threshold = found.next_threshold.expect("checked");
    }
}

/// Minimum combined cost of two fiber-disjoint `src -> dst` paths, via a
/// two-unit min-cost flow in which every fiber carries at most one unit.
fn min_disjoint_cost(topo: &Topology, src: NodeId, dst: NodeId) -> Option<u64> {
    // Node layout: topology nodes, then per fiber an entry and exit node.
    let index: HashMap<NodeId, usize> = topo.nodes().iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let base = topo.nodes().len();
    let n = base + 2 * topo.edges().len();
    struct Arc {
        to: usize,
        cap: i64,
        cost: i64,
    }
    let mut arcs: Vec<Arc> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut add = |from: usize, to: usize, cost: i64, arcs: &mut Vec<Arc>| {
        adj[from].push(arcs.len());
        arcs.push(Arc { to, cap: 1, cost });
        adj[to].push(arcs.len());
        arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
    };
    for e in topo.edges() {
        let entry = base + 2 * e.id as usize;
        let exit = entry + 1;
        add(entry, exit, 0, &mut arcs);
        if let Some(l) = topo.link_between(e.a, e.b) {
            add(index[&e.a], entry, 0, &mut arcs);
            add(exit, index[&e.b], i64::from(l.cost), &mut arcs);
        }
        if let Some(l) = topo.link_between(e.b, e.a) {
            add(index[&e.b], entry, 0, &mut arcs);
            add(exit, index[&e.a], i64::from(l.cost), &mut arcs);
        }
    }
    let (s, t) = (index[&src], index[&dst]);
    let mut total = 0i64;
    for _ in 0..2 {
        // Bellman-Ford on the residual graph.
        let mut dist = vec![i64::MAX; n];
        let mut via = vec![usize::MAX; n];
        dist[s] = 0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u] == i64::MAX {
                    continue;
                }
                for &a in &adj[u] {
                    let arc = &arcs[a];
                    if arc.cap > 0 && dist[u] + arc.cost < dist[arc.to] {
                        dist[arc.to] = dist[u] + arc.cost;
                        via[arc.to] = a;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[t] == i64::MAX {
            return None;
        }
        let mut v = t;
        while v != s {
            let a = via[v];
            arcs[a].cap -= 1;
            arcs[a ^ 1].cap += 1;
            v = arcs[a ^ 1].to;
        }
        total += dist[t];
    }
    Some(total as u64)
}

/// Every fiber-disjoint pair among `paths` with combined cost at most `limit`.
fn disjoint_pairs_among(topo: &Topology, paths: &[Path], limit: u64) -> Vec<PathPair> {
    let edge_sets: Vec<BTreeSet<EdgeId>> = paths.iter().map(|p| p.edges(topo)).collect();
    let mut pairs = Vec::new();
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            if paths[i].total_cost + paths[j].total_cost <= limit && edge_sets[i].is_disjoint(&edge_sets[j]) {
                pairs.push(PathPair::oriented(paths[i].clone(), paths[j].clone()));
            }
        }
    }
    pairs.sort_by(pair_order);
    pairs
}

/// Minimum-combined-cost pair of fiber-disjoint paths.
pub fn disjoint_pair(topo: &Topology, src: NodeId, dst: NodeId) -> Result<PathPair> {
    candidate_pairs_between(topo, src, dst, 1).map(|mut v| v.remove(0))
}

/// Up to `k` fiber-disjoint pairs in nondecreasing combined cost. Element 0
/// is always the [`disjoint_pair`] optimum.
pub fn candidate_pairs_between(topo: &Topology, src: NodeId, dst: NodeId, k: usize) -> Result<Vec<PathPair>> {
    check_endpoints(topo, src, dst)?;
    let dist = distances_to(topo, dst);
    let shortest = *dist.get(&src).ok_or(Error::NoPath { src, dst })?;
    let optimum = min_disjoint_cost(topo, src, dst).ok_or(Error::NoDisjointPair { src, dst })?;
    // A pair of combined cost C has both members costing at most C - shortest,
    // so enumerating paths up to `threshold` settles every pair up to
    // `threshold + shortest`.
    let mut threshold = optimum - shortest;
    loop {
        let found = paths_within(topo, src, dst, threshold, &dist);
        // With nothing cut off every pair is known, whatever its cost.
        let limit = if found.next_threshold.is_some() {
            threshold + shortest
        } else {
            u64::MAX
        };
        let mut pairs = disjoint_pairs_among(topo, &found.paths, limit);
        if pairs.len() >= k || found.next_threshold.is_none() {
            pairs.truncate(k);
            debug_assert_eq!(pairs.first().map(PathPair::combined_cost), Some(optimum));
            return Ok(pairs);
        }
        threshold = found.next_threshold.expect("checked");
    }
}

/// [`candidate_pairs_between`] for a demand's endpoints.
pub fn candidate_pairs(topo: &Topology, demand: &Demand, k: usize) -> Result<Vec<PathPair>> {
    candidate_pairs_between(topo, demand.src, demand.dst, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bidirectional, Spectrum};

    fn triangle() -> Topology {
        bidirectional("tri", Spectrum::Wdm, &[1, 2, 3], &[(1, 2), (2, 3), (1, 3)], 4).unwrap()
    }

    #[test]
    fn triangle_k_shortest() {
        let t = triangle();
        let ps = k_shortest_paths(&t, 1, 3, 2).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].nodes(&t), vec![1, 3]);
        assert_eq!(ps[0].total_cost, 1);
        assert_eq!(ps[1].nodes(&t), vec![1, 2, 3]);
        assert_eq!(ps[1].total_cost, 2);
        assert_eq!(k_shortest_paths(&t, 1, 3, 10).unwrap().len(), 2);
    }

    #[test]
    fn disconnected_pair_has_no_path() {
        let t = bidirectional("two", Spectrum::Wdm, &[1, 2, 3], &[(1, 2)], 1).unwrap();
        assert_eq!(k_shortest_paths(&t, 1, 3, 1), Err(Error::NoPath { src: 1, dst: 3 }));
    }

    #[test]
    fn path_graph_has_no_disjoint_pair() {
        let t = bidirectional("line", Spectrum::Wdm, &[1, 2, 3], &[(1, 2), (2, 3)], 1).unwrap();
        assert_eq!(disjoint_pair(&t, 1, 3), Err(Error::NoDisjointPair { src: 1, dst: 3 }));
    }

    #[test]
    fn opposite_links_count_as_one_fiber() {
        // 1-2 and 2-3 doubled only by reverse direction: still one fiber each.
        let t = triangle();
        let pair = disjoint_pair(&t, 1, 3).unwrap();
        assert!(pair.is_valid(&t));
        assert_eq!(pair.combined_cost(), 3);
    }

    #[test]
    fn from_links_rejects_gaps_and_cycles() {
        let t = triangle();
        // links: 0:1->2 1:2->1 2:2->3 3:3->2 4:1->3 5:3->1
        assert!(Path::from_links(&t, vec![0, 2]).is_ok());
        assert!(Path::from_links(&t, vec![0, 3]).is_err());
        assert!(Path::from_links(&t, vec![0, 2, 5]).is_err());
        assert!(Path::from_links(&t, vec![]).is_err());
    }
}
