//! Brute-force reference for small design instances, written against the
//! model definition rather than the library's search code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ncopt::design::{Objective, ProblemKind, Technology};
use ncopt::model::{Demand, Link, Spectrum, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// An undirected multigraph-free network: fiber `i` joins `edges[i].0` and
/// `edges[i].1` with link `2i` forward and `2i + 1` backward.
#[derive(Debug, Clone)]
pub struct Net {
    pub nodes: Vec<u32>,
    pub edges: Vec<(u32, u32, u32)>,
    pub capacity: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct Req {
    pub id: u32,
    pub src: u32,
    pub dst: u32,
    pub rate: u32,
    pub protected: bool,
}

impl Net {
    pub fn topology(&self, kind: ProblemKind) -> Topology {
        let spectrum = if kind.technology() == Technology::Elastic {
            Spectrum::Eon
        } else {
            Spectrum::Wdm
        };
        let links = self
            .edges
            .iter()
            .enumerate()
            .flat_map(|(i, &(a, b, cost))| {
                let i = i as u32;
                [
                    Link {
                        id: 2 * i,
                        src: a,
                        dst: b,
                        cost,
                        capacity: self.capacity,
                    },
                    Link {
                        id: 2 * i + 1,
                        src: b,
                        dst: a,
                        cost,
                        capacity: self.capacity,
                    },
                ]
            })
            .collect();
        Topology::new("oracle", spectrum, self.nodes.clone(), links).unwrap()
    }

    fn link_ends(&self, l: u32) -> (u32, u32) {
        let (a, b, _) = self.edges[(l / 2) as usize];
        if l.is_multiple_of(2) {
            (a, b)
        } else {
            (b, a)
        }
    }

    fn link_cost(&self, l: u32) -> u64 {
        u64::from(self.edges[(l / 2) as usize].2)
    }

    /// Every node-simple directed path from `src` to `dst`.
    pub fn simple_paths(&self, src: u32, dst: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut visited = BTreeSet::from([src]);
        self.dfs(src, dst, &mut stack, &mut visited, &mut out);
        out
    }

    fn dfs(&self, at: u32, dst: u32, stack: &mut Vec<u32>, visited: &mut BTreeSet<u32>, out: &mut Vec<Vec<u32>>) {
        if at == dst {
            out.push(stack.clone());
            return;
        }
        for l in 0..2 * self.edges.len() as u32 {
            let (s, t) = self.link_ends(l);
            if s == at && visited.insert(t) {
                stack.push(l);
                self.dfs(t, dst, stack, visited, out);
                stack.pop();
                visited.remove(&t);
            }
        }
    }

    pub fn cost(&self, links: &[u32]) -> u64 {
        links.iter().map(|&l| self.link_cost(l)).sum()
    }

    fn fibers(links: &[u32]) -> BTreeSet<u32> {
        links.iter().map(|l| l / 2).collect()
    }

    /// Routing options of a request: every fiber-disjoint pair of simple
    /// paths, the cheaper (then lexicographically smaller) one working.
    pub fn options(&self, r: &Req) -> Vec<Routing> {
        let paths = self.simple_paths(r.src, r.dst);
        if !r.protected {
            return paths
                .into_iter()
                .map(|w| Routing {
                    working: w,
                    protection: None,
                })
                .collect();
        }
        let mut out = Vec::new();
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                if !Self::fibers(&paths[i]).is_disjoint(&Self::fibers(&paths[j])) {
                    continue;
                }
                let (a, b) = (&paths[i], &paths[j]);
                let (w, p) = if (self.cost(a), a) <= (self.cost(b), b) {
                    (a, b)
                } else {
                    (b, a)
                };
                out.push(Routing {
                    working: w.clone(),
                    protection: Some(p.clone()),
                });
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Routing {
    pub working: Vec<u32>,
    pub protection: Option<Vec<u32>>,
}

/// Links carried on one channel at one width.
#[derive(Debug, Clone)]
struct Piece {
    links: Vec<u32>,
    width: u32,
}

/// The shared protection tree of two options, if they may be coded: the
/// longest common protection suffix is nonempty, the working paths share no
/// fiber with each other or with the other request's protection path.
fn coded_tree(a: &Routing, b: &Routing) -> Option<Vec<u32>> {
    let (pa, pb) = (a.protection.as_ref()?, b.protection.as_ref()?);
    let common = pa.iter().rev().zip(pb.iter().rev()).take_while(|(x, y)| x == y).count();
    if common == 0 {
        return None;
    }
    let wa = Net::fibers(&a.working);
    let wb = Net::fibers(&b.working);
    if !wa.is_disjoint(&wb) || !wa.is_disjoint(&Net::fibers(pb)) || !wb.is_disjoint(&Net::fibers(pa)) {
        return None;
    }
    let mut tree = pa.clone();
    tree.extend(&pb[..pb.len() - common]);
    Some(tree)
}

fn channels_fit(net: &Net, tech: Technology, pieces: &[Piece]) -> bool {
    let links = 2 * net.edges.len();
    match tech {
        Technology::Opaque => {
            let mut load = vec![0u32; links];
            for p in pieces {
                for &l in &p.links {
                    load[l as usize] += p.width;
                }
            }
            load.iter().all(|&x| x <= net.capacity)
        }
        _ => {
            let mut used = vec![vec![false; net.capacity as usize]; links];
            place(net, pieces, 0, &mut used)
        }
    }
}

fn place(net: &Net, pieces: &[Piece], k: usize, used: &mut [Vec<bool>]) -> bool {
    let Some(p) = pieces.get(k) else { return true };
    if p.width > net.capacity {
        return false;
    }
    for start in 0..=net.capacity - p.width {
        let units = start as usize..(start + p.width) as usize;
        let mut taken = Vec::new();
        let mut ok = true;
        'links: for &l in &p.links {
            for u in units.clone() {
                if used[l as usize][u] {
                    ok = false;
                    break 'links;
                }
                used[l as usize][u] = true;
                taken.push((l as usize, u));
            }
        }
        if ok && place(net, pieces, k + 1, used) {
            return true;
        }
        for (l, u) in taken {
            used[l][u] = false;
        }
    }
    false
}

/// Best (served rate, cost) over every routing, coding and channel choice.
/// Under min-cost every request must be served and `None` means
/// infeasible; under throughput the best rate wins, then the lower cost.
pub fn brute_force(net: &Net, reqs: &[Req], kind: ProblemKind, objective: Objective) -> Option<(u64, u64)> {
    let tech = kind.technology();
    let reqs: Vec<Req> = reqs
        .iter()
        .map(|r| Req {
            rate: if tech == Technology::Elastic { r.rate } else { 1 },
            ..*r
        })
        .collect();
    let options: Vec<Vec<Routing>> = reqs.iter().map(|r| net.options(r)).collect();
    let n = reqs.len();
    let mut best: Option<(u64, u64)> = None;
    let mut pick: Vec<Option<usize>> = vec![None; n];
    loop {
        let all_served = pick.iter().all(Option::is_some);
        if objective == Objective::MaxThroughput || all_served {
            for pairing in pairings(&reqs, &pick, kind.is_coded()) {
                let mut pieces = Vec::new();
                let mut ok = true;
                let mut paired = vec![false; n];
                for &(i, j) in &pairing {
                    let (oi, oj) = (&options[i][pick[i].unwrap()], &options[j][pick[j].unwrap()]);
                    match coded_tree(oi, oj) {
                        Some(tree) => pieces.push(Piece {
                            links: tree,
                            width: reqs[i].rate.max(reqs[j].rate),
                        }),
                        None => ok = false,
                    }
                    paired[i] = true;
                    paired[j] = true;
                }
                if !ok {
                    continue;
                }
                let mut rate = 0;
                for i in 0..n {
                    let Some(c) = pick[i] else { continue };
                    let o = &options[i][c];
                    rate += u64::from(reqs[i].rate);
                    pieces.push(Piece {
                        links: o.working.clone(),
                        width: reqs[i].rate,
                    });
                    if let (Some(p), false) = (&o.protection, paired[i]) {
                        pieces.push(Piece {
                            links: p.clone(),
                            width: reqs[i].rate,
                        });
                    }
                }
                let cost: u64 = pieces.iter().map(|p| net.cost(&p.links) * u64::from(p.width)).sum();
                let better = match best {
                    None => true,
                    Some((br, bc)) => rate > br || (rate == br && cost < bc),
                };
                if better && channels_fit(net, tech, &pieces) {
                    best = Some((rate, cost));
                }
            }
        }
        // Next combination, odometer style.
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            pick[i] = match pick[i] {
                None if !options[i].is_empty() => Some(0),
                Some(c) if c + 1 < options[i].len() => Some(c + 1),
                _ => None,
            };
            if pick[i].is_some() {
                break;
            }
            i += 1;
        }
    }
}

/// Every set of disjoint pairs of served protected requests with a common
/// destination, including the empty one.
fn pairings(reqs: &[Req], pick: &[Option<usize>], coded: bool) -> Vec<Vec<(usize, usize)>> {
    let mut out = vec![Vec::new()];
    if !coded {
        return out;
    }
    let eligible: Vec<usize> = (0..reqs.len())
        .filter(|&i| pick[i].is_some() && reqs[i].protected)
        .collect();
    fn extend(reqs: &[Req], rest: &[usize], current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some((&first, tail)) = rest.split_first() else {
            return;
        };
        // Either `first` stays uncoded...
        extend(reqs, tail, current, out);
        // ...or it pairs with a later request.
        for (k, &j) in tail.iter().enumerate() {
            if reqs[first].dst != reqs[j].dst {
                continue;
            }
            current.push((first, j));
            out.push(current.clone());
            let remaining: Vec<usize> = tail
                .iter()
                .enumerate()
                .filter(|&(x, _)| x != k)
                .map(|(_, &v)| v)
                .collect();
            extend(reqs, &remaining, current, out);
            current.pop();
        }
    }
    extend(reqs, &eligible, &mut Vec::new(), &mut out);
    out
}

/// A random connected instance: 3 to 5 nodes, at most 8 fibers of cost 1
/// to 3, capacity 1 or 2, one to three requests with rates 1 or 2 that
/// mostly end at a shared node.
pub fn random_instance(seed: u64) -> (Net, Vec<Req>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(3..=5u32);
    let nodes: Vec<u32> = (1..=n).collect();
    let mut fibers = BTreeSet::new();
    // A spanning path keeps the graph connected.
    for v in 2..=n {
        fibers.insert((rng.random_range(1..v), v));
    }
    let max_edges = (n * (n - 1) / 2).min(8) as usize;
    let target = rng.random_range(fibers.len()..=max_edges);
    while fibers.len() < target {
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        if a != b {
            fibers.insert((a.min(b), a.max(b)));
        }
    }
    let edges = fibers
        .into_iter()
        .map(|(a, b)| (a, b, rng.random_range(1..=3)))
        .collect();
    let capacity = rng.random_range(1..=2);
    let hub = rng.random_range(1..=n);
    let count = rng.random_range(1..=3);
    let reqs = (0..count)
        .map(|i| {
            let dst = if rng.random_bool(0.75) {
                hub
            } else {
                rng.random_range(1..=n)
            };
            let mut src = rng.random_range(1..=n);
            while src == dst {
                src = rng.random_range(1..=n);
            }
            Req {
                id: i + 1,
                src,
                dst,
                rate: rng.random_range(1..=2),
                protected: rng.random_bool(0.85),
            }
        })
        .collect();
    (Net { nodes, edges, capacity }, reqs)
}

pub fn demands(reqs: &[Req]) -> Vec<Demand> {
    reqs.iter()
        .map(|r| {
            let d = Demand::new(r.id, r.src, r.dst, r.rate);
            if r.protected {
                d
            } else {
                d.unprotected()
            }
        })
        .collect()
}

/// Large enough to make the candidate pool exhaustive on these graphs.
pub const FULL_POOL: usize = 10_000;
