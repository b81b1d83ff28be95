//! Exact channel assignment for a fixed set of lightpaths.

use std::collections::{BTreeMap, BTreeSet};

use crate::design::Technology;
use crate::model::Topology;

/// A lightpath to place: link positions (into `Topology::links`) and width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Item {
    pub links: Vec<usize>,
    pub width: u32,
}

/// Per-link channel loads; `None` if some link is over capacity.
pub(crate) fn loads(topo: &Topology, items: &[Item]) -> Option<Vec<u32>> {
    let mut load = vec![0u32; topo.links().len()];
    for item in items {
        for &l in &item.links {
            load[l] += item.width;
            if load[l] > topo.links()[l].capacity {
                return None;
            }
        }
    }
    Some(load)
}

/// Finds a start channel for every item, or proves none exists.
///
/// Opaque networks only need per-link counts. Otherwise every item needs a
/// single interval `[start, start + width)` free on all its links. First-fit
/// in order of decreasing width is tried first and returned when it
/// succeeds. Failing that, each group of items connected through shared
/// links is searched exactly, most constrained item first, with symmetric
/// placements (mirrored spectrum, interchangeable unused wavelengths)
/// skipped.
pub(crate) fn assign_channels(topo: &Topology, tech: Technology, items: &[Item]) -> Option<Vec<Option<u32>>> {
    loads(topo, items)?;
    if tech == Technology::Opaque {
        return Some(vec![None; items.len()]);
    }
    let caps: Vec<u32> = topo.links().iter().map(|l| l.capacity).collect();
    let mut limits = Vec::with_capacity(items.len());
    for item in items {
        let mut sorted = item.links.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            // one channel cannot be used twice on the same link
            return None;
        }
        let min_cap = item.links.iter().map(|&l| caps[l]).min().unwrap_or(0);
        if min_cap < item.width {
            return None;
        }
        limits.push(min_cap - item.width);
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by_key(|&i| {
        (
            std::cmp::Reverse(items[i].width),
            std::cmp::Reverse(items[i].links.len()),
            i,
        )
    });

    let mut grid = Grid {
        items,
        limits: &limits,
        used: caps.iter().map(|&c| vec![false; c as usize]).collect(),
    };
    let mut starts = vec![None; items.len()];
    let greedy = order.iter().all(|&i| match (0..=limits[i]).find(|&s| grid.fits(i, s)) {
        Some(s) => {
            grid.set(i, s, true);
            starts[i] = Some(s);
            true
        }
        None => false,
    });
    if greedy {
        return Some(starts);
    }
    grid.used.iter_mut().for_each(|u| u.fill(false));
    starts.fill(None);
    for component in components(topo, items) {
        let link_caps: BTreeSet<u32> = component
            .iter()
            .flat_map(|&i| items[i].links.iter().map(|&l| caps[l]))
            .collect();
        let uniform = (link_caps.len() == 1).then(|| *link_caps.first().expect("nonempty"));
        let unit = component.iter().all(|&i| items[i].width == 1);
        let mut search = Exact {
            grid: &mut grid,
            starts: &mut starts,
            uniform,
            fresh: (unit && uniform.is_some()).then(|| vec![0; uniform.unwrap_or(0) as usize]),
        };
        let mut remaining = component;
        if !search.run(&mut remaining, true) {
            return None;
        }
    }
    Some(starts)
}

struct Grid<'a> {
    items: &'a [Item],
    limits: &'a [u32],
    used: Vec<Vec<bool>>,
}

impl Grid<'_> {
    fn fits(&self, i: usize, s: u32) -> bool {
        let (s, w) = (s as usize, self.items[i].width as usize);
        self.items[i]
            .links
            .iter()
            .all(|&l| self.used[l][s..s + w].iter().all(|u| !u))
    }

    fn set(&mut self, i: usize, s: u32, value: bool) {
        let (s, w) = (s as usize, self.items[i].width as usize);
        for &l in &self.items[i].links {
            self.used[l][s..s + w].iter_mut().for_each(|u| *u = value);
        }
    }

    fn options(&self, i: usize) -> impl Iterator<Item = u32> + '_ {
        (0..=self.limits[i]).filter(move |&s| self.fits(i, s))
    }
}

/// Items grouped by connectivity through shared links, each group sorted.
fn components(topo: &Topology, items: &[Item]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..items.len()).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: Vec<Option<usize>> = vec![None; topo.links().len()];
    for (i, item) in items.iter().enumerate() {
        for &l in &item.links {
            match owner[l] {
                Some(j) => {
                    let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                    parent[a.max(b)] = a.min(b);
                }
                None => owner[l] = Some(i),
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..items.len() {
        let r = root(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

struct Exact<'g, 'a> {
    grid: &'g mut Grid<'a>,
    starts: &'g mut Vec<Option<u32>>,
    /// Capacity shared by every link of the component, if any.
    uniform: Option<u32>,
    /// Items per wavelength, when all items are one unit wide on uniform links.
    fresh: Option<Vec<u32>>,
}

impl Exact<'_, '_> {
    fn run(&mut self, remaining: &mut Vec<usize>, first: bool) -> bool {
        if remaining.is_empty() {
            return true;
        }
        let mut pick: Option<(usize, usize)> = None;
        for (k, &i) in remaining.iter().enumerate() {
            let n = self.grid.options(i).count();
            if n == 0 {
                return false;
            }
            let better = match pick {
                None => true,
                Some((_, m)) => {
                    let j = remaining[pick.expect("set").0];
                    let it = &self.grid.items;
                    (
                        n,
                        std::cmp::Reverse(it[i].width),
                        std::cmp::Reverse(it[i].links.len()),
                        i,
                    ) < (
                        m,
                        std::cmp::Reverse(it[j].width),
                        std::cmp::Reverse(it[j].links.len()),
                        j,
                    )
                }
            };
            if better {
                pick = Some((k, n));
            }
        }
        let (k, _) = pick.expect("remaining is nonempty");
        let i = remaining.swap_remove(k);
        let w = self.grid.items[i].width;
        let mut options: Vec<u32> = self.grid.options(i).collect();
        if let Some(fresh) = &self.fresh {
            // Unused wavelengths are interchangeable: try only the lowest.
            let mut seen_fresh = false;
            options.retain(|&s| {
                let unused = fresh[s as usize] == 0;
                let keep = !unused || !seen_fresh;
                seen_fresh |= unused;
                keep
            });
        } else if let (true, Some(cap)) = (first, self.uniform) {
            // Mirroring the spectrum maps solutions to solutions.
            options.retain(|&s| 2 * s <= cap - w);
        }
        for s in options {
            self.grid.set(i, s, true);
            self.starts[i] = Some(s);
            if let Some(f) = &mut self.fresh {
                f[s as usize] += 1;
            }
            if self.run(remaining, false) {
                return true;
            }
            if let Some(f) = &mut self.fresh {
                f[s as usize] -= 1;
            }
            self.grid.set(i, s, false);
            self.starts[i] = None;
        }
        remaining.push(i);
        let last = remaining.len() - 1;
        remaining.swap(k, last);
        false
    }
}

/// Channel occupancy of a growing set of items, kept assignable: new items
/// go first-fit, and only when that fails is the whole set re-solved exactly.
pub(crate) struct Occupancy {
    tech: Technology,
    caps: Vec<u32>,
    items: Vec<Item>,
    starts: Vec<u32>,
    used: Vec<Vec<bool>>,
    /// Per successful push: item count before it, and the previous starts
    /// when it forced an exact re-solve.
    history: Vec<(usize, Option<Vec<u32>>)>,
}

impl Occupancy {
    pub fn new(topo: &Topology, tech: Technology) -> Self {
        let caps: Vec<u32> = topo.links().iter().map(|l| l.capacity).collect();
        let used = caps.iter().map(|&c| vec![false; c as usize]).collect();
        Occupancy {
            tech,
            caps,
            items: Vec::new(),
            starts: Vec::new(),
            used,
            history: Vec::new(),
        }
    }

    fn fits(&self, item: &Item, s: usize) -> bool {
        let w = item.width as usize;
        item.links
            .iter()
            .all(|&l| s + w <= self.caps[l] as usize && self.used[l][s..s + w].iter().all(|u| !u))
    }

    fn mark(&mut self, k: usize, value: bool) {
        let (s, w) = (self.starts[k] as usize, self.items[k].width as usize);
        for &l in &self.items[k].links {
            self.used[l][s..s + w].iter_mut().for_each(|u| *u = value);
        }
    }

    /// Whether `item` alone could be added at its first fit.
    pub fn can_place(&self, item: &Item) -> bool {
        if self.tech == Technology::Opaque {
            return true;
        }
        let min_cap = item.links.iter().map(|&l| self.caps[l]).min().unwrap_or(0);
        min_cap >= item.width && (0..=min_cap - item.width).any(|s| self.fits(item, s as usize))
    }

    /// Adds `new` items, returning whether the enlarged set is assignable.
    /// On success the caller must undo with [`Occupancy::pop`].
    pub fn push(&mut self, topo: &Topology, new: &[&Item]) -> bool {
        let base = self.items.len();
        if self.tech == Technology::Opaque {
            self.history.push((base, None));
            return true;
        }
        let max = self.caps.iter().copied().max().unwrap_or(0) as usize;
        let mut marked = base;
        for item in new {
            let mut sorted = item.links.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                break;
            }
            let Some(s) = (0..max).find(|&s| self.fits(item, s)) else {
                break;
            };
            self.items.push((*item).clone());
            self.starts.push(s as u32);
            self.mark(marked, true);
            marked += 1;
        }
        if marked == base + new.len() {
            self.history.push((base, None));
            return true;
        }
        self.items.extend(new[marked - base..].iter().map(|&i| i.clone()));
        match assign_channels(topo, self.tech, &self.items) {
            Some(starts) => {
                for k in 0..marked {
                    self.mark(k, false);
                }
                let old = self.starts[..base].to_vec();
                self.starts = starts.into_iter().map(|s| s.expect("channel technology")).collect();
                for k in 0..self.items.len() {
                    self.mark(k, true);
                }
                self.history.push((base, Some(old)));
                true
            }
            None => {
                for k in base..marked {
                    self.mark(k, false);
                }
                self.items.truncate(base);
                self.starts.truncate(base);
                false
            }
        }
    }

    /// Undoes the latest successful [`Occupancy::push`].
    pub fn pop(&mut self) {
        let (base, old) = self.history.pop().expect("push before pop");
        if self.tech == Technology::Opaque {
            return;
        }
        match old {
            Some(old) => {
                for k in 0..self.items.len() {
                    self.mark(k, false);
                }
                self.items.truncate(base);
                self.starts = old;
                for k in 0..base {
                    self.mark(k, true);
                }
            }
            None => {
                for k in base..self.items.len() {
                    self.mark(k, false);
                }
                self.items.truncate(base);
                self.starts.truncate(base);
            }
        }
    }
}
