//! Small hand-checkable instances.

use crate::model::{bidirectional, Demand, NodeId, Spectrum, Topology};

pub const A: NodeId = 1;
pub const B: NodeId = 2;
pub const C: NodeId = 3;
pub const X: NodeId = 4;

/// Two sources `A`, `B` sending to `C`, each with a direct fiber to `C` and
/// one to the relay `X`, which has a fiber to `C`.
pub fn butterfly(capacity: u32) -> Topology {
    bidirectional(
        "butterfly",
        Spectrum::Wdm,
        &[A, B, C, X],
        &[(A, C), (B, C), (A, X), (B, X), (X, C)],
        capacity,
    )
    .expect("static data")
}

/// The butterfly with two protected unit-rate demands `A -> C` (id 1) and
/// `B -> C` (id 2).
pub fn protected_pair(capacity: u32) -> (Topology, Vec<Demand>) {
    (
        butterfly(capacity),
        vec![Demand::new(1, A, C, 1), Demand::new(2, B, C, 1)],
    )
}

/// As [`protected_pair`], but the demand from `B` is confidential and travels
/// encrypted with `A`'s signal as key.
pub fn confidential_pair(capacity: u32) -> (Topology, Vec<Demand>) {
    let (topo, mut demands) = protected_pair(capacity);
    demands[1] = demands[1].confidential();
    (topo, demands)
}
