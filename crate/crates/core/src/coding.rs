//! XOR signal algebra, the codability predicate for pairing two protection
//! flows, and XOR-based physical-layer encryption.

use std::collections::BTreeSet;
use std::fmt;

use rand::RngCore;

use crate::error::{Error, Result};
use crate::model::{DemandId, EdgeId, NodeId, Topology};
use crate::pathing::{Path, PathPair};

/// A fixed-length bit sequence, packed into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitStream {
    len: usize,
    words: Vec<u64>,
}

impl BitStream {
    pub fn zeros(len: usize) -> Self {
        BitStream {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = BitStream {
            len,
            words: (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect(),
        };
        s.mask_tail();
        s
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut s = BitStream::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.words[i / 64] |= 1 << (i % 64);
            }
        }
        s
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones_fraction(&self) -> f64 {
        if self.len == 0 {
            return 0.0;
        }
        self.count_ones() as f64 / self.len as f64
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

impl std::str::FromStr for BitStream {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::parse(1, format!("invalid bit `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitStream::from_bits(&bits))
    }
}

impl fmt::Display for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "BitStream({self})")
        } else {
            write!(f, "BitStream(len={}, ones={})", self.len, self.count_ones())
        }
    }
}

/// Bitwise exclusive-or of two equal-length streams.
pub fn xor_combine(a: &BitStream, b: &BitStream) -> Result<BitStream> {
    if a.len != b.len {
        return Err(Error::LengthMismatch {
            left: a.len,
            right: b.len,
        });
    }
    Ok(BitStream {
        len: a.len,
        words: a.words.iter().zip(&b.words).map(|(x, y)| x ^ y).collect(),
    })
}

/// Recovers a lost working signal from the surviving one and the encoded
/// protection stream.
pub fn decode_lost(surviving_working: &BitStream, encoded: &BitStream) -> Result<BitStream> {
    xor_combine(surviving_working, encoded)
}

/// Encrypts a confidential stream with a carrier stream used as key.
pub fn encrypt_route(carrier_stream: &BitStream, confidential_stream: &BitStream) -> Result<BitStream> {
    xor_combine(carrier_stream, confidential_stream)
}

/// Two demands whose protection signals are XOR-combined at `coding_node`
/// and share the `encoded_segment` to their common destination.
///
/// `demand_a < demand_b` always holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodingGroup {
    pub demand_a: DemandId,
    pub demand_b: DemandId,
    pub coding_node: NodeId,
    pub encoded_segment: Path,
    /// Links of demand a's protection before the coding node (may be empty).
    pub branch_a: Vec<crate::model::LinkId>,
    pub branch_b: Vec<crate::model::LinkId>,
}

impl CodingGroup {
    pub fn destination(&self) -> NodeId {
        self.encoded_segment.dst
    }

    pub fn involves(&self, demand: DemandId) -> bool {
        self.demand_a == demand || self.demand_b == demand
    }

    pub fn partner_of(&self, demand: DemandId) -> Option<DemandId> {
        if demand == self.demand_a {
            Some(self.demand_b)
        } else if demand == self.demand_b {
            Some(self.demand_a)
        } else {
            None
        }
    }

    pub fn branch_of(&self, demand: DemandId) -> &[crate::model::LinkId] {
        if demand == self.demand_a {
            &self.branch_a
        } else {
            &self.branch_b
        }
    }
}

/// Why a pair of protected demands cannot share an encoded protection segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotCodable {
    DifferentDestination,
    NoSharedSuffix,
    WorkingPathsOverlap,
    SegmentMeetsWorking,
    PairNotDisjoint,
    CrossOverlap,
    SameDemand,
}

fn edges(topo: &Topology, links: &[crate::model::LinkId]) -> BTreeSet<EdgeId> {
    links.iter().map(|&l| topo.edge_of(l).expect("known link")).collect()
}

/// Checks whether two protected demands can be coded together and, if so,
/// builds their group.
///
/// Requirements: a common destination; a shared protection suffix of at
/// least one link (the longest one becomes the encoded segment); fiber-disjoint
/// working paths; an encoded segment clear of both working paths; each pair
/// disjoint on its own; and each working path clear of the other demand's
/// protection route, so that a single fiber cut never removes a working
/// signal together with an input of the XOR.
pub fn check_codable(
    topo: &Topology,
    demand_a: DemandId,
    pair_a: &PathPair,
    demand_b: DemandId,
    pair_b: &PathPair,
) -> std::result::Result<CodingGroup, NotCodable> {
    if demand_a == demand_b {
        return Err(NotCodable::SameDemand);
    }
    let (demand_a, pair_a, demand_b, pair_b) = if demand_a < demand_b {
        (demand_a, pair_a, demand_b, pair_b)
    } else {
        (demand_b, pair_b, demand_a, pair_a)
    };
    if pair_a.working.dst != pair_b.working.dst {
        return Err(NotCodable::DifferentDestination);
    }
    let pa = &pair_a.protection.links;
    let pb = &pair_b.protection.links;
    let shared = pa.iter().rev().zip(pb.iter().rev()).take_while(|(x, y)| x == y).count();
    if shared == 0 {
        return Err(NotCodable::NoSharedSuffix);
    }
    if !pair_a.is_valid(topo) || !pair_b.is_valid(topo) {
        return Err(NotCodable::PairNotDisjoint);
    }
    let wa = edges(topo, &pair_a.working.links);
    let wb = edges(topo, &pair_b.working.links);
    if !wa.is_disjoint(&wb) {
        return Err(NotCodable::WorkingPathsOverlap);
    }
    let segment_links = pa[pa.len() - shared..].to_vec();
    let seg = edges(topo, &segment_links);
    if !seg.is_disjoint(&wa) || !seg.is_disjoint(&wb) {
        return Err(NotCodable::SegmentMeetsWorking);
    }
    if !wa.is_disjoint(&edges(topo, pb)) || !wb.is_disjoint(&edges(topo, pa)) {
        return Err(NotCodable::CrossOverlap);
    }
    let encoded_segment = Path::from_links(topo, segment_links).expect("suffix of a valid path");
    Ok(CodingGroup {
        demand_a,
        demand_b,
        coding_node: encoded_segment.src,
        encoded_segment,
        branch_a: pa[..pa.len() - shared].to_vec(),
        branch_b: pb[..pb.len() - shared].to_vec(),
    })
}

/// [`check_codable`] without the reason.
pub fn codable(
    topo: &Topology,
    demand_a: DemandId,
    pair_a: &PathPair,
    demand_b: DemandId,
    pair_b: &PathPair,
) -> Option<CodingGroup> {
    check_codable(topo, demand_a, pair_a, demand_b, pair_b).ok()
}

/// A confidential demand whose signal is XOR-encrypted with a carrier
/// demand's signal before it enters the network.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EncryptedFlow {
    pub confidential_demand: DemandId,
    /// Demand whose stream serves as key; it terminates at the same node.
    pub carrier_demand: DemandId,
    /// Route of the confidential signal.
    pub shared_route: Path,
    /// Node where the XOR is applied; the confidential source in a sound plan.
    pub encoding_node: NodeId,
}
