//! Independent checks of a design: a constraint audit, bit-level simulation
//! of every single fiber cut, and the physical-layer encryption conditions.
//!
//! Nothing here trusts the solver. Codability is re-derived from the
//! assigned paths, channels are re-checked unit by unit, and recovery is
//! judged on actual bit streams.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coding::{check_codable, decode_lost, encrypt_route, xor_combine, BitStream, CodingGroup};
use crate::design::{compute_metrics, lightpaths, DesignSolution, Instance, LightpathRole, Objective, Technology};
use crate::error::{Error, Result};
use crate::model::{DemandId, EdgeId, LinkId};
use crate::pathing::{Path, PathPair};

/// Payload length used by failure sweeps.
pub const SWEEP_PAYLOAD_BITS: usize = 256;
/// Minimum sample size for the key-balance condition.
pub const SECURITY_MIN_BITS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FailureScenario {
    pub failed_edge: EdgeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    DeliveredDirect,
    RecoveredByProtection,
    RecoveredByDecode {
        surviving_working: BitStream,
        encoded: BitStream,
    },
    Lost,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::DeliveredDirect => "delivered-direct",
            Outcome::RecoveredByProtection => "recovered-by-protection",
            Outcome::RecoveredByDecode { .. } => "recovered-by-decode",
            Outcome::Lost => "lost",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandOutcome {
    pub demand: DemandId,
    pub outcome: Outcome,
    /// Plaintext recovered at the destination; `None` when lost.
    pub recovered: Option<BitStream>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryTrace {
    pub scenario: FailureScenario,
    pub outcomes: Vec<DemandOutcome>,
}

impl RecoveryTrace {
    pub fn outcome(&self, demand: DemandId) -> Option<&DemandOutcome> {
        self.outcomes.iter().find(|o| o.demand == demand)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    UnknownDemand,
    DuplicateAssignment,
    BadPath,
    EndpointMismatch,
    MissingProtection,
    NotDisjoint,
    Width,
    ChannelMissing,
    ChannelRange,
    Overlap,
    Capacity,
    Codability,
    CodedChannel,
    Unserved,
    Encryption,
    Metrics,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::UnknownDemand => "unknown-demand",
            ViolationKind::DuplicateAssignment => "duplicate-assignment",
            ViolationKind::BadPath => "bad-path",
            ViolationKind::EndpointMismatch => "endpoint-mismatch",
            ViolationKind::MissingProtection => "missing-protection",
            ViolationKind::NotDisjoint => "not-disjoint",
            ViolationKind::Width => "width",
            ViolationKind::ChannelMissing => "channel-missing",
            ViolationKind::ChannelRange => "channel-range",
            ViolationKind::Overlap => "overlap",
            ViolationKind::Capacity => "capacity",
            ViolationKind::Codability => "codability",
            ViolationKind::CodedChannel => "coded-channel",
            ViolationKind::Unserved => "unserved",
            ViolationKind::Encryption => "encryption",
            ViolationKind::Metrics => "metrics",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.as_str(), self.detail)
    }
}

/// Audits every constraint of the design problem. An empty list means the
/// solution is feasible and its stored metrics are right.
pub fn validate_solution(instance: &Instance, solution: &DesignSolution) -> Vec<Violation> {
    let topo = &instance.topology;
    let tech = instance.technology();
    let mut out = Vec::new();
    let mut push = |kind: ViolationKind, detail: String| out.push(Violation { kind, detail });

    let mut seen = BTreeSet::new();
    for a in &solution.assignments {
        let Some(d) = instance.demand(a.demand) else {
            push(ViolationKind::UnknownDemand, format!("demand {}", a.demand));
            continue;
        };
        if !seen.insert(a.demand) {
            push(ViolationKind::DuplicateAssignment, format!("demand {}", a.demand));
        }
        let mut check_path = |p: &Path, what: &str| match Path::from_links(topo, p.links.clone()) {
            Ok(q) if q == *p => {
                if p.src != d.src || p.dst != d.dst {
                    push(
                        ViolationKind::EndpointMismatch,
                        format!("{what} path of demand {}", d.id),
                    );
                }
            }
            _ => push(ViolationKind::BadPath, format!("{what} path of demand {}", d.id)),
        };
        check_path(&a.working, "working");
        if let Some(p) = &a.protection {
            check_path(p, "protection");
        }
        match (&a.protection, d.protected) {
            (Some(p), true) => {
                if !p.edge_disjoint(&a.working, topo) {
                    push(ViolationKind::NotDisjoint, format!("demand {}", d.id));
                }
            }
            (None, true) => push(ViolationKind::MissingProtection, format!("demand {}", d.id)),
            (Some(_), false) => push(
                ViolationKind::MissingProtection,
                format!("unprotected demand {} has a protection path", d.id),
            ),
            (None, false) => {}
        }
        if a.protection.is_some() != a.protection_channel.is_some() {
            push(
                ViolationKind::ChannelMissing,
                format!("protection channel of demand {}", d.id),
            );
        }
        if a.working_channel.width != d.rate_slots {
            push(ViolationKind::Width, format!("working channel of demand {}", d.id));
        }
        if let (Some(ch), None) = (a.protection_channel, solution.group_of(d.id)) {
            if ch.width != d.rate_slots {
                push(ViolationKind::Width, format!("protection channel of demand {}", d.id));
            }
        }
    }

    if instance.mode.objective == Objective::MinCost {
        for d in &instance.demands {
            if !seen.contains(&d.id) {
                push(
                    ViolationKind::Unserved,
                    format!("demand {} under a min-cost objective", d.id),
                );
            }
        }
    }

    let mut coded = BTreeSet::new();
    for g in &solution.coding_groups {
        let name = format!("group ({}, {})", g.demand_a, g.demand_b);
        if !instance.mode.kind.is_coded() {
            push(ViolationKind::Codability, format!("{name} in an uncoded mode"));
        }
        for d in [g.demand_a, g.demand_b] {
            if !coded.insert(d) {
                push(ViolationKind::Codability, format!("demand {d} coded twice"));
            }
        }
        match regroup(instance, solution, g) {
            Ok(expected) if expected == *g => {}
            Ok(_) => push(
                ViolationKind::Codability,
                format!("{name} does not match its demands' paths"),
            ),
            Err(reason) => push(ViolationKind::Codability, format!("{name}: {reason}")),
        }
        let (Some(a), Some(b)) = (solution.assignment(g.demand_a), solution.assignment(g.demand_b)) else {
            continue;
        };
        let width = a.working_channel.width.max(b.working_channel.width);
        match (a.protection_channel, b.protection_channel) {
            (Some(ca), Some(cb)) if ca == cb && ca.width == width => {}
            _ => push(
                ViolationKind::CodedChannel,
                format!("{name} must share one channel of width {width}"),
            ),
        }
    }

    // Channel occupancy, unit by unit.
    let mut units: BTreeMap<(LinkId, u32), usize> = BTreeMap::new();
    let mut load: BTreeMap<LinkId, u32> = BTreeMap::new();
    for (n, lp) in lightpaths(solution).iter().enumerate() {
        let who = match lp.role {
            LightpathRole::Working(d) => format!("working lightpath of demand {d}"),
            LightpathRole::Protection(d) => format!("protection lightpath of demand {d}"),
            LightpathRole::CodedProtection(a, b) => format!("coded protection of ({a}, {b})"),
        };
        for &l in &lp.links {
            *load.entry(l).or_default() += lp.channel.width;
        }
        match (tech, lp.channel.start) {
            (Technology::Opaque, None) => {}
            (Technology::Opaque, Some(_)) => push(
                ViolationKind::ChannelRange,
                format!("{who} has a channel index in an opaque network"),
            ),
            (_, None) => push(ViolationKind::ChannelMissing, format!("{who} has no channel index")),
            (_, Some(start)) => {
                for &l in &lp.links {
                    let cap = topo.link(l).map_or(0, |x| x.capacity);
                    if start + lp.channel.width > cap {
                        push(
                            ViolationKind::ChannelRange,
                            format!("{who} exceeds the channels of link {l}"),
                        );
                        continue;
                    }
                    for u in start..start + lp.channel.width {
                        if let Some(other) = units.insert((l, u), n) {
                            let kind = if other == n { "reuses" } else { "collides on" };
                            push(ViolationKind::Overlap, format!("{who} {kind} channel {u} of link {l}"));
                        }
                    }
                }
            }
        }
    }
    for (l, used) in load {
        let cap = topo.link(l).map_or(0, |x| x.capacity);
        if used > cap {
            push(
                ViolationKind::Capacity,
                format!("link {l} carries {used} of {cap} channels"),
            );
        }
    }

    for f in &solution.encrypted_flows {
        let ok = match (
            instance.demand(f.confidential_demand),
            instance.demand(f.carrier_demand),
            solution.assignment(f.confidential_demand),
            solution.assignment(f.carrier_demand),
        ) {
            (Some(c), Some(k), Some(ca), Some(_)) => {
                c.confidential
                    && !k.confidential
                    && c.dst == k.dst
                    && f.shared_route == ca.working
                    && c.id != k.id
                    && solution.group_of(c.id).and_then(|g| g.partner_of(c.id)) != Some(k.id)
            }
            _ => false,
        };
        if !ok {
            push(
                ViolationKind::Encryption,
                format!("flow of demand {}", f.confidential_demand),
            );
        }
    }

    let metrics = compute_metrics(instance, solution);
    if metrics != solution.metrics {
        push(
            ViolationKind::Metrics,
            format!("stored {:?}, recomputed {:?}", solution.metrics, metrics),
        );
    }
    out
}

fn regroup(
    instance: &Instance,
    solution: &DesignSolution,
    g: &CodingGroup,
) -> std::result::Result<CodingGroup, String> {
    let pair = |id: DemandId| -> std::result::Result<PathPair, String> {
        let a = solution
            .assignment(id)
            .ok_or_else(|| format!("demand {id} is not served"))?;
        let p = a
            .protection
            .clone()
            .ok_or_else(|| format!("demand {id} is unprotected"))?;
        Ok(PathPair {
            working: a.working.clone(),
            protection: p,
        })
    };
    let (pa, pb) = (pair(g.demand_a)?, pair(g.demand_b)?);
    check_codable(&instance.topology, g.demand_a, &pa, g.demand_b, &pb).map_err(|e| format!("{e:?}"))
}

/// One seeded random payload per demand.
pub fn random_payloads(instance: &Instance, bits: usize, seed: u64) -> BTreeMap<DemandId, BitStream> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    instance
        .demands
        .iter()
        .map(|d| (d.id, BitStream::random(bits, &mut rng)))
        .collect()
}

fn payload(payloads: &BTreeMap<DemandId, BitStream>, id: DemandId) -> Result<&BitStream> {
    payloads
        .get(&id)
        .ok_or_else(|| Error::Inconsistent(format!("no payload for demand {id}")))
}

/// Stream a demand puts on its lightpaths: the payload, or its ciphertext
/// for an encrypted confidential demand.
fn line_stream(solution: &DesignSolution, payloads: &BTreeMap<DemandId, BitStream>, id: DemandId) -> Result<BitStream> {
    let p = payload(payloads, id)?;
    match solution.encrypted_flows.iter().find(|f| f.confidential_demand == id) {
        Some(f) => encrypt_route(payload(payloads, f.carrier_demand)?, p),
        None => Ok(p.clone()),
    }
}

/// Cuts one fiber and follows every signal to its destination.
///
/// Lightpaths crossing the cut deliver nothing; a coding node whose input
/// branch is dark XORs in an all-zero stream. A destination that lost its
/// working signal takes the uncoded protection copy, or decodes the coded
/// stream with the partner's surviving working signal. Encrypted demands are
/// then decrypted with the carrier's recovered plaintext.
///
/// Fails with an inconsistency if a protected demand is lost or any
/// recovered stream differs from its payload.
pub fn simulate_failure(
    instance: &Instance,
    solution: &DesignSolution,
    scenario: FailureScenario,
    payloads: &BTreeMap<DemandId, BitStream>,
) -> Result<RecoveryTrace> {
    let topo = &instance.topology;
    let e = scenario.failed_edge;
    if topo.edges().iter().all(|x| x.id != e) {
        return Err(Error::InvalidTopology(format!("no edge {e}")));
    }
    let cut = |links: &[LinkId]| links.iter().any(|&l| topo.edge_of(l) == Some(e));

    let mut sent = BTreeMap::new();
    for a in &solution.assignments {
        sent.insert(a.demand, line_stream(solution, payloads, a.demand)?);
    }

    // What each destination receives on the line, before decryption.
    let mut received: BTreeMap<DemandId, (Outcome, Option<BitStream>)> = BTreeMap::new();
    for a in &solution.assignments {
        let id = a.demand;
        let working_ok = !cut(&a.working.links);
        let result = if working_ok {
            (Outcome::DeliveredDirect, Some(sent[&id].clone()))
        } else if let Some(g) = solution.group_of(id) {
            let partner = g.partner_of(id).expect("member of its group");
            let partner_working = solution.assignment(partner).filter(|p| !cut(&p.working.links));
            if cut(&g.encoded_segment.links) {
                (Outcome::Lost, None)
            } else {
                let len = sent[&id].len();
                let input = |d: DemandId| -> BitStream {
                    if cut(g.branch_of(d)) {
                        BitStream::zeros(len)
                    } else {
                        sent[&d].clone()
                    }
                };
                let encoded = xor_combine(&input(g.demand_a), &input(g.demand_b))?;
                match partner_working {
                    Some(_) => {
                        let surviving = sent[&partner].clone();
                        let bits = decode_lost(&surviving, &encoded)?;
                        (
                            Outcome::RecoveredByDecode {
                                surviving_working: surviving,
                                encoded,
                            },
                            Some(bits),
                        )
                    }
                    None => (Outcome::Lost, None),
                }
            }
        } else {
            match &a.protection {
                Some(p) if !cut(&p.links) => (Outcome::RecoveredByProtection, Some(sent[&id].clone())),
                _ => (Outcome::Lost, None),
            }
        };
        received.insert(id, result);
    }

    let mut outcomes = Vec::with_capacity(received.len());
    for a in &solution.assignments {
        let id = a.demand;
        let (outcome, line) = received[&id].clone();
        let recovered = match (
            line,
            solution.encrypted_flows.iter().find(|f| f.confidential_demand == id),
        ) {
            (Some(bits), None) => Some(bits),
            (Some(bits), Some(f)) => match &received.get(&f.carrier_demand) {
                Some((_, Some(key))) => Some(xor_combine(&bits, key)?),
                _ => None,
            },
            (None, _) => None,
        };
        let outcome = if recovered.is_none() { Outcome::Lost } else { outcome };
        let d = instance
            .demand(id)
            .ok_or_else(|| Error::Inconsistent(format!("unknown demand {id}")))?;
        match &recovered {
            Some(bits) if bits != payload(payloads, id)? => {
                return Err(Error::Inconsistent(format!(
                    "demand {id} recovered wrong bits after cutting edge {e}"
                )));
            }
            None if d.protected => {
                return Err(Error::Inconsistent(format!(
                    "protected demand {id} lost after cutting edge {e}"
                )));
            }
            _ => {}
        }
        outcomes.push(DemandOutcome {
            demand: id,
            outcome,
            recovered,
        });
    }
    Ok(RecoveryTrace { scenario, outcomes })
}

/// [`simulate_failure`] for every fiber of the topology, in edge order.
pub fn failure_sweep(
    instance: &Instance,
    solution: &DesignSolution,
    payloads: &BTreeMap<DemandId, BitStream>,
) -> Result<Vec<RecoveryTrace>> {
    instance
        .topology
        .edges()
        .iter()
        .map(|e| simulate_failure(instance, solution, FailureScenario { failed_edge: e.id }, payloads))
        .collect()
}

/// Measurements behind the encryption conditions for one confidential demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SecurityOutcome {
    pub demand: DemandId,
    pub carrier: DemandId,
    /// Links on the demand's routes whose tap was checked.
    pub tapped_links: usize,
    pub ciphertext_ones_fraction: f64,
    /// Fraction of ciphertext bits that differ from the plaintext.
    pub plaintext_disagreement: f64,
    pub decoded_ok: bool,
    pub extra_channel_links: i64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SecurityReport {
    pub outcomes: Vec<SecurityOutcome>,
}

fn violation(condition: &str, link: Option<LinkId>) -> Error {
    Error::SecurityViolation {
        condition: condition.to_string(),
        link,
    }
}

/// Checks the encryption of every served confidential demand, in order:
///
/// - s3: the key-derived ciphertext is balanced (ones fraction and
///   disagreement with the plaintext both in `[0.49, 0.51]`) over at least
///   [`SECURITY_MIN_BITS`] bits;
/// - s1: a passive tap on any link of the demand's routes sees the expected
///   ciphertext (or its XOR with a coded partner) and never the plaintext;
/// - s2: the destination recovers the plaintext with the carrier's stream;
/// - s4: encryption adds no channel-links to the design.
///
/// The first failure is returned as a security violation.
pub fn check_security(
    instance: &Instance,
    solution: &DesignSolution,
    payloads: &BTreeMap<DemandId, BitStream>,
) -> Result<SecurityReport> {
    let topo = &instance.topology;
    let mut report = SecurityReport::default();
    for a in &solution.assignments {
        let Some(d) = instance.demand(a.demand) else { continue };
        if !d.confidential {
            continue;
        }
        let flow = solution
            .encrypted_flows
            .iter()
            .find(|f| f.confidential_demand == d.id)
            .ok_or_else(|| {
                violation(
                    "s1: confidential demand has no carrier",
                    a.working.links.first().copied(),
                )
            })?;
        let plain = payload(payloads, d.id)?;
        let key = payload(payloads, flow.carrier_demand)?;
        let cipher = encrypt_route(key, plain)?;

        // s3
        if cipher.len() < SECURITY_MIN_BITS {
            return Err(violation(
                &format!("s3: sample of {} bits is too short", cipher.len()),
                None,
            ));
        }
        let ones = cipher.ones_fraction();
        let disagreement = xor_combine(&cipher, plain)?.ones_fraction();
        let balanced = |x: f64| (0.49..=0.51).contains(&x);
        if !balanced(ones) || !balanced(disagreement) {
            return Err(violation(
                &format!("s3: ciphertext ones fraction {ones:.4}, plaintext disagreement {disagreement:.4}"),
                None,
            ));
        }

        // s1: walk every route the confidential signal takes.
        let mut taps: Vec<(LinkId, BitStream)> = Vec::new();
        let nodes = flow.shared_route.nodes(topo);
        let encoded_from = nodes.iter().position(|&n| n == flow.encoding_node);
        for (i, &l) in flow.shared_route.links.iter().enumerate() {
            let encrypted = encoded_from.is_some_and(|k| i >= k);
            taps.push((l, if encrypted { cipher.clone() } else { plain.clone() }));
        }
        if flow.shared_route != a.working {
            for &l in &a.working.links {
                taps.push((l, plain.clone()));
            }
        }
        let source_encrypted = flow.encoding_node == d.src;
        let line = if source_encrypted {
            cipher.clone()
        } else {
            plain.clone()
        };
        match (&a.protection, solution.group_of(d.id)) {
            (Some(_), Some(g)) => {
                let partner = g.partner_of(d.id).expect("member of its group");
                let mixed = xor_combine(&line, &line_stream(solution, payloads, partner)?)?;
                for &l in g.branch_of(d.id) {
                    taps.push((l, line.clone()));
                }
                for &l in &g.encoded_segment.links {
                    taps.push((l, mixed.clone()));
                }
            }
            (Some(p), None) => {
                for &l in &p.links {
                    taps.push((l, line.clone()));
                }
            }
            (None, _) => {}
        }
        for (l, seen) in &taps {
            if seen == plain {
                return Err(violation("s1: plaintext visible on a link", Some(*l)));
            }
        }

        // s2
        let decoded = xor_combine(&cipher, key)?;
        if decoded != *plain {
            return Err(violation("s2: destination decode differs from plaintext", None));
        }

        // s4
        let mut plain_design = solution.clone();
        plain_design.encrypted_flows.clear();
        let extra = compute_metrics(instance, solution).routing_cost as i64
            - compute_metrics(instance, &plain_design).routing_cost as i64;
        if extra != 0 {
            return Err(violation(
                &format!("s4: encryption costs {extra} extra channel-links"),
                None,
            ));
        }

        report.outcomes.push(SecurityOutcome {
            demand: d.id,
            carrier: flow.carrier_demand,
            tapped_links: taps.len(),
            ciphertext_ones_fraction: ones,
            plaintext_disagreement: disagreement,
            decoded_ok: true,
            extra_channel_links: extra,
        });
    }
    Ok(report)
}
