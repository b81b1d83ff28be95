//! Experiment harness behind the `ncopt` binary: instance sources, the
//! solution and trace file formats, and the `solve`, `compare`, `verify`,
//! `stats` and `topo` commands.
//!
//! Files written here contain no wall-clock times, so repeated runs with the
//! same configuration produce identical bytes. Times go to the returned
//! values for the caller to print.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::time::Duration;

use rayon::prelude::*;

use crate::coding::{CodingGroup, EncryptedFlow};
use crate::design::{
    build_instance, variable_count, Channel, DemandAssignment, DesignSolution, Instance, Metrics, Objective,
    ProblemKind, ProblemMode, Technology,
};
use crate::error::{Error, Result};
use crate::model::{
    builtin_cost239, field, generate_demands, load_demands, load_topology, render_demands, Demand, LinkId, Spectrum,
    Topology, COST239_DEFAULT_CAPACITY,
};
use crate::pathing::Path;
use crate::solver::{solve_exact, solve_greedy, SolveReport, SolverBudget};
use crate::verify::{
    check_security, random_payloads, simulate_failure, validate_solution, FailureScenario, Outcome, SECURITY_MIN_BITS,
    SWEEP_PAYLOAD_BITS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

/// Process exit status for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::Io(_) | Error::InvalidTopology(_) | Error::InvalidDemand { .. } => EXIT_PARSE,
        Error::Infeasible { .. } | Error::NoPath { .. } | Error::NoDisjointPair { .. } => EXIT_INFEASIBLE,
        Error::BudgetExhausted => EXIT_BUDGET,
        Error::Inconsistent(_) | Error::SecurityViolation { .. } | Error::LengthMismatch { .. } => EXIT_VERIFY,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologySource {
    /// The built-in COST239 network.
    Builtin,
    File(PathBuf),
}

impl TopologySource {
    /// `cost239` names the built-in network; anything else is a file path.
    pub fn parse(raw: &str) -> Self {
        if raw.eq_ignore_ascii_case("cost239") {
            TopologySource::Builtin
        } else {
            TopologySource::File(PathBuf::from(raw))
        }
    }

    fn label(&self) -> String {
        match self {
            TopologySource::Builtin => "cost239".into(),
            TopologySource::File(p) => p.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DemandSource {
    File(PathBuf),
    Generated { count: usize, seed: u64, rate_max: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Exact,
    Greedy,
}

impl std::str::FromStr for SolverChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(SolverChoice::Exact),
            "greedy" => Ok(SolverChoice::Greedy),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

/// Everything a command needs to build and solve instances.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub topology: TopologySource,
    pub demands: DemandSource,
    /// The mode to solve; `compare` runs its coded and uncoded variants.
    pub kind: ProblemKind,
    pub objective: Objective,
    pub k: usize,
    /// Uniform per-link capacity override.
    pub capacity: Option<u32>,
    pub solver: SolverChoice,
    pub budget: SolverBudget,
    /// Seeds and demand counts swept by `compare` for generated demands.
    pub seeds: Vec<u64>,
    pub sizes: Vec<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The canonical sweep: COST239 at 8 channels per link, 20 seeds,
    /// 5, 10 and 15 demands, k = 4, rates up to 4 slots in elastic modes.
    pub fn canonical(kind: ProblemKind, objective: Objective) -> Self {
        let rate_max = if kind.technology() == Technology::Elastic { 4 } else { 1 };
        ExperimentConfig {
            topology: TopologySource::Builtin,
            demands: DemandSource::Generated {
                count: 10,
                seed: 1,
                rate_max,
            },
            kind,
            objective,
            k: 4,
            capacity: Some(COST239_DEFAULT_CAPACITY),
            solver: SolverChoice::Exact,
            budget: SolverBudget::default(),
            seeds: (1..=20).collect(),
            sizes: vec![5, 10, 15],
            out: None,
        }
    }

    /// The coded and uncoded modes compared by `compare`.
    pub fn mode_pair(&self) -> (ProblemKind, ProblemKind) {
        (self.kind.coded(), self.kind.baseline())
    }

    pub fn topology(&self) -> Result<Topology> {
        let topo = match &self.topology {
            TopologySource::Builtin => {
                let spectrum = match self.kind.technology() {
                    Technology::Elastic => Spectrum::Eon,
                    _ => Spectrum::Wdm,
                };
                builtin_cost239(COST239_DEFAULT_CAPACITY).with_spectrum(spectrum)
            }
            TopologySource::File(path) => load_topology(&read(path)?)?,
        };
        match self.capacity {
            Some(c) => topo.with_uniform_capacity(c),
            None => Ok(topo),
        }
    }

    fn demands_with(&self, topo: &Topology, count: usize, seed: u64) -> Result<Vec<Demand>> {
        match &self.demands {
            DemandSource::File(path) => load_demands(&read(path)?),
            DemandSource::Generated { rate_max, .. } => Ok(generate_demands(topo, count, seed, *rate_max)),
        }
    }

    pub fn demands(&self, topo: &Topology) -> Result<Vec<Demand>> {
        match &self.demands {
            DemandSource::Generated { count, seed, .. } => self.demands_with(topo, *count, *seed),
            DemandSource::File(_) => self.demands_with(topo, 0, 0),
        }
    }
}

fn read(path: &FsPath) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &FsPath, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn run_solver(instance: &Instance, solver: SolverChoice, budget: SolverBudget) -> Result<SolveReport> {
    match solver {
        SolverChoice::Exact => solve_exact(instance, budget),
        SolverChoice::Greedy => solve_greedy(instance, budget.seed.unwrap_or(0)),
    }
}

fn links_field(links: &[LinkId]) -> String {
    if links.is_empty() {
        "-".into()
    } else {
        links.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    }
}

fn channel_field(ch: Channel) -> String {
    match ch.start {
        Some(s) => format!("{s}/{}", ch.width),
        None => format!("-/{}", ch.width),
    }
}

const METRICS: [&str; 7] = [
    "routing_cost",
    "wavelength_cost",
    "spectrum_cost",
    "max_channel_index",
    "served_rate",
    "served_demands",
    "transponder_count",
];

fn metric_values(m: &Metrics) -> [u64; 7] {
    [
        m.routing_cost,
        m.wavelength_cost,
        m.spectrum_cost,
        u64::from(m.max_channel_index),
        m.served_rate,
        u64::from(m.served_demands),
        u64::from(m.transponder_count),
    ]
}

/// Renders a solution together with its instance, so the file can be
/// verified on its own.
pub fn render_solution(instance: &Instance, solution: &DesignSolution) -> String {
    let mut out = String::from("# ncopt solution\n");
    let mode = instance.mode;
    let _ = writeln!(
        out,
        "solution {} {} k {} optimal {}",
        mode.kind,
        mode.objective.as_str(),
        instance.k,
        u8::from(solution.proved_optimal)
    );
    out.push_str(&instance.topology.render());
    out.push_str(&render_demands(&instance.demands));
    for a in &solution.assignments {
        let _ = write!(
            out,
            "assign {} work {} {}",
            a.demand,
            links_field(&a.working.links),
            channel_field(a.working_channel)
        );
        match (&a.protection, a.protection_channel) {
            (Some(p), Some(ch)) => {
                let _ = writeln!(out, " prot {} {}", links_field(&p.links), channel_field(ch));
            }
            _ => out.push_str(" prot - -\n"),
        }
    }
    for g in &solution.coding_groups {
        let _ = writeln!(
            out,
            "code {} {} node {} segment {} branch_a {} branch_b {}",
            g.demand_a,
            g.demand_b,
            g.coding_node,
            links_field(&g.encoded_segment.links),
            links_field(&g.branch_a),
            links_field(&g.branch_b)
        );
    }
    for f in &solution.encrypted_flows {
        let _ = writeln!(
            out,
            "encrypt {} {} node {} route {}",
            f.confidential_demand,
            f.carrier_demand,
            f.encoding_node,
            links_field(&f.shared_route.links)
        );
    }
    for (name, value) in METRICS.iter().zip(metric_values(&solution.metrics)) {
        let _ = writeln!(out, "metric {name} {value}");
    }
    out
}

fn parse_links(line: usize, raw: &str) -> Result<Vec<LinkId>> {
    if raw == "-" {
        return Ok(Vec::new());
    }
    raw.split(',').map(|x| field(line, "link id", x)).collect()
}

fn parse_path(topo: &Topology, line: usize, raw: &str) -> Result<Path> {
    Path::from_links(topo, parse_links(line, raw)?).map_err(|e| Error::parse(line, e.to_string()))
}

fn parse_channel(line: usize, raw: &str) -> Result<Channel> {
    let (start, width) = raw
        .split_once('/')
        .ok_or_else(|| Error::parse(line, format!("invalid channel `{raw}` (expected start/width)")))?;
    let width = field(line, "channel width", width)?;
    Ok(match start {
        "-" => Channel::opaque(width),
        s => Channel::at(field(line, "channel start", s)?, width),
    })
}

fn expect_word(line: usize, parts: &[&str], at: usize, word: &str) -> Result<()> {
    match parts.get(at) {
        Some(w) if *w == word => Ok(()),
        _ => Err(Error::parse(line, format!("expected `{word}` as field {at}"))),
    }
}

/// Parses a solution file and rebuilds its instance.
pub fn parse_solution(text: &str) -> Result<(Instance, DesignSolution)> {
    // Keep line numbers intact for the nested topology and demand parsers.
    let mut topo_text = String::new();
    let mut demand_text = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        let first = line.split_whitespace().next().unwrap_or("");
        let (t, d) = match first {
            "topology" | "node" | "link" => (line, ""),
            "demand" => ("", line),
            _ => ("", ""),
        };
        topo_text.push_str(t);
        topo_text.push('\n');
        demand_text.push_str(d);
        demand_text.push('\n');
        if first == "solution" {
            let parts: Vec<&str> = line.split_whitespace().collect();
            crate::model::expect_arity(i + 1, &parts, 7)?;
            expect_word(i + 1, &parts, 3, "k")?;
            expect_word(i + 1, &parts, 5, "optimal")?;
            let kind: ProblemKind = parts[1].parse().map_err(|m: String| Error::parse(i + 1, m))?;
            let objective: Objective = parts[2].parse().map_err(|m: String| Error::parse(i + 1, m))?;
            let k: usize = field(i + 1, "k", parts[4])?;
            if k == 0 {
                return Err(Error::parse(i + 1, "k must be positive"));
            }
            let optimal = crate::model::flag(i + 1, "optimal", parts[6])?;
            header = Some((ProblemMode::new(kind, objective), k, optimal));
        }
    }
    let (mode, k, optimal) = header.ok_or_else(|| Error::parse(1, "missing solution header"))?;
    let topo = load_topology(&topo_text)?;
    let demands = load_demands(&demand_text)?;
    let instance = build_instance(&topo, &demands, mode, k)?;

    let mut solution = DesignSolution {
        assignments: Vec::new(),
        coding_groups: Vec::new(),
        encrypted_flows: Vec::new(),
        metrics: Metrics::default(),
        proved_optimal: optimal,
    };
    let mut metrics_seen = [false; 7];
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let parts: Vec<&str> = content.split_whitespace().collect();
        let Some(&first) = parts.first() else { continue };
        match first {
            "solution" | "topology" | "node" | "link" | "demand" => {}
            "assign" => {
                crate::model::expect_arity(line, &parts, 8)?;
                expect_word(line, &parts, 2, "work")?;
                expect_word(line, &parts, 5, "prot")?;
                let (protection, protection_channel) = match (parts[6], parts[7]) {
                    ("-", "-") => (None, None),
                    (p, c) => (Some(parse_path(&topo, line, p)?), Some(parse_channel(line, c)?)),
                };
                solution.assignments.push(DemandAssignment {
                    demand: field(line, "demand id", parts[1])?,
                    working: parse_path(&topo, line, parts[3])?,
                    working_channel: parse_channel(line, parts[4])?,
                    protection,
                    protection_channel,
                });
            }
            "code" => {
                crate::model::expect_arity(line, &parts, 11)?;
                expect_word(line, &parts, 3, "node")?;
                expect_word(line, &parts, 5, "segment")?;
                expect_word(line, &parts, 7, "branch_a")?;
                expect_word(line, &parts, 9, "branch_b")?;
                solution.coding_groups.push(CodingGroup {
                    demand_a: field(line, "demand id", parts[1])?,
                    demand_b: field(line, "demand id", parts[2])?,
                    coding_node: field(line, "node id", parts[4])?,
                    encoded_segment: parse_path(&topo, line, parts[6])?,
                    branch_a: parse_links(line, parts[8])?,
                    branch_b: parse_links(line, parts[10])?,
                });
            }
            "encrypt" => {
                crate::model::expect_arity(line, &parts, 7)?;
                expect_word(line, &parts, 3, "node")?;
                expect_word(line, &parts, 5, "route")?;
                solution.encrypted_flows.push(EncryptedFlow {
                    confidential_demand: field(line, "demand id", parts[1])?,
                    carrier_demand: field(line, "demand id", parts[2])?,
                    encoding_node: field(line, "node id", parts[4])?,
                    shared_route: parse_path(&topo, line, parts[6])?,
                });
            }
            "metric" => {
                crate::model::expect_arity(line, &parts, 3)?;
                let k = METRICS
                    .iter()
                    .position(|m| *m == parts[1])
                    .ok_or_else(|| Error::parse(line, format!("unknown metric `{}`", parts[1])))?;
                let v: u64 = field(line, "metric value", parts[2])?;
                let small = || u32::try_from(v).map_err(|_| Error::parse(line, "metric value out of range"));
                let m = &mut solution.metrics;
                match k {
                    0 => m.routing_cost = v,
                    1 => m.wavelength_cost = v,
                    2 => m.spectrum_cost = v,
                    3 => m.max_channel_index = small()?,
                    4 => m.served_rate = v,
                    5 => m.served_demands = small()?,
                    _ => m.transponder_count = small()?,
                }
                metrics_seen[k] = true;
            }
            other => return Err(Error::parse(line, format!("unknown record `{other}`"))),
        }
    }
    if let Some(k) = metrics_seen.iter().position(|s| !s) {
        return Err(Error::parse(
            text.lines().count().max(1),
            format!("missing metric `{}`", METRICS[k]),
        ));
    }
    Ok((instance, solution))
}

/// Result of `solve`.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub instance: Instance,
    pub report: SolveReport,
    pub solution_text: String,
}

impl SolveOutcome {
    pub fn summary(&self) -> String {
        let m = &self.report.solution.metrics;
        let mode = self.instance.mode;
        format!(
            "{} ({}): routing_cost {}, served {}/{} demands (rate {}), transponders {}, coding groups {}, \
             max channel {}, optimal {}, nodes {}, {:.3}s",
            mode.kind,
            mode.objective.as_str(),
            m.routing_cost,
            m.served_demands,
            self.instance.demands.len(),
            m.served_rate,
            m.transponder_count,
            self.report.solution.coding_groups.len(),
            m.max_channel_index,
            if self.report.proved_optimal { "yes" } else { "no" },
            self.report.nodes_explored,
            self.report.wall_time.as_secs_f64()
        )
    }
}

/// Builds the configured instance, solves it and writes the solution file
/// to `config.out` when set. Nothing is written on failure.
pub fn cmd_solve(config: &ExperimentConfig) -> Result<SolveOutcome> {
    let topo = config.topology()?;
    let demands = config.demands(&topo)?;
    let instance = build_instance(
        &topo,
        &demands,
        ProblemMode::new(config.kind, config.objective),
        config.k,
    )?;
    let report = run_solver(&instance, config.solver, config.budget)?;
    let solution_text = render_solution(&instance, &report.solution);
    if let Some(path) = &config.out {
        write(path, &solution_text)?;
    }
    Ok(SolveOutcome {
        instance,
        report,
        solution_text,
    })
}

/// One solve inside a comparison row.
#[derive(Debug, Clone, PartialEq)]
pub struct SideResult {
    pub value: u64,
    pub routing_cost: u64,
    pub served_demands: u32,
    pub optimal: bool,
    pub nodes: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub seed: u64,
    pub demands: usize,
    pub coded: std::result::Result<SideResult, String>,
    pub baseline: std::result::Result<SideResult, String>,
    pub coded_variables: u64,
    pub baseline_variables: u64,
    /// Codable candidate combinations in the coded instance.
    pub codable_pairs: usize,
    pub coded_time: Duration,
    pub baseline_time: Duration,
}

impl ComparisonRow {
    /// Relative improvement of the coded design in percent: cost saved under
    /// min-cost, throughput gained under max-throughput.
    pub fn saving(&self, objective: Objective) -> Option<f64> {
        let (Ok(c), Ok(b)) = (&self.coded, &self.baseline) else {
            return None;
        };
        if b.value == 0 {
            return None;
        }
        let (c, b) = (c.value as f64, b.value as f64);
        Some(match objective {
            Objective::MinCost => (b - c) / b * 100.0,
            Objective::MaxThroughput => (c - b) / b * 100.0,
        })
    }

    /// Both sides solved to proven optimality.
    pub fn fair(&self) -> bool {
        matches!((&self.coded, &self.baseline), (Ok(c), Ok(b)) if c.optimal && b.optimal)
    }

    fn status(&self) -> String {
        match (&self.coded, &self.baseline) {
            (Ok(_), Ok(_)) => "ok".into(),
            (Err(e), Ok(_)) => format!("coded: {e}"),
            (Ok(_), Err(e)) => format!("baseline: {e}"),
            (Err(a), Err(b)) => format!("coded: {a}; baseline: {b}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub rows: usize,
    pub fair_rows: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    /// Fair rows whose instance had at least one codable combination.
    pub codable_rows: usize,
    pub codable_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub topology: String,
    pub coded_mode: ProblemKind,
    pub baseline_mode: ProblemKind,
    pub objective: Objective,
    pub k: usize,
    pub capacity: u32,
    pub rows: Vec<ComparisonRow>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.2}"))
}

impl ComparisonReport {
    /// Statistics over fair rows only.
    pub fn aggregate(&self) -> Aggregate {
        let fair: Vec<(f64, usize)> = self
            .rows
            .iter()
            .filter(|r| r.fair())
            .filter_map(|r| r.saving(self.objective).map(|s| (s, r.codable_pairs)))
            .collect();
        let all: Vec<f64> = fair.iter().map(|&(s, _)| s).collect();
        let codable: Vec<f64> = fair.iter().filter(|&&(_, c)| c > 0).map(|&(s, _)| s).collect();
        Aggregate {
            rows: self.rows.len(),
            fair_rows: self.rows.iter().filter(|r| r.fair()).count(),
            mean: mean(&all),
            min: all.iter().copied().reduce(f64::min),
            max: all.iter().copied().reduce(f64::max),
            codable_rows: codable.len(),
            codable_mean: mean(&codable),
        }
    }

    const COLUMNS: [&'static str; 16] = [
        "seed",
        "demands",
        "coded_mode",
        "baseline_mode",
        "objective",
        "coded_value",
        "baseline_value",
        "saving_pct",
        "coded_optimal",
        "baseline_optimal",
        "fair",
        "coded_variables",
        "baseline_variables",
        "codable_pairs",
        "coded_nodes",
        "baseline_nodes",
    ];

    fn cells(&self, with_status: bool) -> Vec<Vec<String>> {
        let side = |s: &std::result::Result<SideResult, String>, f: fn(&SideResult) -> String| {
            s.as_ref().map_or_else(|_| "-".to_string(), f)
        };
        self.rows
            .iter()
            .map(|r| {
                let mut row = vec![
                    r.seed.to_string(),
                    r.demands.to_string(),
                    self.coded_mode.to_string(),
                    self.baseline_mode.to_string(),
                    self.objective.as_str().to_string(),
                    side(&r.coded, |s| s.value.to_string()),
                    side(&r.baseline, |s| s.value.to_string()),
                    pct(r.saving(self.objective)),
                    side(&r.coded, |s| u8::from(s.optimal).to_string()),
                    side(&r.baseline, |s| u8::from(s.optimal).to_string()),
                    u8::from(r.fair()).to_string(),
                    r.coded_variables.to_string(),
                    r.baseline_variables.to_string(),
                    r.codable_pairs.to_string(),
                    side(&r.coded, |s| s.nodes.to_string()),
                    side(&r.baseline, |s| s.nodes.to_string()),
                ];
                if with_status {
                    row.push(r.status());
                }
                row
            })
            .collect()
    }

    /// Comma-separated rows followed by `mean`, `min` and `max` rows that
    /// only fill the saving column.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = Self::COLUMNS.to_vec();
        header.push("status");
        w.write_record(&header).expect("in-memory write");
        for row in self.cells(true) {
            w.write_record(&row).expect("in-memory write");
        }
        let agg = self.aggregate();
        for (label, value) in [("mean", agg.mean), ("min", agg.min), ("max", agg.max)] {
            let mut row = vec![String::new(); header.len()];
            row[0] = label.into();
            row[7] = pct(value);
            row[16] = format!("over {} fair rows of {}", agg.fair_rows, agg.rows);
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    /// Aligned table for humans; with `times`, adds per-row wall times.
    pub fn to_text(&self, times: bool) -> String {
        let mut header: Vec<String> = Self::COLUMNS.iter().map(|s| s.to_string()).collect();
        let mut rows = self.cells(false);
        if times {
            header.push("coded_s".into());
            header.push("baseline_s".into());
            for (cells, r) in rows.iter_mut().zip(&self.rows) {
                cells.push(format!("{:.3}", r.coded_time.as_secs_f64()));
                cells.push(format!("{:.3}", r.baseline_time.as_secs_f64()));
            }
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| {
                rows.iter()
                    .map(|r| r[c].len())
                    .chain([header[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = format!(
            "{} vs {} on {} ({} objective, k {}, capacity {})\n",
            self.coded_mode,
            self.baseline_mode,
            self.topology,
            self.objective.as_str(),
            self.k,
            self.capacity
        );
        out.push_str(&line(&header));
        for r in &rows {
            out.push_str(&line(r));
        }
        for r in &self.rows {
            if !matches!((&r.coded, &r.baseline), (Ok(_), Ok(_))) {
                let _ = writeln!(out, "seed {} demands {}: {}", r.seed, r.demands, r.status());
            }
        }
        let agg = self.aggregate();
        let _ = writeln!(
            out,
            "saving over {} fair rows of {}: mean {} min {} max {}; rows with codable pairs: {} (mean {})",
            agg.fair_rows,
            agg.rows,
            pct(agg.mean),
            pct(agg.min),
            pct(agg.max),
            agg.codable_rows,
            pct(agg.codable_mean)
        );
        out
    }
}

fn solve_side(
    instance: std::result::Result<&Instance, &Error>,
    config: &ExperimentConfig,
) -> (std::result::Result<SideResult, String>, Duration) {
    let instance = match instance {
        Ok(i) => i,
        Err(e) => return (Err(e.to_string()), Duration::ZERO),
    };
    match run_solver(instance, config.solver, config.budget) {
        Ok(r) => {
            let m = &r.solution.metrics;
            let side = SideResult {
                value: m.objective(config.objective),
                routing_cost: m.routing_cost,
                served_demands: m.served_demands,
                optimal: r.proved_optimal,
                nodes: r.nodes_explored,
            };
            (Ok(side), r.wall_time)
        }
        Err(e) => (Err(e.to_string()), Duration::ZERO),
    }
}

/// Solves the coded mode and its uncoded baseline on identical instances:
/// one row per (demand count, seed) for generated demands, a single row for
/// a demand file. Rows run in parallel and are reported in sweep order; a
/// failing solve is recorded in its row without stopping the sweep.
///
/// With `config.out` set, writes the CSV there and the text table next to
/// it with a `.txt` extension.
pub fn cmd_compare(config: &ExperimentConfig) -> Result<ComparisonReport> {
    let topo = config.topology()?;
    let (coded_mode, baseline_mode) = config.mode_pair();
    let jobs: Vec<(usize, u64)> = match &config.demands {
        DemandSource::Generated { .. } => config
            .sizes
            .iter()
            .flat_map(|&n| config.seeds.iter().map(move |&s| (n, s)))
            .collect(),
        DemandSource::File(_) => vec![(0, 0)],
    };
    // Parse errors in a demand file abort the whole command.
    let file_demands = match &config.demands {
        DemandSource::File(_) => Some(config.demands(&topo)?),
        DemandSource::Generated { .. } => None,
    };
    let rows: Vec<ComparisonRow> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let demands = match &file_demands {
                Some(d) => d.clone(),
                None => config.demands_with(&topo, n, seed).expect("generated demands"),
            };
            let build = |kind| build_instance(&topo, &demands, ProblemMode::new(kind, config.objective), config.k);
            let coded_inst = build(coded_mode);
            let baseline_inst = build(baseline_mode);
            let stats = crate::model::model_stats(&topo, &demands, coded_mode);
            let (coded, coded_time) = solve_side(coded_inst.as_ref(), config);
            let (baseline, baseline_time) = solve_side(baseline_inst.as_ref(), config);
            ComparisonRow {
                seed,
                demands: demands.len(),
                coded,
                baseline,
                coded_variables: crate::design::variable_count_for(coded_mode, &stats),
                baseline_variables: crate::design::variable_count_for(baseline_mode, &stats),
                codable_pairs: coded_inst.as_ref().map_or(0, |i| i.coding.len()),
                coded_time,
                baseline_time,
            }
        })
        .collect();
    let report = ComparisonReport {
        topology: config.topology.label(),
        coded_mode,
        baseline_mode,
        objective: config.objective,
        k: config.k,
        capacity: topo.max_capacity(),
        rows,
    };
    if let Some(path) = &config.out {
        write(path, &report.to_csv())?;
        write(&path.with_extension("txt"), &report.to_text(false))?;
    }
    Ok(report)
}

/// Result of `verify`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyOutcome {
    pub passed: bool,
    /// First failure, naming the scenario, violation or condition.
    pub failure: Option<String>,
    pub scenarios: usize,
    /// Per-(scenario, demand) outcome rows in the trace.
    pub outcome_rows: usize,
    pub trace: String,
}

/// Audits a solution file, cuts every fiber in turn with seeded 256-bit
/// payloads, and checks encryption of confidential demands with seeded
/// payloads of [`SECURITY_MIN_BITS`] bits. Writes the trace to `out` when
/// given. Parse errors are returned as errors; failed checks are reported
/// in the outcome.
pub fn cmd_verify(solution_text: &str, payload_seed: u64, out: Option<&FsPath>) -> Result<VerifyOutcome> {
    let (instance, solution) = parse_solution(solution_text)?;
    let topo = &instance.topology;
    let mut trace = String::from("# ncopt verification trace\n");
    let _ = writeln!(
        trace,
        "verify {} {} payload_seed {} payload_bits {} edges {} served {}",
        instance.mode.kind,
        instance.mode.objective.as_str(),
        payload_seed,
        SWEEP_PAYLOAD_BITS,
        topo.edges().len(),
        solution.assignments.len()
    );
    let mut failure = None;
    let mut scenarios = 0;
    let mut outcome_rows = 0;

    let violations = validate_solution(&instance, &solution);
    for v in &violations {
        let _ = writeln!(trace, "violation {v}");
    }
    if let Some(v) = violations.first() {
        failure = Some(format!("violation {v}"));
    }

    if failure.is_none() {
        let payloads = random_payloads(&instance, SWEEP_PAYLOAD_BITS, payload_seed);
        for e in topo.edges() {
            let scenario = FailureScenario { failed_edge: e.id };
            match simulate_failure(&instance, &solution, scenario, &payloads) {
                Ok(t) => {
                    scenarios += 1;
                    for o in &t.outcomes {
                        outcome_rows += 1;
                        let _ = write!(
                            trace,
                            "fail {} {}-{} demand {} {}",
                            e.id,
                            e.a,
                            e.b,
                            o.demand,
                            o.outcome.as_str()
                        );
                        if let Outcome::RecoveredByDecode {
                            surviving_working,
                            encoded,
                        } = &o.outcome
                        {
                            let _ = write!(trace, " inputs {surviving_working} {encoded}");
                        }
                        trace.push('\n');
                    }
                }
                Err(err) => {
                    failure = Some(format!("scenario edge {} ({}-{}): {err}", e.id, e.a, e.b));
                    break;
                }
            }
        }
    }

    let confidential = solution
        .assignments
        .iter()
        .any(|a| instance.demand(a.demand).is_some_and(|d| d.confidential));
    if failure.is_none() && confidential {
        let payloads = random_payloads(&instance, SECURITY_MIN_BITS, payload_seed);
        match check_security(&instance, &solution, &payloads) {
            Ok(report) => {
                for s in &report.outcomes {
                    let _ = writeln!(
                        trace,
                        "security {} carrier {} taps {} ones {:.4} disagreement {:.4} extra {} decode {}",
                        s.demand,
                        s.carrier,
                        s.tapped_links,
                        s.ciphertext_ones_fraction,
                        s.plaintext_disagreement,
                        s.extra_channel_links,
                        if s.decoded_ok { "ok" } else { "wrong" }
                    );
                }
            }
            Err(err) => failure = Some(err.to_string()),
        }
    }

    match &failure {
        None => trace.push_str("result pass\n"),
        Some(f) => {
            let _ = writeln!(trace, "result fail {f}");
        }
    }
    if let Some(path) = out {
        write(path, &trace)?;
    }
    Ok(VerifyOutcome {
        passed: failure.is_none(),
        failure,
        scenarios,
        outcome_rows,
        trace,
    })
}

/// Instance sizes and formulation sizes of both modes of the configured pair.
pub fn cmd_stats(config: &ExperimentConfig) -> Result<String> {
    let topo = config.topology()?;
    let demands = config.demands(&topo)?;
    let (coded, baseline) = config.mode_pair();
    let channel = match coded.technology() {
        Technology::Opaque => "channels",
        Technology::Transparent => "|W|",
        Technology::Elastic => "|S|",
    };
    let mut out = String::new();
    let first = build_instance(&topo, &demands, ProblemMode::max_throughput(baseline), config.k)?;
    let s = first.stats;
    let _ = writeln!(
        out,
        "|D| {}  |V| {}  |E| {} links ({} fibers)  {} {}  k {}",
        s.num_demands,
        s.num_nodes,
        s.num_links,
        topo.edges().len(),
        channel,
        s.capacity_per_link,
        config.k
    );
    let _ = writeln!(
        out,
        "{:<7}  {:<16}  {:>12}  {:>10}  {:>7}",
        "mode", "family", "variables", "candidates", "codable"
    );
    let mut counts = Vec::new();
    for kind in [baseline, coded] {
        let inst = build_instance(&topo, &demands, ProblemMode::max_throughput(kind), config.k)?;
        let vars = variable_count(&inst);
        counts.push(vars);
        let candidates: usize = inst.candidates.iter().map(Vec::len).sum();
        let _ = writeln!(
            out,
            "{:<7}  {:<16}  {:>12}  {:>10}  {:>7}",
            kind.as_str(),
            kind.complexity_family(),
            vars,
            candidates,
            inst.coding.len()
        );
    }
    let _ = writeln!(
        out,
        "variables = {} x |D| x |E| [x |V| coded]{}",
        crate::design::VARIABLE_COUNT_FACTOR,
        match coded.technology() {
            Technology::Opaque => "",
            Technology::Transparent => " x |W|",
            Technology::Elastic => " x |S|",
        }
    );
    if counts[0] > 0 {
        let _ = writeln!(out, "coded / uncoded = {:.2}", counts[1] as f64 / counts[0] as f64);
    }
    Ok(out)
}

/// Summary and canonical rendering of a topology.
pub fn cmd_topo(source: &TopologySource, capacity: Option<u32>) -> Result<String> {
    let topo = match source {
        TopologySource::Builtin => builtin_cost239(capacity.unwrap_or(COST239_DEFAULT_CAPACITY)),
        TopologySource::File(path) => {
            let t = load_topology(&read(path)?)?;
            match capacity {
                Some(c) => t.with_uniform_capacity(c)?,
                None => t,
            }
        }
    };
    let bridges = topo.bridges();
    let degrees: Vec<String> = topo
        .nodes()
        .iter()
        .map(|&n| format!("{n}:{}", topo.degree(n)))
        .collect();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} ({}): {} nodes, {} fibers, {} links, max capacity {}",
        topo.name(),
        topo.spectrum().as_str(),
        topo.nodes().len(),
        topo.edges().len(),
        topo.links().len(),
        topo.max_capacity()
    );
    let _ = writeln!(out, "# degrees {}", degrees.join(" "));
    let _ = writeln!(
        out,
        "# connected {}, bridges {}",
        if topo.is_connected() { "yes" } else { "no" },
        if bridges.is_empty() {
            "none".to_string()
        } else {
            bridges.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(",")
        }
    );
    out.push_str(&topo.render());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;
    use crate::solver::SolverBudget;

    fn protected_pair_solution(kind: ProblemKind) -> (Instance, DesignSolution) {
        let (t, d) = scenarios::protected_pair(4);
        let inst = build_instance(&t, &d, ProblemMode::min_cost(kind), 4).unwrap();
        let sol = solve_exact(&inst, SolverBudget::default()).unwrap().solution;
        (inst, sol)
    }

    #[test]
    fn solution_round_trip() {
        for kind in ProblemKind::ALL {
            let (inst, sol) = protected_pair_solution(kind);
            let text = render_solution(&inst, &sol);
            let (inst2, sol2) = parse_solution(&text).unwrap();
            assert_eq!(sol2, sol, "{kind}");
            assert_eq!(inst2.demands, inst.demands);
            assert_eq!(inst2.topology, inst.topology);
            assert_eq!(render_solution(&inst2, &sol2), text);
        }
    }

    #[test]
    fn verify_protected_pair() {
        let (inst, sol) = protected_pair_solution(ProblemKind::Rnca);
        let v = cmd_verify(&render_solution(&inst, &sol), 7, None).unwrap();
        assert!(v.passed, "{:?}", v.failure);
        assert_eq!(v.scenarios, 5);
        assert_eq!(v.outcome_rows, 10);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let (inst, sol) = protected_pair_solution(ProblemKind::Rwa);
        let text = render_solution(&inst, &sol).replace("assign 1 work", "assign 1 wrok");
        let line = text.lines().position(|l| l.contains("wrok")).unwrap() + 1;
        match parse_solution(&text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::parse(1, "x")), EXIT_PARSE);
        assert_eq!(exit_code(&Error::BudgetExhausted), EXIT_BUDGET);
        assert_eq!(
            exit_code(&Error::Infeasible {
                demand: None,
                reason: String::new()
            }),
            EXIT_INFEASIBLE
        );
        assert_eq!(exit_code(&Error::Inconsistent(String::new())), EXIT_VERIFY);
    }
}
