use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use ncopt::bench::{self, DemandSource, ExperimentConfig, SolverChoice, TopologySource};
use ncopt::design::{Objective, ProblemKind};
use ncopt::solver::SolverBudget;

#[derive(Parser)]
#[command(
    name = "ncopt",
    version,
    about = "Survivable optical network design with XOR-coded protection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write the solution file.
    Solve(Common),
    /// Solve coded and uncoded variants of the same instances side by side.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated seeds swept when demands are generated.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17,18,19,20"
        )]
        seeds: Vec<u64>,
        /// Comma-separated demand counts swept when demands are generated.
        #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
        sizes: Vec<usize>,
    },
    /// Check a solution file, sweep single-fiber cuts and test encryption.
    Verify {
        solution: PathBuf,
        #[arg(long, default_value_t = 1)]
        payload_seed: u64,
        /// Trace output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print instance and formulation sizes for a mode pair.
    Stats(Common),
    /// Print the builtin topology or inspect a topology file.
    Topo {
        #[arg(long, default_value = "cost239")]
        topology: String,
        #[arg(long)]
        capacity: Option<u32>,
    },
}

#[derive(Args)]
struct Common {
    /// Topology file, or `cost239` for the builtin network.
    #[arg(long, default_value = "cost239")]
    topology: String,
    #[arg(long, conflicts_with = "gen")]
    demands: Option<PathBuf>,
    /// Generate this many random demands.
    #[arg(long)]
    gen: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest generated rate; defaults to 4 in elastic modes and 1 otherwise.
    #[arg(long)]
    rate_max: Option<u32>,
    #[arg(long, default_value = "rnca")]
    mode: ProblemKind,
    #[arg(long, default_value = "cost")]
    objective: Objective,
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Uniform per-link capacity override.
    #[arg(long)]
    capacity: Option<u32>,
    #[arg(long, default_value = "exact")]
    solver: SolverChoice,
    #[arg(long)]
    budget_nodes: Option<u64>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(self) -> ExperimentConfig {
        let mut config = ExperimentConfig::canonical(self.mode, self.objective);
        let rate_max = self.rate_max.unwrap_or(match config.demands {
            DemandSource::Generated { rate_max, .. } => rate_max,
            DemandSource::File(_) => 1,
        });
        config.topology = TopologySource::parse(&self.topology);
        config.demands = match self.demands {
            Some(path) => DemandSource::File(path),
            None => DemandSource::Generated {
                count: self.gen.unwrap_or(10),
                seed: self.seed,
                rate_max,
            },
        };
        // A topology file keeps its own capacities unless told otherwise.
        if self.capacity.is_some() || config.topology != TopologySource::Builtin {
            config.capacity = self.capacity;
        }
        config.k = self.k;
        config.solver = self.solver;
        let mut budget = SolverBudget {
            seed: Some(self.seed),
            ..SolverBudget::default()
        };
        if let Some(n) = self.budget_nodes {
            budget.max_nodes = n;
        }
        if let Some(s) = self.time_limit {
            budget.time_limit = Duration::from_secs_f64(s.max(0.0));
        }
        config.budget = budget;
        config.out = self.out;
        config
    }
}

fn run(cli: Cli) -> ncopt::Result<i32> {
    match cli.command {
        Command::Solve(common) => {
            let outcome = bench::cmd_solve(&common.config())?;
            println!("{}", outcome.summary());
        }
        Command::Compare { common, seeds, sizes } => {
            let mut config = common.config();
            config.seeds = seeds;
            config.sizes = sizes;
            let report = bench::cmd_compare(&config)?;
            print!("{}", report.to_text(true));
        }
        Command::Verify {
            solution,
            payload_seed,
            out,
        } => {
            let text = std::fs::read_to_string(&solution)
                .map_err(|e| ncopt::Error::Io(format!("{}: {e}", solution.display())))?;
            let outcome = bench::cmd_verify(&text, payload_seed, out.as_deref())?;
            match &outcome.failure {
                None => println!(
                    "pass: {} scenarios, {} outcome rows",
                    outcome.scenarios, outcome.outcome_rows
                ),
                Some(f) => {
                    eprintln!("verification failed: {f}");
                    return Ok(bench::EXIT_VERIFY);
                }
            }
        }
        Command::Stats(common) => print!("{}", bench::cmd_stats(&common.config())?),
        Command::Topo { topology, capacity } => {
            print!("{}", bench::cmd_topo(&TopologySource::parse(&topology), capacity)?)
        }
    }
    Ok(bench::EXIT_OK)
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            bench::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
