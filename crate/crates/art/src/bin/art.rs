use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use art_framework::error::ArtError;
use art_framework::experiments::{
    run_consensus_compare, run_convergence, run_quality_rounds, ExperimentKind, ExperimentSpec,
};
use art_framework::service::{self, AgentRegistration, ServeOptions};

#[derive(Parser)]
#[command(name = "art", about = "Agent rating tournament engine", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a deterministic mock-agent simulation and emit CSV.
    Simulate {
        #[command(subcommand)]
        experiment: SimulateCommand,
    },
    /// Start the HTTP service.
    Serve(ServeArgs),
    /// Agent management.
    Agents {
        #[command(subcommand)]
        command: AgentsCommand,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of seeds (runs 0..N).
    #[arg(long, default_value_t = 100)]
    seeds: u64,
    /// Tournaments chained per seed.
    #[arg(long, default_value_t = 10)]
    tournaments: u32,
    /// Disable between-round response improvement.
    #[arg(long)]
    no_improvement: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Rating trajectories over chained tournaments.
    Convergence(SimulateArgs),
    /// Per-round quality means across the four dimensions.
    Quality(SimulateArgs),
    /// Paired comparison of the four consensus strategies.
    Consensus(SimulateArgs),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "ART_PORT", default_value_t = service::DEFAULT_PORT)]
    port: u16,
    /// Event log directory; omit for in-memory operation.
    #[arg(long, env = "ART_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// TOML tournament config used as the service default.
    #[arg(long, env = "ART_CONFIG_FILE")]
    config_file: Option<PathBuf>,
    /// Master seed for mock agent noise.
    #[arg(long, env = "ART_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum AgentsCommand {
    /// Register a mock agent in a data directory.
    Add {
        name: String,
        /// Latent quality in [0, 1].
        quality: f64,
        #[arg(long, env = "ART_DATA_DIR")]
        data_dir: PathBuf,
        /// Master seed used to derive the agent's noise seed.
        #[arg(long, env = "ART_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn spec_for(kind: ExperimentKind, args: &SimulateArgs) -> ExperimentSpec {
    ExperimentSpec {
        seeds: (0..args.seeds).collect(),
        tournaments: args.tournaments,
        improvement: !args.no_improvement,
        ..ExperimentSpec::new(kind)
    }
}

fn write_output(csv: &str, out: Option<&PathBuf>) -> art_framework::Result<()> {
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn run(cli: Cli) -> art_framework::Result<()> {
    match cli.command {
        Command::Simulate { experiment } => {
            let (csv, out) = match &experiment {
                SimulateCommand::Convergence(args) => (
                    run_convergence(&spec_for(ExperimentKind::Convergence, args))?.csv,
                    args.out.clone(),
                ),
                SimulateCommand::Quality(args) => (
                    run_quality_rounds(&spec_for(ExperimentKind::QualityRounds, args))?.csv,
                    args.out.clone(),
                ),
                SimulateCommand::Consensus(args) => (
                    run_consensus_compare(&spec_for(ExperimentKind::ConsensusCompare, args))?.csv,
                    args.out.clone(),
                ),
            };
            write_output(&csv, out.as_ref())
        }
        Command::Serve(args) => {
            let options = ServeOptions {
                port: args.port,
                data_dir: args.data_dir,
                config_file: args.config_file,
                seed: args.seed,
            };
            tokio::runtime::Runtime::new()?.block_on(service::serve(options))
        }
        Command::Agents {
            command:
                AgentsCommand::Add {
                    name,
                    quality,
                    data_dir,
                    seed,
                },
        } => {
            let store = std::sync::Arc::new(std::sync::Mutex::new(
                art_framework::persistence::EventStore::open(&data_dir)?,
            ));
            let registry = std::sync::Arc::new(std::sync::Mutex::new(
                art_framework::agent::AgentRegistry::new(),
            ));
            // surface duplicates recorded in the log as a conflict
            for existing in store.lock().unwrap().registrations()? {
                if existing.name == name {
                    return Err(ArtError::Conflict(format!(
                        "agent '{name}' already registered"
                    )));
                }
            }
            let record = service::register_mock_agent(
                &registry,
                Some(&store),
                seed,
                &AgentRegistration {
                    name,
                    quality: Some(quality),
                    seed: None,
                    description: None,
                },
            )?;
            println!("registered {} (agent_id {})", record.name, record.agent_id);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                ArtError::Validation(_) | ArtError::InvalidArgument(_) | ArtError::Conflict(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::FAILURE,
            }
        }
    }
}
