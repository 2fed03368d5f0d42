use std::path::PathBuf;
use std::process::ExitCode;

use amenable_gibbs::potential::BoundaryCondition;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use commands::{Run, SampleFlags};
use config::WindowSpec;
use output::Format;

#[derive(Debug)]
pub enum CliError {
    /// Exit 2.
    Config(String),
    /// Exit 3: budgets, growth caps and I/O.
    Resource(String),
    /// Exit 1: a computation that could not be certified.
    Numeric(String),
}

impl From<amenable_gibbs::Error> for CliError {
    fn from(e: amenable_gibbs::Error) -> Self {
        use amenable_gibbs::Error as E;
        match e {
            E::Budget { .. } | E::GrowthCap { .. } => CliError::Resource(e.to_string()),
            E::Numeric(_) => CliError::Numeric(e.to_string()),
            E::Usage(_) | E::Capability(_) | E::Config { .. } => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "amenable-gibbs",
    version,
    about = "Certified pressure, kernel and uniqueness computations for shifts over amenable groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment config, TOML (`.toml`) or JSON.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; defaults to `out` in the config or `./out`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest number of patterns one enumeration may visit.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, value_enum, default_value = "both")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Certified pressure bracket.
    Pressure(Common),
    /// Kernel table `γ_K(·, x)` on a truncated alphabet.
    Kernel(Common),
    /// Dobrushin uniqueness certificate for the countable Potts family.
    Dobrushin(Common),
    /// Heat-bath sampler on a finite window.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Lattice box `lo:hi`, coordinates comma-separated, e.g. `0,0:3,3`.
        #[arg(long, value_parser = WindowSpec::parse)]
        window: Option<WindowSpec>,
        #[arg(long)]
        sweeps: Option<u64>,
        /// A letter for a constant boundary, or a JSON boundary condition.
        #[arg(long, value_parser = parse_boundary)]
        boundary: Option<BoundaryCondition>,
    },
    /// Acceptance suite plus invariant checks on the configured potential.
    Verify(Common),
}

fn parse_boundary(s: &str) -> Result<BoundaryCondition, String> {
    if let Ok(a) = s.trim().parse::<u32>() {
        return Ok(BoundaryCondition::constant(a));
    }
    serde_json::from_str(s).map_err(|e| format!("not a letter or a boundary condition: {e}"))
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("AMENABLE_GIBBS_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            CliError::Config(format!(
                "AMENABLE_GIBBS_THREADS must be a positive integer, got `{v}`"
            ))
        })?;
        if n == 0 {
            return Err(CliError::Config(
                "AMENABLE_GIBBS_THREADS must be positive".into(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Resource(e.to_string()))?;
    }
    Ok(())
}

fn load(common: &Common) -> Result<Run, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    Run::new(config::load(path)?, common.seed, common.budget)
}

fn out_dir(common: &Common, run: Option<&Run>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| run.and_then(|r| r.config.out.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Returns the process exit code.
fn execute(cli: Cli) -> Result<u8, CliError> {
    configure_threads()?;
    let (common, run) = match &cli.command {
        Command::Pressure(c)
        | Command::Kernel(c)
        | Command::Dobrushin(c)
        | Command::Sample { common: c, .. } => (c.clone(), Some(load(c)?)),
        Command::Verify(c) => (c.clone(), c.config.as_ref().map(|_| load(c)).transpose()?),
    };
    let (emitted, ok) = match (cli.command, run.as_ref()) {
        (Command::Pressure(_), Some(run)) => (commands::pressure(run)?, true),
        (Command::Kernel(_), Some(run)) => (commands::kernel(run)?, true),
        (Command::Dobrushin(_), Some(run)) => (commands::dobrushin(run)?, true),
        (
            Command::Sample {
                window,
                sweeps,
                boundary,
                ..
            },
            Some(run),
        ) => (
            commands::sample(
                run,
                SampleFlags {
                    window,
                    sweeps,
                    boundary,
                },
            )?,
            true,
        ),
        (Command::Verify(_), run) => {
            let seed = common.seed.or(run.and_then(|r| r.config.seed)).unwrap_or(0);
            commands::verify(run, seed)?
        }
        _ => unreachable!("every other command loads a config"),
    };
    output::emit(&out_dir(&common, run.as_ref()), &emitted, common.format)?;
    Ok(if ok { 0 } else { 4 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let (code, msg) = match e {
                CliError::Config(m) => (2, m),
                CliError::Resource(m) => (3, m),
                CliError::Numeric(m) => (1, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
