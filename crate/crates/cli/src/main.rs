use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ptchain_cli::cookbook::{figure_cookbook, FIGURES};
use ptchain_cli::{run, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "ptchain", version, about = "Entanglement experiments on non-Hermitian SSH-type chains")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML file.
    Run { config: PathBuf },
    /// Parse and check a config without running it.
    Validate { config: PathBuf },
    /// Regenerate a bundled figure.
    Fig {
        /// Figure name, or `list`.
        name: String,
        /// Divide every length by this factor for a quick look.
        #[arg(long, default_value_t = 1)]
        scale: usize,
        /// Output directory (default figures/<name>).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the config as TOML instead of running it.
        #[arg(long)]
        emit_config: bool,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

fn execute(config: &ExperimentConfig) -> Result<(), RunError> {
    let report = run(config);
    println!("{}", serde_json::to_string_pretty(&report.manifest).expect("manifest serializes"));
    report.result
}

fn main_inner(cli: Cli) -> Result<(), RunError> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| RunError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Run { config } => execute(&load(&config)?),
        Command::Validate { config } => {
            let c = load(&config)?;
            println!("ok: task {} writes to {}", c.task.name(), c.output.dir);
            Ok(())
        }
        Command::Fig { name, .. } if name == "list" => {
            FIGURES.iter().for_each(|f| println!("{f}"));
            Ok(())
        }
        Command::Fig {
            name,
            scale,
            out,
            emit_config,
        } => {
            if scale == 0 {
                return Err(RunError::Config("--scale must be at least 1".into()));
            }
            let mut c = figure_cookbook(&name)?.scaled(scale);
            if let Some(out) = out {
                c.output.dir = out.to_string_lossy().into_owned();
            }
            c.validate()?;
            if emit_config {
                print!("{}", toml::to_string(&c).map_err(|e| RunError::Config(e.to_string()))?);
                return Ok(());
            }
            execute(&c)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptchain: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
