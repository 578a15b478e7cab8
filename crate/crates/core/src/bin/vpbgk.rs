use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vpbgk::cli::{execute_run, execute_study, parse_config, ParsedConfig, RunOptions};

#[derive(Parser)]
#[command(
    name = "vpbgk",
    version,
    about = "IMEX finite-difference solver for 1D Vlasov-Poisson-BGK"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for all output files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Write macro snapshots and distribution dumps at every diagnostics record.
    #[arg(long, global = true)]
    snapshots: bool,

    /// Use one precomputed step size instead of the adaptive CFL step.
    #[arg(long, global = true)]
    fixed_dt: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration to its final time.
    Run { config: PathBuf },
    /// Run a nested-grid convergence study (config must set `levels`).
    Study { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        snapshots: cli.snapshots,
        fixed_dt: cli.fixed_dt,
    };
    let result = match &cli.command {
        Command::Run { config } => parse_config(config).and_then(|parsed| match parsed {
            ParsedConfig::Run(cfg) => execute_run(&cfg, &cli.out_dir, &opts).map(|(_, m)| m),
            ParsedConfig::Study(_) => Err(vpbgk::Error::Config(
                "config sets `levels`; use the study subcommand".into(),
            )),
        }),
        Command::Study { config } => parse_config(config).and_then(|parsed| match parsed {
            ParsedConfig::Study(study) => {
                let r = execute_study(&study, &cli.out_dir, &opts);
                if let Ok((outcome, _)) = &r {
                    print!("{}", vpbgk::cli::render_report(&outcome.report));
                }
                r.map(|(_, m)| m)
            }
            ParsedConfig::Run(_) => Err(vpbgk::Error::Config("study config must set `levels`".into())),
        }),
    };
    match result {
        Ok(manifest) => {
            for p in &manifest.outputs {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
