use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cartankit::cli_io::{emit_outputs, parse_config_with, run_command, Command, Overrides, Status};

/// Validate, develop and reconstruct Maurer-Cartan forms from a JSON configuration.
#[derive(Parser, Debug)]
#[command(name = "cartankit", version)]
struct Cli {
    /// validate | develop | monodromy | reconstruct | roundtrip | frenet | symmetry
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Integration step in parameter length.
    #[arg(long)]
    step: Option<f64>,
    /// Pass/fail threshold of the command.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CARTANKIT_LOG", "warn")).init();
    let cli = Cli::parse();
    let overrides = Overrides {
        step: cli.step,
        tol: cli.tol,
        seed: cli.seed,
    };
    let cfg = std::fs::read_to_string(&cli.config)
        .map_err(cartankit::Error::from)
        .and_then(|text| parse_config_with(&text, &overrides));
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", cli.config.display());
            return ExitCode::from(Status::ConfigError.exit_code() as u8);
        }
    };
    let report = run_command(cli.command, &cfg);
    match emit_outputs(&report, &cfg, &cli.out) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("writing outputs: {e}");
            return ExitCode::from(Status::ConfigError.exit_code() as u8);
        }
    }
    println!("{}", report.headline());
    ExitCode::from(report.exit_code() as u8)
}
