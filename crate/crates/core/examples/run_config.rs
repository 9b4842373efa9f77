//! Runs a command on a configuration file and writes its reports.
//!
//! `cargo run --example run_config -- reconstruct configs/circle_rotation.json out`

use std::path::Path;

use cartankit::cli_io::{emit_outputs, parse_config, run_command, Command};

fn main() -> cartankit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let command: Command = args.first().map_or("roundtrip", String::as_str).parse()?;
    let path = args.get(1).map_or("configs/spiral.json", String::as_str);
    let out = args.get(2).map_or("out", String::as_str);
    let cfg = parse_config(&std::fs::read_to_string(path)?)?;
    let report = run_command(command, &cfg);
    for p in emit_outputs(&report, &cfg, Path::new(out))? {
        println!("wrote {}", p.display());
    }
    println!("{} (exit code {})", report.headline(), report.exit_code());
    Ok(())
}
