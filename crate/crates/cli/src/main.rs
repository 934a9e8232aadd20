// Copyright 2026 The dissipative-lmg Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lmg_cli::Command;

/// Dissipative LMG scenarios. Exit status: 0 success, 1 error, 2 invariant
/// violation. A manifest.json is written to the output directory in every case.
#[derive(Parser)]
#[command(version)]
struct Args {
    command: Command,
    /// Flat JSON config for the command.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match lmg_cli::run(args.command, &args.config, &args.out) {
        Ok(outcome) => {
            let m = &outcome.manifest;
            for check in &m.invariants.checks {
                println!("{}", check.line());
            }
            for path in &m.outputs {
                println!("wrote {path}");
            }
            if let Some(e) = &m.error {
                eprintln!("error: {e}");
            }
            println!("{:?} ({:.1} s)", m.status, m.wall_time_s);
            ExitCode::from(outcome.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
