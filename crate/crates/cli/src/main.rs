use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use popdyn_cli::commands::{execute, CommandKind};
use popdyn_cli::config::{Coords, Overrides};

/// Explosive population models in reciprocal coordinates.
#[derive(Parser)]
#[command(name = "popdyn", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory to CSV, with a JSON sidecar report.
    Simulate(CommonArgs),
    /// Classify a predator-prey orbit or a competing-species system.
    Classify(CommonArgs),
    /// Floquet multipliers and the periodic solution of a forced system.
    Floquet(CommonArgs),
    /// Count periodic solutions of an Abel equation.
    Abel(CommonArgs),
    /// Draw a phase portrait as SVG.
    Portrait(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file (CSV for simulate, SVG for portrait, JSON otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    coords: Option<Coords>,
    /// Output samples, or sweep instances for `abel --seed`.
    #[arg(long)]
    samples: Option<usize>,
    /// Seed of the randomized Abel sweep.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Simulate(a) => (CommandKind::Simulate, a),
        Command::Classify(a) => (CommandKind::Classify, a),
        Command::Floquet(a) => (CommandKind::Floquet, a),
        Command::Abel(a) => (CommandKind::Abel, a),
        Command::Portrait(a) => (CommandKind::Portrait, a),
    };
    let over = Overrides {
        samples: args.samples,
        coords: args.coords,
        seed: args.seed,
    };
    let result = execute(kind, &args.config, args.out.as_deref(), over).and_then(|output| {
        output.commit()?;
        Ok(output)
    });
    match result {
        Ok(output) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(output.stdout.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("popdyn {}: {e}", kind.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
