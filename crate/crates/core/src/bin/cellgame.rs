use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cellgame::harness::{self, Scenario};
use cellgame::Result;

/// Association and power-control games: dynamics, equilibria, tolls, PoA.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory. Defaults to `$CELLGAME_OUT/<name>`, else `out/<name>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario file.
    Run {
        scenario: PathBuf,
        /// Replaces the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run one of the built-in examples (1 to 7).
    Example {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=7))]
        k: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Price-of-anarchy sweep for a single class.
    Sweep {
        /// Comma-separated gains, one per base station.
        #[arg(long, value_delimiter = ',', required_unless_present = "random_bs", conflicts_with = "random_bs")]
        gains: Vec<f64>,
        /// Draw this many uniform (0, 1] gains instead.
        #[arg(long)]
        random_bs: Option<usize>,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        /// Even grid points; spill-over masses are always added.
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Comma-separated masses replacing the grid.
        #[arg(long, value_delimiter = ',')]
        masses: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn default_out(name: &str) -> PathBuf {
    match std::env::var_os("CELLGAME_OUT") {
        Some(base) => Path::new(&base).join(name),
        None => Path::new("out").join(name),
    }
}

fn sweep_scenario(
    gains: Vec<f64>,
    random_bs: Option<usize>,
    gamma: f64,
    noise: f64,
    points: usize,
    masses: Option<Vec<f64>>,
    seed: u64,
) -> Result<Scenario> {
    let mut v = json!({
        "name": "sweep",
        "experiment": "poa_sweep",
        "seed": seed,
        "sweep": { "points": points, "masses": masses },
    });
    match random_bs {
        Some(n) => {
            v["random"] = json!({ "num_bs": n, "sinr_set": [gamma], "noise_power": noise });
        }
        None => v["instance"] = json!({ "gains": gains, "gamma": gamma, "noise_power": noise }),
    }
    harness::parse_scenario_str(&v.to_string(), "command line")
}

fn execute(cli: Cli) -> Result<()> {
    let (scenario, out) = match cli.command {
        Command::Run { scenario, seed, out } => {
            let sc = harness::parse_scenario_with_seed(&scenario, seed)?;
            let dir = out.out.or_else(|| sc.output_dir.clone()).unwrap_or_else(|| default_out(&sc.name));
            (sc, dir)
        }
        Command::Example { k, seed, out } => {
            let sc = Scenario::example(k)?.with_seed(seed);
            let dir = out.out.unwrap_or_else(|| default_out(&format!("example{k}")));
            (sc, dir)
        }
        Command::Sweep {
            gains,
            random_bs,
            gamma,
            noise,
            points,
            masses,
            seed,
            out,
        } => {
            let sc = sweep_scenario(gains, random_bs, gamma, noise, points, masses, seed)?;
            let dir = out.out.unwrap_or_else(|| default_out(&sc.name));
            (sc, dir)
        }
    };
    let summary = harness::run_scenario(&scenario, &out)?;
    println!("{}", summary.message);
    println!("artifacts in {}: {}", out.display(), summary.files.join(", "));
    eprintln!("wall time {:.3} s", summary.wall_time.as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors count as bad input; clap's own code 2 means a solver failure here.
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
