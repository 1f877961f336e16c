use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use packlab::adversary::{play, Adversary};
use packlab::harness::{
    curve_to_text, parse_ratio, ratio_curve, rows_to_csv, sweep, verify, write_text, SweepConfig,
    VerifyOptions,
};
use packlab::model::TraceFile;
use packlab::oracle::opt_packing;
use packlab::{Error, Params, Policy, Result};

#[derive(Debug, Parser)]
#[command(
    name = "packlab",
    version,
    about = "Online packing of two item sizes into variable-sized bins"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a parameter sweep described by a TOML file and write CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the seeded property suite and print a JSON report.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Negate UseLs in the 2-Phase-Packer to check that the suite notices.
        #[arg(long)]
        mutant: bool,
    },
    /// Play one game and print the result as JSON.
    Game {
        #[arg(long)]
        policy: String,
        /// adaptive | example1..example4 | random
        #[arg(long)]
        adversary: String,
        #[arg(long = "S")]
        small_size: u64,
        #[arg(long = "s")]
        s: u64,
        #[arg(long = "l")]
        l: u64,
        #[arg(long)]
        best_response: bool,
        /// Seed for the random adversary.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Solve a trace file's bin sequence optimally; stored fills are ignored.
    Opt { file: PathBuf },
    /// Emit the measured ratio curve of the 2-Phase-Packer.
    Curve {
        #[arg(long = "S")]
        small_size: u64,
        #[arg(long, default_value = "1/10")]
        step: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Sweep { config } => {
            let cfg = SweepConfig::load(&config)?;
            let csv = rows_to_csv(&sweep(&cfg)?);
            match &cfg.output {
                Some(path) => write_text(path, &csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            trials,
            seed,
            mutant,
        } => {
            let report = verify(&VerifyOptions {
                seed,
                trials,
                flip_use_ls: mutant,
            })?;
            println!("{}", report.to_json());
            Ok(if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Game {
            policy,
            adversary,
            small_size,
            s,
            l,
            best_response,
            seed,
        } => {
            let p = Params::new(small_size)?;
            let policy: Policy = policy.parse()?;
            let adversary = if adversary == "random" {
                Adversary::Random { seed }
            } else {
                Adversary::parse(&adversary, best_response)?
            };
            let game = play(policy, &adversary, s, l, &p)?;
            println!("{}", game.to_json(&adversary.name()));
            Ok(ExitCode::SUCCESS)
        }
        Command::Opt { file } => {
            let text = std::fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            let instance: TraceFile = serde_json::from_str(&text)?;
            let p = instance.params()?;
            let sigma = instance.bins();
            let out = match opt_packing(&sigma, instance.initial_s, instance.initial_l, &p)? {
                Some(trace) => {
                    json!({"feasible": true, "cost": trace.cost(), "trace": trace.to_file()})
                }
                None => json!({"feasible": false, "cost": null, "trace": null}),
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Curve {
            small_size,
            step,
            out,
        } => {
            let p = Params::new(small_size)?;
            let rows = ratio_curve(&p, parse_ratio(&step)?)?;
            let text = curve_to_text(&p, &rows);
            match out {
                Some(path) => write_text(&path, &text)?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
