use std::path::PathBuf;
use std::panic;
use std::process;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use bellharness::cli::{self, exit};

#[derive(Parser)]
#[command(name = "bellharness", version, about = "Bell experiment simulator and assumption audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment in a config file and write the trial log.
    Simulate {
        config: PathBuf,
        #[arg(short = 'o', long = "out")]
        out_dir: PathBuf,
    },
    /// Estimate the Bell statistic of a trial log and audit it.
    Analyze {
        log: PathBuf,
        /// TOML file whose [table] section gives the setting directions.
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value_t = 0.99)]
        confidence: f64,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Locality audit of the slab index of a density family.
    HpAudit {
        config: PathBuf,
        #[arg(short = 'o', long = "out")]
        out: Option<PathBuf>,
    },
    /// Brute-force the parity facts over all sixteen quadruples.
    Oracle,
}

fn main() {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::CONFIG,
            };
            let _ = e.print();
            process::exit(code);
        }
    };
    let run = move || match args.command {
        Command::Simulate { config, out_dir } => cli::cmd_simulate(&config, &out_dir),
        Command::Analyze { log, table, confidence, out } => cli::cmd_analyze(&log, &table, confidence, out.as_deref()),
        Command::HpAudit { config, out } => cli::cmd_hp_audit(&config, out.as_deref()),
        Command::Oracle => cli::cmd_oracle(),
    };
    // a panic is an internal contract failure; keep the exit code set closed
    let code = panic::catch_unwind(run).unwrap_or(exit::CONTRACT);
    process::exit(code);
}
