use std::path::PathBuf;

use clap::{Parser, Subcommand};

use cgl_core::cli;

/// Complex Ginzburg-Landau splitting runs, parameter sweeps and law checks.
#[derive(Parser)]
#[command(name = "cgl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write its energy records as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `out_path` from the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat a run over several values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of mu, epsilon, dt, amplitude.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the randomized inequality suite and print a report table.
    Check {
        #[arg(long, default_value_t = cli::DEFAULT_CHECK_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Corrupt the pointwise-bound constant to exercise the failure path.
        #[arg(long)]
        inject_fault: bool,
        /// Also write the reports as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            std::process::exit(if e.use_stderr() { cli::EXIT_CONFIG } else { cli::EXIT_OK });
        }
    };
    let code = match args.command {
        Command::Run { config, out } => cli::cmd_run(&config, out.as_deref()),
        Command::Sweep {
            config,
            axis,
            values,
            out_dir,
        } => cli::cmd_sweep(&config, &axis, &values, &out_dir),
        Command::Check {
            samples,
            seed,
            inject_fault,
            csv,
        } => cli::cmd_check(samples, seed, inject_fault, csv.as_deref()),
    };
    std::process::exit(code);
}
