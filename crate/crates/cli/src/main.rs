use clap::{Parser, Subcommand};
use hfon_cli::{clusters_command, predict_command, run_command, CliError, ConsensusInputs, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulate hierarchical fuzzy opinion networks.
#[derive(Debug, Parser)]
#[command(name = "hfon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file or built-in and write its trajectory and summary.
    Run {
        /// Path to a TOML scenario, or a built-in name such as `example3`.
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Write every k-th step (the last step is always written).
        #[arg(long)]
        stride: Option<usize>,
        /// Exit with status 2 if any predictor check fails.
        #[arg(long)]
        check: bool,
        /// Cluster gap for the summary.
        #[arg(long)]
        gap: Option<f64>,
        /// Consensus tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evaluate the post-consensus closed forms of a leader-follower group.
    Predict {
        /// Number of followers.
        #[arg(long)]
        n: usize,
        /// Error fraction for the steps-to-error estimate.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Common center right after consensus.
        #[arg(long, requires_all = ["sigma", "leader", "b"])]
        center: Option<f64>,
        #[arg(long, requires = "center")]
        sigma: Option<f64>,
        #[arg(long, requires = "center")]
        leader: Option<f64>,
        #[arg(long, requires = "center")]
        b: Option<f64>,
        /// Steps after the first post-consensus step.
        #[arg(long, default_value_t = 0)]
        offset: usize,
    },
    /// Report the clusters at the last step of a trajectory file.
    Clusters {
        trajectory: PathBuf,
        #[arg(long)]
        gap: Option<f64>,
    },
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run { scenario, seed, out, stride, check, gap, tol } => {
            let overrides = Overrides { seed, stride, gap, tol };
            let report = run_command(&scenario, &overrides, &out)?;
            let summary = &report.output.summary;
            println!("{}", report.trajectory_path.display());
            println!("{}", report.summary_path.display());
            for c in summary.predictor_checks.iter().filter(|c| !c.pass) {
                eprintln!(
                    "check {} failed: expected {}, actual {}, tolerance {}",
                    c.name, c.expected, c.actual, c.tolerance
                );
            }
            if check && !summary.checks_pass() {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Predict { n, epsilon, center, sigma, leader, b, offset } => {
            let consensus = match (center, sigma, leader, b) {
                (Some(center), Some(sigma), Some(leader), Some(b)) => {
                    Some(ConsensusInputs { center, sigma, leader, b, offset })
                }
                _ => None,
            };
            print_json(&predict_command(n, epsilon, consensus)?)?;
        }
        Command::Clusters { trajectory, gap } => {
            print_json(&clusters_command(&trajectory, gap)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hfon: {e}");
            ExitCode::from(1)
        }
    }
}
