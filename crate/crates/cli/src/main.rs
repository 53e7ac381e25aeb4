//! Command-line runner: evaluates named scenarios on the built-in
//! three-interferometer network (or one loaded from a TOML document) and
//! emits deterministic text or JSON reports; `verify` runs the acceptance
//! suite.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use focknet::network::{build_triple_mz, load_network, NetworkDescription};
use focknet::report::{run_scenario, Scenario};
use focknet::verify::{run_all, CRITERIA};

#[derive(Parser)]
#[command(
    name = "focknet",
    about = "Few-photon linear-optics simulator: three coupled interferometers, \
             post-selection, weak values",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its report.
    Run {
        /// Scenario to evaluate.
        #[arg(long, value_enum)]
        scenario: ScenarioArg,
        /// Network description document (TOML); defaults to the built-in
        /// triple Mach-Zehnder network.
        #[arg(long)]
        network: Option<PathBuf>,
        /// Output format.
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the acceptance suite and print one pass/fail line per criterion.
    Verify {
        /// List criterion identifiers without running them.
        #[arg(long)]
        list: bool,
        /// Network description document (TOML); defaults to the built-in
        /// network.
        #[arg(long)]
        network: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Protocol,
    Baseline,
    WeakValues,
    JointWeakValues,
    Decomposition,
    MirrorsVariant,
    FullReport,
}

impl From<ScenarioArg> for Scenario {
    fn from(arg: ScenarioArg) -> Self {
        match arg {
            ScenarioArg::Protocol => Scenario::Protocol,
            ScenarioArg::Baseline => Scenario::Baseline,
            ScenarioArg::WeakValues => Scenario::WeakValues,
            ScenarioArg::JointWeakValues => Scenario::JointWeakValues,
            ScenarioArg::Decomposition => Scenario::Decomposition,
            ScenarioArg::MirrorsVariant => Scenario::MirrorsVariant,
            ScenarioArg::FullReport => Scenario::FullReport,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

fn load(path: Option<&Path>) -> Result<NetworkDescription, String> {
    match path {
        None => Ok(build_triple_mz()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read `{}`: {e}", path.display()))?;
            load_network(&text).map_err(|e| format!("cannot load `{}`: {e}", path.display()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            network,
            format,
        } => {
            let net = match load(network.as_deref()) {
                Ok(net) => net,
                Err(message) => {
                    eprintln!("error: {message}");
                    return ExitCode::FAILURE;
                }
            };
            match run_scenario(scenario.into(), &net) {
                Ok(report) => {
                    match format {
                        Format::Text => print!("{}", report.to_text()),
                        Format::Structured => print!("{}", report.to_json()),
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Verify { list, network } => {
            if list {
                for (id, summary) in CRITERIA {
                    println!("{id} — {summary}");
                }
                return ExitCode::SUCCESS;
            }
            let net = match load(network.as_deref()) {
                Ok(net) => net,
                Err(message) => {
                    eprintln!("error: {message}");
                    return ExitCode::FAILURE;
                }
            };
            let results = run_all(&net);
            let mut all_passed = true;
            for result in &results {
                println!("{}", result.line());
                all_passed &= result.passed;
            }
            if all_passed {
                println!("all {} criteria passed", results.len());
                ExitCode::SUCCESS
            } else {
                let failed = results.iter().filter(|r| !r.passed).count();
                println!("{failed} of {} criteria failed", results.len());
                ExitCode::FAILURE
            }
        }
    }
}
