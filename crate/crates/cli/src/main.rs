use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use ilc_core::experiment::{self, RunConfig};
use ilc_core::par::{self, Execution};
use ilc_core::scenario::{builtin, Scenario};
use ilc_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_UNTRACKABLE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_DIVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "ilc", version, about = "Trackability analysis and simulation of continuous-time iterative learning control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trackability verdict and convergence condition for one or all cases.
    Analyze {
        /// Scenario file or built-in name.
        scenario: String,
        #[arg(long)]
        case: Option<String>,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        parallel: bool,
    },
    /// Simulate the learning process and write CSV and summary files.
    Run {
        scenario: String,
        #[arg(long)]
        case: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare the simulated limit with the closed-form predictions.
    Verify {
        scenario: String,
        #[arg(long)]
        case: String,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        parallel: bool,
    },
    /// Built-in scenarios.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Subcommand)]
enum ExamplesAction {
    List,
    /// Write every built-in scenario as `<name>.json` into a directory.
    Export { dir: PathBuf },
}

/// Library errors keep their exit code; anything else is a plain failure.
enum Failure {
    Core(Error),
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Divergence { .. } => EXIT_DIVERGED,
        Error::Parse { .. }
        | Error::Scenario(_)
        | Error::Condition { .. }
        | Error::Dimension(_)
        | Error::NotSquare { .. }
        | Error::ZeroColumn(_)
        | Error::ZeroDenominator
        | Error::Properness { .. }
        | Error::InvalidGain(_)
        | Error::InvalidGrid(_)
        | Error::InvalidArgument(_)
        | Error::NonRationalTrajectory => EXIT_INVALID,
        _ => EXIT_FAILURE,
    }
}

fn load(name: &str) -> Result<Scenario, Error> {
    let path = Path::new(name);
    if path.exists() {
        return Scenario::load(path);
    }
    builtin::by_name(name).ok_or_else(|| {
        Error::Scenario(format!("{name} is neither a file nor a built-in ({})", builtin::NAMES.join(", ")))
    })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn analyze(scenario: &str, case: Option<String>, json: Option<PathBuf>, parallel: bool) -> Result<u8, Failure> {
    let s = load(scenario)?;
    let cases: Vec<String> = match case {
        Some(c) => vec![c],
        None => s.cases().iter().map(|c| c.name.clone()).collect(),
    };
    let reports = par::par_map(&cases, Execution::from_flag(parallel), |c| experiment::analyze(&s, c))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    for r in &reports {
        print!("{}", r.render());
    }
    if let Some(path) = json {
        write_json(&path, &reports)?;
    }
    Ok(if reports.iter().all(|r| r.verdict.trackable) { 0 } else { EXIT_UNTRACKABLE })
}

fn run(scenario: &str, case: &str, out: &Path, iters: Option<usize>, seed: Option<u64>) -> Result<u8, Failure> {
    let s = load(scenario)?;
    match experiment::run_case(&s, case, &RunConfig { iterations: iters, seed }) {
        Ok(run) => {
            let files = experiment::write_outputs(&run.report, &run.summary(), out)?;
            let r = &run.report;
            println!(
                "{} case {}: {} iterations, final sup error {:.3e} (max|yd| {:.3e})",
                run.scenario,
                run.case,
                r.records.len() - 1,
                r.final_sup_error(),
                r.yd_scale()
            );
            if r.impulsive_update_required {
                println!("warning: the update needed an impulsive term that was dropped");
            }
            if let Some(l) = run.limsup_estimate {
                println!("limsup error estimate {l:.3e}");
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
        Err(Error::Divergence { iteration, sup_error, partial }) => {
            let summary = partial.summary();
            experiment::write_outputs(&partial, &summary, out)?;
            eprintln!(
                "learning diverged at iteration {iteration} (sup error {sup_error:.3e}); partial output in {}",
                out.display()
            );
            Ok(EXIT_DIVERGED)
        }
        Err(e) => Err(e.into()),
    }
}

fn verify(scenario: &str, case: &str, json: Option<PathBuf>, parallel: bool) -> Result<u8, Failure> {
    let s = load(scenario)?;
    let report = experiment::verify(&s, case, Execution::from_flag(parallel))?;
    print!("{}", report.render());
    if let Some(path) = json {
        write_json(&path, &report)?;
    }
    Ok(if report.passed() { 0 } else { EXIT_FAILURE })
}

fn examples(action: ExamplesAction) -> Result<u8, Failure> {
    match action {
        ExamplesAction::List => {
            for name in builtin::NAMES {
                let spec = builtin::spec_by_name(name).expect("listed built-in");
                let cases: Vec<&str> = spec.cases.iter().map(|c| c.name.as_str()).collect();
                println!("{name}\tcases {}\t{}", cases.join(","), spec.description);
            }
        }
        ExamplesAction::Export { dir } => {
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            for name in builtin::NAMES {
                let path = dir.join(format!("{name}.json"));
                write_json(&path, &builtin::spec_by_name(name).expect("listed built-in"))?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze { scenario, case, json, parallel } => analyze(&scenario, case, json, parallel),
        Command::Run { scenario, case, out, iters, seed } => run(&scenario, &case, &out, iters, seed),
        Command::Verify { scenario, case, json, parallel } => verify(&scenario, &case, json, parallel),
        Command::Examples { action } => examples(action),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
