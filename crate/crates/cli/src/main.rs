//! `demoplan`: import demonstrations, train the planner, plan tasks, resolve
//! plans to joint space, and rerun the case studies.
//!
//! Exit codes: 0 success, 1 error, 2 a reproduced check failed, 3 the task
//! needs another demonstration.

mod commands;
mod reproduce;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use settings::{GlobalArgs, Settings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Failed,
    DemoRequest,
}

impl From<Outcome> for ExitCode {
    fn from(o: Outcome) -> ExitCode {
        match o {
            Outcome::Success => ExitCode::SUCCESS,
            Outcome::Failed => ExitCode::from(2),
            Outcome::DemoRequest => ExitCode::from(3),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "demoplan", version, about = "Motion planning from demonstrated features")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Add a demonstration (joint or pose samples) to the library.
    DemoImport {
        file: PathBuf,
        /// Store under this name instead of the one in the file.
        #[arg(long)]
        name: Option<String>,
        /// Interpolate joint samples that turn the tool too far in one step.
        #[arg(long)]
        densify: bool,
    },
    /// Train a Q-table on generated tasks or on the given --task files.
    Train {
        /// Continue from this Q-table.
        #[arg(long)]
        from_qtable: Option<PathBuf>,
    },
    /// Plan a task; writes plan.json, or demo_request.json with exit code 3.
    Plan {
        /// Use the Q-table as is instead of refining it on the task.
        #[arg(long)]
        no_retrain: bool,
    },
    /// Resolve a plan to joint angles; writes joints.csv and limits.json.
    Ik {
        plan: PathBuf,
        /// Initial joint angles, comma separated; searched for when omitted.
        #[arg(long, allow_hyphen_values = true)]
        q0: Option<String>,
        /// Seconds between samples.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Rerun a case study and check its outcome.
    Reproduce {
        #[arg(value_enum)]
        case: reproduce::Case,
    },
    /// Write the synthetic demonstrations and case-study tasks.
    Synth,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let s = Settings::resolve(&cli.global)?;
    match cli.command {
        Command::DemoImport { file, name, densify } => commands::demo_import(&s, &file, name, densify),
        Command::Train { from_qtable } => commands::train_cmd(&s, from_qtable),
        Command::Plan { no_retrain } => commands::plan_cmd(&s, !no_retrain),
        Command::Ik { plan, q0, dt } => commands::ik_cmd(&s, &plan, q0, dt),
        Command::Reproduce { case } => reproduce::run(&s, case),
        Command::Synth => commands::synth_cmd(&s),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(o) => o.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
