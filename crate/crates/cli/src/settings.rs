use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use demoplan::{RobotModel, SimilarityConfig, TrainingConfig};
use serde::Deserialize;

/// Flags shared by every subcommand. Unset flags fall back to the scenario
/// file named by `DEMOPLAN_CONFIG`, then to built-in defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Robot description (JSON); the bundled 6R arm when omitted.
    #[arg(long, global = true)]
    pub robot: Option<PathBuf>,
    /// Feature library file.
    #[arg(long, global = true)]
    pub library: Option<PathBuf>,
    /// Task file; `train` accepts it several times.
    #[arg(long, global = true)]
    pub task: Vec<PathBuf>,
    /// Q-table file.
    #[arg(long, global = true)]
    pub qtable: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Training episodes per task.
    #[arg(long, global = true)]
    pub episodes: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta_alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta_beta: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    /// Q-learning rate.
    #[arg(long, global = true)]
    pub alpha_lr: Option<f64>,
    /// Number of generated training tasks.
    #[arg(long, global = true)]
    pub tasks_n: Option<usize>,
    /// Scenario file.
    #[arg(long, global = true, env = "DEMOPLAN_CONFIG", hide_env_values = true)]
    pub config: Option<PathBuf>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    robot: Option<PathBuf>,
    library: Option<PathBuf>,
    qtable: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    episodes: Option<usize>,
    delta_alpha: Option<f64>,
    delta_beta: Option<f64>,
    zero_translation_epsilon: Option<f64>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    alpha_lr: Option<f64>,
    tasks_n: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub robot: Option<PathBuf>,
    pub library: Option<PathBuf>,
    pub tasks: Vec<PathBuf>,
    pub qtable: Option<PathBuf>,
    pub out: PathBuf,
    pub tasks_n: usize,
    pub similarity: SimilarityConfig,
    pub training: TrainingConfig,
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Result<Settings> {
        let file = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => ScenarioFile::default(),
        };
        let sim_default = SimilarityConfig::default();
        let similarity = SimilarityConfig {
            delta_alpha: args.delta_alpha.or(file.delta_alpha).unwrap_or(sim_default.delta_alpha),
            delta_beta: args.delta_beta.or(file.delta_beta).unwrap_or(sim_default.delta_beta),
            zero_translation_epsilon: file.zero_translation_epsilon.unwrap_or(sim_default.zero_translation_epsilon),
        };
        similarity.validate().map_err(anyhow::Error::msg)?;
        let t = TrainingConfig::default();
        let training = TrainingConfig {
            gamma: args.gamma.or(file.gamma).unwrap_or(t.gamma),
            epsilon: args.epsilon.or(file.epsilon).unwrap_or(t.epsilon),
            learning_rate: args.alpha_lr.or(file.alpha_lr).unwrap_or(t.learning_rate),
            episodes: args.episodes.or(file.episodes).unwrap_or(t.episodes),
            seed: args.seed.or(file.seed).unwrap_or(t.seed),
            ..t
        };
        training.validate()?;
        Ok(Settings {
            robot: args.robot.clone().or(file.robot),
            library: args.library.clone().or(file.library),
            tasks: args.task.clone(),
            qtable: args.qtable.clone().or(file.qtable),
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            tasks_n: args.tasks_n.or(file.tasks_n).unwrap_or(20),
            similarity,
            training,
        })
    }

    pub fn robot(&self) -> Result<RobotModel> {
        match &self.robot {
            Some(p) => RobotModel::load(p).with_context(|| format!("loading robot {}", p.display())),
            None => Ok(RobotModel::default_6r()),
        }
    }

    pub fn library_path(&self) -> Result<&Path> {
        self.library.as_deref().context("--library is required")
    }

    pub fn single_task(&self) -> Result<&Path> {
        match self.tasks.as_slice() {
            [one] => Ok(one),
            [] => anyhow::bail!("--task is required"),
            _ => anyhow::bail!("expected exactly one --task"),
        }
    }

    /// Creates the output directory and returns `out/name`.
    pub fn output(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(self.out.join(name))
    }
}
