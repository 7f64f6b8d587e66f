use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use demoplan::demo::DemoDocument;
use demoplan::ik::{seed_grid, solve_configuration};
use demoplan::planner::{DemoRequest, RewardCurve};
use demoplan::scenario::{self, training_tasks};
use demoplan::{
    extract_feature, generate_plan, train, track_plan, IkConfig, Library, MotionPlan, PlanOutcome, QTable, Task,
};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::settings::Settings;
use crate::Outcome;

/// Draws until every task is coverable; gives up after this many draws per task.
const MAX_TASK_DRAWS: usize = 1_000_000;

pub fn write_json(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn load_library(path: &Path) -> Result<Library> {
    Library::load(path).with_context(|| format!("loading library {}", path.display()))
}

pub fn load_task(path: &Path) -> Result<Task> {
    Task::load(path).with_context(|| format!("loading task {}", path.display()))
}

pub fn load_qtable(path: &Path) -> Result<QTable> {
    QTable::load(path).with_context(|| format!("loading Q-table {}", path.display()))
}

pub fn demo_import(s: &Settings, file: &Path, name: Option<String>, densify: bool) -> Result<Outcome> {
    let path = s.library_path()?;
    let mut lib = if path.exists() { load_library(path)? } else { Library::new() };
    let doc = DemoDocument::load(file).with_context(|| format!("loading demo {}", file.display()))?;
    let mut demo = doc.into_demonstration(&s.robot()?, densify)?;
    if let Some(n) = name {
        demo.name = n;
    }
    if demo.max_step_rotation() > demoplan::demo::MAX_STEP_ROTATION && !densify {
        log::warn!(
            "demo `{}` turns {:.3} rad between samples; consider --densify",
            demo.name,
            demo.max_step_rotation()
        );
    }
    lib.add(extract_feature(&demo))?;
    lib.save(path).with_context(|| format!("writing library {}", path.display()))?;
    println!("library {} now holds {} features (version {})", path.display(), lib.len(), lib.version());
    Ok(Outcome::Success)
}

pub fn training_set(s: &Settings, lib: &Library) -> Result<Vec<Task>> {
    if !s.tasks.is_empty() {
        return s.tasks.iter().map(|p| load_task(p)).collect();
    }
    if s.tasks_n == 0 {
        bail!("--tasks-n must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.training.seed);
    training_tasks(&mut rng, s.tasks_n, lib, &s.similarity, MAX_TASK_DRAWS)
        .context("could not draw enough training tasks the library can cover")
}

pub fn write_curve(path: &Path, curve: &RewardCurve) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["episode", "avg_reward", "avg_behavior_reward"])?;
    for (i, (g, b)) in curve.greedy.iter().zip(&curve.behavior).enumerate() {
        w.write_record([(i + 1).to_string(), g.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn train_cmd(s: &Settings, from: Option<PathBuf>) -> Result<Outcome> {
    let lib = load_library(s.library_path()?)?;
    let tasks = training_set(s, &lib)?;
    let q0 = from.as_deref().map(load_qtable).transpose()?;
    let (q, curve) = train(&tasks, &lib, &s.training, &s.similarity, q0)?;
    let qpath = match &s.qtable {
        Some(p) => p.clone(),
        None => s.output("qtable.json")?,
    };
    q.save(&qpath).with_context(|| format!("writing {}", qpath.display()))?;
    let cpath = s.output("reward_curve.csv")?;
    write_curve(&cpath, &curve)?;
    info!("trained on {} tasks for {} episodes", tasks.len(), s.training.episodes);
    println!(
        "wrote {} ({} entries) and {}; final average reward {:.6}",
        qpath.display(),
        q.len(),
        cpath.display(),
        curve.greedy.last().copied().unwrap_or(0.0)
    );
    Ok(Outcome::Success)
}

/// Plans `task`, optionally refining the policy on it first.
pub fn plan_task(s: &Settings, task: &Task, lib: &Library, q: Option<QTable>, retrain: bool) -> Result<PlanOutcome> {
    let q = match (q, retrain) {
        (q, true) => train(std::slice::from_ref(task), lib, &s.training, &s.similarity, q)?.0,
        (Some(q), false) => q,
        (None, false) => bail!("--no-retrain needs --qtable"),
    };
    Ok(generate_plan(task, lib, &q, &s.similarity, &s.training)?)
}

pub fn describe_request(req: &DemoRequest) -> String {
    let segs: Vec<String> = req.uncovered.iter().map(|u| format!("{}..{}", u.segment[0], u.segment[1])).collect();
    format!("no demonstration covers segment {} of task `{}`", segs.join(", "), req.task)
}

pub fn plan_cmd(s: &Settings, retrain: bool) -> Result<Outcome> {
    let task = load_task(s.single_task()?)?;
    let lib = load_library(s.library_path()?)?;
    let q = s.qtable.as_deref().map(load_qtable).transpose()?;
    match plan_task(s, &task, &lib, q, retrain)? {
        PlanOutcome::Plan(plan) => {
            let path = s.output("plan.json")?;
            write_json(&path, &plan.to_json())?;
            for p in &plan.provenance {
                println!("{}..{} <- {}", p.segment[0], p.segment[1], p.demo);
            }
            println!("wrote {} ({} waypoints)", path.display(), plan.waypoints.len());
            Ok(Outcome::Success)
        }
        PlanOutcome::DemoRequest(req) => {
            let path = s.output("demo_request.json")?;
            write_json(&path, &serde_json::to_string_pretty(&req)?)?;
            eprintln!("{}; request written to {}", describe_request(&req), path.display());
            Ok(Outcome::DemoRequest)
        }
    }
}

fn parse_q0(text: &str) -> Result<Vec<f64>> {
    text.split(',').map(|v| v.trim().parse::<f64>().with_context(|| format!("bad joint value `{v}`"))).collect()
}

pub fn ik_cmd(s: &Settings, plan_path: &Path, q0: Option<String>, dt: Option<f64>) -> Result<Outcome> {
    let m = s.robot()?;
    let plan = MotionPlan::load(plan_path).with_context(|| format!("loading plan {}", plan_path.display()))?;
    let first = plan.waypoints.first().context("the plan has no waypoints")?;
    let cfg = IkConfig { h: dt.unwrap_or(IkConfig::default().h), ..IkConfig::default() };
    let q0 = match q0 {
        Some(t) => parse_q0(&t)?,
        None => solve_configuration(&m, &seed_grid(&m), first, &cfg).context("no configuration reaches the plan start")?,
    };
    let (traj, report) = track_plan(&m, &q0, &plan.waypoints, &cfg)?;
    let jpath = s.output("joints.csv")?;
    let mut w = csv::Writer::from_path(&jpath)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=traj.dof()).map(|i| format!("q{i}")));
    w.write_record(&header)?;
    for (k, q) in traj.samples().iter().enumerate() {
        let mut row = vec![(k as f64 * traj.h()).to_string()];
        row.extend(q.iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    let lpath = s.output("limits.json")?;
    write_json(&lpath, &serde_json::to_string_pretty(&report)?)?;
    if !report.is_empty() {
        log::warn!("{} joint-limit violations, worst by {:.4} rad", report.violations.len(), report.worst_excess);
    }
    println!("wrote {} ({} samples) and {}", jpath.display(), traj.len(), lpath.display());
    Ok(Outcome::Success)
}

pub fn synth_cmd(s: &Settings) -> Result<Outcome> {
    let demos_dir = s.output("demos")?;
    let tasks_dir = s.output("tasks")?;
    std::fs::create_dir_all(&demos_dir)?;
    std::fs::create_dir_all(&tasks_dir)?;
    let mut demos = scenario::base_demos();
    demos.push(scenario::span());
    for d in &demos {
        write_json(&demos_dir.join(format!("{}.json", d.name)), &serde_json::to_string_pretty(&d.to_document())?)?;
    }
    let tasks = [
        scenario::table2_task(),
        scenario::transferring_task(0.3),
        scenario::filling_pouring_task(0.2, -0.1),
        scenario::assembling_task(),
    ];
    for t in &tasks {
        write_json(&tasks_dir.join(format!("{}.json", t.name())), &t.to_json())?;
    }
    println!("wrote {} demos to {} and {} tasks to {}", demos.len(), demos_dir.display(), tasks.len(), tasks_dir.display());
    Ok(Outcome::Success)
}
