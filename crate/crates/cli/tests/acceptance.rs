//! Acceptance suite: one PASS/FAIL line per criterion, with the tolerance and
//! time budget pinned next to each check. Exits non-zero if any criterion fails.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use demoplan::geom::Quaternion;
use demoplan::ik::{seed_grid, solve_configuration};
use demoplan::mapper::{map_feature, reconstruct_plan};
use demoplan::planner::{exhaustive_oracle, greedy_rollout, PlanningProblem};
use demoplan::scenario::{self, FILLING, SCREWING_1, STACKING};
use demoplan::task::segment_feature;
use demoplan::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_quat(rng: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
}

fn random_unit(rng: &mut ChaCha8Rng) -> UnitQuaternion {
    loop {
        let q = random_quat(rng);
        if q.norm() > 0.1 {
            return UnitQuaternion::try_new(q.scale(1.0 / q.norm())).unwrap();
        }
    }
}

fn random_vec(rng: &mut ChaCha8Rng) -> Vector3 {
    Vector3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
}

fn unit_of(a: [f64; 4]) -> UnitQuaternion {
    let n = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    UnitQuaternion::try_new(Quaternion::new(a[0] / n, a[1] / n, a[2] / n, a[3] / n)).unwrap()
}

// 1. Quaternion and dual-quaternion algebra.
fn algebra() -> Check {
    const N: usize = 1000;
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..N {
        let (a, b) = (random_quat(&mut rng), random_quat(&mut rng));
        let norm = (a.hamilton(&b).norm() - a.norm() * b.norm()).abs() / (1.0 + a.norm() * b.norm());
        let conj = (a.hamilton(&b).conjugate() - b.conjugate().hamilton(&a.conjugate())).norm();
        let r = random_unit(&mut rng);
        let (u, v) = (random_vec(&mut rng), random_vec(&mut rng));
        let (ru, rv) = (r.rotate(&u), r.rotate(&v));
        let iso = (ru.norm() - u.norm()).abs().max((ru.dot(&rv) - u.dot(&v)).abs() / (1.0 + u.norm() * v.norm()));
        let p1 = Pose::new(&random_vec(&mut rng), &random_unit(&mut rng));
        let p2 = Pose::new(&random_vec(&mut rng), &r);
        let (n1, pl1) = p1.compose(&p2).invariant_residuals();
        let (n2, pl2) = p1.conjugate().invariant_residuals();
        worst = worst.max(norm).max(conj).max(iso).max(n1).max(pl1).max(n2).max(pl2);
    }
    ensure(worst <= TOL, format!("worst residual {worst:.3e} > {TOL:e}"))?;
    Ok(format!("{} checks, worst residual {worst:.2e} (tol {TOL:e})", 4 * N))
}

// 2. Per-step features of the cup-transfer task against the printed table.
fn table3_anchor() -> Check {
    const ROT_TOL: f64 = 0.08;
    const COLLINEAR: f64 = 0.999;
    let printed_r = [[1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.7, 0.0, 0.0, -0.7]];
    let printed_t = Vector3::new(1.0, 0.0, 0.0);
    let task = scenario::table2_task();
    let mut worst_r = 0.0f64;
    let mut worst_dot = 1.0f64;
    for (i, r) in printed_r.iter().enumerate() {
        let d = segment_feature(&task, task.segment(i, i + 1).unwrap()).deltas[0];
        worst_r = worst_r.max(d.real().quaternion().distance(&Quaternion::new(r[0], r[1], r[2], r[3])));
        worst_dot = worst_dot.min(d.translation().normalize().dot(&printed_t).abs());
    }
    ensure(worst_r <= ROT_TOL, format!("rotation off by {worst_r:.4}"))?;
    ensure(worst_dot > COLLINEAR, format!("|dot| {worst_dot:.6}"))?;
    Ok(format!("rotation distance ≤ {worst_r:.4} (tol {ROT_TOL}), |dot| ≥ {worst_dot:.6}"))
}

// 3. First deltas of the five library features against the printed table.
fn table5_anchor() -> Check {
    const TOL: f64 = 0.01;
    let printed: [([f64; 4], [f64; 3]); 5] = [
        ([0.7, 0.0, 0.0, -0.7], [1.0, 0.0, 0.0]),
        ([0.7, 0.0, 0.0, 0.7], [1.0, 0.0, 0.0]),
        ([0.7, 0.0, 0.7, 0.0], [0.7, 0.0, -0.7]),
        ([0.7, 0.0, -0.7, 0.0], [-0.7, 0.0, 0.7]),
        ([1.0, 0.0, 0.0, 0.0], [0.7, 0.0, -0.7]),
    ];
    let lib = scenario::base_library();
    let mut worst = 0.0f64;
    for (f, (r, t)) in lib.features().iter().zip(printed) {
        let d = f.deltas()[0];
        let dr = quat_distance(d.real(), &unit_of(r));
        // Printed directions carry the opposite sign to ours.
        let dt = (d.translation().normalize() + Vector3::from(t).normalize()).norm();
        worst = worst.max(dr).max(dt);
        let angles: Vec<f64> = f.deltas().iter().map(|d| d.real().angle()).collect();
        ensure(angles.windows(2).all(|w| w[1] <= w[0] + 1e-12), format!("{}: rotation grows {angles:?}", f.name))?;
    }
    ensure(worst <= TOL, format!("worst deviation {worst:.4}"))?;
    Ok(format!("worst δ_1 deviation {worst:.4} (tol {TOL}), remaining rotation non-increasing"))
}

// 4. Mapped segments start at the segment start and end at its goal.
fn mapping_exactness() -> Check {
    const PAIRS: usize = 100;
    let cfg = SimilarityConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut n, mut end_err, mut start_err, mut orient) = (0, 0.0f64, 0.0f64, 0.0f64);
    while n < PAIRS {
        let (task, lib) = scenario::random_instance(&mut rng, 5, 6);
        let j = rng.random_range(0..task.len() - 1);
        let k = rng.random_range(j + 1..task.len());
        let seg = task.segment(j, k).unwrap();
        let tf = segment_feature(&task, seg);
        let Some((f, alloc)) =
            lib.features().iter().find_map(|f| is_semantically_similar(&tf.deltas, f.deltas(), &cfg).map(|a| (f, a)))
        else {
            continue;
        };
        let mf = map_feature(f, &tf, seg, &alloc, &cfg).map_err(|e| e.to_string())?;
        let (start, goal) = (task.poses()[j], task.poses()[k]);
        let wps = reconstruct_plan(&goal, &mf);
        let last = wps.last().unwrap();
        end_err = end_err.max((last.translation() - goal.translation()).norm()).max(quat_distance(last.real(), goal.real()));
        if tf.deltas[0].translation().norm() >= cfg.zero_translation_epsilon {
            start_err = start_err.max((wps[0].translation() - start.translation()).norm());
        }
        orient = orient.max(quat_distance(wps[0].real(), start.real()));
        n += 1;
    }
    ensure(end_err <= 1e-12, format!("goal error {end_err:.3e}"))?;
    ensure(start_err <= 1e-9, format!("start error {start_err:.3e}"))?;
    ensure(orient <= cfg.delta_alpha, format!("start orientation error {orient:.4}"))?;
    Ok(format!("{PAIRS} pairs: goal {end_err:.1e} (≤1e-12), start {start_err:.1e} (≤1e-9), orientation {orient:.3} (≤Δα)"))
}

// 5. Trained greedy policy against exhaustive search.
fn oracle_equality() -> Check {
    const INSTANCES: usize = 50;
    // Training budget for convergence on a single small instance.
    const EPISODES: usize = 2000;
    let cfg = SimilarityConfig::default();
    let tcfg = TrainingConfig { episodes: EPISODES, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut n, mut skipped) = (0, 0);
    while n < INSTANCES {
        let (task, lib) = scenario::random_instance(&mut rng, 5, 6);
        let p = PlanningProblem::new(&task, &lib, &cfg);
        let Some(best) = exhaustive_oracle(&p, tcfg.gamma) else {
            skipped += 1;
            continue;
        };
        let (q, _) = train(std::slice::from_ref(&task), &lib, &tcfg, &cfg, None).map_err(|e| e.to_string())?;
        let roll = greedy_rollout(&p, &q, tcfg.gamma, tcfg.r_fail, true);
        ensure(
            roll.success && roll.discounted == best.discounted,
            format!("instance {n}: policy {} vs optimum {}", roll.discounted, best.discounted),
        )?;
        n += 1;
    }
    Ok(format!("{INSTANCES} coverable instances equal ({skipped} uncoverable draws skipped, {EPISODES} episodes)"))
}

fn trailing_means_rise(curve: &[f64]) -> bool {
    const W: usize = 20;
    let mean = |s: usize| curve[s..s + W].iter().sum::<f64>() / W as f64;
    curve.len() >= 50 + W && (49..curve.len() - W).all(|s| mean(s + 1) >= mean(s) - 1e-6)
}

// 6. Reward curve levels off on the generated training tasks.
fn training_plateau() -> Check {
    let cfg = SimilarityConfig::default();
    let tcfg = TrainingConfig::default();
    let lib = scenario::base_library();
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let tasks = scenario::training_tasks(&mut rng, 20, &lib, &cfg, 1_000_000).ok_or("no coverable tasks")?;
    let (_, curve) = train(&tasks, &lib, &tcfg, &cfg, None).map_err(|e| e.to_string())?;
    ensure(curve.greedy.len() == 100, "expected 100 episodes")?;
    ensure(trailing_means_rise(&curve.greedy), "a trailing-20 mean drops after episode 50")?;
    Ok(format!(
        "20 tasks × 100 episodes, reward {:.4} → {:.4}, trailing means non-decreasing from 50 (tol 1e-6)",
        curve.greedy[0], curve.greedy[99]
    ))
}

struct Cli {
    bin: PathBuf,
    dir: tempfile::TempDir,
}

struct Run {
    code: i32,
    stderr: String,
}

impl Cli {
    fn new() -> Cli {
        Cli { bin: PathBuf::from(env!("CARGO_BIN_EXE_demoplan")), dir: tempfile::tempdir().expect("temp dir") }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Run {
        let out = Command::new(&self.bin)
            .args(args)
            .current_dir(self.dir.path())
            .env_remove("DEMOPLAN_CONFIG")
            .output()
            .expect("binary runs");
        Run { code: out.status.code().unwrap_or(-1), stderr: String::from_utf8_lossy(&out.stderr).into_owned() }
    }

    /// Synthetic demos, a five-feature library and a base Q-table.
    fn setup(&self) -> Result<(), String> {
        let steps: Vec<Vec<&str>> = vec![
            vec!["--out", ".", "synth"],
            vec!["--library", "lib.json", "demo-import", "demos/screwing_1.json"],
            vec!["--library", "lib.json", "demo-import", "demos/screwing_2.json"],
            vec!["--library", "lib.json", "demo-import", "demos/filling.json"],
            vec!["--library", "lib.json", "demo-import", "demos/pouring.json"],
            vec!["--library", "lib.json", "demo-import", "demos/stacking.json"],
            vec!["--library", "lib.json", "--qtable", "base.json", "--out", "base", "train"],
        ];
        for s in steps {
            let r = self.run(&s);
            ensure(r.code == 0, format!("{s:?} exited {}: {}", r.code, r.stderr))?;
        }
        Ok(())
    }

    fn plan(&self, task: &Task, tag: &str, qtable: &str) -> Result<(Run, PathBuf), String> {
        let tpath = self.path(&format!("{tag}.task.json"));
        std::fs::write(&tpath, task.to_json()).map_err(|e| e.to_string())?;
        let out = self.path(tag);
        let r = self.run(&[
            "--library",
            "lib.json",
            "--qtable",
            qtable,
            "--task",
            tpath.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "plan",
        ]);
        Ok((r, out))
    }
}

fn load_plan(dir: &Path) -> Result<MotionPlan, String> {
    MotionPlan::load(dir.join("plan.json")).map_err(|e| e.to_string())
}

// 7. Transferring trials through the binary.
fn transferring(cli: &Cli) -> Check {
    let cfg = SimilarityConfig::default();
    let level = UnitQuaternion::from_euler(&EulerAngles::new(0.0, -FRAC_PI_2, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let z = rng.random_range(scenario::TRANSFER_Z.0..=scenario::TRANSFER_Z.1);
        let (r, out) = cli.plan(&scenario::transferring_task(z), &format!("transfer{trial}"), "base.json")?;
        ensure(r.code == 0, format!("z={z:.3}: exit {} {}", r.code, r.stderr))?;
        let plan = load_plan(&out)?;
        for w in &plan.waypoints {
            worst = worst.max(quat_distance(w.real(), &level));
        }
    }
    ensure(worst <= cfg.delta_alpha, format!("orientation error {worst:.4}"))?;
    Ok(format!("20/20 plans, worst orientation error {worst:.2e} (≤ Δα)"))
}

// 8. Filling-and-pouring trials through the binary.
fn filling_pouring(cli: &Cli) -> Check {
    let want = [([1usize, 2usize], FILLING), ([2, 4], STACKING), ([4, 5], SCREWING_1)];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..20 {
        let x = rng.random_range(scenario::POUR_X.0..=scenario::POUR_X.1);
        let y = rng.random_range(scenario::POUR_Y.0..=scenario::POUR_Y.1);
        let (r, out) = cli.plan(&scenario::filling_pouring_task(x, y), &format!("pour{trial}"), "base.json")?;
        ensure(r.code == 0, format!("({x:.3},{y:.3}): exit {} {}", r.code, r.stderr))?;
        let plan = load_plan(&out)?;
        let got: Vec<([usize; 2], &str)> = plan.provenance.iter().map(|p| (p.segment, p.demo.as_str())).collect();
        ensure(got == want, format!("({x:.3},{y:.3}): {got:?}"))?;
    }
    Ok("20/20 plans assign filling (1,2), stacking (2,4), twisting (4,5)".into())
}

fn greedy_curve(path: &Path) -> Result<Vec<f64>, String> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| e.to_string())?;
            r[1].parse::<f64>().map_err(|e| e.to_string())
        })
        .collect()
}

// 9. Assembling: demo request, import, incremental retraining, plan.
fn assembling(cli: &Cli) -> Check {
    const PLATEAU_BY: usize = 15;
    let task = scenario::assembling_task();
    let (r, out) = cli.plan(&task, "assemble_before", "base.json")?;
    ensure(r.code == 3, format!("expected exit 3, got {}", r.code))?;
    ensure(r.stderr.contains("2..3"), format!("stderr does not name 2..3: {}", r.stderr))?;
    let req: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("demo_request.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    ensure(req["uncovered"][0]["segment"] == serde_json::json!([2, 3]), format!("request {req}"))?;
    ensure(req["uncovered"].as_array().map(|a| a.len()) == Some(1), "more than one uncovered segment")?;

    let r = cli.run(&["--library", "lib.json", "demo-import", "demos/span.json"]);
    ensure(r.code == 0, format!("span import exited {}: {}", r.code, r.stderr))?;
    std::fs::write(cli.path("assembling.task.json"), task.to_json()).map_err(|e| e.to_string())?;
    let r = cli.run(&[
        "--library",
        "lib.json",
        "--task",
        "assembling.task.json",
        "--qtable",
        "retrained.json",
        "--out",
        "retrain",
        "train",
        "--from-qtable",
        "base.json",
    ]);
    ensure(r.code == 0, format!("retraining exited {}: {}", r.code, r.stderr))?;
    let curve = greedy_curve(&cli.path("retrain/reward_curve.csv"))?;
    let last = *curve.last().ok_or("empty curve")?;
    let flat = curve.len() >= PLATEAU_BY && curve[PLATEAU_BY - 1..].iter().all(|v| (v - last).abs() <= 1e-6);
    ensure(flat, format!("curve still moving after episode {PLATEAU_BY}: {curve:?}"))?;

    let (r, out) = cli.plan(&task, "assemble_after", "retrained.json")?;
    ensure(r.code == 0, format!("planning after import exited {}: {}", r.code, r.stderr))?;
    let plan = load_plan(&out)?;
    let segs: Vec<String> = plan.provenance.iter().map(|p| format!("{}..{} {}", p.segment[0], p.segment[1], p.demo)).collect();
    Ok(format!("exit 3 naming 2..3, then plan [{}], reward flat from episode {PLATEAU_BY} (tol 1e-6)", segs.join(", ")))
}

/// Spatial twist of joint `i` by central differences of forward kinematics.
fn fd_twist(m: &RobotModel, q: &[f64], i: usize, h: f64) -> [f64; 6] {
    let mut qp = q.to_vec();
    let mut qm = q.to_vec();
    qp[i] += h;
    qm[i] -= h;
    let (fp, fm, f0) = (m.forward_kinematics(&qp).unwrap(), m.forward_kinematics(&qm).unwrap(), m.forward_kinematics(q).unwrap());
    let rel = fp.real().compose(&fm.real().conjugate());
    let v = rel.quaternion().vector();
    let angle = 2.0 * v.norm().atan2(rel.w());
    let w = if v.norm() > 0.0 { v * (angle / v.norm() / (2.0 * h)) } else { Vector3::zeros() };
    let pdot = (fp.translation() - fm.translation()) / (2.0 * h);
    let v = pdot - w.cross(&f0.translation());
    [w.x, w.y, w.z, v.x, v.y, v.z]
}

// 10. Resolving the transferring plan on the default arm.
fn ik_tracking() -> Check {
    const POSE_TOL: f64 = 1e-3;
    const FD_TOL: f64 = 1e-5;
    let sim = SimilarityConfig::default();
    let cfg = TrainingConfig::default();
    let lib = scenario::base_library();
    let m = RobotModel::default_6r();
    let ik = IkConfig::default();
    let (mut pe, mut re, mut samples) = (0.0f64, 0.0f64, 0);
    for z in [0.1, 0.3, 0.5] {
        let task = scenario::transferring_task(z);
        let (q, _) = train(std::slice::from_ref(&task), &lib, &cfg, &sim, None).map_err(|e| e.to_string())?;
        let PlanOutcome::Plan(plan) = generate_plan(&task, &lib, &q, &sim, &cfg).map_err(|e| e.to_string())? else {
            return Err(format!("z={z}: no plan"));
        };
        let q0 = solve_configuration(&m, &seed_grid(&m), &plan.waypoints[0], &ik).map_err(|e| e.to_string())?;
        let (traj, _) = track_plan(&m, &q0, &plan.waypoints, &ik).map_err(|e| e.to_string())?;
        for (s, w) in traj.samples().iter().zip(&plan.waypoints) {
            let f = m.forward_kinematics(s).unwrap();
            pe = pe.max((f.translation() - w.translation()).norm());
            re = re.max(quat_distance(f.real(), w.real()));
            samples += 1;
        }
    }
    ensure(pe < POSE_TOL && re < POSE_TOL, format!("position {pe:.3e} m, rotation {re:.3e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut fd = 0.0f64;
    for _ in 0..50 {
        let q: Vec<f64> = (0..m.dof()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let j = m.spatial_jacobian(&q).unwrap();
        for i in 0..m.dof() {
            let col = fd_twist(&m, &q, i, 1e-6);
            for (r, c) in col.iter().enumerate() {
                fd = fd.max((j[(r, i)] - c).abs());
            }
        }
    }
    ensure(fd < FD_TOL, format!("Jacobian residual {fd:.3e}"))?;
    Ok(format!(
        "{samples} samples: position {pe:.1e} m, rotation {re:.1e} (< {POSE_TOL:e}); Jacobian residual {fd:.1e} (< {FD_TOL:e})"
    ))
}

// 11. Coverage reports agree with planning outcomes.
fn coverage_consistency() -> Check {
    let cfg = SimilarityConfig::default();
    let tcfg = TrainingConfig { episodes: 10, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut plans, mut requests) = (0, 0);
    for i in 0..200 {
        let (task, lib) = scenario::random_instance(&mut rng, 5, 6);
        let covered = coverage_check(&task, &lib, &cfg).is_covered();
        let (q, _) = train(std::slice::from_ref(&task), &lib, &tcfg, &cfg, None).map_err(|e| e.to_string())?;
        let planned = matches!(generate_plan(&task, &lib, &q, &cfg, &tcfg).map_err(|e| e.to_string())?, PlanOutcome::Plan(_));
        ensure(covered == planned, format!("instance {i}: covered {covered}, planned {planned}"))?;
        if planned {
            plans += 1;
        } else {
            requests += 1;
        }
    }
    Ok(format!("200 instances agree ({plans} plans, {requests} demo requests)"))
}

fn main() {
    let cli = Cli::new();
    let setup = cli.setup();
    type Criterion<'a> = (&'a str, Duration, Box<dyn Fn() -> Check + 'a>);
    let needs_setup = |f: fn(&Cli) -> Check| {
        let cli = &cli;
        let setup = &setup;
        move || setup.clone().and_then(|_| f(cli))
    };
    let criteria: Vec<Criterion> = vec![
        ("algebra", Duration::from_secs(5), Box::new(algebra)),
        ("table 2 to table 3 features", Duration::from_secs(1), Box::new(table3_anchor)),
        ("table 5 library", Duration::from_secs(1), Box::new(table5_anchor)),
        ("mapping exactness", Duration::from_secs(5), Box::new(mapping_exactness)),
        ("oracle equality", Duration::from_secs(120), Box::new(oracle_equality)),
        ("training plateau", Duration::from_secs(300), Box::new(training_plateau)),
        ("transferring", Duration::from_secs(30), Box::new(needs_setup(transferring))),
        ("filling-pouring", Duration::from_secs(30), Box::new(needs_setup(filling_pouring))),
        ("assembling", Duration::from_secs(60), Box::new(needs_setup(assembling))),
        ("inverse kinematics", Duration::from_secs(30), Box::new(ik_tracking)),
        ("coverage consistency", Duration::from_secs(60), Box::new(coverage_consistency)),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let result = check();
        let dt = t0.elapsed();
        let result = result.and_then(|m| {
            if dt <= *budget {
                Ok(m)
            } else {
                Err(format!("{m}; took {dt:.2?} > {budget:?}"))
            }
        });
        match result {
            Ok(m) => println!("PASS {:>2} {name}: {m} [{dt:.2?} / {budget:?}]", i + 1),
            Err(m) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {m} [{dt:.2?} / {budget:?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
