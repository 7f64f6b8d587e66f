use demoplan::mapper::{map_feature, reconstruct_plan};
use demoplan::planner::*;
use demoplan::scenario::*;
use demoplan::task::segment_feature;
use demoplan::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

fn sim() -> SimilarityConfig {
    SimilarityConfig::default()
}

/// Brute-force coverability: can `j..=k` be split into directly matched pieces?
fn coverable_by_search(task: &Task, lib: &Library, cfg: &SimilarityConfig, j: usize, k: usize) -> bool {
    (j + 1..=k).any(|m| {
        let tf = segment_feature(task, task.segment(j, m).unwrap());
        let direct = lib.features().iter().any(|f| is_semantically_similar(&tf.deltas, f.deltas(), cfg).is_some());
        direct && (m == k || coverable_by_search(task, lib, cfg, m, k))
    })
}

#[test]
fn mapped_segments_start_and_end_on_the_task() {
    let cfg = sim();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 100 {
        let (task, lib) = random_instance(&mut rng, 5, 6);
        'seg: for j in 0..task.len() {
            for k in j + 1..task.len() {
                let seg = task.segment(j, k).unwrap();
                let tf = segment_feature(&task, seg);
                for f in lib.features() {
                    let Some(alloc) = is_semantically_similar(&tf.deltas, f.deltas(), &cfg) else { continue };
                    let mf = map_feature(f, &tf, seg, &alloc, &cfg).unwrap();
                    let goal = task.poses()[k];
                    let start = task.poses()[j];
                    let wps = reconstruct_plan(&goal, &mf);
                    let last = wps.last().unwrap();
                    assert!((last.translation() - goal.translation()).norm() <= 1e-12);
                    assert!(quat_distance(last.real(), goal.real()) <= 1e-12);
                    let first = wps[0];
                    if tf.deltas[0].translation().norm() >= cfg.zero_translation_epsilon {
                        assert!((first.translation() - start.translation()).norm() <= 1e-9);
                    }
                    assert!(quat_distance(first.real(), start.real()) <= cfg.delta_alpha + 1e-12);
                    checked += 1;
                    break 'seg;
                }
            }
        }
    }
}

#[test]
fn coverage_agrees_with_plan_generation() {
    let cfg = sim();
    let tcfg = TrainingConfig { episodes: 10, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (mut plans, mut requests) = (0, 0);
    for _ in 0..200 {
        let (task, lib) = random_instance(&mut rng, 5, 6);
        let rep = coverage_check(&task, &lib, &cfg);
        assert_eq!(rep.is_covered(), coverable_by_search(&task, &lib, &cfg, 0, task.len() - 1));
        let (q, _) = train(std::slice::from_ref(&task), &lib, &tcfg, &cfg, None).unwrap();
        match generate_plan(&task, &lib, &q, &cfg, &tcfg).unwrap() {
            PlanOutcome::Plan(plan) => {
                assert!(rep.is_covered());
                let goal = task.poses().last().unwrap();
                assert!((plan.waypoints.last().unwrap().translation() - goal.translation()).norm() < 1e-12);
                plans += 1;
            }
            PlanOutcome::DemoRequest(req) => {
                assert!(!rep.is_covered());
                assert!(!req.uncovered.is_empty());
                for s in &req.uncovered {
                    let (a, b) = (s.segment[0] - 1, s.segment[1] - 1);
                    assert!(!coverable_by_search(&task, &lib, &cfg, a, b));
                }
                requests += 1;
            }
        }
    }
    assert!(plans > 0 && requests > 0);
}

#[test]
fn trained_policy_matches_exhaustive_search() {
    let cfg = sim();
    let tcfg = TrainingConfig { episodes: 2000, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut n = 0;
    while n < 50 {
        let (task, lib) = random_instance(&mut rng, 5, 6);
        let p = PlanningProblem::new(&task, &lib, &cfg);
        let Some(best) = exhaustive_oracle(&p, tcfg.gamma) else { continue };
        let (q, _) = train(std::slice::from_ref(&task), &lib, &tcfg, &cfg, None).unwrap();
        let roll = greedy_rollout(&p, &q, tcfg.gamma, tcfg.r_fail, true);
        assert!(roll.success);
        assert_eq!(roll.discounted, best.discounted, "instance {n}");
        n += 1;
    }
}

#[test]
fn q_values_stay_in_range() {
    let cfg = sim();
    let tcfg = TrainingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let tasks = training_tasks(&mut rng, 5, &base_library(), &cfg, 1_000_000).unwrap();
    let (q, _) = train(&tasks, &base_library(), &tcfg, &cfg, None).unwrap();
    let lo = tcfg.r_fail / (1.0 - tcfg.gamma);
    assert!(!q.is_empty());
    assert!(q.values().all(|v| v.is_finite() && v >= lo && v <= 0.0));
    let back = QTable::from_json(&q.to_json()).unwrap();
    assert_eq!(back, q);
}

#[test]
fn training_curve_levels_off() {
    let cfg = sim();
    let tcfg = TrainingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let lib = base_library();
    let tasks = training_tasks(&mut rng, 20, &lib, &cfg, 1_000_000).unwrap();
    let (_, curve) = train(&tasks, &lib, &tcfg, &cfg, None).unwrap();
    assert_eq!(curve.greedy.len(), 100);
    let mean = |s: usize| curve.greedy[s..s + 20].iter().sum::<f64>() / 20.0;
    for s in 49..80 {
        assert!(mean(s + 1) >= mean(s) - 1e-6, "window {s}");
    }
}

fn base_policy() -> QTable {
    let cfg = sim();
    let tcfg = TrainingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(tcfg.seed);
    let lib = base_library();
    let tasks = training_tasks(&mut rng, 20, &lib, &cfg, 1_000_000).unwrap();
    train(&tasks, &lib, &tcfg, &cfg, None).unwrap().0
}

fn plan_with_retraining(task: &Task, lib: &Library, q0: &QTable) -> PlanOutcome {
    let tcfg = TrainingConfig::default();
    let (q, _) = train(std::slice::from_ref(task), lib, &tcfg, &sim(), Some(q0.clone())).unwrap();
    generate_plan(task, lib, &q, &sim(), &tcfg).unwrap()
}

#[test]
fn transferring_keeps_the_cup_level() {
    let lib = base_library();
    let q0 = base_policy();
    let want = UnitQuaternion::from_euler(&EulerAngles::new(0.0, -FRAC_PI_2, 0.0));
    for z in [0.1, 0.3, 0.5] {
        let PlanOutcome::Plan(plan) = plan_with_retraining(&transferring_task(z), &lib, &q0) else {
            panic!("transferring at z={z} should plan");
        };
        assert!(plan.waypoints.iter().all(|w| quat_distance(w.real(), &want) <= sim().delta_alpha));
    }
}

#[test]
fn filling_pouring_uses_three_demos() {
    let lib = base_library();
    let q0 = base_policy();
    let PlanOutcome::Plan(plan) = plan_with_retraining(&filling_pouring_task(0.2, -0.1), &lib, &q0) else {
        panic!("filling-pouring should plan");
    };
    let got: Vec<([usize; 2], &str)> = plan.provenance.iter().map(|p| (p.segment, p.demo.as_str())).collect();
    assert_eq!(got, vec![([1, 2], FILLING), ([2, 4], STACKING), ([4, 5], SCREWING_1)]);
}

#[test]
fn assembling_asks_for_a_demo_then_plans() {
    let q0 = base_policy();
    let lib = base_library();
    let PlanOutcome::DemoRequest(req) = plan_with_retraining(&assembling_task(), &lib, &q0) else {
        panic!("assembling should need a new demo");
    };
    assert_eq!(req.uncovered.len(), 1);
    assert_eq!(req.uncovered[0].segment, [2, 3]);
    let mut demos = base_demos();
    demos.push(span());
    let lib = library_from(&demos);
    let PlanOutcome::Plan(plan) = plan_with_retraining(&assembling_task(), &lib, &q0) else {
        panic!("assembling should plan with the span demo");
    };
    assert!(plan.provenance.iter().any(|p| p.segment == [2, 3] && p.demo == SPAN));
}
