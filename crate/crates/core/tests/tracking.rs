use demoplan::ik::{seed_grid, solve_configuration, IkConfig};
use demoplan::planner::*;
use demoplan::scenario::*;
use demoplan::*;

#[test]
fn transferring_plan_tracks_on_default_arm() {
    let sim = SimilarityConfig::default();
    let cfg = TrainingConfig::default();
    let lib = base_library();
    let m = RobotModel::default_6r();
    let ik = IkConfig::default();
    for z in [0.1, 0.3, 0.5] {
        let task = transferring_task(z);
        let (q, _) = train(std::slice::from_ref(&task), &lib, &cfg, &sim, None).unwrap();
        let PlanOutcome::Plan(plan) = generate_plan(&task, &lib, &q, &sim, &cfg).unwrap() else { panic!() };
        let q0 = solve_configuration(&m, &seed_grid(&m), &plan.waypoints[0], &ik).unwrap();
        let (traj, _) = track_plan(&m, &q0, &plan.waypoints, &ik).unwrap();
        assert_eq!(traj.len(), plan.waypoints.len());
        for (s, w) in traj.samples().iter().zip(&plan.waypoints) {
            let f = m.forward_kinematics(s).unwrap();
            assert!((f.translation() - w.translation()).norm() < 1e-3);
            assert!(quat_distance(f.real(), w.real()) < 1e-3);
        }
    }
}
