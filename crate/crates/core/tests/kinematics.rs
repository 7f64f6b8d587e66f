use demoplan::robot::{DhLink, JointLimit};
use demoplan::{JointTrajectory, RobotModel, Vector3};
use nalgebra::{Matrix4, Rotation3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[rustfmt::skip]
fn dh_matrix(l: &DhLink, theta: f64) -> Matrix4<f64> {
    let th = theta + l.theta_offset;
    let (st, ct) = th.sin_cos();
    let (sa, ca) = l.alpha.sin_cos();
    Matrix4::new(
        ct, -st * ca, st * sa, l.a * ct,
        st, ct * ca, -ct * sa, l.a * st,
        0.0, sa, ca, l.d,
        0.0, 0.0, 0.0, 1.0,
    )
}

fn base_matrix(m: &RobotModel) -> Matrix4<f64> {
    let r = m.base().real().quaternion();
    let rot = nalgebra::UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(r.w, r.x, r.y, r.z));
    nalgebra::Isometry3::from_parts(nalgebra::Translation3::from(m.base().translation()), rot).to_homogeneous()
}

fn matrix_fk(m: &RobotModel, q: &[f64]) -> Matrix4<f64> {
    m.links().iter().zip(q).fold(base_matrix(m), |acc, (l, &t)| acc * dh_matrix(l, t))
}

fn random_q(rng: &mut ChaCha8Rng, m: &RobotModel) -> Vec<f64> {
    m.limits().iter().map(|l| rng.random_range(l.min.max(-3.0)..l.max.min(3.0))).collect()
}

#[test]
fn fk_matches_homogeneous_matrices() {
    let m = RobotModel::default_6r();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let q = random_q(&mut rng, &m);
        let t = matrix_fk(&m, &q);
        let pose = m.forward_kinematics(&q).unwrap();
        let p = pose.translation();
        for i in 0..3 {
            assert!((p[i] - t[(i, 3)]).abs() < 1e-9);
        }
        for (c, axis) in [Vector3::x(), Vector3::y(), Vector3::z()].iter().enumerate() {
            let col = pose.real().rotate(axis);
            for r in 0..3 {
                assert!((col[r] - t[(r, c)]).abs() < 1e-9);
            }
        }
    }
}

/// Spatial twist from central differences of the homogeneous FK.
fn fd_twist(m: &RobotModel, q: &[f64], i: usize, h: f64) -> [f64; 6] {
    let mut qp = q.to_vec();
    let mut qm = q.to_vec();
    qp[i] += h;
    qm[i] -= h;
    let (tp, tm, t0) = (matrix_fk(m, &qp), matrix_fk(m, &qm), matrix_fk(m, q));
    let dt = (tp - tm) / (2.0 * h);
    let r0 = t0.fixed_view::<3, 3>(0, 0).into_owned();
    let dr = dt.fixed_view::<3, 3>(0, 0).into_owned();
    let w_hat = dr * r0.transpose();
    let w = Vector3::new(w_hat[(2, 1)], w_hat[(0, 2)], w_hat[(1, 0)]);
    let p = t0.fixed_view::<3, 1>(0, 3).into_owned();
    let pdot = dt.fixed_view::<3, 1>(0, 3).into_owned();
    let v = pdot - w.cross(&p);
    [w.x, w.y, w.z, v.x, v.y, v.z]
}

#[test]
fn jacobian_matches_finite_differences() {
    let m = RobotModel::default_6r();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let q = random_q(&mut rng, &m);
        let j = m.spatial_jacobian(&q).unwrap();
        for i in 0..m.dof() {
            let fd = fd_twist(&m, &q, i, 1e-6);
            for r in 0..6 {
                assert!((j[(r, i)] - fd[r]).abs() < 1e-5, "joint {i} row {r}: {} vs {}", j[(r, i)], fd[r]);
            }
        }
    }
}

#[test]
fn default_arm_is_mounted_off_origin() {
    let m = RobotModel::default_6r();
    let f0 = m.frames(&[0.0; 6]).unwrap()[0];
    assert!((f0.translation() - Vector3::new(-0.2, 0.4, 0.0)).norm() < 1e-12);
    let moved = RobotModel::from_json(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(moved, m);
}

#[test]
fn planar_arm_reaches_known_points() {
    let link = DhLink { a: 1.0, alpha: 0.0, d: 0.0, theta_offset: 0.0 };
    let lim = JointLimit { min: -3.0, max: 3.0 };
    let m = RobotModel::new("2r", vec![link, link], vec![lim, lim]).unwrap();
    let p = m.forward_kinematics(&[std::f64::consts::FRAC_PI_2, 0.0]).unwrap().translation();
    assert!((p - Vector3::new(0.0, 2.0, 0.0)).norm() < 1e-12);
    let p = m.forward_kinematics(&[0.0, std::f64::consts::FRAC_PI_2]).unwrap().translation();
    assert!((p - Vector3::new(1.0, 1.0, 0.0)).norm() < 1e-12);
    let r = m.forward_kinematics(&[0.3, 0.4]).unwrap();
    let want = Rotation3::from_axis_angle(&Vector3::z_axis(), 0.7);
    assert!((r.real().rotate(&Vector3::x()) - want * Vector3::x()).norm() < 1e-12);
}

#[test]
fn limit_report_matches_linear_scan() {
    let m = RobotModel::default_6r();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let samples: Vec<Vec<f64>> = (0..30).map(|_| (0..6).map(|_| rng.random_range(-7.0..7.0)).collect()).collect();
        let mut expected = 0;
        for s in &samples {
            for (v, l) in s.iter().zip(m.limits()) {
                if *v < l.min || *v > l.max {
                    expected += 1;
                }
            }
        }
        let traj = JointTrajectory::new(0.01, samples).unwrap();
        let report = m.check_limits(&traj).unwrap();
        assert_eq!(report.violations.len(), expected);
        let worst = report.violations.iter().map(|v| v.excess).fold(0.0, f64::max);
        assert_eq!(report.worst_excess, worst);
    }
}
