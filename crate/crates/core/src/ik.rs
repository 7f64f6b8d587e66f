//! Differential inverse kinematics on quaternion task-space rates.
//!
//! The task-space coordinate is `γ = (p, r)` with `r` a quaternion. The
//! spatial twist `ξ = (ω, v)` relates to `γ̇` through `ξ = J₂ γ̇`, and joint
//! rates follow as `q̇ = B γ̇` with `B = Jᵀ(JJᵀ + λI)⁻¹J₂`.

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demo::MAX_STEP_ROTATION;
use crate::geom::{quat_distance, Pose, Quaternion, UnitQuaternion, Vector3};
use crate::robot::{JointTrajectory, LimitReport, RobotError, RobotModel};

#[derive(Debug, Error)]
pub enum IkError {
    #[error("spatial Jacobian is singular (smallest singular value {0:e}) and damping is zero")]
    Singular(f64),
    #[error("no convergence: position error {position:e} m, rotation distance {rotation:e}")]
    NoConvergence { position: f64, rotation: f64 },
    #[error("initial configuration is {position:e} m / {rotation:e} away from the first waypoint")]
    StartMismatch { position: f64, rotation: f64 },
    #[error("invalid IK configuration: {0}")]
    Config(String),
    #[error("the plan has no waypoints")]
    EmptyPlan,
    #[error(transparent)]
    Robot(#[from] RobotError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IkConfig {
    /// Time step between output samples, in seconds.
    pub h: f64,
    pub damping: f64,
    pub position_tolerance: f64,
    pub rotation_tolerance: f64,
    /// Upper bound on the pieces a single step may be split into.
    pub max_substeps: usize,
    /// Largest rotation per piece, in radians.
    pub max_step_rotation: f64,
    /// Largest translation per piece, in meters.
    pub max_step_translation: f64,
    /// Closed-loop corrections applied after the feed-forward pieces.
    pub max_corrections: usize,
    /// Allowed mismatch between the initial configuration and the plan start.
    pub start_tolerance: f64,
}

impl Default for IkConfig {
    fn default() -> Self {
        IkConfig {
            h: 0.01,
            damping: 1e-6,
            position_tolerance: 1e-6,
            rotation_tolerance: 1e-6,
            max_substeps: 64,
            max_step_rotation: MAX_STEP_ROTATION,
            max_step_translation: 0.02,
            max_corrections: 30,
            start_tolerance: 1e-3,
        }
    }
}

impl IkConfig {
    pub fn validate(&self) -> Result<(), IkError> {
        if !(self.h > 0.0) {
            return Err(IkError::Config("h must be positive".into()));
        }
        if !(self.damping >= 0.0) {
            return Err(IkError::Config("damping must be non-negative".into()));
        }
        if self.max_substeps == 0 {
            return Err(IkError::Config("max_substeps must be at least 1".into()));
        }
        Ok(())
    }
}

fn skew(v: &Vector3) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// `J₁ = [−v | wI + [v]×]` for `r = (w, v)`, so that `ω = 2 J₁ ṙ`.
pub fn j1_matrix(r: &Quaternion) -> SMatrix<f64, 3, 4> {
    let v = r.vector();
    let block = Matrix3::identity() * r.w + skew(&v);
    let mut m = SMatrix::<f64, 3, 4>::zeros();
    m.fixed_view_mut::<3, 1>(0, 0).copy_from(&-v);
    m.fixed_view_mut::<3, 3>(0, 1).copy_from(&block);
    m
}

/// Maps `γ̇ = (ṗ, ṙ)` to the spatial twist `(ω, v)`:
/// `[[0, 2J₁], [I, 2[p]×J₁]]`.
pub fn j2_matrix(p: &Vector3, r: &Quaternion) -> SMatrix<f64, 6, 7> {
    let j1 = j1_matrix(r) * 2.0;
    let mut m = SMatrix::<f64, 6, 7>::zeros();
    m.fixed_view_mut::<3, 4>(0, 3).copy_from(&j1);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&Matrix3::identity());
    m.fixed_view_mut::<3, 4>(3, 3).copy_from(&(skew(p) * j1));
    m
}

/// Damped right pseudoinverse `Jᵀ(JJᵀ + λI)⁻¹`.
pub fn damped_pinv(j: &DMatrix<f64>, damping: f64) -> Result<DMatrix<f64>, IkError> {
    let rows = j.nrows();
    if damping == 0.0 {
        let sv = j.clone().svd(false, false).singular_values;
        let smallest = if sv.len() < rows { 0.0 } else { sv.min() };
        if smallest < 1e-9 {
            return Err(IkError::Singular(smallest));
        }
    }
    let a = j * j.transpose() + DMatrix::identity(rows, rows) * damping;
    let inv = a.try_inverse().ok_or(IkError::Singular(0.0))?;
    Ok(j.transpose() * inv)
}

/// `B = Jᵀ(JJᵀ + λI)⁻¹ J₂(p, r)`, an r×7 matrix.
pub fn b_matrix(
    m: &RobotModel,
    q: &[f64],
    p: &Vector3,
    r: &Quaternion,
    damping: f64,
) -> Result<DMatrix<f64>, IkError> {
    let j = m.spatial_jacobian(q)?;
    let j2 = j2_matrix(p, r);
    let j2 = DMatrix::from_fn(6, 7, |i, k| j2[(i, k)]);
    Ok(damped_pinv(&j, damping)? * j2)
}

fn residual(a: &Pose, b: &Pose) -> (f64, f64) {
    ((a.translation() - b.translation()).norm(), quat_distance(a.real(), b.real()))
}

/// One feed-forward increment `δq = B (γ_target − γ)`, with the target
/// quaternion taken on the hemisphere of the current one.
fn increment(m: &RobotModel, q: &[f64], target: &Pose, damping: f64) -> Result<Vec<f64>, IkError> {
    let (p, r) = m.forward_kinematics(q)?.to_parts();
    let (pt, rt) = target.to_parts();
    let (r, mut rt) = (*r.quaternion(), *rt.quaternion());
    if rt.dot(&r) < 0.0 {
        rt = -rt;
    }
    let dp = pt - p;
    let dr = rt - r;
    let dg = DVector::from_vec(vec![dp.x, dp.y, dp.z, dr.w, dr.x, dr.y, dr.z]);
    let dq = b_matrix(m, q, &p, &r, damping)? * dg;
    Ok(q.iter().zip(dq.iter()).map(|(a, b)| a + b).collect())
}

/// Moves `q` so that its end-effector reaches `target`.
///
/// Large displacements are split into pieces of at most
/// `max_step_rotation` / `max_step_translation`, then the residual is driven
/// below tolerance by repeated corrections.
pub fn resolve_step(m: &RobotModel, q: &[f64], target: &Pose, cfg: &IkConfig) -> Result<Vec<f64>, IkError> {
    let start = m.forward_kinematics(q)?;
    let (dp, dr) = residual(&start, target);
    if dp <= cfg.position_tolerance && dr <= cfg.rotation_tolerance {
        return Ok(q.to_vec());
    }
    let angle = start.real().angle_to(target.real());
    let dist = (start.translation() - target.translation()).norm();
    let mut pieces = 1usize;
    while pieces < cfg.max_substeps
        && (angle / pieces as f64 > cfg.max_step_rotation || dist / pieces as f64 > cfg.max_step_translation)
    {
        pieces *= 2;
    }
    let pieces = pieces.min(cfg.max_substeps);
    let mut cur = q.to_vec();
    for s in 1..=pieces {
        let sub = start.interpolate(target, s as f64 / pieces as f64);
        cur = increment(m, &cur, &sub, cfg.damping)?;
    }
    let mut err = residual(&m.forward_kinematics(&cur)?, target);
    for _ in 0..cfg.max_corrections {
        if err.0 <= cfg.position_tolerance && err.1 <= cfg.rotation_tolerance {
            break;
        }
        let next = increment(m, &cur, target, cfg.damping)?;
        let next_err = residual(&m.forward_kinematics(&next)?, target);
        if next_err.0 + next_err.1 >= err.0 + err.1 {
            break;
        }
        cur = next;
        err = next_err;
    }
    if err.0 > cfg.position_tolerance || err.1 > cfg.rotation_tolerance {
        return Err(IkError::NoConvergence { position: err.0, rotation: err.1 });
    }
    Ok(cur)
}

/// Searches for a configuration reaching `target`, starting from each seed in
/// turn.
pub fn solve_configuration(
    m: &RobotModel,
    seeds: &[Vec<f64>],
    target: &Pose,
    cfg: &IkConfig,
) -> Result<Vec<f64>, IkError> {
    let relaxed = IkConfig { max_substeps: cfg.max_substeps.max(256), max_corrections: cfg.max_corrections.max(100), ..*cfg };
    let mut last = IkError::NoConvergence { position: f64::INFINITY, rotation: f64::INFINITY };
    for seed in seeds {
        match resolve_step(m, seed, target, &relaxed) {
            Ok(q) => return Ok(q),
            Err(e @ IkError::Robot(_)) => return Err(e),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Starting guesses for [`solve_configuration`]: a coarse grid over the first
/// three joints with the remaining joints bent, all clamped into the limits.
pub fn seed_grid(m: &RobotModel) -> Vec<Vec<f64>> {
    const AXES: [&[f64]; 3] = [&[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0], &[-2.0, -1.0, -0.5], &[-1.5, 1.5]];
    let clamp = |i: usize, v: f64| v.clamp(m.limits()[i].min, m.limits()[i].max);
    let mut out = vec![Vec::new()];
    for i in 0..m.dof() {
        let values: &[f64] = match AXES.get(i) {
            Some(v) => v,
            None if i + 1 == m.dof() => &[0.0],
            None => &[-1.5],
        };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                values.iter().map(move |&v| {
                    let mut q = prefix.clone();
                    q.push(clamp(i, v));
                    q
                })
            })
            .collect();
    }
    out
}

/// Resolves every waypoint in turn, starting from `q0`. Joint limits are
/// reported, not enforced.
pub fn track_plan(
    m: &RobotModel,
    q0: &[f64],
    waypoints: &[Pose],
    cfg: &IkConfig,
) -> Result<(JointTrajectory, LimitReport), IkError> {
    cfg.validate()?;
    let first = waypoints.first().ok_or(IkError::EmptyPlan)?;
    let (position, rotation) = residual(&m.forward_kinematics(q0)?, first);
    if position > cfg.start_tolerance || rotation > cfg.start_tolerance {
        return Err(IkError::StartMismatch { position, rotation });
    }
    let mut samples = vec![q0.to_vec()];
    for w in &waypoints[1..] {
        let next = resolve_step(m, samples.last().unwrap(), w, cfg)?;
        samples.push(next);
    }
    let traj = JointTrajectory::new(cfg.h, samples)?;
    let report = m.check_limits(&traj)?;
    Ok((traj, report))
}

/// Quaternion rate of rotating at spatial angular velocity `omega`: `ṙ = ½ (0, ω) ⊗ r`.
pub fn quaternion_rate(r: &UnitQuaternion, omega: &Vector3) -> Quaternion {
    Quaternion::pure(omega).hamilton(r.quaternion()).scale(0.5)
}
