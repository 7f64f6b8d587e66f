//! Serial-arm kinematics with classic (distal) Denavit–Hartenberg links.
//!
//! Link `i` contributes `Rz(θ_i + offset) · Tz(d) · Tx(a) · Rx(α)`. Joint `i`
//! rotates about the z-axis of frame `i − 1`. Twists are ordered angular first,
//! then linear.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Pose, UnitQuaternion, Vector3};

const DEFAULT_6R: &str = include_str!("../data/default_6r.json");

#[derive(Debug, Error)]
pub enum RobotError {
    #[error("expected {expected} joint values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid robot model: {0}")]
    Invalid(String),
    #[error("invalid trajectory: {0}")]
    Trajectory(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DhLink {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
}

impl DhLink {
    /// Transform contributed by this link at joint angle `theta`.
    pub fn transform(&self, theta: f64) -> Pose {
        let th = theta + self.theta_offset;
        let (s, c) = th.sin_cos();
        let p = Vector3::new(self.a * c, self.a * s, self.d);
        let rz = UnitQuaternion::from_axis_angle(&Vector3::z(), th).unwrap();
        let rx = UnitQuaternion::from_axis_angle(&Vector3::x(), self.alpha).unwrap();
        Pose::new(&p, &rz.compose(&rx))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLimit {
    pub min: f64,
    pub max: f64,
}

#[derive(Deserialize)]
struct RobotFile {
    name: String,
    #[serde(default)]
    base: Option<Pose>,
    dh: Vec<DhLink>,
    limits: Vec<JointLimit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RobotFile")]
pub struct RobotModel {
    name: String,
    /// Mounting pose of frame 0 in the world.
    base: Pose,
    dh: Vec<DhLink>,
    limits: Vec<JointLimit>,
}

impl TryFrom<RobotFile> for RobotModel {
    type Error = RobotError;
    fn try_from(f: RobotFile) -> Result<Self, RobotError> {
        let m = RobotModel::new(f.name, f.dh, f.limits)?;
        Ok(match f.base {
            Some(b) => m.with_base(b),
            None => m,
        })
    }
}

impl RobotModel {
    pub fn new(name: impl Into<String>, dh: Vec<DhLink>, limits: Vec<JointLimit>) -> Result<Self, RobotError> {
        if dh.is_empty() {
            return Err(RobotError::Invalid("at least one joint is required".into()));
        }
        if limits.len() != dh.len() {
            return Err(RobotError::Invalid(format!(
                "{} DH rows but {} joint limits",
                dh.len(),
                limits.len()
            )));
        }
        for (i, l) in dh.iter().enumerate() {
            if ![l.a, l.alpha, l.d, l.theta_offset].iter().all(|v| v.is_finite()) {
                return Err(RobotError::Invalid(format!("joint {} has a non-finite DH value", i + 1)));
            }
        }
        for (i, l) in limits.iter().enumerate() {
            if !(l.min < l.max) {
                return Err(RobotError::Invalid(format!("joint {} limits are not ordered", i + 1)));
            }
        }
        Ok(RobotModel { name: name.into(), base: Pose::identity(), dh, limits })
    }

    pub fn with_base(mut self, base: Pose) -> Self {
        self.base = base;
        self
    }

    pub fn base(&self) -> &Pose {
        &self.base
    }

    /// Built-in six-joint arm used when no robot file is given.
    ///
    /// The parameters approximate a UR5e-class arm and stand in for the
    /// unpublished values of any particular hardware.
    pub fn default_6r() -> Self {
        RobotModel::from_json(DEFAULT_6R).expect("bundled robot file is valid")
    }

    pub fn from_json(s: &str) -> Result<Self, RobotError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RobotError> {
        RobotModel::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.dh.len()
    }

    pub fn links(&self) -> &[DhLink] {
        &self.dh
    }

    pub fn limits(&self) -> &[JointLimit] {
        &self.limits
    }

    fn check_dim(&self, q: &[f64]) -> Result<(), RobotError> {
        if q.len() != self.dof() {
            return Err(RobotError::DimensionMismatch { expected: self.dof(), got: q.len() });
        }
        Ok(())
    }

    /// Frames `0..=r` in the world; frame 0 is the mounting pose.
    pub fn frames(&self, q: &[f64]) -> Result<Vec<Pose>, RobotError> {
        self.check_dim(q)?;
        let mut out = Vec::with_capacity(self.dof() + 1);
        let mut cur = self.base;
        out.push(cur);
        for (link, &theta) in self.dh.iter().zip(q) {
            cur = cur.compose(&link.transform(theta));
            out.push(cur);
        }
        Ok(out)
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Result<Pose, RobotError> {
        Ok(*self.frames(q)?.last().unwrap())
    }

    /// 6×r spatial Jacobian; column `i` is `(ω_i, q_i × ω_i)` for the joint axis
    /// `ω_i` through the point `q_i`.
    pub fn spatial_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>, RobotError> {
        let frames = self.frames(q)?;
        let mut j = DMatrix::zeros(6, self.dof());
        for i in 0..self.dof() {
            let (origin, rot) = frames[i].to_parts();
            let w = rot.rotate(&Vector3::z());
            let v = origin.cross(&w);
            for r in 0..3 {
                j[(r, i)] = w[r];
                j[(r + 3, i)] = v[r];
            }
        }
        Ok(j)
    }

    pub fn check_limits(&self, t: &JointTrajectory) -> Result<LimitReport, RobotError> {
        if t.dof() != self.dof() {
            return Err(RobotError::DimensionMismatch { expected: self.dof(), got: t.dof() });
        }
        let mut violations = Vec::new();
        for (step, q) in t.samples().iter().enumerate() {
            for (joint, (&v, lim)) in q.iter().zip(&self.limits).enumerate() {
                let excess = if v > lim.max {
                    v - lim.max
                } else if v < lim.min {
                    lim.min - v
                } else {
                    continue;
                };
                violations.push(LimitViolation { step, joint, value: v, excess });
            }
        }
        Ok(LimitReport::new(violations))
    }
}

/// Joint samples at a uniform time step.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTrajectory {
    h: f64,
    samples: Vec<Vec<f64>>,
}

impl JointTrajectory {
    pub fn new(h: f64, samples: Vec<Vec<f64>>) -> Result<Self, RobotError> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(RobotError::Trajectory("time step must be positive".into()));
        }
        let Some(first) = samples.first() else {
            return Err(RobotError::Trajectory("trajectory is empty".into()));
        };
        let n = first.len();
        if n == 0 {
            return Err(RobotError::Trajectory("samples have no joints".into()));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.len() != n {
                return Err(RobotError::Trajectory(format!(
                    "sample {} has {} joints, expected {}",
                    i,
                    s.len(),
                    n
                )));
            }
            if !s.iter().all(|v| v.is_finite()) {
                return Err(RobotError::Trajectory(format!("sample {} is not finite", i)));
            }
        }
        Ok(JointTrajectory { h, samples })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dof(&self) -> usize {
        self.samples[0].len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitViolation {
    pub step: usize,
    pub joint: usize,
    pub value: f64,
    pub excess: f64,
}

/// Joint-limit violations of a trajectory. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct LimitReport {
    pub violations: Vec<LimitViolation>,
    pub worst_excess: f64,
}

impl LimitReport {
    fn new(violations: Vec<LimitViolation>) -> Self {
        let worst_excess = violations.iter().map(|v| v.excess).fold(0.0, f64::max);
        LimitReport { violations, worst_excess }
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}
