//! Task specifications: ordered critical configurations with bounded Euler
//! orientations, and the relative-transform features of their segments.

use std::f64::consts::TAU;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{quat_distance, EulerAngles, Pose, Vector3};

/// Minimum separation between consecutive configurations, in meters and in
/// rotation distance.
pub const DISTINCT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("a task needs at least two configurations, got {0}")]
    TooShort(usize),
    #[error("configuration {index}: {what} bounds are inverted ({lo} > {hi})")]
    BoundInversion { index: usize, what: &'static str, lo: f64, hi: f64 },
    #[error("configuration {index}: nominal {what} {value} lies outside [{lo}, {hi}]")]
    NominalOutOfBounds { index: usize, what: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("configuration {index}: non-finite value")]
    NonFinite { index: usize },
    #[error("configurations {0} and {1} coincide")]
    Duplicate(usize, usize),
    #[error("segment ({start}, {end}) is invalid for a task of {len} configurations")]
    BadSegment { start: usize, end: usize, len: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Closed interval of admissible values for one Euler angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleBound {
    pub lo: f64,
    pub hi: f64,
}

impl AngleBound {
    pub const FREE: AngleBound = AngleBound { lo: -TAU, hi: TAU };

    pub fn pinned(v: f64) -> Self {
        AngleBound { lo: v, hi: v }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn is_pinned(&self) -> bool {
        self.lo == self.hi
    }

    fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalConfiguration {
    pub p: Vector3,
    /// Bounds for roll, pitch and yaw, in that order.
    pub bounds: [AngleBound; 3],
    pub nominal: EulerAngles,
}

const ANGLE_NAMES: [&str; 3] = ["roll", "pitch", "yaw"];

impl CriticalConfiguration {
    /// Configuration with every angle pinned to `e`.
    pub fn pinned(p: Vector3, e: EulerAngles) -> Self {
        CriticalConfiguration {
            p,
            bounds: e.as_array().map(AngleBound::pinned),
            nominal: e,
        }
    }

    /// Nominal orientation defaults to the midpoint of each interval.
    pub fn bounded(p: Vector3, bounds: [AngleBound; 3], nominal: Option<EulerAngles>) -> Self {
        let nominal = nominal.unwrap_or_else(|| {
            let [r, pi, y] = bounds.map(|b| b.midpoint());
            EulerAngles::new(r, pi, y)
        });
        CriticalConfiguration { p, bounds, nominal }
    }

    fn validate(&self, index: usize) -> Result<(), TaskError> {
        let finite = self.p.iter().all(|v| v.is_finite())
            && self.nominal.as_array().iter().all(|v| v.is_finite())
            && self.bounds.iter().all(|b| !b.lo.is_nan() && !b.hi.is_nan());
        if !finite {
            return Err(TaskError::NonFinite { index });
        }
        for ((b, what), value) in self.bounds.iter().zip(ANGLE_NAMES).zip(self.nominal.as_array()) {
            if b.lo > b.hi {
                return Err(TaskError::BoundInversion { index, what, lo: b.lo, hi: b.hi });
            }
            if !b.contains(value) {
                return Err(TaskError::NominalOutOfBounds { index, what, value, lo: b.lo, hi: b.hi });
            }
        }
        Ok(())
    }

    pub fn pose(&self) -> Pose {
        config_to_pose(self)
    }
}

pub fn config_to_pose(c: &CriticalConfiguration) -> Pose {
    Pose::new(&c.p, &c.nominal.to_quat())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    name: String,
    constraints: Vec<CriticalConfiguration>,
    poses: Vec<Pose>,
}

impl Task {
    pub fn new(name: impl Into<String>, constraints: Vec<CriticalConfiguration>) -> Result<Self, TaskError> {
        if constraints.len() < 2 {
            return Err(TaskError::TooShort(constraints.len()));
        }
        for (i, c) in constraints.iter().enumerate() {
            c.validate(i + 1)?;
        }
        let poses: Vec<Pose> = constraints.iter().map(config_to_pose).collect();
        for (i, w) in poses.windows(2).enumerate() {
            let dp = (w[0].translation() - w[1].translation()).norm();
            let dr = quat_distance(w[0].real(), w[1].real());
            if dp < DISTINCT_TOLERANCE && dr < DISTINCT_TOLERANCE {
                return Err(TaskError::Duplicate(i + 1, i + 2));
            }
        }
        Ok(Task { name: name.into(), constraints, poses })
    }

    /// Task whose every orientation is pinned.
    pub fn from_pinned(name: impl Into<String>, configs: &[(Vector3, EulerAngles)]) -> Result<Self, TaskError> {
        let cs = configs.iter().map(|(p, e)| CriticalConfiguration::pinned(*p, *e)).collect();
        Task::new(name, cs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constraints(&self) -> &[CriticalConfiguration] {
        &self.constraints
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn segment(&self, start: usize, end: usize) -> Result<TaskSegment, TaskError> {
        TaskSegment::new(start, end, self.len())
    }

    pub fn from_json(s: &str) -> Result<Self, TaskError> {
        let doc: TaskDocument = serde_json::from_str(s)?;
        doc.into_task()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TaskError> {
        Task::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_document(&self) -> TaskDocument {
        TaskDocument {
            name: self.name.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| {
                    let spec = |i: usize| {
                        let b = c.bounds[i];
                        if b.is_pinned() {
                            AngleSpec::Pinned(b.lo)
                        } else if b == AngleBound::FREE {
                            AngleSpec::Free(FreeTag::Free)
                        } else {
                            AngleSpec::Bounded([b.lo, b.hi])
                        }
                    };
                    let all_pinned = c.bounds.iter().all(|b| b.is_pinned());
                    ConfigDocument {
                        p: [c.p.x, c.p.y, c.p.z],
                        euler: EulerDocument { roll: spec(0), pitch: spec(1), yaw: spec(2) },
                        nominal: (!all_pinned).then_some(c.nominal),
                    }
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("task documents serialize")
    }
}

pub fn parse_task(document: &str) -> Result<Task, TaskError> {
    Task::from_json(document)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FreeTag {
    Free,
}

/// One Euler angle in a task file: a pinned value, `[lo, hi]`, or `"free"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Pinned(f64),
    Bounded([f64; 2]),
    Free(FreeTag),
}

impl AngleSpec {
    fn bound(&self) -> AngleBound {
        match *self {
            AngleSpec::Pinned(v) => AngleBound::pinned(v),
            AngleSpec::Bounded([lo, hi]) => AngleBound { lo, hi },
            AngleSpec::Free(_) => AngleBound::FREE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerDocument {
    pub roll: AngleSpec,
    pub pitch: AngleSpec,
    pub yaw: AngleSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigDocument {
    pub p: [f64; 3],
    pub euler: EulerDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nominal: Option<EulerAngles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskDocument {
    pub name: String,
    pub constraints: Vec<ConfigDocument>,
}

impl TaskDocument {
    pub fn into_task(self) -> Result<Task, TaskError> {
        let cs = self
            .constraints
            .iter()
            .map(|c| {
                let bounds = [c.euler.roll.bound(), c.euler.pitch.bound(), c.euler.yaw.bound()];
                CriticalConfiguration::bounded(Vector3::from(c.p), bounds, c.nominal)
            })
            .collect();
        Task::new(self.name, cs)
    }
}

/// Contiguous run of configurations `start..=end` (zero-based, `start < end`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskSegment {
    pub start: usize,
    pub end: usize,
}

impl TaskSegment {
    pub fn new(start: usize, end: usize, len: usize) -> Result<Self, TaskError> {
        if start >= end || end >= len {
            return Err(TaskError::BadSegment { start, end, len });
        }
        Ok(TaskSegment { start, end })
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// One-based `[start, end]` as shown to users.
    pub fn one_based(&self) -> [usize; 2] {
        [self.start + 1, self.end + 1]
    }
}

/// Relative transforms of a task segment with respect to its final configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskFeature {
    pub deltas: Vec<Pose>,
}

/// `δ_i = D_i* ⊗ D_last` for every pose but the last.
pub fn relative_to_last(poses: &[Pose]) -> Vec<Pose> {
    let Some(last) = poses.last() else {
        return Vec::new();
    };
    poses[..poses.len() - 1].iter().map(|d| d.relative_to(last)).collect()
}

pub fn segment_feature(task: &Task, s: TaskSegment) -> TaskFeature {
    TaskFeature { deltas: relative_to_last(&task.poses[s.start..=s.end]) }
}
