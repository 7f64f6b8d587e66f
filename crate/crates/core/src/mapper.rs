//! Mapping matched demonstration features onto task segments, plan
//! reconstruction, and library coverage.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demo::{DemoFeature, Library, MAX_STEP_ROTATION};
use crate::geom::{GeomError, Pose, PoseRecord, UnitQuaternion, Vector3};
use crate::similarity::{is_semantically_similar, Allocation, SimilarityConfig};
use crate::task::{segment_feature, Task, TaskFeature, TaskSegment};

#[derive(Debug, Error)]
pub enum MapError {
    #[error("alignment needs two nonzero directions")]
    ZeroDirection,
    #[error("demo `{0}` has no translation to scale onto a translating segment")]
    Unscalable(String),
    #[error("empty allocation")]
    EmptyAllocation,
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Rotation taking `demo_dir` onto `task_dir`.
///
/// Antiparallel inputs turn by π about the component of world z orthogonal to
/// `demo_dir`, or about world x when `demo_dir` is along z.
pub fn alignment_quat(demo_dir: &Vector3, task_dir: &Vector3) -> Result<UnitQuaternion, MapError> {
    let (na, nb) = (demo_dir.norm(), task_dir.norm());
    if !(na > 0.0) || !(nb > 0.0) {
        return Err(MapError::ZeroDirection);
    }
    let (a, b) = (demo_dir / na, task_dir / nb);
    let cross = a.cross(&b);
    let cos = a.dot(&b).clamp(-1.0, 1.0);
    if cross.norm() > 1e-12 {
        return Ok(UnitQuaternion::from_axis_angle(&cross, cos.acos())?);
    }
    if cos > 0.0 {
        return Ok(UnitQuaternion::identity());
    }
    let z = Vector3::z();
    let ortho = z - a * a.dot(&z);
    let axis = if ortho.norm() > 1e-9 { ortho } else { Vector3::x() - a * a.x };
    Ok(UnitQuaternion::from_axis_angle(&axis, std::f64::consts::PI)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MappedFeature {
    pub demo: String,
    pub segment: TaskSegment,
    /// Mapped transforms, ending with the identity.
    pub deltas: Vec<Pose>,
}

/// Re-targets the demo deltas from the first allocated one onward.
///
/// Translations are rotated so that the first mapped delta carries the segment
/// start onto the goal, and scaled by `‖task translation‖ / ‖demo translation‖`.
/// Rotations are copied.
pub fn map_feature(
    hd: &DemoFeature,
    tf: &TaskFeature,
    segment: TaskSegment,
    alloc: &Allocation,
    cfg: &SimilarityConfig,
) -> Result<MappedFeature, MapError> {
    let (_, l1) = *alloc.pairs.first().ok_or(MapError::EmptyAllocation)?;
    let demo = &hd.deltas()[l1..];
    let task0 = tf.deltas.first().ok_or(MapError::EmptyAllocation)?;
    let (task_t, task_r) = task0.to_parts();
    let (demo_t, demo_r) = demo[0].to_parts();
    let eps = cfg.zero_translation_epsilon;

    let deltas = if task_t.norm() < eps {
        demo.iter().map(|d| Pose::from_rotation(d.real())).collect()
    } else {
        if demo_t.norm() < eps {
            return Err(MapError::Unscalable(hd.name.clone()));
        }
        let target = demo_r.compose(&task_r.conjugate()).rotate(&task_t);
        let align = alignment_quat(&demo_t, &target)?;
        let scale = task_t.norm() / demo_t.norm();
        demo.iter()
            .map(|d| {
                let (t, r) = d.to_parts();
                Pose::new(&(align.rotate(&t) * scale), &r)
            })
            .collect()
    };
    Ok(MappedFeature { demo: hd.name.clone(), segment, deltas })
}

/// `waypoint_i = goal ⊗ δ_i*`; the last waypoint is the goal itself.
pub fn reconstruct_plan(goal: &Pose, mf: &MappedFeature) -> Vec<Pose> {
    let mut out: Vec<Pose> = mf.deltas.iter().map(|d| goal.compose(&d.conjugate())).collect();
    if let Some(last) = out.last_mut() {
        *last = *goal;
    }
    out
}

/// Inserts interpolated poses until consecutive rotations differ by less than
/// `max_step` radians.
pub fn densify(waypoints: &[Pose], max_step: f64) -> Vec<Pose> {
    let Some(first) = waypoints.first() else {
        return Vec::new();
    };
    let mut out = vec![*first];
    for w in waypoints.windows(2) {
        let angle = w[0].real().angle_to(w[1].real());
        let pieces = if angle < max_step { 1 } else { (angle / max_step).floor() as usize + 1 };
        for s in 1..pieces {
            out.push(w[0].interpolate(&w[1], s as f64 / pieces as f64));
        }
        out.push(w[1]);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// One-based `[start, end]`.
    pub segment: [usize; 2],
    pub demo: String,
    /// One-based `(task delta, demo delta)` pairs.
    #[serde(default)]
    pub allocation: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionPlan {
    pub task: String,
    pub waypoints: Vec<Pose>,
    pub provenance: Vec<Provenance>,
}

impl MotionPlan {
    /// Concatenates per-segment waypoints, dropping the duplicated joints.
    pub fn assemble(task: &Task, parts: Vec<(MappedFeature, Allocation)>) -> MotionPlan {
        let mut waypoints: Vec<Pose> = Vec::new();
        let mut provenance = Vec::new();
        for (mf, alloc) in parts {
            let goal = task.poses()[mf.segment.end];
            let wps = reconstruct_plan(&goal, &mf);
            let skip = usize::from(!waypoints.is_empty());
            waypoints.extend(wps.into_iter().skip(skip));
            provenance.push(Provenance {
                segment: mf.segment.one_based(),
                demo: mf.demo.clone(),
                allocation: alloc.pairs.iter().map(|&(j, l)| (j + 1, l + 1)).collect(),
            });
        }
        MotionPlan { task: task.name().to_owned(), waypoints: densify(&waypoints, MAX_STEP_ROTATION), provenance }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plans serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, MapError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MapError> {
        MotionPlan::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn waypoint_records(&self) -> Vec<PoseRecord> {
        self.waypoints.iter().map(PoseRecord::from).collect()
    }
}

/// Matching information for every candidate segment of a task.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageReport {
    n: usize,
    /// `direct[j][k]`: library indices semantically similar to segment `j..=k`.
    direct: Vec<Vec<Vec<usize>>>,
    /// `coverable[j][k]`: segment `j..=k` splits into directly matched pieces.
    coverable: Vec<Vec<bool>>,
    /// Empty when the whole task is coverable; otherwise the uncoverable
    /// segments that contain no smaller uncoverable segment.
    pub uncovered: Vec<TaskSegment>,
}

impl CoverageReport {
    pub fn is_covered(&self) -> bool {
        self.uncovered.is_empty()
    }

    pub fn direct_matches(&self, j: usize, k: usize) -> &[usize] {
        &self.direct[j][k]
    }

    pub fn coverable(&self, j: usize, k: usize) -> bool {
        j < k && k < self.n && self.coverable[j][k]
    }
}

pub fn coverage_check(task: &Task, lib: &Library, cfg: &SimilarityConfig) -> CoverageReport {
    let n = task.len();
    let mut direct = vec![vec![Vec::new(); n]; n];
    for j in 0..n {
        for k in j + 1..n {
            let tf = segment_feature(task, TaskSegment { start: j, end: k });
            direct[j][k] = lib
                .features()
                .iter()
                .enumerate()
                .filter(|(_, f)| is_semantically_similar(&tf.deltas, f.deltas(), cfg).is_some())
                .map(|(i, _)| i)
                .collect();
        }
    }
    coverage_from_direct(n, direct)
}

pub(crate) fn coverage_from_direct(n: usize, direct: Vec<Vec<Vec<usize>>>) -> CoverageReport {
    let mut coverable = vec![vec![false; n]; n];
    for len in 1..n {
        for j in 0..n - len {
            let k = j + len;
            coverable[j][k] = !direct[j][k].is_empty() || (j + 1..k).any(|m| coverable[j][m] && coverable[m][k]);
        }
    }
    let mut uncovered = Vec::new();
    if n >= 2 && !coverable[0][n - 1] {
        for j in 0..n {
            for k in j + 1..n {
                if coverable[j][k] {
                    continue;
                }
                let has_smaller = (j..k).any(|a| {
                    (a + 1..=k).any(|b| (a, b) != (j, k) && !coverable[a][b])
                });
                if !has_smaller {
                    uncovered.push(TaskSegment { start: j, end: k });
                }
            }
        }
    }
    CoverageReport { n, direct, coverable, uncovered }
}
