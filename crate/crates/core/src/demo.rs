//! Demonstration ingestion, feature extraction and the feature library.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{GeomError, Pose, PoseRecord, Quaternion, UnitQuaternion, Vector3};
use crate::robot::{JointTrajectory, RobotError, RobotModel};
use crate::task::relative_to_last;

/// Largest rotation between consecutive samples, in radians.
pub const MAX_STEP_ROTATION: f64 = 0.175;

/// Rotations whose norm is off by more than this are normalized with a warning.
const SILENT_NORMALIZE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("a demonstration needs at least two samples, got {0}")]
    TooShort(usize),
    #[error("sample {index}: {source}")]
    BadPose { index: usize, source: GeomError },
    #[error(transparent)]
    Robot(#[from] RobotError),
    #[error("feature `{0}` already exists in the library")]
    Duplicate(String),
    #[error("feature `{name}` delta {index} is invalid: {source}")]
    BadDelta { name: String, index: usize, source: GeomError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Demonstration {
    pub name: String,
    pub poses: Vec<Pose>,
}

impl Demonstration {
    pub fn new(name: impl Into<String>, poses: Vec<Pose>) -> Result<Self, DemoError> {
        if poses.len() < 2 {
            return Err(DemoError::TooShort(poses.len()));
        }
        Ok(Demonstration { name: name.into(), poses })
    }

    /// Largest rotation angle between consecutive samples.
    pub fn max_step_rotation(&self) -> f64 {
        self.poses
            .windows(2)
            .map(|w| w[0].real().angle_to(w[1].real()))
            .fold(0.0, f64::max)
    }

    pub fn to_document(&self) -> DemoDocument {
        DemoDocument::Poses { name: self.name.clone(), poses: self.poses.iter().map(PoseRecord::from).collect() }
    }
}

/// Demo file: joint samples at a fixed step, or an explicit pose sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DemoDocument {
    Joints { name: String, dt: f64, joints: Vec<Vec<f64>> },
    Poses { name: String, poses: Vec<PoseRecord> },
}

impl DemoDocument {
    pub fn name(&self) -> &str {
        match self {
            DemoDocument::Joints { name, .. } | DemoDocument::Poses { name, .. } => name,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, DemoError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DemoError> {
        DemoDocument::from_json(&std::fs::read_to_string(path)?)
    }

    /// Builds the pose sequence, running joint samples through `model`.
    pub fn into_demonstration(self, model: &RobotModel, densify: bool) -> Result<Demonstration, DemoError> {
        match self {
            DemoDocument::Joints { name, dt, joints } => {
                let t = JointTrajectory::new(dt, joints)?;
                import_joint_demo(model, &t, name, densify)
            }
            DemoDocument::Poses { name, poses } => import_pose_records(&poses, name),
        }
    }
}

/// Runs every joint sample through forward kinematics. With `densify`, joint
/// space is interpolated linearly until consecutive rotations stay below
/// [`MAX_STEP_ROTATION`].
pub fn import_joint_demo(
    model: &RobotModel,
    t: &JointTrajectory,
    name: impl Into<String>,
    densify: bool,
) -> Result<Demonstration, DemoError> {
    if t.len() < 2 {
        return Err(DemoError::TooShort(t.len()));
    }
    let samples = t.samples();
    let mut poses = vec![model.forward_kinematics(&samples[0])?];
    for w in samples.windows(2) {
        let end = model.forward_kinematics(&w[1])?;
        if densify {
            let mut pieces = 1usize;
            loop {
                let step = model.forward_kinematics(&lerp(&w[0], &w[1], 1.0 / pieces as f64))?;
                let prev = *poses.last().unwrap();
                if prev.real().angle_to(step.real()) < MAX_STEP_ROTATION || pieces >= 1024 {
                    break;
                }
                pieces *= 2;
            }
            for s in 1..pieces {
                poses.push(model.forward_kinematics(&lerp(&w[0], &w[1], s as f64 / pieces as f64))?);
            }
        }
        poses.push(end);
    }
    Demonstration::new(name, poses)
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + (y - x) * t).collect()
}

/// Reads a pose-sequence demo document.
pub fn import_pose_demo(document: &str, name: Option<&str>) -> Result<Demonstration, DemoError> {
    match DemoDocument::from_json(document)? {
        DemoDocument::Poses { name: doc_name, poses } => {
            import_pose_records(&poses, name.map(str::to_owned).unwrap_or(doc_name))
        }
        DemoDocument::Joints { .. } => Err(DemoError::Json(serde::de::Error::custom(
            "expected a pose sequence, found joint samples",
        ))),
    }
}

fn import_pose_records(records: &[PoseRecord], name: String) -> Result<Demonstration, DemoError> {
    let mut poses = Vec::with_capacity(records.len());
    for (index, rec) in records.iter().enumerate() {
        let q = Quaternion::from(rec.r);
        let p = Vector3::from(rec.p);
        let bad = |source| DemoError::BadPose { index, source };
        if !p.iter().all(|c| c.is_finite()) {
            return Err(bad(GeomError::NonFinite));
        }
        let err = (q.norm() - 1.0).abs();
        if err > SILENT_NORMALIZE && q.is_finite() {
            warn!("demo `{}` sample {}: rotation norm {} normalized", name, index, q.norm());
        }
        let r = UnitQuaternion::try_new(q).map_err(bad)?;
        poses.push(Pose::new(&p, &r));
    }
    Demonstration::new(name, poses)
}

/// Relative transforms of a demonstration with respect to its last sample,
/// followed by the terminal identity.
#[derive(Clone, Debug, PartialEq)]
pub struct DemoFeature {
    pub name: String,
    deltas: Vec<Pose>,
}

impl DemoFeature {
    /// `recorded` excludes the terminal identity, which is appended here.
    pub fn new(name: impl Into<String>, mut recorded: Vec<Pose>) -> Self {
        recorded.push(Pose::identity());
        DemoFeature { name: name.into(), deltas: recorded }
    }

    /// All deltas, including the terminal identity.
    pub fn deltas(&self) -> &[Pose] {
        &self.deltas
    }

    /// The `m − 1` recorded deltas.
    pub fn recorded(&self) -> &[Pose] {
        &self.deltas[..self.deltas.len() - 1]
    }
}

pub fn extract_feature(d: &Demonstration) -> DemoFeature {
    DemoFeature::new(d.name.clone(), relative_to_last(&d.poses))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct DeltaRecord {
    r: [f64; 4],
    t: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct FeatureRecord {
    name: String,
    deltas: Vec<DeltaRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct LibraryFile {
    version: u64,
    features: Vec<FeatureRecord>,
}

/// An ordered, uniquely named collection of demonstration features.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Library {
    version: u64,
    features: Vec<DemoFeature>,
}

impl Library {
    pub fn new() -> Self {
        Library::default()
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn features(&self) -> &[DemoFeature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&DemoFeature> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn add(&mut self, f: DemoFeature) -> Result<(), DemoError> {
        if self.get(&f.name).is_some() {
            return Err(DemoError::Duplicate(f.name));
        }
        self.features.push(f);
        self.version += 1;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = LibraryFile {
            version: self.version,
            features: self
                .features
                .iter()
                .map(|f| FeatureRecord {
                    name: f.name.clone(),
                    deltas: f
                        .recorded()
                        .iter()
                        .map(|d| {
                            let (t, r) = d.to_parts();
                            DeltaRecord { r: r.to_array(), t: [t.x, t.y, t.z] }
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("library serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, DemoError> {
        let file: LibraryFile = serde_json::from_str(s)?;
        let mut features = Vec::with_capacity(file.features.len());
        for rec in file.features {
            if features.iter().any(|f: &DemoFeature| f.name == rec.name) {
                return Err(DemoError::Duplicate(rec.name));
            }
            let mut deltas = Vec::with_capacity(rec.deltas.len());
            for (index, d) in rec.deltas.iter().enumerate() {
                let pose = Pose::try_from(&PoseRecord { p: d.t, r: d.r })
                    .map_err(|source| DemoError::BadDelta { name: rec.name.clone(), index, source })?;
                deltas.push(pose);
            }
            features.push(DemoFeature::new(rec.name, deltas));
        }
        Ok(Library { version: file.version, features })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DemoError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DemoError> {
        Library::from_json(&std::fs::read_to_string(path)?)
    }
}
