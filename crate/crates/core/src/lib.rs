//! Motion planning by composing demonstrated motions.
//!
//! Demonstrations are abstracted into sequences of relative rigid transforms
//! (unit dual quaternions). A task is a list of critical configurations; each
//! stretch of it can be served by any demonstration whose transforms are close
//! in rotation and agree in translation direction. A tabular Q-learner picks
//! which demonstrations to chain, the chosen ones are re-targeted onto the
//! task, and the resulting pose sequence is resolved to joint angles with
//! differential inverse kinematics.

pub mod demo;
pub mod geom;
pub mod ik;
pub mod mapper;
pub mod planner;
pub mod robot;
pub mod scenario;
pub mod similarity;
pub mod task;

pub use demo::{extract_feature, DemoFeature, Demonstration, Library};
pub use geom::{quat_distance, EulerAngles, Pose, Quaternion, UnitQuaternion, Vector3};
pub use ik::{track_plan, IkConfig};
pub use mapper::{coverage_check, CoverageReport, MotionPlan};
pub use planner::{generate_plan, train, PlanOutcome, QTable, TrainingConfig};
pub use robot::{JointTrajectory, LimitReport, RobotModel};
pub use similarity::{is_semantically_similar, SimilarityConfig};
pub use task::{parse_task, Task, TaskSegment};
