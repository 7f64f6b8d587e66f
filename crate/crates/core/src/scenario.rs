//! Synthetic demonstrations, the case-study tasks, and random instance
//! generators used by training and by the test suites.
//!
//! Demonstrations are four evenly spaced samples. Each one is built so that its
//! first delta carries the rotation of the library it stands in for, with the
//! translation running from the start sample to the final one.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::demo::{extract_feature, Demonstration, Library};
use crate::geom::{EulerAngles, Pose, UnitQuaternion, Vector3};
use crate::mapper::coverage_check;
use crate::similarity::SimilarityConfig;
use crate::task::{AngleBound, CriticalConfiguration, Task};

pub const SCREWING_1: &str = "screwing_1";
pub const SCREWING_2: &str = "screwing_2";
pub const FILLING: &str = "filling";
pub const POURING: &str = "pouring";
pub const STACKING: &str = "stacking";
pub const SPAN: &str = "span";

/// Euler values used for random training tasks.
pub const EULER_GRID: [f64; 5] = [-PI, -FRAC_PI_2, 0.0, FRAC_PI_2, PI];

const SAMPLES: usize = 4;

/// Rotation about `axis` growing linearly to `total` while the position moves
/// linearly by `travel`.
pub fn twisting_demo(name: &str, axis: Vector3, total: f64, travel: Vector3) -> Demonstration {
    let poses = (0..SAMPLES)
        .map(|k| {
            let s = k as f64 / (SAMPLES - 1) as f64;
            let r = UnitQuaternion::from_axis_angle(&axis, total * s).expect("axis is nonzero");
            Pose::new(&(travel * s), &r)
        })
        .collect();
    Demonstration::new(name, poses).expect("four samples")
}

/// Straight advance with a 90° clockwise turn about the tool z axis.
pub fn screwing_1() -> Demonstration {
    twisting_demo(SCREWING_1, Vector3::z(), -FRAC_PI_2, Vector3::new(-0.3, 0.0, 0.0))
}

/// Straight advance with a 90° anti-clockwise turn about the tool z axis.
pub fn screwing_2() -> Demonstration {
    twisting_demo(SCREWING_2, Vector3::z(), FRAC_PI_2, Vector3::new(-0.3, 0.0, 0.0))
}

/// Cup held horizontally, then turned down 90° about y.
pub fn filling() -> Demonstration {
    twisting_demo(FILLING, Vector3::y(), FRAC_PI_2, Vector3::new(-0.2, 0.0, 0.2))
}

/// Cup held vertically, then turned up 90° about y.
pub fn pouring() -> Demonstration {
    twisting_demo(POURING, Vector3::y(), -FRAC_PI_2, Vector3::new(0.2, 0.0, -0.2))
}

/// Lift, carry and place with the orientation held fixed.
pub fn stacking() -> Demonstration {
    let poses = [[0.1, 0.0, -0.1], [0.1, 0.0, 0.1], [0.0, 0.0, 0.1], [0.0, 0.0, 0.0]]
        .iter()
        .map(|p| Pose::from_translation(&Vector3::from(*p)))
        .collect();
    Demonstration::new(STACKING, poses).expect("four samples")
}

/// Picking up a span: 90° about the body x axis while lowering.
pub fn span() -> Demonstration {
    twisting_demo(SPAN, Vector3::x(), FRAC_PI_2, Vector3::new(0.0, 0.0, -0.2))
}

/// The five base demonstrations in library order.
pub fn base_demos() -> Vec<Demonstration> {
    vec![screwing_1(), screwing_2(), filling(), pouring(), stacking()]
}

pub fn library_from(demos: &[Demonstration]) -> Library {
    let mut lib = Library::new();
    for d in demos {
        lib.add(extract_feature(d)).expect("synthetic demo names are unique");
    }
    lib
}

pub fn base_library() -> Library {
    library_from(&base_demos())
}

fn v(x: f64, y: f64, z: f64) -> Vector3 {
    Vector3::new(x, y, z)
}

fn e(r: f64, p: f64, y: f64) -> EulerAngles {
    EulerAngles::new(r, p, y)
}

/// Transferring a cup along a straight line, ending with a yaw turn.
pub fn table2_task() -> Task {
    Task::from_pinned(
        "transfer_cup",
        &[
            (v(-0.2, 0.0, 0.6), e(0.0, 0.0, 0.0)),
            (v(-0.3, 0.0, 0.6), e(0.0, 0.0, 0.0)),
            (v(-0.4, 0.0, 0.6), e(0.0, 0.0, 0.0)),
            (v(-0.5, 0.0, 0.6), e(0.0, 0.0, -FRAC_PI_2)),
        ],
    )
    .expect("valid task")
}

/// Transferring around an obstacle at height `z` (0.1 to 0.5 m).
pub fn transferring_task(z: f64) -> Task {
    let o = e(0.0, -FRAC_PI_2, 0.0);
    Task::from_pinned(
        "transferring",
        &[(v(-0.5, 0.0, 0.3), o), (v(-0.4, 0.2, z), o), (v(0.0, 0.2, z), o), (v(0.1, 0.0, 0.3), o)],
    )
    .expect("valid task")
}

/// Filling and pouring with the second cup at `(x, y)`; yaw is free in
/// `[−π, π]` while carrying.
pub fn filling_pouring_task(x: f64, y: f64) -> Task {
    let carry = |p: Vector3| {
        CriticalConfiguration::bounded(
            p,
            [AngleBound::pinned(0.0), AngleBound::pinned(-FRAC_PI_2), AngleBound { lo: -PI, hi: PI }],
            None,
        )
    };
    Task::new(
        "filling_pouring",
        vec![
            CriticalConfiguration::pinned(v(-0.4, -0.1, 0.0), e(0.0, -PI, 0.0)),
            carry(v(-0.5, 0.1, 0.1)),
            carry(v(-0.7, -0.1, 0.1)),
            carry(v(x, y, 0.1)),
            CriticalConfiguration::pinned(v(x, y, 0.0), e(FRAC_PI_2, 0.0, -FRAC_PI_2)),
        ],
    )
    .expect("valid task")
}

/// Moving a screw between two holes with a quarter turn in between.
pub fn assembling_task() -> Task {
    Task::from_pinned(
        "assembling",
        &[
            (v(0.0, 0.5, 0.6), e(-FRAC_PI_2, 0.0, FRAC_PI_2)),
            (v(0.1, 0.5, 0.6), e(0.0, -FRAC_PI_2, 0.0)),
            (v(0.5, 0.1, 0.6), e(0.0, -FRAC_PI_2, FRAC_PI_2)),
            (v(0.5, 0.0, 0.6), e(PI, 0.0, -FRAC_PI_2)),
        ],
    )
    .expect("valid task")
}

/// Bounds of the randomized trial parameters.
pub const TRANSFER_Z: (f64, f64) = (0.1, 0.5);
pub const POUR_X: (f64, f64) = (-0.5, 0.7);
pub const POUR_Y: (f64, f64) = (-0.2, 0.0);

pub fn random_transferring_task<R: Rng>(rng: &mut R) -> Task {
    transferring_task(rng.random_range(TRANSFER_Z.0..=TRANSFER_Z.1))
}

pub fn random_filling_pouring_task<R: Rng>(rng: &mut R) -> Task {
    let x = rng.random_range(POUR_X.0..=POUR_X.1);
    let y = rng.random_range(POUR_Y.0..=POUR_Y.1);
    filling_pouring_task(x, y)
}

/// Four configurations with positions uniform in a cube of side `side`
/// centered at the origin, and Euler angles drawn from [`EULER_GRID`].
pub fn random_grid_task<R: Rng>(rng: &mut R, name: &str, n: usize, side: f64) -> Task {
    loop {
        let cs: Vec<(Vector3, EulerAngles)> = (0..n)
            .map(|_| {
                let p = Vector3::from_fn(|_, _| rng.random_range(-0.5 * side..=0.5 * side));
                let mut g = || *EULER_GRID.choose(rng).unwrap();
                (p, e(g(), g(), g()))
            })
            .collect();
        if let Ok(t) = Task::from_pinned(name, &cs) {
            return t;
        }
    }
}

/// Training tasks drawn like [`random_grid_task`], keeping only those the
/// library can cover. Returns `None` after `max_attempts` draws per task.
pub fn training_tasks<R: Rng>(
    rng: &mut R,
    count: usize,
    lib: &Library,
    cfg: &SimilarityConfig,
    max_attempts: usize,
) -> Option<Vec<Task>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let name = format!("train_{:02}", i + 1);
        let mut found = None;
        for _ in 0..max_attempts {
            let t = random_grid_task(rng, &name, 4, 0.5);
            if coverage_check(&t, lib, cfg).is_covered() {
                found = Some(t);
                break;
            }
        }
        out.push(found?);
    }
    Some(out)
}

fn random_rotation<R: Rng>(rng: &mut R, max_angle: f64) -> UnitQuaternion {
    loop {
        let axis = Vector3::from_fn(|_, _| rng.random_range(-1.0..=1.0));
        if axis.norm() > 1e-3 {
            return UnitQuaternion::from_axis_angle(&axis, rng.random_range(0.0..=max_angle)).unwrap();
        }
    }
}

/// A small task and a library of up to `max_demos` demonstrations. Most
/// demonstrations replay a perturbed, relocated stretch of the task, so that
/// instances usually admit several coverings of different quality.
pub fn random_instance<R: Rng>(rng: &mut R, max_configs: usize, max_demos: usize) -> (Task, Library) {
    let n = rng.random_range(3..=max_configs.max(3));
    let task = random_grid_task(rng, "instance", n, 0.5);
    let h = rng.random_range(1..=max_demos.max(1));
    let mut lib = Library::new();
    for i in 0..h {
        let demo = if rng.random_bool(0.7) {
            let j = rng.random_range(0..n - 1);
            let k = rng.random_range(j + 1..n);
            let frame = Pose::new(&Vector3::from_fn(|_, _| rng.random_range(-1.0..=1.0)), &random_rotation(rng, PI));
            let noise = rng.random_range(0.0..=0.3);
            let poses = task.poses()[j..=k]
                .iter()
                .map(|p| {
                    let jitter = Pose::new(
                        &Vector3::from_fn(|_, _| rng.random_range(-0.01..=0.01)),
                        &random_rotation(rng, noise),
                    );
                    frame.compose(p).compose(&jitter)
                })
                .collect();
            Demonstration::new(format!("demo_{}", i + 1), poses).unwrap()
        } else {
            let m = rng.random_range(2..=4);
            let poses = (0..m)
                .map(|_| {
                    let mut g = || *EULER_GRID.choose(rng).unwrap();
                    let r = UnitQuaternion::from_euler(&e(g(), g(), g()));
                    Pose::new(&Vector3::from_fn(|_, _| rng.random_range(-0.25..=0.25)), &r)
                })
                .collect();
            Demonstration::new(format!("demo_{}", i + 1), poses).unwrap()
        };
        lib.add(extract_feature(&demo)).unwrap();
    }
    (task, lib)
}
