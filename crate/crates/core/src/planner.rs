//! Tabular Q-learning over segment-to-demonstration assignments.
//!
//! A state is the index `j` of the configuration the end-effector has reached;
//! an action `(i, k)` reproduces demonstration `i` over configurations
//! `j..=k`. Actions are legal when the segment is semantically similar to the
//! demonstration, and earn the negated sum of allocated rotation distances.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demo::Library;
use crate::geom::{quat_distance, EulerAngles, Pose, UnitQuaternion, Vector3};
use crate::mapper::{coverage_from_direct, map_feature, CoverageReport, MapError, MotionPlan};
use crate::similarity::{is_semantically_similar, Allocation, SimilarityConfig};
use crate::task::{segment_feature, Task, TaskFeature, TaskSegment};

/// Finite stand-in for the reward of an illegal action.
pub const R_FAIL: f64 = -1e6;

/// Q values within this distance of the best count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("no training tasks")]
    NoTasks,
    #[error("the library is empty")]
    EmptyLibrary,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
    pub episodes: usize,
    pub r_fail: f64,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig { gamma: 0.9, epsilon: 0.8, learning_rate: 0.5, episodes: 100, r_fail: R_FAIL, seed: 0 }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let bad = |m: &str| Err(PlannerError::Config(m.into()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return bad("epsilon must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning rate must lie in (0, 1]");
        }
        if !(self.r_fail < 0.0 && self.r_fail.is_finite()) {
            return bad("r_fail must be finite and negative");
        }
        Ok(())
    }
}

/// Reproduce library feature `demo` over configurations `j..=end`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlannerAction {
    pub demo: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlannerState {
    pub j: usize,
    pub key: String,
    pub library_version: u64,
}

/// Prefers the higher value; within [`TIE_TOLERANCE`], the lower demo index,
/// then the longer segment.
fn better(a: (f64, PlannerAction), b: (f64, PlannerAction)) -> bool {
    if a.0 > b.0 + TIE_TOLERANCE {
        return true;
    }
    if a.0 < b.0 - TIE_TOLERANCE {
        return false;
    }
    (a.1.demo, std::cmp::Reverse(a.1.end)) < (b.1.demo, std::cmp::Reverse(b.1.end))
}

fn argmax(candidates: impl IntoIterator<Item = (f64, PlannerAction)>) -> Option<(f64, PlannerAction)> {
    candidates.into_iter().fold(None, |best, c| match best {
        Some(b) if !better(c, b) => Some(b),
        _ => Some(c),
    })
}

/// Rotations generated by Euler angles on the grid `{−π, −π/2, 0, π/2, π}³`.
pub fn rotation_grid() -> &'static [UnitQuaternion] {
    static GRID: OnceLock<Vec<UnitQuaternion>> = OnceLock::new();
    GRID.get_or_init(|| {
        use std::f64::consts::{FRAC_PI_2, PI};
        let vals = [-PI, -FRAC_PI_2, 0.0, FRAC_PI_2, PI];
        let mut out: Vec<UnitQuaternion> = Vec::new();
        for &r in &vals {
            for &p in &vals {
                for &y in &vals {
                    let q = UnitQuaternion::from_euler(&EulerAngles::new(r, p, y));
                    if !out.iter().any(|o| quat_distance(o, &q) < 1e-9) {
                        out.push(q);
                    }
                }
            }
        }
        out
    })
}

fn lattice() -> &'static [Vector3] {
    static DIRS: OnceLock<Vec<Vector3>> = OnceLock::new();
    DIRS.get_or_init(|| {
        let mut out = Vec::with_capacity(26);
        for x in -1..=1 {
            for y in -1..=1 {
                for z in -1..=1 {
                    if (x, y, z) != (0, 0, 0) {
                        out.push(Vector3::new(x as f64, y as f64, z as f64).normalize());
                    }
                }
            }
        }
        out
    })
}

fn quantize(delta: &Pose, eps: f64) -> String {
    let t = delta.translation();
    let dir = if t.norm() < eps {
        "0".to_owned()
    } else {
        let u = t.normalize();
        let (idx, _) = lattice()
            .iter()
            .enumerate()
            .map(|(i, d)| (i, d.dot(&u)))
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        let d = lattice()[idx] * 3f64.sqrt();
        format!("{}{}{}", d.x.round() as i32 + 1, d.y.round() as i32 + 1, d.z.round() as i32 + 1)
    };
    let (rot, _) = rotation_grid()
        .iter()
        .enumerate()
        .map(|(i, q)| (i, quat_distance(q, delta.real())))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    format!("{}r{}", dir, rot)
}

/// Precomputed matching data for one task against one library.
#[derive(Clone, Debug)]
pub struct PlanningProblem<'a> {
    task: &'a Task,
    lib: &'a Library,
    cfg: SimilarityConfig,
    features: Vec<Vec<Option<TaskFeature>>>,
    /// `allocs[j][k][i]`
    allocs: Vec<Vec<Vec<Option<Allocation>>>>,
    coverage: CoverageReport,
    keys: Vec<String>,
}

impl<'a> PlanningProblem<'a> {
    pub fn new(task: &'a Task, lib: &'a Library, cfg: &SimilarityConfig) -> Self {
        let n = task.len();
        let h = lib.len();
        let mut features = vec![vec![None; n]; n];
        let mut allocs = vec![vec![vec![None; h]; n]; n];
        let mut direct = vec![vec![Vec::new(); n]; n];
        for j in 0..n {
            for k in j + 1..n {
                let tf = segment_feature(task, TaskSegment { start: j, end: k });
                for (i, f) in lib.features().iter().enumerate() {
                    allocs[j][k][i] = is_semantically_similar(&tf.deltas, f.deltas(), cfg);
                    if allocs[j][k][i].is_some() {
                        direct[j][k].push(i);
                    }
                }
                features[j][k] = Some(tf);
            }
        }
        let coverage = coverage_from_direct(n, direct);
        let mut p = PlanningProblem { task, lib, cfg: *cfg, features, allocs, coverage, keys: Vec::new() };
        p.keys = (0..n).map(|j| p.encode(j)).collect();
        p
    }

    pub fn task(&self) -> &Task {
        self.task
    }

    pub fn library(&self) -> &Library {
        self.lib
    }

    pub fn coverage(&self) -> &CoverageReport {
        &self.coverage
    }

    pub fn n(&self) -> usize {
        self.task.len()
    }

    pub fn is_terminal(&self, j: usize) -> bool {
        j + 1 == self.n()
    }

    pub fn allocation(&self, j: usize, a: PlannerAction) -> Option<&Allocation> {
        self.allocs.get(j)?.get(a.end)?.get(a.demo)?.as_ref()
    }

    pub fn legal_actions(&self, j: usize) -> Vec<PlannerAction> {
        let mut out = Vec::new();
        for demo in 0..self.lib.len() {
            for end in j + 1..self.n() {
                if self.allocs[j][end][demo].is_some() {
                    out.push(PlannerAction { demo, end });
                }
            }
        }
        out
    }

    /// Every `(i, k)` with `k > j`, legal or not.
    pub fn all_actions(&self, j: usize) -> Vec<PlannerAction> {
        (0..self.lib.len())
            .flat_map(|demo| (j + 1..self.n()).map(move |end| PlannerAction { demo, end }))
            .collect()
    }

    pub fn reward(&self, j: usize, a: PlannerAction, r_fail: f64) -> f64 {
        self.allocation(j, a).map_or(r_fail, Allocation::reward)
    }

    pub fn state(&self, j: usize) -> PlannerState {
        PlannerState { j, key: self.keys[j].clone(), library_version: self.lib.version() }
    }

    pub fn key(&self, j: usize) -> &str {
        &self.keys[j]
    }

    fn encode(&self, j: usize) -> String {
        let poses = self.task.poses();
        let n = self.n();
        let mut key = format!("v{}|j{}|r{}", self.lib.version(), j, n - 1 - j);
        for s in j..j + 2 {
            if s + 1 < n {
                let d = poses[s].relative_to(&poses[s + 1]);
                let _ = write!(key, "|{}", quantize(&d, self.cfg.zero_translation_epsilon));
            } else {
                key.push_str("|-");
            }
        }
        key.push_str("|L");
        let legal: Vec<String> = self.legal_actions(j).iter().map(|a| format!("{}.{}", a.demo, a.end - j)).collect();
        key.push_str(&legal.join(","));
        key
    }

    fn segment_feature(&self, j: usize, k: usize) -> &TaskFeature {
        self.features[j][k].as_ref().expect("segment features are precomputed")
    }
}

pub fn encode_state(task: &Task, j: usize, lib: &Library, cfg: &SimilarityConfig) -> PlannerState {
    PlanningProblem::new(task, lib, cfg).state(j)
}

pub fn legal_actions(task: &Task, j: usize, lib: &Library, cfg: &SimilarityConfig) -> Vec<PlannerAction> {
    PlanningProblem::new(task, lib, cfg).legal_actions(j)
}

/// Negated sum of allocated rotation distances, or `r_fail` without an allocation.
pub fn reward(alloc: Option<&Allocation>, r_fail: f64) -> f64 {
    alloc.map_or(r_fail, Allocation::reward)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyper {
    pub training: TrainingConfig,
    pub similarity: SimilarityConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    pub hyper: Hyper,
    entries: BTreeMap<String, BTreeMap<PlannerAction, f64>>,
}

#[derive(Serialize, Deserialize)]
struct QEntry {
    state: String,
    action: [usize; 2],
    q: f64,
}

#[derive(Serialize, Deserialize)]
struct QFile {
    hyper: Hyper,
    entries: Vec<QEntry>,
}

/// What follows a transition.
#[derive(Clone, Copy, Debug)]
pub enum Next<'a> {
    Terminal,
    State { key: &'a str, legal: &'a [PlannerAction] },
}

impl QTable {
    pub fn new(hyper: Hyper) -> Self {
        QTable { hyper, entries: BTreeMap::new() }
    }

    /// Unvisited pairs read as zero.
    pub fn get(&self, state: &str, a: PlannerAction) -> f64 {
        self.entries.get(state).and_then(|m| m.get(&a)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, state: &str, a: PlannerAction, v: f64) {
        self.entries.entry(state.to_owned()).or_default().insert(a, v);
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.values().flat_map(|m| m.values().copied())
    }

    /// Best value among `actions`; a state without actions is worth `r_fail`.
    pub fn max_value(&self, state: &str, actions: &[PlannerAction], r_fail: f64) -> f64 {
        if actions.is_empty() {
            return r_fail;
        }
        actions.iter().map(|&a| self.get(state, a)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn greedy(&self, state: &str, actions: &[PlannerAction]) -> Option<PlannerAction> {
        argmax(actions.iter().map(|&a| (self.get(state, a), a))).map(|(_, a)| a)
    }

    pub fn to_json(&self) -> String {
        let entries = self
            .entries
            .iter()
            .flat_map(|(s, m)| {
                m.iter().map(move |(a, &q)| QEntry { state: s.clone(), action: [a.demo + 1, a.end + 1], q })
            })
            .collect();
        serde_json::to_string_pretty(&QFile { hyper: self.hyper.clone(), entries }).expect("q tables serialize")
    }

    pub fn from_json(s: &str) -> Result<Self, PlannerError> {
        let f: QFile = serde_json::from_str(s)?;
        let mut q = QTable::new(f.hyper);
        for e in f.entries {
            if e.action[0] == 0 || e.action[1] == 0 || !e.q.is_finite() {
                return Err(PlannerError::Config(format!("bad q-table entry for state `{}`", e.state)));
            }
            q.set(&e.state, PlannerAction { demo: e.action[0] - 1, end: e.action[1] - 1 }, e.q);
        }
        Ok(q)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PlannerError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PlannerError> {
        QTable::from_json(&std::fs::read_to_string(path)?)
    }
}

/// `Q(s,a) ← (1−α)Q(s,a) + α[r + γ max Q(s',·)]`, with a terminal successor
/// worth zero.
pub fn q_update(q: &mut QTable, state: &str, a: PlannerAction, r: f64, next: Next<'_>, cfg: &TrainingConfig) {
    let future = match next {
        Next::Terminal => 0.0,
        Next::State { key, legal } => q.max_value(key, legal, cfg.r_fail),
    };
    let old = q.get(state, a);
    let new = (1.0 - cfg.learning_rate) * old + cfg.learning_rate * (r + cfg.gamma * future);
    q.set(state, a, new);
}

/// Outcome of following a policy from the first configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Rollout {
    pub actions: Vec<(usize, PlannerAction)>,
    pub total: f64,
    pub discounted: f64,
    pub success: bool,
}

/// Greedy walk over legal actions. With `prune`, only actions whose endpoint
/// can still reach the goal are considered.
pub fn greedy_rollout(p: &PlanningProblem<'_>, q: &QTable, gamma: f64, r_fail: f64, prune: bool) -> Rollout {
    let mut j = 0;
    let mut out = Rollout { actions: Vec::new(), total: 0.0, discounted: 0.0, success: false };
    let mut rewards = Vec::new();
    while !p.is_terminal(j) {
        let legal: Vec<PlannerAction> = p
            .legal_actions(j)
            .into_iter()
            .filter(|a| !prune || p.is_terminal(a.end) || p.coverage().coverable(a.end, p.n() - 1))
            .collect();
        let Some(a) = q.greedy(p.key(j), &legal) else {
            rewards.push(r_fail);
            break;
        };
        rewards.push(p.reward(j, a, r_fail));
        out.actions.push((j, a));
        j = a.end;
    }
    out.success = p.is_terminal(j);
    (out.total, out.discounted) = returns(&rewards, gamma);
    out
}

/// Undiscounted and discounted sums, both accumulated from the last reward
/// backwards so that equal reward sequences give bit-identical returns.
fn returns(rewards: &[f64], gamma: f64) -> (f64, f64) {
    rewards.iter().rev().fold((0.0, 0.0), |(t, d), &r| (r + t, r + gamma * d))
}

/// Per-episode averages over the training tasks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RewardCurve {
    /// Undiscounted return of the greedy policy after the episode.
    pub greedy: Vec<f64>,
    /// Undiscounted return collected by the exploring policy.
    pub behavior: Vec<f64>,
}

impl RewardCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("episode,avg_reward,avg_behavior_reward\n");
        for (i, (g, b)) in self.greedy.iter().zip(&self.behavior).enumerate() {
            let _ = writeln!(s, "{},{},{}", i + 1, g, b);
        }
        s
    }
}

/// Epsilon-greedy Q-learning over every task for `cfg.episodes` episodes.
pub fn train(
    tasks: &[Task],
    lib: &Library,
    cfg: &TrainingConfig,
    sim: &SimilarityConfig,
    q0: Option<QTable>,
) -> Result<(QTable, RewardCurve), PlannerError> {
    if tasks.is_empty() {
        return Err(PlannerError::NoTasks);
    }
    if lib.is_empty() {
        return Err(PlannerError::EmptyLibrary);
    }
    cfg.validate()?;
    sim.validate().map_err(PlannerError::Config)?;
    let problems: Vec<PlanningProblem<'_>> = tasks.iter().map(|t| PlanningProblem::new(t, lib, sim)).collect();
    let legal: Vec<Vec<Vec<PlannerAction>>> =
        problems.iter().map(|p| (0..p.n()).map(|j| p.legal_actions(j)).collect()).collect();
    let all: Vec<Vec<Vec<PlannerAction>>> =
        problems.iter().map(|p| (0..p.n()).map(|j| p.all_actions(j)).collect()).collect();

    let mut q = match q0 {
        Some(mut q) => {
            q.hyper = Hyper { training: *cfg, similarity: *sim };
            q
        }
        None => QTable::new(Hyper { training: *cfg, similarity: *sim }),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut curve = RewardCurve::default();
    let count = problems.len() as f64;

    for _ in 0..cfg.episodes {
        let mut behavior = 0.0;
        for (t, p) in problems.iter().enumerate() {
            let mut j = 0;
            while !p.is_terminal(j) {
                let actions = &all[t][j];
                let a = if rng.random::<f64>() < cfg.epsilon {
                    actions[rng.random_range(0..actions.len())]
                } else {
                    q.greedy(p.key(j), actions).expect("non-terminal states have actions")
                };
                let r = p.reward(j, a, cfg.r_fail);
                behavior += r;
                if p.allocation(j, a).is_none() {
                    q_update(&mut q, p.key(j), a, r, Next::Terminal, cfg);
                    break;
                }
                let next = if p.is_terminal(a.end) {
                    Next::Terminal
                } else {
                    Next::State { key: p.key(a.end), legal: &legal[t][a.end] }
                };
                q_update(&mut q, p.key(j), a, r, next, cfg);
                j = a.end;
            }
        }
        let greedy: f64 = problems
            .iter()
            .map(|p| greedy_rollout(p, &q, cfg.gamma, cfg.r_fail, false).total)
            .sum();
        curve.greedy.push(greedy / count);
        curve.behavior.push(behavior / count);
    }
    Ok((q, curve))
}

/// Segment features of an uncovered stretch, for the user recording a new demo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RequestedSegment {
    /// One-based `[start, end]`.
    pub segment: [usize; 2],
    pub deltas: Vec<DeltaSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSummary {
    pub r: [f64; 4],
    pub t: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoRequest {
    pub task: String,
    pub uncovered: Vec<RequestedSegment>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PlanOutcome {
    Plan(MotionPlan),
    DemoRequest(DemoRequest),
}

/// Greedy plan extraction, or a demonstration request when the library
/// cannot cover the task.
pub fn generate_plan(
    task: &Task,
    lib: &Library,
    q: &QTable,
    sim: &SimilarityConfig,
    cfg: &TrainingConfig,
) -> Result<PlanOutcome, PlannerError> {
    let p = PlanningProblem::new(task, lib, sim);
    if !p.coverage().is_covered() {
        let uncovered = p
            .coverage()
            .uncovered
            .iter()
            .map(|s| RequestedSegment {
                segment: s.one_based(),
                deltas: p
                    .segment_feature(s.start, s.end)
                    .deltas
                    .iter()
                    .map(|d| {
                        let (t, r) = d.to_parts();
                        DeltaSummary { r: r.to_array(), t: [t.x, t.y, t.z] }
                    })
                    .collect(),
            })
            .collect();
        return Ok(PlanOutcome::DemoRequest(DemoRequest { task: task.name().to_owned(), uncovered }));
    }
    let roll = greedy_rollout(&p, q, cfg.gamma, cfg.r_fail, true);
    debug_assert!(roll.success, "pruned greedy walks always reach the goal on covered tasks");
    let mut parts = Vec::with_capacity(roll.actions.len());
    for (j, a) in roll.actions {
        let alloc = p.allocation(j, a).expect("rollouts only take legal actions").clone();
        let segment = TaskSegment { start: j, end: a.end };
        let mf = map_feature(&lib.features()[a.demo], p.segment_feature(j, a.end), segment, &alloc, sim)?;
        parts.push((mf, alloc));
    }
    Ok(PlanOutcome::Plan(MotionPlan::assemble(task, parts)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub actions: Vec<(usize, PlannerAction)>,
    pub discounted: f64,
    pub total: f64,
}

/// Brute force over every segmentation and demo assignment, maximizing the
/// discounted return. Near-equal returns are broken as in the greedy policy.
/// `None` when no covering exists.
pub fn exhaustive_oracle(p: &PlanningProblem<'_>, gamma: f64) -> Option<OracleResult> {
    fn go(p: &PlanningProblem<'_>, j: usize, gamma: f64) -> Option<OracleResult> {
        if p.is_terminal(j) {
            return Some(OracleResult { actions: Vec::new(), discounted: 0.0, total: 0.0 });
        }
        let mut best: Option<OracleResult> = None;
        for a in p.legal_actions(j) {
            let Some(rest) = go(p, a.end, gamma) else { continue };
            // Same association as `returns`.
            let r = p.reward(j, a, R_FAIL);
            let cand = OracleResult {
                discounted: r + gamma * rest.discounted,
                total: r + rest.total,
                actions: std::iter::once((j, a)).chain(rest.actions).collect(),
            };
            if best.as_ref().is_none_or(|b| better((cand.discounted, a), (b.discounted, b.actions[0].1))) {
                best = Some(cand);
            }
        }
        best
    }
    go(p, 0, gamma)
}
