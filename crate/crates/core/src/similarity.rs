//! Rotation closeness, translation-direction agreement, and the order-preserving
//! semantic-similarity matcher.

use serde::{Deserialize, Serialize};

use crate::geom::{quat_distance, Pose};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityConfig {
    pub delta_alpha: f64,
    pub delta_beta: f64,
    #[serde(default = "default_epsilon")]
    pub zero_translation_epsilon: f64,
}

fn default_epsilon() -> f64 {
    1e-6
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig { delta_alpha: 0.5, delta_beta: -0.9, zero_translation_epsilon: default_epsilon() }
    }
}

impl SimilarityConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.delta_alpha >= 0.0) {
            return Err(format!("delta_alpha must be non-negative, got {}", self.delta_alpha));
        }
        if !(-1.0..=1.0).contains(&self.delta_beta) {
            return Err(format!("delta_beta must lie in [-1, 1], got {}", self.delta_beta));
        }
        if !(self.zero_translation_epsilon > 0.0) {
            return Err("zero_translation_epsilon must be positive".into());
        }
        Ok(())
    }
}

/// Distance between the rotation parts.
pub fn alpha(d1: &Pose, d2: &Pose) -> f64 {
    quat_distance(d1.real(), d2.real())
}

/// Cosine between the translations. Two vanishing translations agree (1);
/// exactly one vanishing translation disagrees (−1).
pub fn beta(d1: &Pose, d2: &Pose, cfg: &SimilarityConfig) -> f64 {
    let (t1, t2) = (d1.translation(), d2.translation());
    let (n1, n2) = (t1.norm(), t2.norm());
    let eps = cfg.zero_translation_epsilon;
    match (n1 < eps, n2 < eps) {
        (true, true) => 1.0,
        (true, false) | (false, true) => -1.0,
        _ => (t1.dot(&t2) / (n1 * n2)).clamp(-1.0, 1.0),
    }
}

/// Task delta `j` is served by demo delta `pairs[j].1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub pairs: Vec<(usize, usize)>,
    pub alphas: Vec<f64>,
}

impl Allocation {
    /// First demo delta used.
    pub fn first_demo_index(&self) -> usize {
        self.pairs[0].1
    }

    /// `−Σ α` over the allocated pairs.
    pub fn reward(&self) -> f64 {
        -self.alphas.iter().sum::<f64>()
    }
}

pub fn pair_matches(task: &Pose, demo: &Pose, cfg: &SimilarityConfig) -> Option<f64> {
    let a = alpha(demo, task);
    (a <= cfg.delta_alpha && beta(demo, task, cfg) >= cfg.delta_beta).then_some(a)
}

/// Greedy earliest strictly increasing allocation of `task` deltas into `demo`
/// deltas, or `None` if some task delta cannot be served.
pub fn is_semantically_similar(task: &[Pose], demo: &[Pose], cfg: &SimilarityConfig) -> Option<Allocation> {
    if task.is_empty() {
        return None;
    }
    let mut pairs = Vec::with_capacity(task.len());
    let mut alphas = Vec::with_capacity(task.len());
    let mut l = 0;
    for (j, t) in task.iter().enumerate() {
        loop {
            let d = demo.get(l)?;
            l += 1;
            if let Some(a) = pair_matches(t, d, cfg) {
                pairs.push((j, l - 1));
                alphas.push(a);
                break;
            }
        }
    }
    Some(Allocation { pairs, alphas })
}
