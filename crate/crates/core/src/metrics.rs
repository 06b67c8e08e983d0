//! Support detection and the two scores reported per experiment cell.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{JuiceError, Result};
use crate::estimator::SupportEstimate;
use crate::linalg::{column_norms, CMat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Threshold is `value * max_j ||x_j||`.
    Relative,
    Absolute,
}

/// UEs whose estimated row norm strictly exceeds the threshold.
pub fn detect_support(x_hat: &CMat, mode: ThresholdMode, value: f64) -> SupportEstimate {
    let norms = column_norms(x_hat);
    let thr = match mode {
        ThresholdMode::Relative => value * norms.iter().cloned().fold(0.0, f64::max),
        ThresholdMode::Absolute => value,
    };
    SupportEstimate::new(norms.iter().enumerate().filter(|(_, &u)| u > thr).map(|(i, _)| i).collect())
}

/// `|S ∩ Ŝ| / (|S \ Ŝ| + K)`. False alarms do not enter the denominator.
pub fn srr(s_true: &[usize], s_hat: &[usize], k: usize) -> f64 {
    let t: BTreeSet<_> = s_true.iter().collect();
    let h: BTreeSet<_> = s_hat.iter().collect();
    let hit = t.intersection(&h).count();
    let miss = t.difference(&h).count();
    hit as f64 / (miss + k) as f64
}

/// `|S ∩ Ŝ| / (|S Δ Ŝ| + K)`, which also charges false alarms.
pub fn srr_symmetric(s_true: &[usize], s_hat: &[usize], k: usize) -> f64 {
    let t: BTreeSet<_> = s_true.iter().collect();
    let h: BTreeSet<_> = s_hat.iter().collect();
    let hit = t.intersection(&h).count();
    let sym = t.symmetric_difference(&h).count();
    hit as f64 / (sym + k) as f64
}

/// Per-trial ingredients of the Monte-Carlo averages.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrialOutcome {
    /// `||X - X̂||_F^2` with `X̂` zero off the detected support.
    pub se_num: f64,
    /// `||X||_F^2`
    pub se_den: f64,
    pub s_true: Vec<usize>,
    pub s_hat: Vec<usize>,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub wall_time: f64,
}

impl TrialOutcome {
    pub fn new(x_true: &CMat, x_hat: &CMat, s_true: &[usize], s_hat: &[usize]) -> Self {
        Self {
            se_num: (x_true - x_hat).norm_squared(),
            se_den: x_true.norm_squared(),
            s_true: s_true.to_vec(),
            s_hat: s_hat.to_vec(),
            ..Self::default()
        }
    }
}

/// Ratio of sums `sum ||X - X̂||^2 / sum ||X||^2`.
pub fn nase(trials: &[TrialOutcome]) -> Result<f64> {
    if trials.is_empty() {
        return Err(JuiceError::Metric("NASE over zero trials"));
    }
    let num: f64 = trials.iter().map(|t| t.se_num).sum();
    let den: f64 = trials.iter().map(|t| t.se_den).sum();
    if den <= 0.0 {
        return Err(JuiceError::Metric("NASE with zero channel energy"));
    }
    Ok(num / den)
}

pub fn to_db(v: f64) -> f64 {
    10.0 * v.log10()
}
