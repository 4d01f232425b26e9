//! Confusion counts and derived rates.
//!
//! Co-present is the positive class. FPR — non-co-present pairs accepted as
//! co-present — is the attacker's success rate; FNR — co-present pairs
//! rejected — is the usability cost.

use serde::{Deserialize, Serialize};

use crate::context::Label;

use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
    /// fp / (fp + tn); absent when no negatives were evaluated.
    pub fpr: Option<f64>,
    /// fn / (fn + tp); absent when no positives were evaluated.
    pub fnr: Option<f64>,
    /// Harmonic mean of precision and recall; absent when undefined.
    pub f1: Option<f64>,
    pub accuracy: Option<f64>,
}

impl Metrics {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        let fpr = ratio(fp, fp + tn);
        let fnr = ratio(fn_, fn_ + tp);
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
            (Some(_), Some(_)) => Some(0.0),
            _ => None,
        };
        let accuracy = ratio(tp + tn, tp + fp + tn + fn_);
        Self {
            tp,
            fp,
            tn,
            fn_,
            fpr,
            fnr,
            f1,
            accuracy,
        }
    }

    /// Merge by summing confusion counts (micro-average), the aggregation
    /// used across CV folds and under-sampling rounds.
    pub fn merged(&self, other: &Metrics) -> Metrics {
        Metrics::from_counts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.tn + other.tn,
            self.fn_ + other.fn_,
        )
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    if den == 0 {
        None
    } else {
        Some(num as f64 / den as f64)
    }
}

/// Confusion metrics for parallel prediction/label slices.
pub fn compute_metrics(predictions: &[Label], labels: &[Label]) -> Result<Metrics, LearnError> {
    if predictions.len() != labels.len() {
        return Err(LearnError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut tn = 0;
    let mut fn_ = 0;
    for (&pred, &truth) in predictions.iter().zip(labels) {
        match (truth.is_co_present(), pred.is_co_present()) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, tn, fn_))
}
