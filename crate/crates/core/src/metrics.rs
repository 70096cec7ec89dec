//! Confusion-matrix metrics for the binary working/failed task.
//!
//! Failed is the positive class everywhere. The "average" block is the
//! macro average: the unweighted mean of the two per-class values, taken on
//! unrounded numbers and only rounded for display.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::Status;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("predicted and actual status lists differ in length")]
    LengthMismatch,
}

/// Binary confusion counts with Failed as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl ConfusionMatrix {
    pub fn new(tp: usize, fp: usize, tn: usize, fn_: usize) -> Self {
        ConfusionMatrix {
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
        }
    }

    pub fn from_predictions(
        predicted: &[Status],
        actual: &[Status],
    ) -> Result<Self, MetricsError> {
        if predicted.len() != actual.len() {
            return Err(MetricsError::LengthMismatch);
        }
        let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
        for (&p, &a) in predicted.iter().zip(actual) {
            match (p, a) {
                (Status::Failed, Status::Failed) => cm.true_positives += 1,
                (Status::Failed, Status::Working) => cm.false_positives += 1,
                (Status::Working, Status::Working) => cm.true_negatives += 1,
                (Status::Working, Status::Failed) => cm.false_negatives += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// Precision, recall and F1 for one class (or the macro average).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Per-class and macro metrics, plus flags naming any metric whose
/// denominator was zero (reported as 0 rather than NaN).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub failed: ClassMetrics,
    pub working: ClassMetrics,
    pub average: ClassMetrics,
    pub zero_denominators: Vec<String>,
}

fn ratio(num: usize, den: usize, name: &str, flags: &mut Vec<String>) -> f64 {
    if den == 0 {
        flags.push(String::from(name));
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(precision: f64, recall: f64, name: &str, flags: &mut Vec<String>) -> f64 {
    if precision + recall == 0.0 {
        flags.push(String::from(name));
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Computes the full report from a confusion matrix.
pub fn metrics(cm: &ConfusionMatrix) -> MetricsReport {
    let mut flags = Vec::new();
    let failed_precision = ratio(
        cm.true_positives,
        cm.true_positives + cm.false_positives,
        "failed.precision",
        &mut flags,
    );
    let failed_recall = ratio(
        cm.true_positives,
        cm.true_positives + cm.false_negatives,
        "failed.recall",
        &mut flags,
    );
    let failed_f1 = f1_of(failed_precision, failed_recall, "failed.f1", &mut flags);
    let working_precision = ratio(
        cm.true_negatives,
        cm.true_negatives + cm.false_negatives,
        "working.precision",
        &mut flags,
    );
    let working_recall = ratio(
        cm.true_negatives,
        cm.true_negatives + cm.false_positives,
        "working.recall",
        &mut flags,
    );
    let working_f1 = f1_of(working_precision, working_recall, "working.f1", &mut flags);
    MetricsReport {
        failed: ClassMetrics {
            precision: failed_precision,
            recall: failed_recall,
            f1: failed_f1,
        },
        working: ClassMetrics {
            precision: working_precision,
            recall: working_recall,
            f1: working_f1,
        },
        average: ClassMetrics {
            precision: (failed_precision + working_precision) / 2.0,
            recall: (failed_recall + working_recall) / 2.0,
            f1: (failed_f1 + working_f1) / 2.0,
        },
        zero_denominators: flags,
    }
}

/// Rounds half-up to two decimals for display. Metrics live in [0, 1].
pub fn round2(x: f64) -> f64 {
    crate::math::floor(x * 100.0 + 0.5) / 100.0
}

/// Two-decimal display string with half-up rounding.
pub fn format2(x: f64) -> String {
    let scaled = crate::math::floor(x * 100.0 + 0.5) as i64;
    alloc::format!("{}.{:02}", scaled / 100, (scaled % 100).abs())
}
