use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;
use crate::signal::Label;

/// Segment-level tallies with "faulty" as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (predicted, truth) {
            (Label::Faulty, Label::Faulty) => self.tp += 1,
            (Label::Faulty, Label::Healthy) => self.fp += 1,
            (Label::Healthy, Label::Faulty) => self.fn_ += 1,
            (Label::Healthy, Label::Healthy) => self.tn += 1,
        }
    }
}

impl Add for ConfusionCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
            tn: self.tn + o.tn,
        }
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// Precision, recall, F1 and accuracy as fractions in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
}

/// Label of a two-unit output: the larger unit wins, unit 1 is "faulty", and
/// an exact tie is called faulty.
pub fn classify_segment<T: Real>(outputs: &[T]) -> Result<Label> {
    if outputs.len() != 2 {
        return Err(Error::Shape(format!(
            "classification needs 2 outputs, got {}",
            outputs.len()
        )));
    }
    if outputs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(
            outputs.iter().map(|v| v.as_f64()).collect(),
        ));
    }
    Ok(if outputs[0] > outputs[1] {
        Label::Healthy
    } else {
        Label::Faulty
    })
}

pub fn accumulate_confusion(predictions: &[Label], truths: &[Label]) -> Result<ConfusionCounts> {
    if predictions.len() != truths.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} ground-truth labels",
            predictions.len(),
            truths.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in predictions.iter().zip(truths) {
        c.record(p, t);
    }
    Ok(c)
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// `P = TP/(TP+FP)`, `R = TP/(TP+FN)`, `F1 = 2PR/(P+R)`, `Acc = (TP+TN)/total`.
///
/// An empty precision denominator yields 1 when there are also no false
/// negatives and 0 otherwise; recall mirrors this with false positives.
pub fn compute_metrics(c: &ConfusionCounts) -> Result<Metrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::Data(
            "cannot compute metrics over zero segments".into(),
        ));
    }
    let ratio = |num: u64, den: u64, other_errors: u64| {
        if den > 0 {
            num as f64 / den as f64
        } else if other_errors == 0 {
            1.0
        } else {
            0.0
        }
    };
    let precision = ratio(c.tp, c.tp + c.fp, c.fn_);
    let recall = ratio(c.tp, c.tp + c.fn_, c.fp);
    Ok(Metrics {
        precision,
        recall,
        f1: f1_score(precision, recall),
        accuracy: (c.tp + c.tn) as f64 / total as f64,
    })
}
