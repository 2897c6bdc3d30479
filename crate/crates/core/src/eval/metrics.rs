use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

/// Outcome counts with SPAM as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, predicted: Label, truth: Label) {
        match (predicted, truth) {
            (Label::Spam, Label::Spam) => self.tp += 1,
            (Label::Spam, Label::Ham) => self.fp += 1,
            (Label::Ham, Label::Ham) => self.tn += 1,
            (Label::Ham, Label::Spam) => self.fn_ += 1,
        }
    }

    /// The same table with HAM treated as the positive class.
    pub fn swapped(&self) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tn,
            fp: self.fn_,
            tn: self.tp,
            fn_: self.fp,
        }
    }
}

pub fn confusion(predictions: &[Label], truth: &[Label]) -> Result<ConfusionCounts> {
    if predictions.len() != truth.len() {
        return Err(Error::InvalidParameter(format!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        )));
    }
    if predictions.is_empty() {
        return Err(Error::InvalidParameter("nothing to evaluate".into()));
    }
    let mut c = ConfusionCounts::default();
    for (&p, &t) in predictions.iter().zip(truth) {
        c.record(p, t);
    }
    Ok(c)
}

/// Precision, recall and accuracy as fractions. A 0/0 ratio is reported as
/// 0 with its `*_defined` flag cleared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub precision_defined: bool,
    pub recall_defined: bool,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, false)
    } else {
        (num as f64 / den as f64, true)
    }
}

pub fn metrics(c: &ConfusionCounts) -> Result<Metrics> {
    if c.total() == 0 {
        return Err(Error::InvalidParameter("confusion table is empty".into()));
    }
    let (precision, precision_defined) = ratio(c.tp, c.tp + c.fp);
    let (recall, recall_defined) = ratio(c.tp, c.tp + c.fn_);
    Ok(Metrics {
        precision,
        recall,
        accuracy: (c.tp + c.tn) as f64 / c.total() as f64,
        precision_defined,
        recall_defined,
    })
}
