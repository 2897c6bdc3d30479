//! Evaluation: confusion counts, precision/recall/accuracy and
//! stratified shuffle-split cross-validation.

pub mod cv;
pub mod metrics;
pub mod split;

pub use cv::{
    cross_validate, evaluate_split, CvConfig, CvReport, MeanStd, ModelKind, SettingSummary, Sweep,
};
pub use metrics::{confusion, metrics, ConfusionCounts, Metrics};
pub use split::{stratified_shuffle_split, Split};
