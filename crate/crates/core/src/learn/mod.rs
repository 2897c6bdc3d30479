//! Classifiers: the random forest and the linear hinge-loss baselines.

pub mod forest;
pub mod linear;
pub mod model;
pub mod tree;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;

pub use forest::{predict_forest, train_forest, ForestModel, ForestParams};
pub use linear::{predict_linear, train_linear, LinearModel, LinearParams, Loss};
pub use model::{load_model, save_model, Model, SCHEMA_VERSION};
pub use tree::{gini, TreeNode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Label,
    /// Confidence in SPAM, in [0, 1].
    pub score: f64,
}
