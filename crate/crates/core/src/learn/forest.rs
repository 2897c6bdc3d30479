//! Random forest: bootstrap-resampled CART trees voting by majority.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{TreeGrower, TreeNode};
use super::Prediction;
use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Split candidates per node; `None` means `⌊√dim⌋`.
    pub max_features: Option<usize>,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            min_samples_leaf: 1,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn resolved_max_features(&self, dim: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (dim as f64).sqrt().floor() as usize)
            .clamp(1, dim.max(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestModel {
    pub n_trees: usize,
    pub max_features: usize,
    pub min_samples_leaf: usize,
    pub seed: u64,
    pub feature_dim: usize,
    pub trees: Vec<TreeNode>,
}

/// PRNG for tree `index`: independent of how many trees are grown.
pub fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ index as u64)
}

fn grow_tree(data: &Dataset, params: &ForestParams, max_features: usize, index: usize) -> TreeNode {
    let mut grower = TreeGrower::new(
        data,
        max_features,
        params.min_samples_leaf,
        tree_rng(params.seed, index),
    );
    let n = data.len();
    let rng = grower.rng_mut();
    let mut bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    grower.grow(&mut bootstrap)
}

pub fn train_forest(data: &Dataset, params: &ForestParams) -> Result<ForestModel> {
    data.check_trainable()?;
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    if params.min_samples_leaf == 0 {
        return Err(Error::InvalidParameter(
            "min_samples_leaf must be at least 1".into(),
        ));
    }
    if params.max_features == Some(0) {
        return Err(Error::InvalidParameter(
            "max_features must be at least 1".into(),
        ));
    }
    let max_features = params.resolved_max_features(data.dim());
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| grow_tree(data, params, max_features, i))
        .collect();
    Ok(ForestModel {
        n_trees: params.n_trees,
        max_features,
        min_samples_leaf: params.min_samples_leaf,
        seed: params.seed,
        feature_dim: data.dim(),
        trees,
    })
}

/// Majority label and SPAM vote fraction from a vote tally. Ties go to HAM.
pub fn tally(spam_votes: usize, total: usize) -> Prediction {
    let label = if 2 * spam_votes > total {
        Label::Spam
    } else {
        Label::Ham
    };
    Prediction {
        label,
        score: spam_votes as f64 / total as f64,
    }
}

impl ForestModel {
    pub fn spam_votes(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.feature_dim {
            return Err(Error::DimensionMismatch {
                expected: self.feature_dim,
                actual: x.len(),
            });
        }
        Ok(self.trees.iter().filter(|t| t.predict(x).is_spam()).count())
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        Ok(tally(self.spam_votes(x)?, self.trees.len()))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.trees.len() != self.n_trees || self.n_trees == 0 {
            return Err(Error::ModelFormat(format!(
                "declared {} trees, found {}",
                self.n_trees,
                self.trees.len()
            )));
        }
        for (i, t) in self.trees.iter().enumerate() {
            if let Some(f) = t.max_feature() {
                if f >= self.feature_dim {
                    return Err(Error::ModelFormat(format!(
                        "tree {i} splits on feature {f} but dimension is {}",
                        self.feature_dim
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Prediction from the forest's vote fraction.
pub fn predict_forest(model: &ForestModel, x: &[f64]) -> Result<Prediction> {
    model.predict(x)
}
