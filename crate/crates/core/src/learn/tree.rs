//! CART classification trees grown on Gini impurity.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TreeNode {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    /// Training counts per class, `[ham, spam]`.
    Leaf { counts: [u32; 2] },
}

impl TreeNode {
    pub fn leaf_for(&self, x: &[f64]) -> [u32; 2] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if x[*feature] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
                TreeNode::Leaf { counts } => return *counts,
            }
        }
    }

    /// Majority class of the reached leaf; ties go to HAM.
    pub fn predict(&self, x: &[f64]) -> Label {
        let [ham, spam] = self.leaf_for(x);
        if spam > ham {
            Label::Spam
        } else {
            Label::Ham
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            TreeNode::Leaf { .. } => 0,
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Split { left, right, .. } => left.leaves() + right.leaves(),
            TreeNode::Leaf { .. } => 1,
        }
    }

    /// Largest feature index used by any split.
    pub fn max_feature(&self) -> Option<usize> {
        match self {
            TreeNode::Split {
                feature,
                left,
                right,
                ..
            } => Some(
                (*feature)
                    .max(left.max_feature().unwrap_or(0))
                    .max(right.max_feature().unwrap_or(0)),
            ),
            TreeNode::Leaf { .. } => None,
        }
    }
}

/// Gini impurity `1 − Σ p²` of a class histogram.
pub fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (counts[0] as f64 / n, counts[1] as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    threshold: f64,
    /// Σ over children of `Σ_c n_c² / n_child`; larger means purer children.
    purity: f64,
}

pub(crate) struct TreeGrower<'a, R> {
    data: &'a Dataset,
    max_features: usize,
    min_samples_leaf: usize,
    rng: R,
    feature_pool: Vec<usize>,
    scratch: Vec<(f64, Label)>,
}

impl<'a, R: Rng> TreeGrower<'a, R> {
    pub(crate) fn new(
        data: &'a Dataset,
        max_features: usize,
        min_samples_leaf: usize,
        rng: R,
    ) -> Self {
        TreeGrower {
            data,
            max_features: max_features.clamp(1, data.dim()),
            min_samples_leaf: min_samples_leaf.max(1),
            rng,
            feature_pool: (0..data.dim()).collect(),
            scratch: Vec::new(),
        }
    }

    pub(crate) fn rng_mut(&mut self) -> &mut R {
        &mut self.rng
    }

    fn counts(&self, samples: &[usize]) -> [usize; 2] {
        let spam = samples
            .iter()
            .filter(|&&i| self.data.label(i).is_spam())
            .count();
        [samples.len() - spam, spam]
    }

    fn best_split_on(
        &mut self,
        feature: usize,
        samples: &[usize],
        totals: [usize; 2],
    ) -> Option<Candidate> {
        self.scratch.clear();
        self.scratch.extend(
            samples
                .iter()
                .map(|&i| (self.data.row(i)[feature], self.data.label(i))),
        );
        self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));

        let n = self.scratch.len();
        let mut left = [0usize; 2];
        let mut best: Option<Candidate> = None;
        for i in 1..n {
            left[self.scratch[i - 1].1 as usize] += 1;
            if i < self.min_samples_leaf || n - i < self.min_samples_leaf {
                continue;
            }
            let (lo, hi) = (self.scratch[i - 1].0, self.scratch[i].0);
            if lo >= hi {
                continue;
            }
            let right = [totals[0] - left[0], totals[1] - left[1]];
            let purity = child_purity(left) + child_purity(right);
            if best.is_none_or(|b| purity > b.purity) {
                let mid = lo + (hi - lo) / 2.0;
                // adjacent floats: the midpoint may round up onto `hi`
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Candidate {
                    feature,
                    threshold,
                    purity,
                });
            }
        }
        best
    }

    /// Grows a subtree over `samples` (indices into the dataset, repeats allowed).
    pub(crate) fn grow(&mut self, samples: &mut [usize]) -> TreeNode {
        let totals = self.counts(samples);
        let leaf = TreeNode::Leaf {
            counts: [totals[0] as u32, totals[1] as u32],
        };
        if totals[0] == 0 || totals[1] == 0 || samples.len() < 2 * self.min_samples_leaf {
            return leaf;
        }

        // Partial Fisher-Yates over the feature pool; keep drawing past
        // max_features only while no candidate has produced a valid split.
        let dim = self.feature_pool.len();
        let mut best: Option<Candidate> = None;
        for drawn in 0..dim {
            if drawn >= self.max_features && best.is_some() {
                break;
            }
            let pick = self.rng.random_range(drawn..dim);
            self.feature_pool.swap(drawn, pick);
            let feature = self.feature_pool[drawn];
            if let Some(c) = self.best_split_on(feature, samples, totals) {
                if best.is_none_or(|b| c.purity > b.purity) {
                    best = Some(c);
                }
            }
        }
        let Some(split) = best else {
            return leaf;
        };

        let mut boundary = 0;
        for i in 0..samples.len() {
            if self.data.row(samples[i])[split.feature] <= split.threshold {
                samples.swap(i, boundary);
                boundary += 1;
            }
        }
        let (left, right) = samples.split_at_mut(boundary);
        TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(self.grow(left)),
            right: Box::new(self.grow(right)),
        }
    }
}

fn child_purity(counts: [usize; 2]) -> f64 {
    let n = counts[0] + counts[1];
    if n == 0 {
        return 0.0;
    }
    ((counts[0] * counts[0] + counts[1] * counts[1]) as f64) / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grow_all(data: &Dataset, min_leaf: usize) -> TreeNode {
        let mut grower = TreeGrower::new(data, data.dim(), min_leaf, ChaCha8Rng::seed_from_u64(1));
        let mut samples: Vec<usize> = (0..data.len()).collect();
        grower.grow(&mut samples)
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini([5, 0]), 0.0);
        assert_eq!(gini([2, 2]), 0.5);
        assert!((gini([1, 3]) - 0.375).abs() < 1e-15);
    }

    #[test]
    fn stump_separates_two_points() {
        let mut data = Dataset::new(1);
        data.push(&[0.0], Label::Ham).unwrap();
        data.push(&[1.0], Label::Spam).unwrap();
        let tree = grow_all(&data, 1);
        match &tree {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, 0.5),
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(tree.predict(&[0.0]), Label::Ham);
        assert_eq!(tree.predict(&[1.0]), Label::Spam);
    }

    #[test]
    fn identical_points_make_a_leaf() {
        let mut data = Dataset::new(2);
        data.push(&[1.0, 1.0], Label::Ham).unwrap();
        data.push(&[1.0, 1.0], Label::Spam).unwrap();
        assert_eq!(grow_all(&data, 1), TreeNode::Leaf { counts: [1, 1] });
        // tie in the leaf resolves to HAM
        assert_eq!(grow_all(&data, 1).predict(&[1.0, 1.0]), Label::Ham);
    }

    #[test]
    fn min_samples_leaf_is_respected() {
        let mut data = Dataset::new(1);
        for i in 0..10 {
            let label = if i == 0 { Label::Spam } else { Label::Ham };
            data.push(&[i as f64], label).unwrap();
        }
        fn check(node: &TreeNode, min: u32) {
            match node {
                TreeNode::Split { left, right, .. } => {
                    check(left, min);
                    check(right, min);
                }
                TreeNode::Leaf { counts } => assert!(counts[0] + counts[1] >= min),
            }
        }
        check(&grow_all(&data, 3), 3);
    }

    #[test]
    fn adjacent_float_threshold() {
        let lo = 1.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let mut data = Dataset::new(1);
        data.push(&[lo], Label::Ham).unwrap();
        data.push(&[hi], Label::Spam).unwrap();
        let tree = grow_all(&data, 1);
        assert_eq!(tree.predict(&[lo]), Label::Ham);
        assert_eq!(tree.predict(&[hi]), Label::Spam);
    }
}
