use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seed used for split `index` of a run seeded with `seed` (SplitMix64 mix).
pub fn split_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-class test counts. The test total is `round(f·n)`; each class gets
/// the floor of its quota `f·n_c` and the leftovers go to the largest
/// fractional remainders (lower class id first on ties).
pub fn allocate_test_counts(class_sizes: [usize; 2], test_fraction: f64) -> [usize; 2] {
    let n: usize = class_sizes.iter().sum();
    let total = (test_fraction * n as f64).round() as usize;
    let quotas = class_sizes.map(|c| test_fraction * c as f64);
    let mut counts = quotas.map(|q| q.floor() as usize);
    let mut leftover = total.saturating_sub(counts.iter().sum());
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &c in order.iter().cycle().take(2) {
        if leftover == 0 {
            break;
        }
        if counts[c] < class_sizes[c] {
            counts[c] += 1;
            leftover -= 1;
        }
    }
    counts
}

/// Reshuffles and re-partitions the data `n_splits` times, preserving class
/// proportions in every test set. Index lists are returned sorted.
pub fn stratified_shuffle_split(
    labels: &[Label],
    test_fraction: f64,
    n_splits: usize,
    seed: u64,
) -> Result<Vec<Split>> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    if n_splits == 0 {
        return Err(Error::InvalidParameter(
            "n_splits must be at least 1".into(),
        ));
    }
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        by_class[l.id() as usize].push(i);
    }
    let sizes = [by_class[0].len(), by_class[1].len()];
    let test_counts = allocate_test_counts(sizes, test_fraction);
    for class in [Label::Ham, Label::Spam] {
        let c = class.id() as usize;
        if test_counts[c] == 0 || test_counts[c] == sizes[c] {
            return Err(Error::Stratification(format!(
                "class {class} has {} examples; a {test_fraction} test fraction leaves \
                 {} in test and {} in train",
                sizes[c],
                test_counts[c],
                sizes[c] - test_counts[c]
            )));
        }
    }

    Ok((0..n_splits)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(split_seed(seed, s));
            let mut train = Vec::new();
            let mut test = Vec::new();
            for c in 0..2 {
                let mut members = by_class[c].clone();
                members.shuffle(&mut rng);
                test.extend_from_slice(&members[..test_counts[c]]);
                train.extend_from_slice(&members[test_counts[c]..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            Split { train, test }
        })
        .collect())
}
