//! Fixtures shared by the pipeline benchmarks.

use deadair_core::audio::normalize_clip;
use deadair_core::learn::train_forest;
use deadair_core::synth::{gen_deadair, gen_ham, DeadAirParams, HamParams};
use deadair_core::{AudioClip, Dataset, Featurizer, ForestModel, ForestParams};

pub fn ham_clip() -> AudioClip {
    normalize_clip(&gen_ham(1, 1, &HamParams::default())[0].samples).expect("non-empty clip")
}

pub fn deadair_clip() -> AudioClip {
    normalize_clip(&gen_deadair(1, 1, &DeadAirParams::default())[0].samples)
        .expect("non-empty clip")
}

/// A default-sized forest trained on a small synthetic corpus.
pub fn trained_forest(per_class: usize) -> (ForestModel, Vec<Vec<f64>>) {
    let f = Featurizer::default();
    let mut data = Dataset::new(f.feature_dim());
    let mut rows = Vec::new();
    let clips = gen_deadair(2, per_class, &DeadAirParams::default())
        .into_iter()
        .chain(gen_ham(2, per_class, &HamParams::default()));
    for c in clips {
        let clip = normalize_clip(&c.samples).expect("non-empty clip");
        let v = f.features(&clip).expect("featurizable clip").values;
        data.push(&v, c.label).expect("uniform dimension");
        rows.push(v);
    }
    let model = train_forest(&data, &ForestParams::default()).expect("two classes");
    (model, rows)
}
