//! Hyperparameter sweeps under stratified shuffle-split cross-validation.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion, metrics, ConfusionCounts, Metrics};
use super::split::{split_seed, stratified_shuffle_split};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::learn::{train_forest, train_linear, ForestParams, LinearParams, Loss, Model};

/// Classifier family evaluated by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelKind {
    Forest(ForestParams),
    /// Hinge loss trained by SGD.
    Sgd(LinearParams),
    /// Squared hinge loss, the LinearSVC-style baseline.
    LinearSvc(LinearParams),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Forest(_) => "Random Forest",
            ModelKind::Sgd(_) => "Linear SVC with SGD",
            ModelKind::LinearSvc(_) => "Linear SVC",
        }
    }

    pub fn forest(params: ForestParams) -> Self {
        ModelKind::Forest(params)
    }

    pub fn sgd(mut params: LinearParams) -> Self {
        params.loss = Loss::Hinge;
        ModelKind::Sgd(params)
    }

    pub fn linear_svc(mut params: LinearParams) -> Self {
        params.loss = Loss::SquaredHinge;
        ModelKind::LinearSvc(params)
    }

    pub fn train(&self, data: &Dataset) -> Result<Model> {
        Ok(match self {
            ModelKind::Forest(p) => Model::Forest(train_forest(data, p)?),
            ModelKind::Sgd(p) | ModelKind::LinearSvc(p) => Model::Linear(train_linear(data, p)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "parameter", content = "values")]
pub enum Sweep {
    NTrees(Vec<usize>),
    Alpha(Vec<f64>),
    /// Penalty `C`, mapped to `alpha = 1/(C·n_train)`.
    C(Vec<f64>),
}

impl Sweep {
    pub fn parameter(&self) -> &'static str {
        match self {
            Sweep::NTrees(_) => "n_trees",
            Sweep::Alpha(_) => "alpha",
            Sweep::C(_) => "c",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::NTrees(v) => v.len(),
            Sweep::Alpha(v) | Sweep::C(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn value(&self, i: usize) -> f64 {
        match self {
            Sweep::NTrees(v) => v[i] as f64,
            Sweep::Alpha(v) | Sweep::C(v) => v[i],
        }
    }

    /// Parses `key=v1,v2,...` with keys `n_trees`, `alpha` or `c`.
    pub fn parse(text: &str) -> Result<Sweep> {
        let (key, values) = text.split_once('=').ok_or_else(|| {
            Error::InvalidParameter(format!("sweep {text:?} is not key=v1,v2,..."))
        })?;
        let items: Vec<&str> = values
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        if items.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "sweep {text:?} has no values"
            )));
        }
        let floats = || -> Result<Vec<f64>> {
            items
                .iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::InvalidParameter(format!("bad sweep value {s:?}: {e}")))
                })
                .collect()
        };
        match key.trim().to_ascii_lowercase().as_str() {
            "n_trees" | "trees" => items
                .iter()
                .map(|s| {
                    s.parse::<usize>()
                        .map_err(|e| Error::InvalidParameter(format!("bad tree count {s:?}: {e}")))
                })
                .collect::<Result<_>>()
                .map(Sweep::NTrees),
            "alpha" => floats().map(Sweep::Alpha),
            "c" => floats().map(Sweep::C),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep key {other:?} (expected n_trees, alpha or c)"
            ))),
        }
    }

    fn check_compatible(&self, kind: &ModelKind) -> Result<()> {
        let ok = matches!(
            (self, kind),
            (Sweep::NTrees(_), ModelKind::Forest(_))
                | (Sweep::Alpha(_), ModelKind::Sgd(_))
                | (Sweep::C(_), ModelKind::LinearSvc(_))
        );
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "sweep over {} is not supported for {}",
                self.parameter(),
                kind.name()
            )));
        }
        if self.is_empty() {
            return Err(Error::InvalidParameter("sweep grid is empty".into()));
        }
        Ok(())
    }

    /// The model configuration for grid point `i`.
    fn configure(&self, i: usize, base: &ModelKind, n_train: usize) -> Result<ModelKind> {
        let mut kind = *base;
        match (self, &mut kind) {
            (Sweep::NTrees(v), ModelKind::Forest(p)) => p.n_trees = v[i],
            (Sweep::Alpha(v), ModelKind::Sgd(p)) => p.alpha = v[i],
            (Sweep::C(v), ModelKind::LinearSvc(p)) => {
                if v[i].is_nan() || v[i] <= 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "C must be positive, got {}",
                        v[i]
                    )));
                }
                p.alpha = 1.0 / (v[i] * n_train as f64);
            }
            _ => unreachable!("checked by check_compatible"),
        }
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub n_splits: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            n_splits: 10,
            test_fraction: 0.2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (zero for a single value).
    pub fn of(values: &[f64]) -> MeanStd {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvCell {
    pub setting: f64,
    pub split: usize,
    pub confusion: ConfusionCounts,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingSummary {
    pub setting: f64,
    pub precision: MeanStd,
    pub recall: MeanStd,
    pub accuracy: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model: String,
    pub base: ModelKind,
    pub parameter: String,
    pub config: CvConfig,
    pub split_seeds: Vec<u64>,
    pub settings: Vec<SettingSummary>,
    pub cells: Vec<CvCell>,
}

/// Trains on one split and scores the held-out part.
pub fn evaluate_split(
    data: &Dataset,
    kind: &ModelKind,
    train: &[usize],
    test: &[usize],
) -> Result<(ConfusionCounts, Metrics)> {
    let model = kind.train(&data.subset(train))?;
    let mut predicted = Vec::with_capacity(test.len());
    let mut truth = Vec::with_capacity(test.len());
    for &i in test {
        predicted.push(model.predict(data.row(i))?.label);
        truth.push(data.label(i));
    }
    let counts = confusion(&predicted, &truth)?;
    Ok((counts, metrics(&counts)?))
}

pub fn cross_validate(
    data: &Dataset,
    base: &ModelKind,
    sweep: &Sweep,
    config: &CvConfig,
) -> Result<CvReport> {
    sweep.check_compatible(base)?;
    data.check_trainable()?;
    let splits = stratified_shuffle_split(
        data.labels(),
        config.test_fraction,
        config.n_splits,
        config.seed,
    )?;

    let cells: Vec<(usize, usize)> = (0..sweep.len())
        .flat_map(|s| (0..splits.len()).map(move |k| (s, k)))
        .collect();
    let results: Vec<CvCell> = cells
        .par_iter()
        .map(|&(s, k)| {
            let wrap = |e: Error| Error::CvCell {
                setting: format!("{}={}", sweep.parameter(), sweep.value(s)),
                split: k,
                source: Box::new(e),
            };
            let split = &splits[k];
            let kind = sweep.configure(s, base, split.train.len()).map_err(wrap)?;
            let (confusion, metrics) =
                evaluate_split(data, &kind, &split.train, &split.test).map_err(wrap)?;
            Ok(CvCell {
                setting: sweep.value(s),
                split: k,
                confusion,
                metrics,
            })
        })
        .collect::<Result<_>>()?;

    let settings = (0..sweep.len())
        .map(|s| {
            let row = &results[s * splits.len()..(s + 1) * splits.len()];
            let pick = |f: fn(&Metrics) -> f64| {
                MeanStd::of(&row.iter().map(|c| f(&c.metrics)).collect::<Vec<_>>())
            };
            SettingSummary {
                setting: sweep.value(s),
                precision: pick(|m| m.precision),
                recall: pick(|m| m.recall),
                accuracy: pick(|m| m.accuracy),
            }
        })
        .collect();

    Ok(CvReport {
        model: base.name().to_string(),
        base: *base,
        parameter: sweep.parameter().to_string(),
        config: *config,
        split_seeds: (0..config.n_splits)
            .map(|k| split_seed(config.seed, k))
            .collect(),
        settings,
        cells: results,
    })
}

impl CvReport {
    /// Per-cell CSV: `setting,split,precision,recall,accuracy` (fractions).
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["setting", "split", "precision", "recall", "accuracy"])?;
        for c in &self.cells {
            w.write_record([
                c.setting.to_string(),
                c.split.to_string(),
                c.metrics.precision.to_string(),
                c.metrics.recall.to_string(),
                c.metrics.accuracy.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Human-readable table of mean percentages, one row per setting, in the
    /// `Model | Precision | Recall | Accuracy` layout.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Model | {} | Precision | Recall | Accuracy",
            self.parameter
        );
        for s in &self.settings {
            let _ = writeln!(
                out,
                "{} | {} | {:.2} | {:.2} | {:.2}",
                self.model,
                s.setting,
                100.0 * s.precision.mean,
                100.0 * s.recall.mean,
                100.0 * s.accuracy.mean
            );
        }
        out
    }
}
