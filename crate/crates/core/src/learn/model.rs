//! Versioned JSON model files:
//! `{"schema_version": 1, "kind": "forest"|"linear", "params": {...}, "payload": {...}}`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::forest::ForestModel;
use super::linear::{LinearModel, Loss};
use super::tree::TreeNode;
use super::Prediction;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Forest(ForestModel),
    Linear(LinearModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Forest(_) => "forest",
            Model::Linear(_) => "linear",
        }
    }

    pub fn feature_dim(&self) -> usize {
        match self {
            Model::Forest(m) => m.feature_dim,
            Model::Linear(m) => m.feature_dim(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        match self {
            Model::Forest(m) => m.predict(x),
            Model::Linear(m) => m.predict(x),
        }
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        let bytes = match self {
            Model::Forest(m) => serde_json::to_vec(&Envelope {
                schema_version: SCHEMA_VERSION,
                kind: "forest",
                params: ForestHeader {
                    n_trees: m.n_trees,
                    max_features: m.max_features,
                    min_samples_leaf: m.min_samples_leaf,
                    seed: m.seed,
                    feature_dim: m.feature_dim,
                },
                payload: ForestPayloadRef { trees: &m.trees },
            })?,
            Model::Linear(m) => serde_json::to_vec(&Envelope {
                schema_version: SCHEMA_VERSION,
                kind: "linear",
                params: LinearHeader {
                    loss: m.loss,
                    alpha: m.alpha,
                    feature_dim: m.feature_dim(),
                },
                payload: LinearPayload {
                    weights: m.weights.clone(),
                    bias: m.bias,
                },
            })?,
        };
        Ok(bytes)
    }

    /// Parses a model file image. Nothing is returned unless the whole file
    /// parses and validates.
    pub fn from_json_bytes(bytes: &[u8]) -> Result<Model> {
        let probe: VersionProbe = parse(bytes)?;
        if probe.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                found: probe.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        let raw: RawEnvelope = parse(bytes)?;
        let model = match raw.kind.as_str() {
            "forest" => {
                let h: ForestHeader = parse(raw.params.get().as_bytes())?;
                let p: ForestPayload = parse(raw.payload.get().as_bytes())?;
                let m = ForestModel {
                    n_trees: h.n_trees,
                    max_features: h.max_features,
                    min_samples_leaf: h.min_samples_leaf,
                    seed: h.seed,
                    feature_dim: h.feature_dim,
                    trees: p.trees,
                };
                m.validate()?;
                Model::Forest(m)
            }
            "linear" => {
                let h: LinearHeader = parse(raw.params.get().as_bytes())?;
                let p: LinearPayload = parse(raw.payload.get().as_bytes())?;
                let m = LinearModel {
                    weights: p.weights,
                    bias: p.bias,
                    alpha: h.alpha,
                    loss: h.loss,
                };
                m.validate()?;
                if m.feature_dim() != h.feature_dim {
                    return Err(Error::ModelFormat(format!(
                        "declared dimension {} but found {} weights",
                        h.feature_dim,
                        m.feature_dim()
                    )));
                }
                Model::Linear(m)
            }
            other => return Err(Error::ModelFormat(format!("unknown model kind {other:?}"))),
        };
        Ok(model)
    }
}

/// Deserializes without serde_json's nesting limit; deep trees are legal.
fn parse<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    de.disable_recursion_limit();
    let value =
        T::deserialize(&mut de).map_err(|e| Error::ModelFormat(format!("parse error: {e}")))?;
    de.end()
        .map_err(|e| Error::ModelFormat(format!("parse error: {e}")))?;
    Ok(value)
}

#[derive(Serialize)]
struct Envelope<P, Q> {
    schema_version: u32,
    kind: &'static str,
    params: P,
    payload: Q,
}

#[derive(Deserialize)]
struct VersionProbe {
    schema_version: u32,
}

#[derive(Deserialize)]
struct RawEnvelope {
    kind: String,
    params: Box<RawValue>,
    payload: Box<RawValue>,
}

#[derive(Serialize, Deserialize)]
struct ForestHeader {
    n_trees: usize,
    max_features: usize,
    min_samples_leaf: usize,
    seed: u64,
    feature_dim: usize,
}

#[derive(Serialize)]
struct ForestPayloadRef<'a> {
    trees: &'a [TreeNode],
}

#[derive(Deserialize)]
struct ForestPayload {
    trees: Vec<TreeNode>,
}

#[derive(Serialize, Deserialize)]
struct LinearHeader {
    loss: Loss,
    alpha: f64,
    feature_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct LinearPayload {
    weights: Vec<f64>,
    bias: f64,
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, model.to_json_bytes()?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model> {
    Model::from_json_bytes(&fs::read(path)?)
}
