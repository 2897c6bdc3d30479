//! Labeled feature datasets and the per-call feature CSV
//! (`call_id,label,degenerate,f0..fN`).

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::FeatureVector;

/// Call class. SPAM is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Ham = 0,
    Spam = 1,
}

impl Label {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Label> {
        match id {
            0 => Some(Label::Ham),
            1 => Some(Label::Spam),
            _ => None,
        }
    }

    pub fn is_spam(self) -> bool {
        self == Label::Spam
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Ham => Label::Spam,
            Label::Spam => Label::Ham,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Ham => "HAM",
            Label::Spam => "SPAM",
        })
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Label> {
        match s.trim().to_ascii_uppercase().as_str() {
            "0" | "HAM" => Ok(Label::Ham),
            "1" | "SPAM" => Ok(Label::Spam),
            other => Err(Error::InvalidParameter(format!("unknown label {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub features: Vec<f64>,
    pub label: Label,
}

/// Dense row-major examples with uniform dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Dataset {
            dim,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn from_examples(examples: &[LabeledExample]) -> Result<Self> {
        let dim = examples
            .first()
            .map(|e| e.features.len())
            .ok_or_else(|| Error::InvalidData("no examples".into()))?;
        let mut data = Dataset::new(dim);
        for e in examples {
            data.push(&e.features, e.label)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, features: &[f64], label: Label) -> Result<()> {
        if features.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: features.len(),
            });
        }
        self.features.extend_from_slice(features);
        self.labels.push(label);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    /// `[ham, spam]` counts.
    pub fn class_counts(&self) -> [usize; 2] {
        let spam = self.labels.iter().filter(|l| l.is_spam()).count();
        [self.len() - spam, spam]
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut out = Dataset::new(self.dim);
        for &i in indices {
            out.features.extend_from_slice(self.row(i));
            out.labels.push(self.labels[i]);
        }
        out
    }

    /// Checks the preconditions shared by every trainer: at least two
    /// examples, non-zero dimension and both classes present.
    pub fn check_trainable(&self) -> Result<()> {
        if self.len() < 2 {
            return Err(Error::InvalidData(format!(
                "need at least 2 examples, got {}",
                self.len()
            )));
        }
        if self.dim == 0 {
            return Err(Error::InvalidData("feature dimension is zero".into()));
        }
        let [ham, spam] = self.class_counts();
        if ham == 0 || spam == 0 {
            return Err(Error::InvalidData(format!(
                "both classes are required (HAM {ham}, SPAM {spam})"
            )));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        Ok(())
    }
}

/// One row of the feature CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub call_id: String,
    pub label: Option<Label>,
    pub features: FeatureVector,
}

pub fn write_feature_csv<W: Write>(writer: W, records: &[FeatureRecord]) -> Result<()> {
    let dim = records.first().map_or(0, |r| r.features.len());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["call_id".to_string(), "label".into(), "degenerate".into()];
    header.extend((0..dim).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for r in records {
        if r.features.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: r.features.len(),
            });
        }
        let mut row = Vec::with_capacity(dim + 3);
        row.push(r.call_id.clone());
        row.push(r.label.map(|l| l.id().to_string()).unwrap_or_default());
        row.push(u8::from(r.features.degenerate).to_string());
        // shortest round-trip representation keeps values bit-exact
        row.extend(r.features.values.iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_feature_csv<R: Read>(reader: R) -> Result<Vec<FeatureRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() < 3
        || &header[0] != "call_id"
        || &header[1] != "label"
        || &header[2] != "degenerate"
    {
        return Err(Error::FeatureCsv(
            "header must start with call_id,label,degenerate".into(),
        ));
    }
    let dim = header.len() - 3;
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        let label = match rec[1].trim() {
            "" => None,
            s => Some(
                s.parse::<Label>()
                    .map_err(|e| Error::FeatureCsv(format!("row {row}: {e}")))?,
            ),
        };
        let degenerate = match rec[2].trim() {
            "1" | "true" => true,
            "0" | "false" => false,
            other => {
                return Err(Error::FeatureCsv(format!(
                    "row {row}: bad degenerate flag {other:?}"
                )))
            }
        };
        let values = (0..dim)
            .map(|i| {
                rec[i + 3]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::FeatureCsv(format!("row {row}, column f{i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(FeatureRecord {
            call_id: rec[0].to_string(),
            label,
            features: FeatureVector { values, degenerate },
        });
    }
    Ok(out)
}

/// Labeled records as a dataset plus the matching call ids. Unlabeled rows
/// are an error.
pub fn dataset_from_records(records: &[FeatureRecord]) -> Result<(Dataset, Vec<String>)> {
    let dim = records
        .first()
        .map(|r| r.features.len())
        .ok_or_else(|| Error::InvalidData("feature file has no rows".into()))?;
    let mut data = Dataset::new(dim);
    let mut ids = Vec::with_capacity(records.len());
    for r in records {
        let label = r
            .label
            .ok_or_else(|| Error::InvalidData(format!("call {} has no label", r.call_id)))?;
        data.push(&r.features.values, label)?;
        ids.push(r.call_id.clone());
    }
    Ok((data, ids))
}
