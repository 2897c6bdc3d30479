//! End-to-end clip classification: digital-silence check, STFT, SVD
//! features and the trained model.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::audio::{is_digital_silence, AudioClip};
use crate::dataset::Label;
use crate::dsp::{StftConfig, StftPlan};
use crate::error::{Error, Result};
use crate::factorization::{extract_features, FeatureVector, DEFAULT_TOP_BASES};
use crate::learn::Model;

/// What to do with a clip whose samples are all exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SilencePolicy {
    /// Short-circuit to SPAM.
    #[default]
    Spam,
    /// Short-circuit to HAM.
    Ham,
    /// Flag it, but let the model decide from the degenerate feature vector.
    FlagOnly,
}

impl FromStr for SilencePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spam" => Ok(SilencePolicy::Spam),
            "ham" => Ok(SilencePolicy::Ham),
            "flag-only" => Ok(SilencePolicy::FlagOnly),
            other => Err(Error::InvalidParameter(format!(
                "unknown silence policy {other:?} (expected spam, ham or flag-only)"
            ))),
        }
    }
}

impl fmt::Display for SilencePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SilencePolicy::Spam => "spam",
            SilencePolicy::Ham => "ham",
            SilencePolicy::FlagOnly => "flag-only",
        })
    }
}

/// Clip → feature vector. Counts how many SVDs it has attempted.
#[derive(Debug)]
pub struct Featurizer {
    plan: StftPlan,
    top_bases: usize,
    svd_calls: AtomicU64,
}

impl Featurizer {
    pub fn new(config: StftConfig, top_bases: usize) -> Result<Self> {
        if top_bases == 0 {
            return Err(Error::InvalidParameter(
                "top_bases must be at least 1".into(),
            ));
        }
        Ok(Featurizer {
            plan: StftPlan::new(config)?,
            top_bases,
            svd_calls: AtomicU64::new(0),
        })
    }

    pub fn stft_config(&self) -> &StftConfig {
        self.plan.config()
    }

    pub fn top_bases(&self) -> usize {
        self.top_bases
    }

    pub fn feature_dim(&self) -> usize {
        self.plan.config().bins() * self.top_bases
    }

    /// Number of spectrogram factorizations attempted so far.
    pub fn svd_calls(&self) -> u64 {
        self.svd_calls.load(Ordering::Relaxed)
    }

    /// Digital silence skips the STFT and SVD entirely and yields the
    /// degenerate zero vector.
    pub fn features(&self, clip: &AudioClip) -> Result<FeatureVector> {
        if is_digital_silence(clip) {
            return Ok(FeatureVector::degenerate(self.feature_dim()));
        }
        let spec = self.plan.spectrogram(clip)?;
        self.svd_calls.fetch_add(1, Ordering::Relaxed);
        extract_features(&spec, self.top_bases)
    }
}

impl Default for Featurizer {
    fn default() -> Self {
        Featurizer::new(StftConfig::default(), DEFAULT_TOP_BASES).expect("default config is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub label: Label,
    pub score: f64,
    pub degenerate: bool,
    pub digital_silence: bool,
}

/// A featurizer paired with an immutable model; safe to share across threads.
#[derive(Debug)]
pub struct Detector {
    featurizer: Featurizer,
    model: Model,
    policy: SilencePolicy,
}

impl Detector {
    pub fn new(featurizer: Featurizer, model: Model, policy: SilencePolicy) -> Result<Self> {
        if model.feature_dim() != featurizer.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: featurizer.feature_dim(),
                actual: model.feature_dim(),
            });
        }
        Ok(Detector {
            featurizer,
            model,
            policy,
        })
    }

    pub fn featurizer(&self) -> &Featurizer {
        &self.featurizer
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn policy(&self) -> SilencePolicy {
        self.policy
    }

    pub fn classify(&self, clip: &AudioClip) -> Result<Classification> {
        let silent = is_digital_silence(clip);
        if silent {
            let forced = match self.policy {
                SilencePolicy::Spam => Some((Label::Spam, 1.0)),
                SilencePolicy::Ham => Some((Label::Ham, 0.0)),
                SilencePolicy::FlagOnly => None,
            };
            if let Some((label, score)) = forced {
                return Ok(Classification {
                    label,
                    score,
                    degenerate: true,
                    digital_silence: true,
                });
            }
        }
        let features = self.featurizer.features(clip)?;
        let prediction = self.model.predict(&features.values)?;
        Ok(Classification {
            label: prediction.label,
            score: prediction.score,
            degenerate: features.degenerate,
            digital_silence: silent,
        })
    }
}
