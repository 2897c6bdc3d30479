//! Linear classifiers trained by plain SGD on a (squared) hinge loss with an
//! L2 penalty `alpha·‖w‖²`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Prediction;
use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Hinge,
    SquaredHinge,
}

impl Loss {
    pub fn value(self, margin: f64) -> f64 {
        let slack = (1.0 - margin).max(0.0);
        match self {
            Loss::Hinge => slack,
            Loss::SquaredHinge => slack * slack,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub loss: Loss,
    pub alpha: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams {
            loss: Loss::Hinge,
            alpha: 1e-4,
            epochs: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alpha: f64,
    pub loss: Loss,
}

fn signed(label: Label) -> f64 {
    if label.is_spam() {
        1.0
    } else {
        -1.0
    }
}

impl LinearModel {
    pub fn feature_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn margin(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::DimensionMismatch {
                expected: self.weights.len(),
                actual: x.len(),
            });
        }
        Ok(self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }

    /// SPAM iff the margin is strictly positive. The score squashes the
    /// margin through a logistic so that it lives in [0, 1].
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        let margin = self.margin(x)?;
        Ok(Prediction {
            label: if margin > 0.0 {
                Label::Spam
            } else {
                Label::Ham
            },
            score: 1.0 / (1.0 + (-margin).exp()),
        })
    }

    /// Mean loss over a dataset (without the penalty).
    pub fn mean_loss(&self, data: &Dataset) -> Result<f64> {
        let mut total = 0.0;
        for i in 0..data.len() {
            total += self
                .loss
                .value(signed(data.label(i)) * self.margin(data.row(i))?);
        }
        Ok(total / data.len() as f64)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::ModelFormat("linear model has no weights".into()));
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::ModelFormat(
                "linear model has non-finite weights".into(),
            ));
        }
        Ok(())
    }
}

/// Label and raw margin `w·x + b`.
pub fn predict_linear(model: &LinearModel, x: &[f64]) -> Result<(Label, f64)> {
    let margin = model.margin(x)?;
    Ok((
        if margin > 0.0 {
            Label::Spam
        } else {
            Label::Ham
        },
        margin,
    ))
}

/// Trains with learning rate `η_t = 1/(alpha·(t0 + t))`, where
/// `t0 = max(1/alpha, 2)` so that `η_0 ≤ 1` and the shrink factor
/// `1 − 2αη` stays in [0, 1).
///
/// Returns the model and the mean training loss after each epoch.
pub fn train_linear_with_history(
    data: &Dataset,
    params: &LinearParams,
) -> Result<(LinearModel, Vec<f64>)> {
    data.check_trainable()?;
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive and finite, got {}",
            params.alpha
        )));
    }
    if params.epochs == 0 {
        return Err(Error::InvalidParameter("epochs must be at least 1".into()));
    }

    let alpha = params.alpha;
    let t0 = (1.0 / alpha).max(2.0);
    let mut model = LinearModel {
        weights: vec![0.0; data.dim()],
        bias: 0.0,
        alpha,
        loss: params.loss,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(params.epochs);
    let mut t = 0.0;

    for _ in 0..params.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = data.row(i);
            let y = signed(data.label(i));
            let eta = 1.0 / (alpha * (t0 + t));
            t += 1.0;

            let margin = y * model.margin(x)?;
            let shrink = 1.0 - 2.0 * alpha * eta;
            model.weights.iter_mut().for_each(|w| *w *= shrink);

            if margin < 1.0 {
                let step = match params.loss {
                    Loss::Hinge => eta,
                    Loss::SquaredHinge => {
                        // d/dm (1-m)² = -2(1-m); cap the step so a single
                        // update cannot push the margin past 1
                        let sq_norm = x.iter().map(|v| v * v).sum::<f64>() + 1.0;
                        2.0 * (1.0 - margin) * eta.min(1.0 / (2.0 * sq_norm))
                    }
                };
                for (w, v) in model.weights.iter_mut().zip(x) {
                    *w += step * y * v;
                }
                model.bias += step * y;
            }
        }
        history.push(model.mean_loss(data)?);
    }
    Ok((model, history))
}

pub fn train_linear(data: &Dataset, params: &LinearParams) -> Result<LinearModel> {
    Ok(train_linear_with_history(data, params)?.0)
}
