use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::corpus::Label;
use crate::error::{Error, Result};

const K: usize = Label::COUNT;

/// Weights stored class-major: `weights[c * dim + j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    dim: usize,
    weights: Vec<f64>,
    bias: [f64; K],
}

/// Same shape as the model it was computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: [f64; K],
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64; K]) -> [f64; K] {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = scores.map(|s| (s - max).exp());
    let z: f64 = out.iter().sum();
    for p in &mut out {
        *p /= z;
    }
    out
}

fn log_sum_exp(scores: &[f64; K]) -> f64 {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln()
}

impl LinearModel {
    pub fn zeros(dim: usize) -> LinearModel {
        LinearModel {
            dim,
            weights: vec![0.0; K * dim],
            bias: [0.0; K],
        }
    }

    pub fn from_parts(dim: usize, weights: Vec<f64>, bias: [f64; K]) -> Result<LinearModel> {
        if weights.len() != K * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights for dimension {dim}, got {}",
                K * dim,
                weights.len()
            )));
        }
        if weights.iter().chain(&bias).any(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(
                "model contains non-finite values".into(),
            ));
        }
        Ok(LinearModel { dim, weights, bias })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn bias(&self) -> &[f64; K] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64; K] {
        &mut self.bias
    }

    pub fn weight(&self, class: usize, feature: usize) -> f64 {
        self.weights[class * self.dim + feature]
    }

    pub fn squared_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn scores(&self, x: &FeatureVector) -> [f64; K] {
        let mut s = self.bias;
        for &(j, v) in &x.entries {
            for (c, sc) in s.iter_mut().enumerate() {
                *sc += self.weights[c * self.dim + j] * v;
            }
        }
        s
    }

    pub fn probabilities(&self, x: &FeatureVector) -> [f64; K] {
        softmax(&self.scores(x))
    }

    /// Argmax of the class scores; the lowest class index wins ties.
    pub fn predict(&self, x: &FeatureVector) -> Label {
        let s = self.scores(x);
        let mut best = 0;
        for c in 1..K {
            if s[c] > s[best] {
                best = c;
            }
        }
        Label::from_code(best).expect("class index in range")
    }

    /// One descent step on a batch. The update equals
    /// `θ ← θ − lr · ∇` with `∇` from [`loss_and_gradient`], applied without
    /// materializing the dense gradient. Returns the pre-update loss.
    pub(crate) fn sgd_step(
        &mut self,
        batch: &[(&FeatureVector, Label)],
        l2: f64,
        lr: f64,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidArgument("empty batch".into()));
        }
        let n = batch.len() as f64;
        let mut data_loss = 0.0;
        let mut residuals: Vec<[f64; K]> = Vec::with_capacity(batch.len());
        for (x, y) in batch {
            let s = self.scores(x);
            data_loss += log_sum_exp(&s) - s[y.code()];
            let mut r = softmax(&s);
            r[y.code()] -= 1.0;
            residuals.push(r);
        }
        let loss = data_loss / n + 0.5 * l2 * self.squared_norm();
        if !loss.is_finite() {
            return Err(Error::Diverged { step: 0, loss });
        }

        if l2 > 0.0 {
            let decay = 1.0 - lr * l2;
            for w in &mut self.weights {
                *w *= decay;
            }
        }
        let scale = lr / n;
        for ((x, _), r) in batch.iter().zip(&residuals) {
            for &(j, v) in &x.entries {
                for (c, rc) in r.iter().enumerate() {
                    self.weights[c * self.dim + j] -= scale * rc * v;
                }
            }
            for (b, rc) in self.bias.iter_mut().zip(r) {
                *b -= scale * rc;
            }
        }
        Ok(loss)
    }
}

/// Mean cross-entropy plus `(l2/2)·|W|²` (bias unpenalized), and its gradient.
pub fn loss_and_gradient(
    model: &LinearModel,
    batch: &[(FeatureVector, Label)],
    l2: f64,
) -> Result<(f64, Gradient)> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("empty batch".into()));
    }
    let n = batch.len() as f64;
    let dim = model.dim;
    let mut grad = Gradient {
        weights: model.weights.iter().map(|w| l2 * w).collect(),
        bias: [0.0; K],
    };
    let mut data_loss = 0.0;
    for (x, y) in batch {
        let s = model.scores(x);
        let y = y.code();
        data_loss += log_sum_exp(&s) - s[y];
        let mut r = softmax(&s);
        r[y] -= 1.0;
        for &(j, v) in &x.entries {
            for (c, rc) in r.iter().enumerate() {
                grad.weights[c * dim + j] += rc * v / n;
            }
        }
        for (b, rc) in grad.bias.iter_mut().zip(&r) {
            *b += rc / n;
        }
    }
    let loss = data_loss / n + 0.5 * l2 * model.squared_norm();
    if !loss.is_finite() {
        return Err(Error::Diverged { step: 0, loss });
    }
    Ok((loss, grad))
}
