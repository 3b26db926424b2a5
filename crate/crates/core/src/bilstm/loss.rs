//! Weighted softmax cross-entropy over per-frame boundary logits.

use ndarray::{Array2, ArrayView2};

use super::network::{backward, forward_traced};
use super::params::BilstmParams;
use crate::error::{Error, Result};

/// Index of the boundary class in the logits.
pub const POSITIVE_CLASS: usize = 1;

/// Per-class loss weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassWeights {
    /// Weight of boundary frames.
    pub positive: f64,
    /// Weight of all other frames.
    pub negative: f64,
}

impl ClassWeights {
    /// Positive weight `ratio`, negative weight 1.
    pub fn from_ratio(ratio: f64) -> Self {
        ClassWeights {
            positive: ratio,
            negative: 1.0,
        }
    }

    pub fn uniform() -> Self {
        Self::from_ratio(1.0)
    }

    fn of(&self, label: u8) -> f64 {
        if label == 1 {
            self.positive
        } else {
            self.negative
        }
    }
}

fn log_softmax(row: &[f64]) -> [f64; 2] {
    let m = row[0].max(row[1]);
    let lse = m + ((row[0] - m).exp() + (row[1] - m).exp()).ln();
    [row[0] - lse, row[1] - lse]
}

/// Softmax of each logit row.
pub fn softmax_rows(logits: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = logits.to_owned();
    for mut row in out.rows_mut() {
        let ls = log_softmax(row.as_slice().expect("standard layout"));
        row[0] = ls[0].exp();
        row[1] = ls[1].exp();
    }
    out
}

/// Boundary probability `p_t` of each frame.
pub fn boundary_probabilities(logits: ArrayView2<'_, f64>) -> Vec<f64> {
    logits
        .rows()
        .into_iter()
        .map(|row| log_softmax(&[row[0], row[1]])[POSITIVE_CLASS].exp())
        .collect()
}

fn check_labels(seq: ArrayView2<'_, f64>, labels: &[u8]) -> Result<()> {
    if seq.nrows() != labels.len() {
        return Err(Error::LengthMismatch {
            what: "frames vs labels",
            left: seq.nrows(),
            right: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::Empty("sequence has no frames"));
    }
    if let Some(bad) = labels.iter().find(|&&g| g > 1) {
        return Err(Error::Config(format!("boundary label {bad} is not 0 or 1")));
    }
    Ok(())
}

/// Adds `scale ·` the gradient of the summed weighted negative log-likelihood
/// of one sequence to `grads`, and returns that unscaled sum.
pub(crate) fn accumulate_sequence(
    params: &BilstmParams,
    seq: ArrayView2<'_, f64>,
    labels: &[u8],
    weights: ClassWeights,
    scale: f64,
    grads: &mut BilstmParams,
) -> Result<f64> {
    check_labels(seq, labels)?;
    let (logits, trace) = forward_traced(params, seq)?;
    let mut d_logits = Array2::zeros(logits.dim());
    let mut total = 0.0;
    for (t, &g) in labels.iter().enumerate() {
        let ls = log_softmax(&[logits[[t, 0]], logits[[t, 1]]]);
        let w = weights.of(g);
        total -= w * ls[g as usize];
        for c in 0..2 {
            let target = if c == g as usize { 1.0 } else { 0.0 };
            d_logits[[t, c]] = scale * w * (ls[c].exp() - target);
        }
    }
    backward(params, &trace, d_logits.view(), grads)?;
    Ok(total)
}

/// Weighted objective `J = -(1/m) Σ_t w(g_t) log p_t(g_t)` and its exact
/// gradient with respect to every parameter.
pub fn loss_and_grad(
    params: &BilstmParams,
    seq: ArrayView2<'_, f64>,
    labels: &[u8],
    weights: ClassWeights,
) -> Result<(f64, BilstmParams)> {
    let mut grads = params.zeros_like();
    let m = labels.len().max(1) as f64;
    let total = accumulate_sequence(params, seq, labels, weights, 1.0 / m, &mut grads)?;
    Ok((total / m, grads))
}

/// The objective alone.
pub fn loss(
    params: &BilstmParams,
    seq: ArrayView2<'_, f64>,
    labels: &[u8],
    weights: ClassWeights,
) -> Result<f64> {
    check_labels(seq, labels)?;
    let (logits, _) = forward_traced(params, seq)?;
    let total: f64 = labels
        .iter()
        .enumerate()
        .map(|(t, &g)| {
            -weights.of(g) * log_softmax(&[logits[[t, 0]], logits[[t, 1]]])[g as usize]
        })
        .sum();
    Ok(total / labels.len() as f64)
}
