//! Mini-batch training with per-sequence backpropagation through time.

use std::ops::ControlFlow;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::loss::{accumulate_sequence, ClassWeights};
use super::params::{BilstmParams, NetworkShape};
use crate::error::{Error, Result};
use crate::features::{FeatureVector, FEATURE_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    /// Units per direction in every layer.
    pub hidden_size: usize,
    pub num_layers: usize,
    /// Weight of boundary frames relative to the others.
    pub pos_weight_ratio: f64,
    /// Adam step size. Inputs are raw pixel offsets, so larger steps
    /// saturate the first layer's gates within a few updates.
    pub learning_rate: f64,
    /// Frames per gradient step; whole sequences are added until reached.
    pub batch_size: usize,
    pub max_epochs: usize,
    pub boundary_threshold: f64,
    pub min_gesture_len: u32,
    /// Frames on either side of a boundary also labeled positive.
    pub dilation_w: u32,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Multiply the learning rate by 0.1 from `lr_decay_epoch` on.
    pub lr_decay: bool,
    pub lr_decay_epoch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_size: 128,
            num_layers: 4,
            pos_weight_ratio: 40.0,
            learning_rate: 0.001,
            batch_size: 120,
            max_epochs: 50,
            boundary_threshold: 0.5,
            min_gesture_len: 1,
            dilation_w: 1,
            seed: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            lr_decay: false,
            lr_decay_epoch: 30,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_owned()));
        if self.hidden_size == 0 || self.num_layers == 0 {
            return bad("hidden_size and num_layers must be positive");
        }
        if !(self.pos_weight_ratio > 0.0 && self.pos_weight_ratio.is_finite()) {
            return bad("pos_weight_ratio must be positive");
        }
        if !(self.boundary_threshold > 0.0 && self.boundary_threshold < 1.0) {
            return bad("boundary_threshold must lie in (0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) || self.epsilon <= 0.0 {
            return bad("Adam needs beta1, beta2 in [0, 1) and epsilon > 0");
        }
        Ok(())
    }

    pub fn shape(&self, input_size: usize) -> NetworkShape {
        NetworkShape {
            input_size,
            hidden_size: self.hidden_size,
            num_layers: self.num_layers,
        }
    }

    pub fn class_weights(&self) -> ClassWeights {
        ClassWeights::from_ratio(self.pos_weight_ratio)
    }

    pub fn adam(&self, epoch: usize) -> AdamConfig {
        let decayed = self.lr_decay && epoch >= self.lr_decay_epoch;
        AdamConfig {
            learning_rate: if decayed {
                self.learning_rate * 0.1
            } else {
                self.learning_rate
            },
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// Frame features (`T × input`) with their boundary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSequence {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
}

impl TrainingSequence {
    pub fn new(features: Array2<f64>, labels: Vec<u8>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::LengthMismatch {
                what: "frames vs labels",
                left: features.nrows(),
                right: labels.len(),
            });
        }
        if labels.is_empty() {
            return Err(Error::Empty("training sequence has no frames"));
        }
        Ok(TrainingSequence { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Stacks feature vectors into a `T × 120` matrix.
pub fn feature_matrix(vectors: &[FeatureVector]) -> Array2<f64> {
    let flat: Vec<f64> = vectors.iter().flat_map(|v| v.0).collect();
    Array2::from_shape_vec((vectors.len(), FEATURE_DIM), flat).expect("rows are FEATURE_DIM wide")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochSummary {
    /// 1-based.
    pub epoch: usize,
    /// Mean weighted loss per frame over the epoch's batches.
    pub loss: f64,
    pub learning_rate: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: BilstmParams,
    /// Per-epoch mean loss.
    pub history: Vec<f64>,
    pub adam: AdamState,
}

pub fn train(corpus: &[TrainingSequence], config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_monitor(corpus, config, |_, _| ControlFlow::Continue(()))
}

/// [`train`] with a callback after every epoch; returning `Break` stops early.
pub fn train_with_monitor<F>(
    corpus: &[TrainingSequence],
    config: &TrainConfig,
    mut monitor: F,
) -> Result<TrainOutcome>
where
    F: FnMut(&EpochSummary, &BilstmParams) -> ControlFlow<()>,
{
    config.validate()?;
    let first = corpus.first().ok_or(Error::Empty("training corpus is empty"))?;
    let input_size = first.features.ncols();
    for s in corpus {
        if s.features.ncols() != input_size {
            return Err(Error::Dimension {
                what: "training feature width",
                expected: input_size,
                actual: s.features.ncols(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = BilstmParams::init(config.shape(input_size), &mut rng)?;
    let mut adam = AdamState::new(&params);
    let weights = config.class_weights();
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    let mut history = Vec::with_capacity(config.max_epochs);
    let mut grads = params.zeros_like();

    for epoch in 1..=config.max_epochs {
        let adam_cfg = config.adam(epoch);
        order.shuffle(&mut rng);
        let (mut epoch_loss, mut epoch_frames, mut steps) = (0.0, 0usize, 0usize);
        let (mut batch_loss, mut batch_frames) = (0.0, 0usize);
        for (k, &idx) in order.iter().enumerate() {
            let seq = &corpus[idx];
            batch_loss += accumulate_sequence(
                &params,
                seq.features.view(),
                &seq.labels,
                weights,
                1.0,
                &mut grads,
            )?;
            batch_frames += seq.len();
            if batch_frames < config.batch_size && k + 1 < order.len() {
                continue;
            }
            let mean = batch_loss / batch_frames as f64;
            if !mean.is_finite() {
                return Err(Error::NonFiniteLoss {
                    loss: mean,
                    epoch,
                    batch: steps + 1,
                });
            }
            grads.scale(1.0 / batch_frames as f64);
            adam_step(&mut params, &grads, &mut adam, &adam_cfg);
            grads.scale(0.0);
            epoch_loss += batch_loss;
            epoch_frames += batch_frames;
            steps += 1;
            batch_loss = 0.0;
            batch_frames = 0;
        }
        if !params.is_finite() {
            return Err(Error::NonFiniteLoss {
                loss: f64::NAN,
                epoch,
                batch: steps,
            });
        }
        let summary = EpochSummary {
            epoch,
            loss: epoch_loss / epoch_frames as f64,
            learning_rate: adam_cfg.learning_rate,
            steps,
        };
        history.push(summary.loss);
        if monitor(&summary, &params).is_break() {
            break;
        }
    }
    Ok(TrainOutcome {
        params,
        history,
        adam,
    })
}
