//! Bidirectional LSTM boundary detector.
//!
//! Each of the stacked layers runs one LSTM forward in time and an
//! independently parameterized one backward in time, and feeds the
//! concatenated hidden states upward. A two-class linear head on the top
//! layer scores each frame as boundary / non-boundary; training minimizes a
//! class-weighted cross-entropy with Adam and exact BPTT gradients.

mod adam;
mod checkpoint;
mod decode;
mod loss;
mod network;
mod params;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use decode::predict_segments;
pub use loss::{boundary_probabilities, loss, loss_and_grad, softmax_rows, ClassWeights, POSITIVE_CLASS};
pub use network::{backward, bilstm_forward, forward_traced, lstm_cell_forward, ForwardTrace};
pub use params::{BilstmParams, DirectionParams, Gate, LstmLayerParams, NetworkShape, NUM_CLASSES};
pub use train::{
    feature_matrix, train, train_with_monitor, EpochSummary, TrainConfig, TrainOutcome,
    TrainingSequence,
};

use ndarray::ArrayView2;

use crate::error::Result;
use crate::segment::Segment;

/// A trained network plus its decoding settings.
#[derive(Debug, Clone)]
pub struct Segmenter {
    pub params: BilstmParams,
    pub threshold: f64,
    pub min_gesture_len: u32,
}

impl Segmenter {
    pub fn new(params: BilstmParams, config: &TrainConfig) -> Self {
        Segmenter {
            params,
            threshold: config.boundary_threshold,
            min_gesture_len: config.min_gesture_len,
        }
    }

    pub fn probabilities(&self, features: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        let logits = bilstm_forward(&self.params, features)?;
        Ok(boundary_probabilities(logits.view()))
    }

    pub fn segment(&self, features: ArrayView2<'_, f64>) -> Result<Vec<Segment>> {
        let probs = self.probabilities(features)?;
        Ok(predict_segments(&probs, self.threshold, self.min_gesture_len))
    }
}
