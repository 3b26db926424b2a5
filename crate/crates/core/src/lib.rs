//! Temporal segmentation and scoring for continuous gesture streams.
//!
//! - [`metrics`]: segment IoU, corrected segmentation rate (CSR), mean
//!   Jaccard index (MJI) and recognition rate.
//! - [`features`]: centroid-removed keypoint features and boundary labels.
//! - [`bilstm`]: the Bi-LSTM boundary detector, from forward pass to training
//!   and segment extraction.
//! - [`synth`]: synthetic keypoint streams with exact gesture annotations.
//! - [`io`]: segment lists, keypoint CSVs, score reports and corpus folders.
//! - [`cli`]: the `conseg` command-line front end.

pub mod bilstm;
pub mod cli;
pub mod error;
pub mod features;
pub mod metrics;
pub mod segment;
pub mod io;
pub mod synth;

pub use error::{Error, Result};
pub use segment::{LabeledSegment, Segment, VideoAnnotation};
