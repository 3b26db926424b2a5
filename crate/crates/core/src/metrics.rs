//! Segmentation and recognition scores.
//!
//! - [`iou`] / [`segment_match`]: temporal IoU of two frame intervals and the
//!   thresholded match test built on it.
//! - [`csr_video`] / [`csr_corpus`]: corrected segmentation rate, the number of
//!   matched (prediction, ground truth) pairs over `max(n, m)`.
//! - [`mji_video`] / [`mji_corpus`]: mean Jaccard index over gesture labels.
//! - [`recognition_rate`]: label accuracy for isolated gestures.
//!
//! The CSR pair count is the literal double sum over all pairs. There is no
//! one-to-one assignment, so for thresholds where one segment can match two
//! others the rate can exceed 1; [`CsrReport::over_unity`] records when it does.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::segment::{LabeledSegment, Segment};

/// The IoU thresholds swept by default: 0.5, 0.6, 0.7, 0.8, 0.9.
pub const DEFAULT_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

/// Temporal intersection-over-union.
///
/// Both segments are taken in half-open form `[start, end + 1)`, so the ratio
/// equals the Jaccard index of the two frame sets.
pub fn iou(a: Segment, b: Segment) -> f64 {
    let (a_s, a_e) = a.half_open();
    let (b_s, b_e) = b.half_open();
    let inter = a_e.min(b_e).saturating_sub(a_s.max(b_s));
    if inter == 0 {
        return 0.0;
    }
    let span = a_e.max(b_e) - a_s.min(b_s);
    inter as f64 / span as f64
}

fn check_threshold(r: f64) -> Result<()> {
    if r > 0.0 && r <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(r))
    }
}

/// `iou(a, b) >= r`.
pub fn segment_match(a: Segment, b: Segment, r: f64) -> Result<bool> {
    check_threshold(r)?;
    Ok(iou(a, b) >= r)
}

/// Numerator and denominator of one video's CSR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCount {
    pub matched_pairs: u64,
    pub denom: u64,
}

impl MatchCount {
    pub fn rate(&self) -> f64 {
        self.matched_pairs as f64 / self.denom as f64
    }
}

/// Counts matched pairs over every (prediction, ground truth) combination.
pub fn csr_video(pred: &[Segment], gt: &[Segment], r: f64) -> Result<MatchCount> {
    check_threshold(r)?;
    if gt.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    let matched_pairs = pred
        .iter()
        .map(|&p| gt.iter().filter(|&&g| iou(p, g) >= r).count() as u64)
        .sum();
    Ok(MatchCount {
        matched_pairs,
        denom: pred.len().max(gt.len()) as u64,
    })
}

/// How per-video CSR values are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// Sum of matched pairs over sum of denominators.
    #[default]
    Micro,
    /// Unweighted mean of per-video rates.
    Macro,
}

impl Aggregation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Aggregation::Micro => "micro",
            Aggregation::Macro => "macro",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "micro" => Ok(Aggregation::Micro),
            "macro" => Ok(Aggregation::Macro),
            other => Err(Error::Config(format!(
                "unknown aggregation `{other}` (expected micro or macro)"
            ))),
        }
    }
}

/// One video's prediction and ground truth.
#[derive(Debug, Clone, Copy)]
pub struct VideoPair<'a> {
    pub video_id: &'a str,
    pub pred: &'a [Segment],
    pub gt: &'a [Segment],
}

/// Corpus-level scores.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrReport {
    pub thresholds: Vec<f64>,
    /// CSR per threshold, parallel to `thresholds`.
    pub csr: Vec<f64>,
    pub mji: Option<f64>,
    pub recognition_rate: Option<f64>,
    pub video_count: usize,
    pub aggregation: Aggregation,
    /// Thresholds at which the CSR came out above 1.
    pub over_unity: Vec<f64>,
}

impl CsrReport {
    pub fn csr_at(&self, threshold: f64) -> Option<f64> {
        self.thresholds
            .iter()
            .position(|&t| t == threshold)
            .map(|i| self.csr[i])
    }

    pub fn csr_map(&self) -> BTreeMap<String, f64> {
        self.thresholds
            .iter()
            .zip(&self.csr)
            .map(|(t, c)| (format_threshold(*t), *c))
            .collect()
    }
}

/// Shortest decimal spelling of a threshold, e.g. `0.5`.
pub fn format_threshold(t: f64) -> String {
    let s = format!("{t}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}

/// CSR for every threshold over a corpus.
pub fn csr_corpus(
    videos: &[VideoPair<'_>],
    thresholds: &[f64],
    mode: Aggregation,
) -> Result<CsrReport> {
    let counts = videos
        .iter()
        .map(|v| video_counts(v, thresholds))
        .collect::<Result<Vec<_>>>()?;
    aggregate(counts, thresholds, mode)
}

/// [`csr_corpus`] with per-video counting spread over `threads` workers.
///
/// Counts are reduced in video order, so the result does not depend on the
/// worker count.
pub fn csr_corpus_parallel(
    videos: &[VideoPair<'_>],
    thresholds: &[f64],
    mode: Aggregation,
    threads: usize,
) -> Result<CsrReport> {
    let threads = threads.max(1).min(videos.len().max(1));
    if threads == 1 {
        return csr_corpus(videos, thresholds, mode);
    }
    let chunk = videos.len().div_ceil(threads);
    let per_chunk: Vec<Result<Vec<Vec<MatchCount>>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = videos
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|v| video_counts(v, thresholds))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scoring worker panicked"))
            .collect()
    });
    let mut counts = Vec::with_capacity(videos.len());
    for part in per_chunk {
        counts.extend(part?);
    }
    aggregate(counts, thresholds, mode)
}

fn video_counts(video: &VideoPair<'_>, thresholds: &[f64]) -> Result<Vec<MatchCount>> {
    thresholds
        .iter()
        .map(|&r| csr_video(video.pred, video.gt, r))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.in_video(video.video_id))
}

fn aggregate(
    counts: Vec<Vec<MatchCount>>,
    thresholds: &[f64],
    mode: Aggregation,
) -> Result<CsrReport> {
    if counts.is_empty() {
        return Err(Error::Empty("corpus has no videos"));
    }
    if thresholds.is_empty() {
        return Err(Error::Empty("no IoU thresholds"));
    }
    let n = counts.len();
    let csr: Vec<f64> = (0..thresholds.len())
        .map(|k| match mode {
            Aggregation::Micro => {
                let (m, d) = counts.iter().fold((0u64, 0u64), |(m, d), c| {
                    (m + c[k].matched_pairs, d + c[k].denom)
                });
                m as f64 / d as f64
            }
            Aggregation::Macro => counts.iter().map(|c| c[k].rate()).sum::<f64>() / n as f64,
        })
        .collect();
    let over_unity = thresholds
        .iter()
        .zip(&csr)
        .filter(|(_, &c)| c > 1.0)
        .map(|(&t, _)| t)
        .collect();
    Ok(CsrReport {
        thresholds: thresholds.to_vec(),
        csr,
        mji: None,
        recognition_rate: None,
        video_count: n,
        aggregation: mode,
        over_unity,
    })
}

/// Mean over labels of the per-label frame-set Jaccard index.
///
/// Labels present in either list are averaged. Two empty lists score 1.
pub fn mji_video(pred: &[LabeledSegment], gt: &[LabeledSegment], frame_count: u32) -> Result<f64> {
    for s in pred.iter().chain(gt) {
        if s.segment.end() > frame_count {
            return Err(Error::InvalidSegment {
                start: s.segment.start(),
                end: s.segment.end(),
                reason: "segment exceeds frame count",
            });
        }
    }
    let mut labels: Vec<u32> = pred.iter().chain(gt).map(|s| s.label).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.is_empty() {
        return Ok(1.0);
    }
    let total: f64 = labels
        .iter()
        .map(|&label| {
            let a = label_mask(gt, label, frame_count);
            let b = label_mask(pred, label, frame_count);
            let (inter, union) = a.iter().zip(&b).fold((0u32, 0u32), |(i, u), (&x, &y)| {
                (i + u32::from(x && y), u + u32::from(x || y))
            });
            f64::from(inter) / f64::from(union)
        })
        .sum();
    Ok(total / labels.len() as f64)
}

fn label_mask(segments: &[LabeledSegment], label: u32, frame_count: u32) -> Vec<bool> {
    let mut mask = vec![false; frame_count as usize];
    for s in segments.iter().filter(|s| s.label == label) {
        let lo = s.segment.start() as usize - 1;
        let hi = s.segment.end() as usize;
        mask[lo..hi].fill(true);
    }
    mask
}

/// One video's labeled prediction, ground truth and length.
#[derive(Debug, Clone, Copy)]
pub struct LabeledVideo<'a> {
    pub video_id: &'a str,
    pub pred: &'a [LabeledSegment],
    pub gt: &'a [LabeledSegment],
    pub frame_count: u32,
}

/// Unweighted mean of [`mji_video`] over videos.
pub fn mji_corpus(videos: &[LabeledVideo<'_>]) -> Result<f64> {
    if videos.is_empty() {
        return Err(Error::Empty("corpus has no videos"));
    }
    let mut total = 0.0;
    for v in videos {
        total += mji_video(v.pred, v.gt, v.frame_count).map_err(|e| e.in_video(v.video_id))?;
    }
    Ok(total / videos.len() as f64)
}

/// Fraction of positions where the labels agree.
pub fn recognition_rate(pred_labels: &[u32], gt_labels: &[u32]) -> Result<f64> {
    if pred_labels.len() != gt_labels.len() {
        return Err(Error::LengthMismatch {
            what: "predicted vs ground-truth labels",
            left: pred_labels.len(),
            right: gt_labels.len(),
        });
    }
    if gt_labels.is_empty() {
        return Err(Error::Empty("no labels to compare"));
    }
    let hits = pred_labels
        .iter()
        .zip(gt_labels)
        .filter(|(p, g)| p == g)
        .count();
    Ok(hits as f64 / gt_labels.len() as f64)
}
