//! Frame intervals and per-video annotations.
//!
//! Frames are numbered from 1 and both ends of a [`Segment`] are inclusive,
//! matching the annotation files.

use std::fmt;

use crate::error::{Error, Result};

/// Largest class id in the 249-gesture vocabulary.
pub const GESTURE_VOCABULARY: u32 = 249;

/// An inclusive frame interval `[start, end]`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    start: u32,
    end: u32,
}

impl Segment {
    pub fn new(start: u32, end: u32) -> Result<Self> {
        if start == 0 {
            return Err(Error::InvalidSegment {
                start,
                end,
                reason: "frames are numbered from 1",
            });
        }
        if start > end {
            return Err(Error::InvalidSegment {
                start,
                end,
                reason: "start > end",
            });
        }
        Ok(Segment { start, end })
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn end(&self) -> u32 {
        self.end
    }

    /// Number of frames covered; at least 1.
    pub fn len(&self) -> u32 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Half-open form `[start, end + 1)`.
    pub fn half_open(&self) -> (u64, u64) {
        (u64::from(self.start), u64::from(self.end) + 1)
    }

    pub fn contains(&self, frame: u32) -> bool {
        self.start <= frame && frame <= self.end
    }

    pub fn overlaps(&self, other: &Segment) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Same interval moved by `offset` frames.
    pub fn shifted(&self, offset: i64) -> Result<Self> {
        let start = i64::from(self.start) + offset;
        let end = i64::from(self.end) + offset;
        let start = u32::try_from(start).map_err(|_| Error::InvalidSegment {
            start: 0,
            end: 0,
            reason: "shift leaves the frame range",
        })?;
        let end = u32::try_from(end).map_err(|_| Error::InvalidSegment {
            start,
            end: 0,
            reason: "shift leaves the frame range",
        })?;
        Segment::new(start, end)
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.start, self.end)
    }
}

/// A segment carrying a gesture class id (`>= 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LabeledSegment {
    pub segment: Segment,
    pub label: u32,
}

impl LabeledSegment {
    pub fn new(segment: Segment, label: u32) -> Result<Self> {
        if label == 0 {
            return Err(Error::InvalidSegment {
                start: segment.start,
                end: segment.end,
                reason: "gesture labels start at 1",
            });
        }
        Ok(LabeledSegment { segment, label })
    }
}

/// Ground truth or prediction for one video.
///
/// Segments are sorted, pairwise disjoint and end at or before `frame_count`.
/// Labels are either present for every segment or for none of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VideoAnnotation {
    video_id: String,
    frame_count: u32,
    segments: Vec<Segment>,
    labels: Option<Vec<u32>>,
}

impl VideoAnnotation {
    pub fn unlabeled(
        video_id: impl Into<String>,
        frame_count: u32,
        segments: Vec<Segment>,
    ) -> Result<Self> {
        let ann = VideoAnnotation {
            video_id: video_id.into(),
            frame_count,
            segments,
            labels: None,
        };
        ann.validate()?;
        Ok(ann)
    }

    pub fn labeled(
        video_id: impl Into<String>,
        frame_count: u32,
        segments: Vec<LabeledSegment>,
    ) -> Result<Self> {
        let (segs, labels): (Vec<Segment>, Vec<u32>) = segments.iter().map(|s| (s.segment, s.label)).unzip();
        let ann = VideoAnnotation {
            video_id: video_id.into(),
            frame_count,
            // a video without segments reads the same labeled or not
            labels: if segs.is_empty() { None } else { Some(labels) },
            segments: segs,
        };
        ann.validate()?;
        Ok(ann)
    }

    fn validate(&self) -> Result<()> {
        let fail = |reason: String| Error::InvalidAnnotation {
            video_id: self.video_id.clone(),
            reason,
        };
        if self.video_id.is_empty() || self.video_id.chars().any(char::is_whitespace) {
            return Err(fail("video id must be non-empty without whitespace".into()));
        }
        if self.frame_count == 0 {
            return Err(fail("frame count must be positive".into()));
        }
        for pair in self.segments.windows(2) {
            if pair[1].start <= pair[0].end {
                return Err(fail(format!(
                    "segment {} overlaps or precedes {}",
                    pair[1], pair[0]
                )));
            }
        }
        if let Some(last) = self.segments.last() {
            if last.end > self.frame_count {
                return Err(fail(format!(
                    "segment {} exceeds frame count {}",
                    last, self.frame_count
                )));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != self.segments.len() {
                return Err(fail("label count differs from segment count".into()));
            }
            if labels.contains(&0) {
                return Err(fail("gesture labels start at 1".into()));
            }
        }
        Ok(())
    }

    pub fn video_id(&self) -> &str {
        &self.video_id
    }

    pub fn frame_count(&self) -> u32 {
        self.frame_count
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn labels(&self) -> Option<&[u32]> {
        match &self.labels {
            Some(l) => Some(l),
            None if self.segments.is_empty() => Some(&[]),
            None => None,
        }
    }

    /// True when every segment carries a label; vacuously true without segments.
    pub fn is_labeled(&self) -> bool {
        self.labels().is_some()
    }

    /// Segments paired with their labels, if the annotation is labeled.
    pub fn labeled_segments(&self) -> Option<Vec<LabeledSegment>> {
        let labels = self.labels()?;
        Some(
            self.segments
                .iter()
                .zip(labels)
                .map(|(&segment, &label)| LabeledSegment { segment, label })
                .collect(),
        )
    }

    /// Rejects labels above `max_label`.
    pub fn check_vocabulary(&self, max_label: u32) -> Result<()> {
        match self.labels.iter().flatten().find(|&&l| l > max_label) {
            Some(l) => Err(Error::InvalidAnnotation {
                video_id: self.video_id.clone(),
                reason: format!("label {l} outside vocabulary 1..={max_label}"),
            }),
            None => Ok(()),
        }
    }
}
