//! Pose keypoints to per-frame feature vectors, and per-frame training labels.
//!
//! A frame carries 60 keypoints: 18 body joints followed by 21 left-hand and
//! 21 right-hand joints. The feature vector subtracts the centroid of the
//! detected keypoints from every detected keypoint; undetected keypoints sit
//! at the centroid, i.e. contribute `(0, 0)`. No scale normalization is done.

use crate::error::{Error, Result};
use crate::segment::VideoAnnotation;

pub const BODY_KEYPOINTS: usize = 18;
pub const HAND_KEYPOINTS: usize = 21;
pub const NUM_KEYPOINTS: usize = BODY_KEYPOINTS + 2 * HAND_KEYPOINTS;
pub const FEATURE_DIM: usize = 2 * NUM_KEYPOINTS;

/// Index of the first left-hand keypoint.
pub const LEFT_HAND_OFFSET: usize = BODY_KEYPOINTS;
/// Index of the first right-hand keypoint.
pub const RIGHT_HAND_OFFSET: usize = BODY_KEYPOINTS + HAND_KEYPOINTS;

/// Pixel coordinates plus detector confidence; `confidence > 0` means detected.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        Keypoint { x, y, confidence }
    }

    pub fn is_detected(&self) -> bool {
        self.confidence > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KeypointFrame {
    pub keypoints: [Keypoint; NUM_KEYPOINTS],
}

impl Default for KeypointFrame {
    fn default() -> Self {
        KeypointFrame {
            keypoints: [Keypoint::default(); NUM_KEYPOINTS],
        }
    }
}

impl KeypointFrame {
    pub fn detected_count(&self) -> usize {
        self.keypoints.iter().filter(|k| k.is_detected()).count()
    }
}

/// `(x'_1, y'_1, ..., x'_60, y'_60)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl Default for FeatureVector {
    fn default() -> Self {
        FeatureVector([0.0; FEATURE_DIM])
    }
}

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Centroid-removed coordinates of one frame.
pub fn featurize_frame(frame: &KeypointFrame) -> Result<FeatureVector> {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
    for k in frame.keypoints.iter().filter(|k| k.is_detected()) {
        sx += k.x;
        sy += k.y;
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoDetectedKeypoints);
    }
    let (cx, cy) = (sx / n as f64, sy / n as f64);
    let mut out = FeatureVector::default();
    for (slot, k) in out.0.chunks_exact_mut(2).zip(&frame.keypoints) {
        if k.is_detected() {
            slot[0] = k.x - cx;
            slot[1] = k.y - cy;
        }
    }
    Ok(out)
}

/// What to do with frames in which nothing was detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    /// Repeat the previous vector (zeros at the start of the stream).
    #[default]
    Hold,
    /// Remove the frame.
    Drop,
}

impl std::str::FromStr for GapPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hold" => Ok(GapPolicy::Hold),
            "drop" => Ok(GapPolicy::Drop),
            other => Err(Error::Config(format!(
                "unknown gap policy `{other}` (expected hold or drop)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub vectors: Vec<FeatureVector>,
    /// 0-based source frame of each vector.
    pub source_frames: Vec<usize>,
}

impl FeatureSequence {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Output position of a 0-based source frame, if it was kept.
    pub fn output_index(&self, source_frame: usize) -> Option<usize> {
        self.source_frames.binary_search(&source_frame).ok()
    }
}

pub fn featurize_sequence(frames: &[KeypointFrame], policy: GapPolicy) -> Result<FeatureSequence> {
    if frames.is_empty() {
        return Err(Error::Empty("keypoint stream has no frames"));
    }
    let mut vectors = Vec::with_capacity(frames.len());
    let mut source_frames = Vec::with_capacity(frames.len());
    for (i, frame) in frames.iter().enumerate() {
        match (featurize_frame(frame), policy) {
            (Ok(v), _) => {
                vectors.push(v);
                source_frames.push(i);
            }
            (Err(Error::NoDetectedKeypoints), GapPolicy::Hold) => {
                vectors.push(vectors.last().copied().unwrap_or_default());
                source_frames.push(i);
            }
            (Err(Error::NoDetectedKeypoints), GapPolicy::Drop) => {}
            (Err(e), _) => return Err(e),
        }
    }
    if vectors.is_empty() {
        return Err(Error::NoDetectedKeypoints);
    }
    Ok(FeatureSequence {
        vectors,
        source_frames,
    })
}

/// Which frames count as positives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelingMode {
    /// Start and end frames of each gesture, dilated by `w` frames.
    #[default]
    Boundary,
    /// Every frame inside a gesture.
    InSegment,
}

/// Per-frame boundary indicator `g_t`, indexed from frame 1 at position 0.
pub fn boundary_labels(ann: &VideoAnnotation, dilation_w: u32) -> Vec<u8> {
    labels_with_mode(ann, dilation_w, LabelingMode::Boundary)
}

pub fn labels_with_mode(ann: &VideoAnnotation, dilation_w: u32, mode: LabelingMode) -> Vec<u8> {
    let n = ann.frame_count() as usize;
    let mut labels = vec![0u8; n];
    let mut mark = |frame: u32| {
        let lo = frame.saturating_sub(dilation_w).max(1) as usize;
        let hi = (frame as usize + dilation_w as usize).min(n);
        labels[lo - 1..hi].fill(1);
    };
    for s in ann.segments() {
        match mode {
            LabelingMode::Boundary => {
                mark(s.start());
                mark(s.end());
            }
            LabelingMode::InSegment => {
                for f in s.start()..=s.end() {
                    mark(f);
                }
            }
        }
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segment::Segment;
    use proptest::prelude::*;

    fn positives(labels: &[u8]) -> Vec<usize> {
        labels
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == 1)
            .map(|(i, _)| i + 1)
            .collect()
    }

    #[test]
    fn two_detected_keypoints() {
        let mut frame = KeypointFrame::default();
        frame.keypoints[3] = Keypoint::new(10.0, 20.0, 1.0);
        frame.keypoints[40] = Keypoint::new(30.0, 40.0, 0.3);
        let v = featurize_frame(&frame).unwrap();
        assert_eq!(&v.0[6..8], &[-10.0, -10.0]);
        assert_eq!(&v.0[80..82], &[10.0, 10.0]);
        let nonzero = v.0.iter().filter(|x| **x != 0.0).count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn coincident_points_and_empty_frame() {
        let frame = KeypointFrame {
            keypoints: [Keypoint::new(17.5, 3.25, 1.0); NUM_KEYPOINTS],
        };
        assert!(featurize_frame(&frame).unwrap().0.iter().all(|x| *x == 0.0));
        assert!(matches!(
            featurize_frame(&KeypointFrame::default()),
            Err(Error::NoDetectedKeypoints)
        ));
    }

    fn single(x: f64) -> KeypointFrame {
        let mut f = KeypointFrame::default();
        f.keypoints[0] = Keypoint::new(x, 0.0, 1.0);
        f.keypoints[1] = Keypoint::new(0.0, 0.0, 1.0);
        f
    }

    #[test]
    fn gap_policies() {
        let frames = [single(2.0), KeypointFrame::default(), single(6.0)];
        let hold = featurize_sequence(&frames, GapPolicy::Hold).unwrap();
        assert_eq!(hold.len(), 3);
        assert_eq!(hold.vectors[1], hold.vectors[0]);
        assert_eq!(hold.source_frames, vec![0, 1, 2]);

        let drop = featurize_sequence(&frames, GapPolicy::Drop).unwrap();
        assert_eq!(drop.len(), 2);
        assert_eq!(drop.output_index(0), Some(0));
        assert_eq!(drop.output_index(1), None);
        assert_eq!(drop.output_index(2), Some(1));

        let leading = [KeypointFrame::default(), single(2.0)];
        let hold = featurize_sequence(&leading, GapPolicy::Hold).unwrap();
        assert_eq!(hold.vectors[0], FeatureVector::default());

        let empty = [KeypointFrame::default(), KeypointFrame::default()];
        assert!(featurize_sequence(&empty, GapPolicy::Drop).is_err());
        assert_eq!(featurize_sequence(&empty, GapPolicy::Hold).unwrap().len(), 2);
        assert!(featurize_sequence(&[], GapPolicy::Hold).is_err());
    }

    fn ann(segs: &[(u32, u32)], frames: u32) -> VideoAnnotation {
        let segs = segs.iter().map(|&(s, e)| Segment::new(s, e).unwrap()).collect();
        VideoAnnotation::unlabeled("v", frames, segs).unwrap()
    }

    #[test]
    fn boundary_label_examples() {
        let a = ann(&[(10, 20)], 30);
        assert_eq!(positives(&boundary_labels(&a, 0)), vec![10, 20]);
        assert_eq!(positives(&boundary_labels(&a, 1)), vec![9, 10, 11, 19, 20, 21]);
        assert!(boundary_labels(&ann(&[], 30), 1).iter().all(|&g| g == 0));
        // clipped at both ends of the stream
        let a = ann(&[(1, 30)], 30);
        assert_eq!(positives(&boundary_labels(&a, 2)), vec![1, 2, 3, 28, 29, 30]);
        assert_eq!(positives(&boundary_labels(&ann(&[(5, 5)], 9), 0)), vec![5]);
        let inside = labels_with_mode(&ann(&[(3, 5)], 8), 0, LabelingMode::InSegment);
        assert_eq!(positives(&inside), vec![3, 4, 5]);
    }

    fn arb_frame() -> impl Strategy<Value = KeypointFrame> {
        prop::collection::vec((0.0..320.0f64, 0.0..240.0f64, prop::bool::weighted(0.8)), 60)
            .prop_filter("needs a detection", |ks| ks.iter().any(|k| k.2))
            .prop_map(|ks| {
                let mut f = KeypointFrame::default();
                for (slot, (x, y, det)) in f.keypoints.iter_mut().zip(ks) {
                    *slot = Keypoint::new(x, y, if det { 0.9 } else { 0.0 });
                }
                f
            })
    }

    proptest! {
        #[test]
        fn centroid_is_removed(frame in arb_frame()) {
            let v = featurize_frame(&frame).unwrap();
            let (sx, sy) = v.0.chunks_exact(2).fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
            prop_assert!(sx.abs() < 1e-9 && sy.abs() < 1e-9);
        }

        #[test]
        fn translation_invariant(frame in arb_frame(), dx in -500.0..500.0f64, dy in -500.0..500.0f64) {
            let mut moved = frame.clone();
            for k in moved.keypoints.iter_mut() {
                k.x += dx;
                k.y += dy;
            }
            let a = featurize_frame(&frame).unwrap();
            let b = featurize_frame(&moved).unwrap();
            for (x, y) in a.0.iter().zip(&b.0) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn strict_boundaries_give_two_per_gesture(lens in prop::collection::vec((1u32..5, 1u32..30), 0..6)) {
            let mut segs = Vec::new();
            let mut cursor = 0;
            for (gap, len) in lens {
                let s = cursor + gap + 1;
                segs.push((s, s + len - 1));
                cursor = s + len - 1;
            }
            let a = ann(&segs, cursor.max(1) + 3);
            let expected: usize = segs.iter().map(|&(s, e)| if s == e { 1 } else { 2 }).sum();
            prop_assert_eq!(positives(&boundary_labels(&a, 0)).len(), expected);
            // every positive is within w of a boundary
            let w = 2u32;
            for f in positives(&boundary_labels(&a, w)) {
                let f = f as i64;
                prop_assert!(segs.iter().any(|&(s, e)| (f - s as i64).abs() <= w as i64 || (f - e as i64).abs() <= w as i64));
            }
        }
    }
}
