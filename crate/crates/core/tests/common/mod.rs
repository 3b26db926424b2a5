//! Random fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use conseg::features::{Keypoint, KeypointFrame};
use conseg::metrics::{Aggregation, CsrReport};
use conseg::{LabeledSegment, Segment, VideoAnnotation};
use rand::Rng;

/// Frames covered by an inclusive segment.
pub fn frames(s: Segment) -> BTreeSet<u32> {
    (s.start()..=s.end()).collect()
}

/// |A ∩ B| / |A ∪ B| over frame sets.
pub fn jaccard(a: &BTreeSet<u32>, b: &BTreeSet<u32>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Matched (pred, gt) pairs at threshold `r`, counted by brute force over
/// frame sets, and the `max(n, m)` denominator.
pub fn csr_oracle(pred: &[Segment], gt: &[Segment], r: f64) -> (u64, u64) {
    let mut matched = 0;
    for &p in pred {
        for &g in gt {
            let (fp, fg) = (frames(p), frames(g));
            // IoU >= r  <=>  inter >= r * union, compared in exact integers when
            // r has two decimals
            let inter = fp.intersection(&fg).count() as u64;
            let union = fp.union(&fg).count() as u64;
            let r100 = (r * 100.0).round() as u64;
            if inter * 100 >= r100 * union {
                matched += 1;
            }
        }
    }
    (matched, pred.len().max(gt.len()) as u64)
}

pub fn random_segment(rng: &mut impl Rng, max_frame: u32) -> Segment {
    let a = rng.random_range(1..=max_frame);
    let b = rng.random_range(1..=max_frame);
    Segment::new(a.min(b), a.max(b)).unwrap()
}

/// Sorted, disjoint segments inside `1..=frame_count`.
pub fn random_segments(rng: &mut impl Rng, frame_count: u32, max_count: usize) -> Vec<Segment> {
    let mut cuts: BTreeSet<u32> = BTreeSet::new();
    let want = rng.random_range(0..=max_count) * 2;
    while cuts.len() < want.min(frame_count as usize) {
        cuts.insert(rng.random_range(1..=frame_count));
    }
    let cuts: Vec<u32> = cuts.into_iter().collect();
    cuts.chunks_exact(2)
        // pull the end in by one so consecutive segments never share a frame
        .map(|c| Segment::new(c[0], (c[1] - 1).max(c[0])).unwrap())
        .collect()
}

pub fn random_annotation(rng: &mut impl Rng, id: &str, labeled: bool) -> VideoAnnotation {
    let frame_count = rng.random_range(1..=400);
    let segments = random_segments(rng, frame_count, 6);
    if labeled {
        let labeled = segments
            .into_iter()
            .map(|s| LabeledSegment::new(s, rng.random_range(1..=249)).unwrap())
            .collect();
        VideoAnnotation::labeled(id, frame_count, labeled).unwrap()
    } else {
        VideoAnnotation::unlabeled(id, frame_count, segments).unwrap()
    }
}

pub fn random_keypoint_frames(rng: &mut impl Rng, count: usize) -> Vec<KeypointFrame> {
    (0..count)
        .map(|_| {
            let mut f = KeypointFrame::default();
            for k in f.keypoints.iter_mut() {
                let confidence = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(0.0..=1.0) };
                *k = Keypoint::new(rng.random_range(-50.0..400.0), rng.random_range(-50.0..300.0), confidence);
            }
            f
        })
        .collect()
}

/// A report whose scores already carry four decimals.
pub fn random_report(rng: &mut impl Rng) -> CsrReport {
    let count = rng.random_range(1..=9);
    let mut thresholds: Vec<f64> = (0..count).map(|_| f64::from(rng.random_range(1..=100u32)) / 100.0).collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    let four = |rng: &mut dyn rand::RngCore| f64::from(rng.random_range(0..=13_333u32)) / 10_000.0;
    let csr: Vec<f64> = thresholds.iter().map(|_| four(rng)).collect();
    let over_unity = thresholds.iter().zip(&csr).filter(|(_, &c)| c > 1.0).map(|(&t, _)| t).collect();
    CsrReport {
        csr,
        mji: rng.random_bool(0.5).then(|| f64::from(rng.random_range(0..=10_000u32)) / 10_000.0),
        recognition_rate: rng.random_bool(0.5).then(|| f64::from(rng.random_range(0..=10_000u32)) / 10_000.0),
        video_count: rng.random_range(0..100_000),
        aggregation: if rng.random_bool(0.5) { Aggregation::Micro } else { Aggregation::Macro },
        over_unity,
        thresholds,
    }
}

/// One random edit: delete, insert or replace a character, or truncate.
pub fn mutate(rng: &mut impl Rng, text: &str) -> String {
    const ALPHABET: &[char] = &[
        '0', '1', '5', '9', ',', ':', ' ', '\n', '-', '.', 'x', '#', '"', '{', '}', '[', 'e', '\t', 'é',
    ];
    let mut chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return ALPHABET[rng.random_range(0..ALPHABET.len())].to_string();
    }
    let at = rng.random_range(0..chars.len());
    match rng.random_range(0..4) {
        0 => {
            chars.remove(at);
        }
        1 => chars.insert(at, ALPHABET[rng.random_range(0..ALPHABET.len())]),
        2 => chars[at] = ALPHABET[rng.random_range(0..ALPHABET.len())],
        _ => chars.truncate(at),
    }
    chars.into_iter().collect()
}
