//! Synthetic keypoint streams with exact gesture annotations.
//!
//! A video alternates rest phases (a hands-down pose plus Gaussian jitter)
//! with gestures in which one or both hands rise, sway sideways and come back
//! down. Coordinates live in a 320×240 pixel frame. Every random draw comes
//! from a ChaCha stream selected by the corpus seed and the video index, so
//! videos can be generated independently and in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{
    Keypoint, KeypointFrame, BODY_KEYPOINTS, HAND_KEYPOINTS, LEFT_HAND_OFFSET, NUM_KEYPOINTS,
    RIGHT_HAND_OFFSET,
};
use crate::segment::{LabeledSegment, Segment, VideoAnnotation, GESTURE_VOCABULARY};

pub const FRAME_WIDTH: f64 = 320.0;
pub const FRAME_HEIGHT: f64 = 240.0;

/// Body joints in the 18-point pose layout, upright and hands down.
const BODY_REST: [(f64, f64); BODY_KEYPOINTS] = [
    (160.0, 60.0),  // nose
    (160.0, 85.0),  // neck
    (135.0, 88.0),  // right shoulder
    (128.0, 125.0), // right elbow
    (125.0, 160.0), // right wrist
    (185.0, 88.0),  // left shoulder
    (192.0, 125.0), // left elbow
    (195.0, 160.0), // left wrist
    (145.0, 165.0), // right hip
    (145.0, 200.0), // right knee
    (145.0, 232.0), // right ankle
    (175.0, 165.0), // left hip
    (175.0, 200.0), // left knee
    (175.0, 232.0), // left ankle
    (154.0, 55.0),  // right eye
    (166.0, 55.0),  // left eye
    (148.0, 58.0),  // right ear
    (172.0, 58.0),  // left ear
];
const RIGHT_ELBOW: usize = 3;
const RIGHT_WRIST: usize = 4;
const LEFT_ELBOW: usize = 6;
const LEFT_WRIST: usize = 7;

/// Fraction of a gesture spent raising (and again lowering) the hands.
const RAMP: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub num_videos: usize,
    /// Inclusive range.
    pub gestures_per_video: [u32; 2],
    /// Inclusive range, frames.
    pub gesture_length: [u32; 2],
    /// Inclusive range, frames; also used before the first gesture.
    pub gap_length: [u32; 2],
    /// Standard deviation of per-coordinate jitter, pixels.
    pub rest_noise_sigma: f64,
    /// Mean lift of an active hand over a gesture, pixels.
    pub motion_amplitude: f64,
    pub keypoint_dropout: f64,
    /// Gesture ids are drawn from `1..=num_labels`.
    pub num_labels: u32,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_videos: 250,
            gestures_per_video: [2, 6],
            gesture_length: [30, 60],
            gap_length: [70, 150],
            rest_noise_sigma: 1.5,
            motion_amplitude: 50.0,
            keypoint_dropout: 0.02,
            num_labels: GESTURE_VOCABULARY,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, [lo, hi]) in [
            ("gestures_per_video", self.gestures_per_video),
            ("gesture_length", self.gesture_length),
            ("gap_length", self.gap_length),
        ] {
            if lo > hi {
                return bad(format!("{name} range [{lo}, {hi}] is empty"));
            }
            if lo == 0 {
                return bad(format!(
                    "{name} must be at least 1: every video needs one gesture and one gap"
                ));
            }
        }
        if self.num_videos == 0 {
            return bad("num_videos must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.keypoint_dropout) {
            return bad("keypoint_dropout must lie in [0, 1]".into());
        }
        if !(self.rest_noise_sigma >= 0.0 && self.rest_noise_sigma.is_finite()) {
            return bad("rest_noise_sigma must be a non-negative number".into());
        }
        if !(self.motion_amplitude > 0.0 && self.motion_amplitude < 120.0) {
            return bad("motion_amplitude must lie in (0, 120) pixels".into());
        }
        if self.num_labels == 0 {
            return bad("num_labels must be positive".into());
        }
        Ok(())
    }
}

/// One generated video.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthVideo {
    pub frames: Vec<KeypointFrame>,
    pub annotation: VideoAnnotation,
}

pub fn video_id(index: usize) -> String {
    format!("v{index:05}")
}

pub fn generate_corpus(config: &SynthConfig) -> Result<Vec<SynthVideo>> {
    config.validate()?;
    (0..config.num_videos)
        .map(|i| generate_video(config, i))
        .collect()
}

/// Resting pose: 60 `(x, y)` positions.
pub fn rest_pose() -> [(f64, f64); NUM_KEYPOINTS] {
    let mut pose = [(0.0, 0.0); NUM_KEYPOINTS];
    pose[..BODY_KEYPOINTS].copy_from_slice(&BODY_REST);
    for (offset, wrist, mirror) in [
        (LEFT_HAND_OFFSET, LEFT_WRIST, 1.0),
        (RIGHT_HAND_OFFSET, RIGHT_WRIST, -1.0),
    ] {
        let (wx, wy) = BODY_REST[wrist];
        for (k, slot) in pose[offset..offset + HAND_KEYPOINTS].iter_mut().enumerate() {
            *slot = if k == 0 {
                (wx, wy)
            } else {
                // five fingers of four joints each, pointing down
                let finger = ((k - 1) / 4) as f64;
                let joint = ((k - 1) % 4 + 1) as f64;
                (wx + mirror * (finger - 2.0) * 3.0, wy + 4.0 + joint * 3.5)
            };
        }
    }
    pose
}

/// Lift profile over a gesture at relative time `u ∈ (0, 1)`, peak 1.
fn lift_shape(u: f64) -> f64 {
    let ease = |v: f64| 0.5 * (1.0 - (std::f64::consts::PI * v).cos());
    if u < RAMP {
        ease(u / RAMP)
    } else if u > 1.0 - RAMP {
        ease((1.0 - u) / RAMP)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy)]
struct HandMotion {
    left: bool,
    right: bool,
    sway_cycles: f64,
    sway_amplitude: f64,
}

struct Plan {
    frame_count: u32,
    gestures: Vec<(Segment, u32, HandMotion)>,
}

fn plan_video(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Plan> {
    let range = |rng: &mut ChaCha8Rng, [lo, hi]: [u32; 2]| rng.random_range(lo..=hi);
    let count = range(rng, config.gestures_per_video);
    let mut cursor = range(rng, config.gap_length);
    let mut gestures = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let len = range(rng, config.gesture_length);
        let segment = Segment::new(cursor + 1, cursor + len)?;
        let label = rng.random_range(1..=config.num_labels);
        let hands = rng.random_range(0..10);
        let motion = HandMotion {
            right: hands < 8,
            left: hands >= 5,
            sway_cycles: f64::from(rng.random_range(1u32..=3)),
            sway_amplitude: rng.random_range(0.1..0.4) * config.motion_amplitude,
        };
        gestures.push((segment, label, motion));
        cursor += len + range(rng, config.gap_length);
    }
    Ok(Plan {
        frame_count: cursor,
        gestures,
    })
}

/// Video `index` of the corpus described by `config`.
pub fn generate_video(config: &SynthConfig, index: usize) -> Result<SynthVideo> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let plan = plan_video(config, &mut rng)?;
    let jitter = Normal::new(0.0, config.rest_noise_sigma)
        .map_err(|e| Error::Config(format!("rest_noise_sigma: {e}")))?;
    let base = rest_pose();
    let (ox, oy) = (rng.random_range(-20.0..20.0), rng.random_range(-8.0..8.0));
    // mean of the lift profile, so that the average lift equals the amplitude
    let shape_mean = 1.0 - RAMP;
    let peak = config.motion_amplitude / shape_mean;

    let mut frames = Vec::with_capacity(plan.frame_count as usize);
    let mut next = 0;
    for frame in 1..=plan.frame_count {
        while next < plan.gestures.len() && plan.gestures[next].0.end() < frame {
            next += 1;
        }
        let active = plan
            .gestures
            .get(next)
            .filter(|(s, _, _)| s.contains(frame));
        let mut pose = base;
        if let Some((seg, _, motion)) = active {
            let u = (f64::from(frame - seg.start()) + 0.5) / f64::from(seg.len());
            let lift = peak * lift_shape(u);
            let sway = motion.sway_amplitude
                * lift_shape(u)
                * (2.0 * std::f64::consts::PI * motion.sway_cycles * u).sin();
            let mut move_hand = |offset: usize, wrist: usize, elbow: usize, dir: f64| {
                for k in (offset..offset + HAND_KEYPOINTS).chain([wrist]) {
                    pose[k].0 += dir * sway;
                    pose[k].1 -= lift;
                }
                pose[elbow].0 += 0.5 * dir * sway;
                pose[elbow].1 -= 0.5 * lift;
            };
            if motion.left {
                move_hand(LEFT_HAND_OFFSET, LEFT_WRIST, LEFT_ELBOW, 1.0);
            }
            if motion.right {
                move_hand(RIGHT_HAND_OFFSET, RIGHT_WRIST, RIGHT_ELBOW, -1.0);
            }
        }
        let mut kf = KeypointFrame::default();
        for (slot, (x, y)) in kf.keypoints.iter_mut().zip(pose) {
            let x = x + ox + jitter.sample(&mut rng);
            let y = y + oy + jitter.sample(&mut rng);
            let dropped = rng.random_bool(config.keypoint_dropout);
            let confidence = rng.random_range(0.6..1.0);
            *slot = Keypoint::new(x, y, if dropped { 0.0 } else { confidence });
        }
        frames.push(kf);
    }

    let segments = plan
        .gestures
        .iter()
        .map(|&(s, l, _)| LabeledSegment::new(s, l))
        .collect::<Result<Vec<_>>>()?;
    let annotation = VideoAnnotation::labeled(video_id(index), plan.frame_count, segments)?;
    Ok(SynthVideo { frames, annotation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::boundary_labels;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            num_videos: 3,
            seed,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_corpus(&small(7)).unwrap();
        let b = generate_corpus(&small(7)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_corpus(&small(8)).unwrap());
        // videos do not depend on corpus size
        assert_eq!(generate_video(&small(7), 2).unwrap(), a[2]);
    }

    #[test]
    fn fixed_gesture_count_and_no_dropout() {
        let cfg = SynthConfig {
            gestures_per_video: [2, 2],
            keypoint_dropout: 0.0,
            num_videos: 5,
            ..SynthConfig::default()
        };
        for v in generate_corpus(&cfg).unwrap() {
            assert_eq!(v.annotation.segments().len(), 2);
            assert_eq!(v.frames.len(), v.annotation.frame_count() as usize);
            assert!(v.frames.iter().all(|f| f.detected_count() == NUM_KEYPOINTS));
        }
    }

    #[test]
    fn labels_within_range() {
        let cfg = SynthConfig { num_labels: 3, num_videos: 4, ..SynthConfig::default() };
        for v in generate_corpus(&cfg).unwrap() {
            assert!(v.annotation.labels().unwrap().iter().all(|l| (1..=3).contains(l)));
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let base = SynthConfig::default();
        for cfg in [
            SynthConfig { gap_length: [0, 10], ..base.clone() },
            SynthConfig { gesture_length: [0, 10], ..base.clone() },
            SynthConfig { gestures_per_video: [3, 2], ..base.clone() },
            SynthConfig { keypoint_dropout: 1.5, ..base.clone() },
            SynthConfig { rest_noise_sigma: -1.0, ..base.clone() },
            SynthConfig { num_videos: 0, ..base.clone() },
        ] {
            assert!(generate_corpus(&cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn default_positive_ratio_is_near_one_to_forty() {
        let cfg = SynthConfig { num_videos: 100, seed: 3, ..SynthConfig::default() };
        let (mut pos, mut neg) = (0usize, 0usize);
        for v in generate_corpus(&cfg).unwrap() {
            let g = boundary_labels(&v.annotation, 1);
            let p = g.iter().filter(|&&x| x == 1).count();
            pos += p;
            neg += g.len() - p;
        }
        let ratio = neg as f64 / pos as f64;
        assert!((20.0..=80.0).contains(&ratio), "1:{ratio}");
    }

    #[test]
    fn hands_rise_during_gestures() {
        let cfg = SynthConfig { num_videos: 10, seed: 5, ..SynthConfig::default() };
        let sigma = cfg.rest_noise_sigma;
        for v in generate_corpus(&cfg).unwrap() {
            let mean_y = |frames: &mut dyn Iterator<Item = &KeypointFrame>, offset: usize| {
                let (mut s, mut n) = (0.0, 0usize);
                for f in frames {
                    for k in &f.keypoints[offset..offset + HAND_KEYPOINTS] {
                        if k.is_detected() {
                            s += k.y;
                            n += 1;
                        }
                    }
                }
                s / n as f64
            };
            let segs = v.annotation.segments();
            for s in segs {
                let frames = &v.frames[s.start() as usize - 1..s.end() as usize];
                let rest_l = mean_y(&mut v.frames.iter().take(segs[0].start() as usize - 1), LEFT_HAND_OFFSET);
                let rest_r = mean_y(&mut v.frames.iter().take(segs[0].start() as usize - 1), RIGHT_HAND_OFFSET);
                let lift_l = rest_l - mean_y(&mut frames.iter(), LEFT_HAND_OFFSET);
                let lift_r = rest_r - mean_y(&mut frames.iter(), RIGHT_HAND_OFFSET);
                let lift = lift_l.max(lift_r);
                assert!(lift >= cfg.motion_amplitude - 3.0 * sigma, "lift {lift}");
            }
        }
    }
}
