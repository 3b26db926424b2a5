//! Turns keypoint frames into centroid-relative feature vectors and shows
//! how the two gap policies treat a frame with no detections.

use conseg::features::{featurize_frame, featurize_sequence, GapPolicy, KeypointFrame};
use conseg::synth::{generate_video, SynthConfig};

fn main() -> conseg::Result<()> {
    let config = SynthConfig { keypoint_dropout: 0.0, ..SynthConfig::default() };
    let mut frames = generate_video(&config, 0)?.frames;
    frames.truncate(6);

    let v = featurize_frame(&frames[0])?;
    let (sx, sy) = v.0.chunks(2).fold((0.0, 0.0), |(x, y), p| (x + p[0], y + p[1]));
    println!("frame 1: first keypoint at {:?}, offsets sum to ({sx:.1e}, {sy:.1e})", &v.0[..2]);

    // a frame where the pose estimator found nothing
    frames[3] = KeypointFrame::default();
    for policy in [GapPolicy::Hold, GapPolicy::Drop] {
        let seq = featurize_sequence(&frames, policy)?;
        let sources: Vec<usize> = seq.source_frames.iter().map(|f| f + 1).collect();
        println!("{policy:?}: {} vectors from frames {sources:?}", seq.len());
    }
    Ok(())
}
