use crate::segment::Segment;

/// Turns per-frame boundary probabilities into gesture segments.
///
/// Frames with `p > threshold` are candidates. Each run of consecutive
/// candidates becomes one boundary event at its most probable frame (the
/// earliest on ties). Events are paired left to right as (start, end); an
/// unpaired final event is closed at the last frame. Segments shorter than
/// `min_gesture_len` frames are dropped.
pub fn predict_segments(probs: &[f64], threshold: f64, min_gesture_len: u32) -> Vec<Segment> {
    let mut events = Vec::new();
    let mut run: Option<(usize, f64)> = None;
    for (t, &p) in probs.iter().enumerate() {
        if p > threshold {
            run = match run {
                Some((best, bp)) if bp >= p => Some((best, bp)),
                _ => Some((t, p)),
            };
        } else if let Some((best, _)) = run.take() {
            events.push(best);
        }
    }
    if let Some((best, _)) = run {
        events.push(best);
    }
    if events.len() % 2 == 1 {
        events.push(probs.len() - 1);
    }
    events
        .chunks_exact(2)
        .filter_map(|pair| {
            let seg = Segment::new(pair[0] as u32 + 1, pair[1] as u32 + 1).ok()?;
            (seg.len() >= min_gesture_len).then_some(seg)
        })
        .collect()
}
