//! Scores a predicted segmentation against ground truth: IoU per pair, CSR
//! over a threshold sweep, and the mean Jaccard index.

use conseg::metrics::{csr_corpus, iou, mji_video, Aggregation, VideoPair, DEFAULT_THRESHOLDS};
use conseg::{LabeledSegment, Segment};

fn seg(start: u32, end: u32) -> Segment {
    Segment::new(start, end).unwrap()
}

fn main() -> conseg::Result<()> {
    let gt = [seg(1, 30), seg(41, 80), seg(95, 110)];
    let pred = [seg(3, 31), seg(44, 70), seg(96, 119)];

    for (p, g) in pred.iter().zip(&gt) {
        println!("{p} vs {g}: IoU {:.3}", iou(*p, *g));
    }

    let videos = [VideoPair { video_id: "demo", pred: &pred, gt: &gt }];
    let report = csr_corpus(&videos, &DEFAULT_THRESHOLDS, Aggregation::Micro)?;
    for (t, c) in report.thresholds.iter().zip(&report.csr) {
        println!("CSR@{t}: {c:.4}");
    }

    let labels = [5, 12, 5];
    let lp: Vec<_> = pred.iter().zip(labels).map(|(&s, l)| LabeledSegment::new(s, l)).collect::<Result<_, _>>()?;
    let lg: Vec<_> = gt.iter().zip(labels).map(|(&s, l)| LabeledSegment::new(s, l)).collect::<Result<_, _>>()?;
    println!("MJI: {:.4}", mji_video(&lp, &lg, 120)?);
    Ok(())
}
