//! Trains a small Bi-LSTM boundary detector on synthetic videos and scores
//! it on videos it has not seen.

use std::ops::ControlFlow;

use conseg::bilstm::{feature_matrix, train_with_monitor, write_checkpoint, Segmenter, TrainConfig, TrainingSequence};
use conseg::features::{boundary_labels, featurize_sequence, GapPolicy};
use conseg::metrics::{csr_corpus, Aggregation, VideoPair};
use conseg::synth::{generate_corpus, SynthConfig, SynthVideo};

fn sequences(videos: &[SynthVideo], config: &TrainConfig) -> conseg::Result<Vec<TrainingSequence>> {
    videos
        .iter()
        .map(|v| {
            let f = featurize_sequence(&v.frames, GapPolicy::Hold)?;
            TrainingSequence::new(feature_matrix(&f.vectors), boundary_labels(&v.annotation, config.dilation_w))
        })
        .collect()
}

fn main() -> conseg::Result<()> {
    let synth = SynthConfig { num_videos: 40, gestures_per_video: [2, 3], gap_length: [40, 70], ..SynthConfig::default() };
    let videos = generate_corpus(&synth)?;
    let (train, held) = videos.split_at(32);
    let config = TrainConfig { hidden_size: 32, num_layers: 2, max_epochs: 10, ..TrainConfig::default() };
    let (train_seqs, held_seqs) = (sequences(train, &config)?, sequences(held, &config)?);

    let outcome = train_with_monitor(&train_seqs, &config, |summary, params| {
        let segmenter = Segmenter::new(params.clone(), &config);
        let preds: Vec<_> = held_seqs.iter().map(|s| segmenter.segment(s.features.view()).unwrap()).collect();
        let pairs: Vec<_> = held
            .iter()
            .zip(&preds)
            .map(|(v, p)| VideoPair { video_id: v.annotation.video_id(), pred: p, gt: v.annotation.segments() })
            .collect();
        let csr = csr_corpus(&pairs, &[0.7], Aggregation::Micro).unwrap().csr[0];
        println!("epoch {:>2}  loss {:.4}  held-out CSR@0.7 {csr:.4}", summary.epoch, summary.loss);
        if csr >= 0.95 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;

    let bytes = write_checkpoint(&outcome.params, Some(&config));
    println!("{} parameters, checkpoint {} bytes", outcome.params.num_parameters(), bytes.len());
    Ok(())
}
