//! Generates a small synthetic corpus and writes it to a folder.
//!
//! cargo run --example synth_corpus -- /tmp/corpus

use conseg::features::boundary_labels;
use conseg::io::write_corpus;
use conseg::synth::{generate_corpus, SynthConfig};

fn main() -> conseg::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "synth_corpus".to_owned());
    let config = SynthConfig { num_videos: 10, seed: 42, ..SynthConfig::default() };
    let videos = generate_corpus(&config)?;

    let (mut pos, mut total) = (0usize, 0usize);
    for v in &videos {
        let labels = boundary_labels(&v.annotation, 1);
        pos += labels.iter().filter(|&&g| g == 1).count();
        total += labels.len();
        println!("{}: {} frames, {} gestures", v.annotation.video_id(), v.frames.len(), v.annotation.segments().len());
    }
    println!("boundary frames: 1 in {:.1}", total as f64 / pos as f64);

    write_corpus(out.as_ref(), &videos)?;
    println!("wrote {out}/");
    Ok(())
}
