//! The `conseg` command line.
//!
//! Exit codes: 0 on success, 1 when inputs or flags are invalid, 2 when a
//! file cannot be read or written. Diagnostics go to stderr.

use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bilstm::{
    feature_matrix, read_checkpoint, train_with_monitor, write_checkpoint, Segmenter, TrainConfig,
    TrainingSequence,
};
use crate::error::{Error, Result};
use crate::features::{boundary_labels, featurize_sequence, GapPolicy};
use crate::io::{
    self, parse_keypoints_csv, parse_segments_file, write_features_csv, write_report_json,
    write_segments_file, AnnotationFile,
};
use crate::metrics::{
    csr_corpus_parallel, format_threshold, mji_corpus, recognition_rate, Aggregation, CsrReport,
    LabeledVideo, VideoPair, DEFAULT_THRESHOLDS,
};
use crate::segment::VideoAnnotation;
use crate::synth::{generate_corpus, SynthConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

/// Environment variable capping the scoring worker count; 0 means automatic.
pub const THREADS_ENV: &str = "CONSEG_THREADS";

#[derive(Debug, Parser)]
#[command(name = "conseg", version, about = "Segment and score continuous gesture streams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score predicted segments against ground truth.
    Score(ScoreArgs),
    /// Write a synthetic corpus folder.
    Synth(SynthArgs),
    /// Turn a keypoint CSV into a feature CSV.
    Featurize(FeaturizeArgs),
    /// Train a boundary detector on a corpus folder.
    Train(TrainArgs),
    /// Predict segments from keypoints with a trained model.
    Segment(SegmentArgs),
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Comma-separated IoU thresholds.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_THRESHOLDS.to_vec())]
    pub thresholds: Vec<f64>,
    #[arg(long, default_value = "micro")]
    pub agg: Aggregation,
    /// Where to write the JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// TOML generator settings; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Overrides the seed from the config file.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    #[arg(long)]
    pub keypoints: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "hold")]
    pub gap_policy: GapPolicy,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Corpus folder as written by `synth`.
    #[arg(long)]
    pub corpus: PathBuf,
    /// TOML training settings; defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// A keypoint CSV, a folder of them, or a corpus folder.
    #[arg(long)]
    pub keypoints: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Boundary probability threshold; the model's own setting otherwise.
    #[arg(long)]
    pub threshold: Option<f64>,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("conseg: error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Score(a) => score(a),
        Command::Synth(a) => synth(a),
        Command::Featurize(a) => featurize(a),
        Command::Train(a) => train(a),
        Command::Segment(a) => segment(a),
    }
}

/// Worker count from [`THREADS_ENV`], falling back to the core count.
pub fn worker_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn read_list(path: &Path) -> Result<AnnotationFile> {
    parse_segments_file(&io::read_text(path)?).map_err(|e| e.in_file(path))
}

fn read_toml<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    toml::from_str(&io::read_text(path)?)
        .map_err(|e| Error::Config(e.to_string()).in_file(path))
}

/// Scores a prediction list against a ground-truth list.
///
/// Every ground-truth video is scored; one missing from `pred` counts as an
/// empty prediction. MJI is reported when both lists carry labels, the
/// recognition rate only when the predicted boundaries equal the ground truth
/// in every video.
pub fn score_lists(
    pred: &AnnotationFile,
    gt: &AnnotationFile,
    thresholds: &[f64],
    mode: Aggregation,
    threads: usize,
) -> Result<CsrReport> {
    for p in &pred.videos {
        if gt.get(p.video_id()).is_none() {
            return Err(Error::InvalidAnnotation {
                video_id: p.video_id().to_owned(),
                reason: "predicted video is missing from the ground truth".to_owned(),
            });
        }
    }
    let empty: Vec<VideoAnnotation> = gt
        .videos
        .iter()
        .filter(|g| pred.get(g.video_id()).is_none())
        .map(|g| VideoAnnotation::unlabeled(g.video_id(), g.frame_count(), Vec::new()))
        .collect::<Result<_>>()?;
    let pairs: Vec<(&VideoAnnotation, &VideoAnnotation)> = gt
        .videos
        .iter()
        .map(|g| {
            let p = pred
                .get(g.video_id())
                .or_else(|| empty.iter().find(|e| e.video_id() == g.video_id()))
                .expect("every ground-truth video has a prediction entry");
            (p, g)
        })
        .collect();
    for (p, g) in &pairs {
        if p.frame_count() != g.frame_count() {
            return Err(Error::InvalidAnnotation {
                video_id: g.video_id().to_owned(),
                reason: format!(
                    "predicted frame count {} differs from ground truth {}",
                    p.frame_count(),
                    g.frame_count()
                ),
            });
        }
    }

    let video_pairs: Vec<VideoPair<'_>> = pairs
        .iter()
        .map(|(p, g)| VideoPair {
            video_id: g.video_id(),
            pred: p.segments(),
            gt: g.segments(),
        })
        .collect();
    let mut report = csr_corpus_parallel(&video_pairs, thresholds, mode, threads)?;

    let labeled = pairs.iter().all(|(p, g)| g.is_labeled() && (p.is_labeled() || p.segments().is_empty()));
    if labeled && !pairs.is_empty() {
        let segs: Vec<_> = pairs
            .iter()
            .map(|(p, g)| {
                (
                    p.labeled_segments().unwrap_or_default(),
                    g.labeled_segments().unwrap_or_default(),
                )
            })
            .collect();
        let videos: Vec<LabeledVideo<'_>> = pairs
            .iter()
            .zip(&segs)
            .map(|((_, g), (ps, gs))| LabeledVideo {
                video_id: g.video_id(),
                pred: ps,
                gt: gs,
                frame_count: g.frame_count(),
            })
            .collect();
        report.mji = Some(mji_corpus(&videos)?);

        if pairs.iter().all(|(p, g)| p.segments() == g.segments()) {
            let (pl, gl): (Vec<u32>, Vec<u32>) = pairs
                .iter()
                .flat_map(|(p, g)| {
                    p.labels()
                        .unwrap_or_default()
                        .iter()
                        .copied()
                        .zip(g.labels().unwrap_or_default().iter().copied())
                })
                .unzip();
            if !gl.is_empty() {
                report.recognition_rate = Some(recognition_rate(&pl, &gl)?);
            }
        }
    }
    Ok(report)
}

/// Table-style summary: a threshold header row and the CSR row beneath.
pub fn format_table(report: &CsrReport) -> String {
    let mut head = format!("{:<8}", "IoU");
    let mut row = format!("{:<8}", "CSR");
    for (t, c) in report.thresholds.iter().zip(&report.csr) {
        head.push_str(&format!("{:>8}", format_threshold(*t)));
        row.push_str(&format!("{c:>8.4}"));
    }
    let mut out = format!("{head}\n{row}\n");
    if let Some(m) = report.mji {
        out.push_str(&format!("{:<8}{m:>8.4}\n", "MJI"));
    }
    if let Some(r) = report.recognition_rate {
        out.push_str(&format!("{:<8}{r:>8.4}\n", "RecRate"));
    }
    out.push_str(&format!("videos {}, {} aggregation\n", report.video_count, report.aggregation));
    out
}

fn score(a: &ScoreArgs) -> Result<()> {
    let pred = read_list(&a.pred)?;
    let gt = read_list(&a.gt)?;
    let report = score_lists(&pred, &gt, &a.thresholds, a.agg, worker_threads())?;
    if !report.over_unity.is_empty() {
        let ts: Vec<String> = report.over_unity.iter().map(|t| format_threshold(*t)).collect();
        eprintln!(
            "conseg: warning: CSR above 1 at IoU {}: one prediction matched several ground-truth segments",
            ts.join(", ")
        );
    }
    if let Some(out) = &a.out {
        io::write_text(out, &write_report_json(&report))?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(format_table(&report).as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn synth(a: &SynthArgs) -> Result<()> {
    let mut cfg: SynthConfig = read_toml(a.config.as_deref())?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let videos = generate_corpus(&cfg)?;
    io::write_corpus(&a.out_dir, &videos)?;
    eprintln!("conseg: wrote {} videos to {}", videos.len(), a.out_dir.display());
    Ok(())
}

fn featurize(a: &FeaturizeArgs) -> Result<()> {
    let frames = parse_keypoints_csv(&io::read_text(&a.keypoints)?).map_err(|e| e.in_file(&a.keypoints))?;
    let seq = featurize_sequence(&frames, a.gap_policy).map_err(|e| e.in_file(&a.keypoints))?;
    io::write_text(&a.out, &write_features_csv(&seq))
}

fn train(a: &TrainArgs) -> Result<()> {
    let cfg: TrainConfig = read_toml(a.config.as_deref())?;
    cfg.validate()?;
    let corpus = io::read_corpus(&a.corpus)?
        .iter()
        .map(|v| {
            let seq = featurize_sequence(&v.frames, GapPolicy::Hold)
                .map_err(|e| e.in_video(v.annotation.video_id()))?;
            TrainingSequence::new(
                feature_matrix(&seq.vectors),
                boundary_labels(&v.annotation, cfg.dilation_w),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let outcome = train_with_monitor(&corpus, &cfg, |s, _| {
        eprintln!("epoch {:>3}  loss {:.5}  steps {}", s.epoch, s.loss, s.steps);
        ControlFlow::Continue(())
    })?;
    std::fs::write(&a.out, write_checkpoint(&outcome.params, Some(&cfg))).map_err(|e| Error::io(&a.out, e))
}

/// `(video_id, path)` for every keypoint CSV named by `path`.
fn keypoint_inputs(path: &Path) -> Result<Vec<(String, PathBuf)>> {
    let stem = |p: &Path| p.file_stem().map(|s| s.to_string_lossy().into_owned());
    if path.is_file() {
        let id = stem(path).ok_or_else(|| Error::Config(format!("no video id in {}", path.display())))?;
        return Ok(vec![(id, path.to_owned())]);
    }
    let dir = if path.join(io::corpus::KEYPOINTS_DIR).is_dir() {
        path.join(io::corpus::KEYPOINTS_DIR)
    } else {
        path.to_owned()
    };
    let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let p = entry.map_err(|e| Error::io(&dir, e))?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            if let Some(id) = stem(&p) {
                out.push((id, p));
            }
        }
    }
    out.sort();
    if out.is_empty() {
        return Err(Error::Empty("no keypoint CSV files found"));
    }
    Ok(out)
}

fn segment(a: &SegmentArgs) -> Result<()> {
    let bytes = std::fs::read(&a.model).map_err(|e| Error::io(&a.model, e))?;
    let (params, cfg) = read_checkpoint(&bytes).map_err(|e| e.in_file(&a.model))?;
    let mut segmenter = Segmenter::new(params, &cfg.unwrap_or_default());
    if let Some(t) = a.threshold {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Config(format!("threshold {t} outside (0, 1)")));
        }
        segmenter.threshold = t;
    }
    let mut videos = Vec::new();
    for (id, path) in keypoint_inputs(&a.keypoints)? {
        let frames = parse_keypoints_csv(&io::read_text(&path)?).map_err(|e| e.in_file(&path))?;
        let seq = featurize_sequence(&frames, GapPolicy::Hold).map_err(|e| e.in_file(&path))?;
        let segments = segmenter.segment(feature_matrix(&seq.vectors).view())?;
        let frame_count = u32::try_from(frames.len())
            .map_err(|_| Error::Config(format!("{} has too many frames", path.display())))?;
        videos.push(VideoAnnotation::unlabeled(&id, frame_count, segments)?);
    }
    io::write_text(&a.out, &write_segments_file(&AnnotationFile { videos }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn list(text: &str) -> AnnotationFile {
        parse_segments_file(text).unwrap()
    }

    #[test]
    fn identical_lists_score_perfectly() {
        let gt = list("a 120 1,48:17 49,104:82\nb 50 3,9:1\n");
        let r = score_lists(&gt, &gt, &DEFAULT_THRESHOLDS, Aggregation::Micro, 1).unwrap();
        assert_eq!(r.csr, vec![1.0; 5]);
        assert_eq!(r.mji, Some(1.0));
        assert_eq!(r.recognition_rate, Some(1.0));
        assert!(write_report_json(&r).contains("\"0.9\": 1.0000"));
    }

    #[test]
    fn missing_prediction_counts_as_empty() {
        let gt = list("a 20 1,10\nb 20 1,10\n");
        let pred = list("a 20 1,10\n");
        let r = score_lists(&pred, &gt, &[0.5], Aggregation::Micro, 1).unwrap();
        assert_eq!(r.csr, vec![0.5]);
        assert_eq!(r.mji, None);
        assert!(score_lists(&list("c 20 1,2\n"), &gt, &[0.5], Aggregation::Micro, 1).is_err());
        assert!(score_lists(&list("a 21 1,10\n"), &gt, &[0.5], Aggregation::Micro, 1).is_err());
    }

    #[test]
    fn recognition_rate_needs_equal_boundaries() {
        let gt = list("a 20 1,10:3 11,20:4\n");
        let same = list("a 20 1,10:3 11,20:5\n");
        let r = score_lists(&same, &gt, &[0.5], Aggregation::Micro, 1).unwrap();
        assert_eq!(r.recognition_rate, Some(0.5));
        let moved = list("a 20 1,9:3 11,20:4\n");
        let r = score_lists(&moved, &gt, &[0.5], Aggregation::Micro, 1).unwrap();
        assert_eq!(r.recognition_rate, None);
        assert!(r.mji.is_some());
    }

    #[test]
    fn table_layout() {
        let gt = list("a 20 1,10:3\n");
        let r = score_lists(&gt, &gt, &[0.5, 0.7], Aggregation::Macro, 1).unwrap();
        assert_eq!(
            format_table(&r),
            "IoU          0.5     0.7\nCSR       1.0000  1.0000\nMJI       1.0000\nRecRate   1.0000\nvideos 1, macro aggregation\n"
        );
    }

    #[test]
    fn flag_errors_exit_with_validation_code() {
        assert_eq!(run(["conseg", "score", "--bogus"]), EXIT_INVALID);
        assert_eq!(run(["conseg"]), EXIT_INVALID);
        assert_eq!(run(["conseg", "score", "--pred", "x", "--gt", "y", "--agg", "median"]), EXIT_INVALID);
        assert_eq!(run(["conseg", "--version"]), EXIT_OK);
    }
}
