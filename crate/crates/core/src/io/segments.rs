//! Segment list files.
//!
//! One video per line: `<video_id> <frame_count> <seg>( <seg>)*` where a seg
//! is `<start>,<end>` or `<start>,<end>:<label>`, frames 1-based inclusive.
//! Blank lines and lines starting with `#` are skipped. Within a line either
//! every segment carries a label or none does.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::segment::{LabeledSegment, Segment, VideoAnnotation};

/// Parsed contents of a segment list file, in file order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnnotationFile {
    pub videos: Vec<VideoAnnotation>,
}

impl AnnotationFile {
    pub fn get(&self, video_id: &str) -> Option<&VideoAnnotation> {
        self.videos.iter().find(|v| v.video_id() == video_id)
    }

    pub fn is_labeled(&self) -> bool {
        !self.videos.is_empty() && self.videos.iter().all(|v| v.is_labeled())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Largest accepted gesture label; any positive label when `None`.
    pub max_label: Option<u32>,
}

pub fn parse_segments_file(text: &str) -> Result<AnnotationFile> {
    parse_segments_file_with(text, ParseOptions::default())
}

pub fn parse_segments_file_with(text: &str, options: ParseOptions) -> Result<AnnotationFile> {
    let mut videos = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let video = parse_line(line, line_no, options)?;
        if !seen.insert(video.video_id().to_owned()) {
            return Err(Error::parse(
                line_no,
                1,
                format!("duplicate video id `{}`", video.video_id()),
            ));
        }
        videos.push(video);
    }
    Ok(AnnotationFile { videos })
}

/// Whitespace-separated tokens with their 1-based starting columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_whitespace().map(move |tok| {
        let offset = tok.as_ptr() as usize - line.as_ptr() as usize;
        (line[..offset].chars().count() + 1, tok)
    })
}

fn parse_number(tok: &str, line: usize, col: usize, what: &str) -> Result<u32> {
    if tok.is_empty() || !tok.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::parse(line, col, format!("{what} `{tok}` is not a non-negative integer")));
    }
    tok.parse()
        .map_err(|_| Error::parse(line, col, format!("{what} `{tok}` is out of range")))
}

fn parse_line(line: &str, line_no: usize, options: ParseOptions) -> Result<VideoAnnotation> {
    let mut toks = tokens(line);
    let (_, video_id) = toks.next().expect("non-blank line has a token");
    let (col, count_tok) = toks
        .next()
        .ok_or_else(|| Error::parse(line_no, line.len() + 1, "missing frame count"))?;
    let frame_count = parse_number(count_tok, line_no, col, "frame count")?;
    if frame_count == 0 {
        return Err(Error::parse(line_no, col, "frame count must be positive"));
    }

    let mut segments: Vec<Segment> = Vec::new();
    let mut labels = Vec::new();
    for (col, tok) in toks {
        let (range, label) = match tok.split_once(':') {
            Some((range, label)) => (range, Some((col + range.len() + 1, label))),
            None => (tok, None),
        };
        let (start_tok, end_tok) = range.split_once(',').ok_or_else(|| {
            Error::parse(line_no, col, format!("segment `{tok}` is not `start,end[:label]`"))
        })?;
        let start = parse_number(start_tok, line_no, col, "segment start")?;
        let end_col = col + start_tok.len() + 1;
        let end = parse_number(end_tok, line_no, end_col, "segment end")?;
        if start > end {
            return Err(Error::parse(line_no, col, format!("start > end in segment `{tok}`")));
        }
        let segment = Segment::new(start, end).map_err(|e| Error::parse(line_no, col, e.to_string()))?;
        if end > frame_count {
            return Err(Error::parse(
                line_no,
                col,
                format!("segment `{tok}` of video `{video_id}` exceeds frame count {frame_count}"),
            ));
        }
        if let Some(prev) = segments.last() {
            if segment.start() <= prev.end() {
                return Err(Error::parse(
                    line_no,
                    col,
                    format!("segment `{tok}` of video `{video_id}` overlaps or precedes {prev}"),
                ));
            }
        }
        match label {
            Some((label_col, label_tok)) => {
                let label = parse_number(label_tok, line_no, label_col, "label")?;
                if label == 0 {
                    return Err(Error::parse(line_no, label_col, "gesture labels start at 1"));
                }
                if let Some(max) = options.max_label {
                    if label > max {
                        return Err(Error::parse(
                            line_no,
                            label_col,
                            format!("label {label} outside vocabulary 1..={max}"),
                        ));
                    }
                }
                labels.push(Some(label));
            }
            None => labels.push(None),
        }
        if labels.len() > 1 && labels[0].is_some() != labels[labels.len() - 1].is_some() {
            return Err(Error::parse(line_no, col, "mixed labeled and unlabeled segments"));
        }
        segments.push(segment);
    }

    let result = match labels.first() {
        Some(Some(_)) => {
            let labeled = segments
                .iter()
                .zip(&labels)
                .map(|(&s, l)| LabeledSegment::new(s, l.expect("all labeled")))
                .collect::<Result<Vec<_>>>()?;
            VideoAnnotation::labeled(video_id, frame_count, labeled)
        }
        _ => VideoAnnotation::unlabeled(video_id, frame_count, segments),
    };
    result.map_err(|e| Error::parse(line_no, 1, e.to_string()))
}

/// Canonical text: one line per video, single spaces, no comments.
pub fn write_segments_file(file: &AnnotationFile) -> String {
    let mut out = String::new();
    for video in &file.videos {
        out.push_str(video.video_id());
        out.push(' ');
        out.push_str(&video.frame_count().to_string());
        for (i, seg) in video.segments().iter().enumerate() {
            out.push_str(&format!(" {},{}", seg.start(), seg.end()));
            if let Some(labels) = video.labels() {
                out.push_str(&format!(":{}", labels[i]));
            }
        }
        out.push('\n');
    }
    out
}
