//! Keypoint and feature CSV files.
//!
//! Keypoints: header `frame,k00x,k00y,k00c,...,k59x,k59y,k59c` (181 columns),
//! one row per frame, frames numbered 1, 2, 3, ... without gaps. A keypoint
//! with confidence 0 is undetected.
//!
//! Features: header `frame,f000,...,f119`, where `frame` is the 1-based source
//! frame of each vector, strictly increasing.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::features::{FeatureSequence, FeatureVector, Keypoint, KeypointFrame, FEATURE_DIM, NUM_KEYPOINTS};

const KEYPOINT_COLUMNS: usize = 1 + 3 * NUM_KEYPOINTS;
const FEATURE_COLUMNS: usize = 1 + FEATURE_DIM;

pub fn keypoints_header() -> String {
    let mut h = String::from("frame");
    for k in 0..NUM_KEYPOINTS {
        write!(h, ",k{k:02}x,k{k:02}y,k{k:02}c").expect("writing to a String");
    }
    h
}

pub fn features_header() -> String {
    let mut h = String::from("frame");
    for k in 0..FEATURE_DIM {
        write!(h, ",f{k:03}").expect("writing to a String");
    }
    h
}

/// Rows of a CSV text, with 1-based line numbers.
fn records(text: &str) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, 1, format!("malformed CSV: {e}"))
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        out.push((line, rec));
    }
    Ok(out)
}

fn check_header(rows: &[(usize, csv::StringRecord)], expected: &str) -> Result<()> {
    let (line, header) = rows
        .first()
        .ok_or_else(|| Error::parse(1, 1, "empty file: missing header"))?;
    let expected: Vec<&str> = expected.split(',').collect();
    for (i, want) in expected.iter().enumerate() {
        match header.get(i) {
            Some(got) if got.trim() == *want => {}
            Some(got) => {
                return Err(Error::parse(
                    *line,
                    i + 1,
                    format!("header mismatch: expected `{want}`, found `{got}`"),
                ))
            }
            None => {
                return Err(Error::parse(
                    *line,
                    i + 1,
                    format!(
                        "header mismatch: missing column `{want}` ({} of {} columns present)",
                        header.len(),
                        expected.len()
                    ),
                ))
            }
        }
    }
    if header.len() > expected.len() {
        return Err(Error::parse(
            *line,
            expected.len() + 1,
            format!("header mismatch: unexpected extra column `{}`", &header[expected.len()]),
        ));
    }
    Ok(())
}

fn check_width(line: usize, rec: &csv::StringRecord, expected: usize) -> Result<()> {
    if rec.len() != expected {
        return Err(Error::parse(
            line,
            rec.len().min(expected) + 1,
            format!("expected {expected} columns, found {}", rec.len()),
        ));
    }
    Ok(())
}

fn cell_f64(rec: &csv::StringRecord, line: usize, col: usize) -> Result<f64> {
    let raw = rec[col].trim();
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, col + 1, format!("`{raw}` is not a finite number"))),
    }
}

fn cell_frame(rec: &csv::StringRecord, line: usize) -> Result<usize> {
    let raw = rec[0].trim();
    raw.parse::<usize>()
        .ok()
        .filter(|&f| f >= 1)
        .ok_or_else(|| Error::parse(line, 1, format!("frame `{raw}` is not a positive integer")))
}

pub fn parse_keypoints_csv(text: &str) -> Result<Vec<KeypointFrame>> {
    let rows = records(text)?;
    check_header(&rows, &keypoints_header())?;
    let mut frames = Vec::with_capacity(rows.len() - 1);
    for (line, rec) in &rows[1..] {
        let line = *line;
        check_width(line, rec, KEYPOINT_COLUMNS)?;
        let frame = cell_frame(rec, line)?;
        if frame != frames.len() + 1 {
            return Err(Error::parse(
                line,
                1,
                format!("expected frame {}, found {frame}", frames.len() + 1),
            ));
        }
        let mut kf = KeypointFrame::default();
        for (k, slot) in kf.keypoints.iter_mut().enumerate() {
            let col = 1 + 3 * k;
            let confidence = cell_f64(rec, line, col + 2)?;
            if !(0.0..=1.0).contains(&confidence) {
                return Err(Error::parse(
                    line,
                    col + 3,
                    format!("confidence {confidence} outside [0, 1]"),
                ));
            }
            *slot = Keypoint::new(cell_f64(rec, line, col)?, cell_f64(rec, line, col + 1)?, confidence);
        }
        frames.push(kf);
    }
    Ok(frames)
}

pub fn write_keypoints_csv(frames: &[KeypointFrame]) -> String {
    let mut out = keypoints_header();
    out.push('\n');
    for (i, f) in frames.iter().enumerate() {
        write!(out, "{}", i + 1).expect("writing to a String");
        for k in &f.keypoints {
            write!(out, ",{},{},{}", k.x, k.y, k.confidence).expect("writing to a String");
        }
        out.push('\n');
    }
    out
}

pub fn parse_features_csv(text: &str) -> Result<FeatureSequence> {
    let rows = records(text)?;
    check_header(&rows, &features_header())?;
    let mut vectors = Vec::with_capacity(rows.len() - 1);
    let mut source_frames: Vec<usize> = Vec::with_capacity(rows.len() - 1);
    for (line, rec) in &rows[1..] {
        let line = *line;
        check_width(line, rec, FEATURE_COLUMNS)?;
        let frame = cell_frame(rec, line)?;
        if source_frames.last().is_some_and(|&prev| frame <= prev + 1) {
            return Err(Error::parse(line, 1, format!("frame {frame} is not increasing")));
        }
        let mut v = FeatureVector::default();
        for (j, slot) in v.0.iter_mut().enumerate() {
            *slot = cell_f64(rec, line, j + 1)?;
        }
        vectors.push(v);
        source_frames.push(frame - 1);
    }
    if vectors.is_empty() {
        return Err(Error::parse(rows[0].0 + 1, 1, "no feature rows"));
    }
    Ok(FeatureSequence { vectors, source_frames })
}

pub fn write_features_csv(seq: &FeatureSequence) -> String {
    let mut out = features_header();
    out.push('\n');
    for (v, &src) in seq.vectors.iter().zip(&seq.source_frames) {
        write!(out, "{}", src + 1).expect("writing to a String");
        for x in v.0 {
            write!(out, ",{x}").expect("writing to a String");
        }
        out.push('\n');
    }
    out
}
