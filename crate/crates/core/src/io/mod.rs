//! Text formats: segment lists, keypoint and feature CSVs, JSON score
//! reports, and corpus folders combining the first two.

pub mod corpus;
pub mod keypoints;
pub mod report;
pub mod segments;

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub use corpus::{read_corpus, write_corpus};
pub use keypoints::{parse_features_csv, parse_keypoints_csv, write_features_csv, write_keypoints_csv};
pub use report::{parse_report_json, write_report_json, ParsedReport};
pub use segments::{parse_segments_file, parse_segments_file_with, write_segments_file, AnnotationFile, ParseOptions};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}
