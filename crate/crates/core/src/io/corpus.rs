//! Corpus folders: `annotations.txt` (a segment list) next to a `keypoints/`
//! directory holding one `<video_id>.csv` per listed video.

use std::fs;
use std::path::{Path, PathBuf};

use super::keypoints::{parse_keypoints_csv, write_keypoints_csv};
use super::segments::{parse_segments_file, write_segments_file, AnnotationFile};
use super::{read_text, write_text};
use crate::error::{Error, Result};
use crate::synth::SynthVideo;

pub const ANNOTATIONS_FILE: &str = "annotations.txt";
pub const KEYPOINTS_DIR: &str = "keypoints";

pub fn keypoints_path(dir: &Path, video_id: &str) -> PathBuf {
    dir.join(KEYPOINTS_DIR).join(format!("{video_id}.csv"))
}

pub fn write_corpus(dir: &Path, videos: &[SynthVideo]) -> Result<()> {
    let kp_dir = dir.join(KEYPOINTS_DIR);
    fs::create_dir_all(&kp_dir).map_err(|e| Error::io(&kp_dir, e))?;
    for v in videos {
        write_text(&keypoints_path(dir, v.annotation.video_id()), &write_keypoints_csv(&v.frames))?;
    }
    let list = AnnotationFile {
        videos: videos.iter().map(|v| v.annotation.clone()).collect(),
    };
    write_text(&dir.join(ANNOTATIONS_FILE), &write_segments_file(&list))
}

/// Loads every listed video; keypoint row counts must equal the listed frame
/// counts.
pub fn read_corpus(dir: &Path) -> Result<Vec<SynthVideo>> {
    let list_path = dir.join(ANNOTATIONS_FILE);
    let list = parse_segments_file(&read_text(&list_path)?).map_err(|e| e.in_file(&list_path))?;
    list.videos
        .into_iter()
        .map(|annotation| {
            let path = keypoints_path(dir, annotation.video_id());
            let frames = parse_keypoints_csv(&read_text(&path)?).map_err(|e| e.in_file(&path))?;
            if frames.len() != annotation.frame_count() as usize {
                return Err(Error::LengthMismatch {
                    what: "keypoint rows vs listed frame count",
                    left: frames.len(),
                    right: annotation.frame_count() as usize,
                }
                .in_video(annotation.video_id()));
            }
            Ok(SynthVideo { frames, annotation })
        })
        .collect()
}
