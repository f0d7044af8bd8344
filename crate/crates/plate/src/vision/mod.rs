//! Classical plate reader: binarize, locate the plate, segment characters
//! by connected components, classify each cell against the font templates,
//! keep whitelisted characters, and log the result to CSV.

mod binarize;
mod classify;
mod components;
mod csv;
mod detect;
mod recognize;
mod segment;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitmap::{BitmapError, BoundingBox};

pub use binarize::{binarize, histogram, otsu_threshold, BinaryImage, Threshold};
pub use classify::{classify_char, resample_to_glyph, CharMatch};
pub use components::{connected_components, label_components, Component};
pub use csv::{append_csv, csv_row, CSV_HEADER};
pub use detect::{best_plate, detect_plate, row_merge, DetectParams};
pub use recognize::{filter_whitelist, recognize, recognize_with, RecognizeParams, Whitelist};
pub use segment::{segment_chars, segment_mask};
pub use sweep::{sweep, SweepStats};

#[derive(Debug, Error)]
pub enum VisionError {
    #[error("no plate candidate found")]
    NoPlateFound,
    #[error("no character glyphs found in the plate region")]
    NoGlyphs,
    #[error(transparent)]
    Bitmap(#[from] BitmapError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A scored plate box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlateReading {
    pub image_id: String,
    pub raw_text: String,
    pub filtered_text: String,
    pub mean_char_score: f64,
    pub detection: DetectionResult,
}
