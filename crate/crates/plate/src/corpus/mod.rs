//! Deterministic synthetic plate scenes with ground truth, PASCAL VOC
//! annotations, and train/test splitting.

mod generate;
mod render;
mod scene;
mod split;
pub mod voc;

use thiserror::Error;

use crate::bitmap::{BitmapError, BoundingBox, GrayBitmap};
use crate::text::PlateString;

pub use generate::{
    generate_corpus, generate_scenes, image_id, random_plate, read_manifest, write_corpus, CorpusConfig, ManifestEntry,
};
pub use render::{render_plate, PlateStyle};
pub use scene::{compose_scene, SaltPepper, CANVAS_SHADE, MAX_NOISE_RATE};
pub use split::{split_dataset, DatasetSplit};
pub use voc::{emit_voc_xml, parse_voc_xml, VocAnnotation, VocError};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("character {0:?} is not in the built-in font")]
    UnsupportedChar(char),
    #[error("plate text has {0} characters, at most 16 fit")]
    TextTooLong(usize),
    #[error("glyph cell {char_w}x{char_h} is smaller than 5x7")]
    StyleTooSmall { char_w: usize, char_h: usize },
    #[error("plate {plate_w}x{plate_h} at ({x},{y}) does not fit a {canvas_w}x{canvas_h} canvas")]
    OutOfBounds {
        plate_w: usize,
        plate_h: usize,
        x: usize,
        y: usize,
        canvas_w: usize,
        canvas_h: usize,
    },
    #[error("salt-and-pepper rate {0} is outside [0, 0.2]")]
    NoiseRate(f64),
    #[error("test count {test_count} exceeds the {available} available ids")]
    TestCountTooLarge { test_count: usize, available: usize },
    #[error("invalid corpus configuration: {0}")]
    Config(String),
    #[error("malformed manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },
    #[error(transparent)]
    Bitmap(#[from] BitmapError),
    #[error(transparent)]
    Pgm(#[from] crate::pgm::PgmError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One synthetic photograph with its plate box and the text drawn in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedScene {
    pub image_id: String,
    pub image: GrayBitmap,
    pub truth: BoundingBox,
    pub plate_text: PlateString,
}
