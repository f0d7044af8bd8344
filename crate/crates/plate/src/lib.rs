//! License plate imaging: grayscale bitmaps, the built-in 5×7 plate font,
//! a deterministic synthetic corpus with PASCAL VOC annotations, and a
//! classical recognition pipeline (binarize, locate, segment, classify,
//! filter, CSV).

pub mod bitmap;
pub mod corpus;
pub mod font;
pub mod pgm;
pub mod rng;
pub mod text;
pub mod vision;

pub use bitmap::{BitmapError, BoundingBox, GrayBitmap};
pub use corpus::{AnnotatedScene, CorpusError, DatasetSplit, PlateStyle};
pub use font::FONT_VERSION;
pub use text::{normalize_plate, PlateError, PlateString};
pub use vision::{DetectionResult, PlateReading, VisionError};
