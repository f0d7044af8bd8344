use serde::{Deserialize, Serialize};

use super::recognize;
use crate::corpus::AnnotatedScene;

/// Per-split recognition tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepStats {
    pub scenes: usize,
    /// Best detection overlaps the truth box with IoU ≥ 0.5.
    pub detected: usize,
    /// Filtered reading equals the normalized truth text.
    pub exact_text: usize,
}

impl SweepStats {
    pub fn detection_rate(&self) -> f64 {
        self.detected as f64 / self.scenes.max(1) as f64
    }

    pub fn exact_rate(&self) -> f64 {
        self.exact_text as f64 / self.scenes.max(1) as f64
    }
}

/// Runs the reader over every scene and counts hits.
pub fn sweep(scenes: &[AnnotatedScene]) -> SweepStats {
    let mut stats = SweepStats {
        scenes: scenes.len(),
        ..SweepStats::default()
    };
    for s in scenes {
        let Ok(reading) = recognize(&s.image, &s.image_id) else {
            continue;
        };
        let inter = reading.detection.bbox.intersection_area(&s.truth);
        let union = reading.detection.bbox.area() + s.truth.area() - inter;
        if 2 * inter >= union {
            stats.detected += 1;
        }
        if reading.filtered_text == s.plate_text.normalized() {
            stats.exact_text += 1;
        }
    }
    stats
}
