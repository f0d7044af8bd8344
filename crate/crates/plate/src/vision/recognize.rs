use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{best_plate, classify_char, segment_mask, DetectParams, PlateReading, VisionError};
use crate::bitmap::GrayBitmap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Whitelist(BTreeSet<char>);

impl Whitelist {
    pub fn digits() -> Self {
        Self(('0'..='9').collect())
    }

    pub fn from_chars(chars: impl IntoIterator<Item = char>) -> Self {
        Self(chars.into_iter().collect())
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.contains(&c)
    }
}

impl Default for Whitelist {
    fn default() -> Self {
        Self::digits()
    }
}

pub fn filter_whitelist(raw: &str, whitelist: &Whitelist) -> String {
    raw.chars().filter(|&c| whitelist.contains(c)).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecognizeParams {
    pub detect: DetectParams,
    pub whitelist: Whitelist,
}

pub fn recognize(scene: &GrayBitmap, image_id: &str) -> Result<PlateReading, VisionError> {
    recognize_with(scene, image_id, &RecognizeParams::default())
}

/// Detect, segment, classify and filter one scene.
pub fn recognize_with(scene: &GrayBitmap, image_id: &str, params: &RecognizeParams) -> Result<PlateReading, VisionError> {
    let detection = best_plate(scene, &params.detect)?;
    let crop = scene.crop(&detection.bbox)?;
    let (boxes, ink) = segment_mask(&crop)?;

    let mut raw_text = String::with_capacity(boxes.len());
    let mut score_sum = 0.0;
    for b in &boxes {
        // re-render the binarized cell so classification sees clean ink
        let mut cell = Vec::with_capacity(b.area() as usize);
        for y in b.ymin as usize..b.ymax as usize {
            for x in b.xmin as usize..b.xmax as usize {
                cell.push(if ink.get(x, y) { 0 } else { 255 });
            }
        }
        let cell = GrayBitmap::new(b.width() as usize, b.height() as usize, cell)?;
        let m = classify_char(&cell);
        raw_text.push(m.ch);
        score_sum += m.score;
    }
    Ok(PlateReading {
        image_id: image_id.to_string(),
        filtered_text: filter_whitelist(&raw_text, &params.whitelist),
        mean_char_score: score_sum / boxes.len() as f64,
        raw_text,
        detection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{compose_scene, render_plate, PlateStyle, SaltPepper};
    use crate::text::normalize_plate;

    #[test]
    fn whitelist_filtering() {
        let digits = Whitelist::digits();
        assert_eq!(filter_whitelist("DHA-1234", &digits), "1234");
        assert_eq!(filter_whitelist("9876", &digits), "9876");
        assert_eq!(filter_whitelist("ABC", &digits), "");
    }

    #[test]
    fn reads_clean_scene() {
        let text = normalize_plate("4821").unwrap();
        let plate = render_plate(&text, &PlateStyle::default(), 1).unwrap();
        let scene = compose_scene("s", &plate, &text, 320, 240, (40, 100), SaltPepper::none()).unwrap();
        let r = recognize(&scene.image, "img_007").unwrap();
        assert_eq!(r.filtered_text, "4821");
        assert_eq!(r.raw_text, "4821");
        assert_eq!(r.mean_char_score, 1.0);
        assert_eq!(r.detection.bbox, scene.truth);
    }

    #[test]
    fn reads_letters_when_whitelisted() {
        let text = normalize_plate("DHA-1234").unwrap();
        let plate = render_plate(&text, &PlateStyle::default(), 2).unwrap();
        let scene = compose_scene("s", &plate, &text, 320, 240, (7, 9), SaltPepper::none()).unwrap();
        let r = recognize(&scene.image, "x").unwrap();
        assert_eq!(r.raw_text, "DHA1234");
        assert_eq!(r.filtered_text, "1234");
        let all = RecognizeParams {
            whitelist: Whitelist::from_chars(('0'..='9').chain('A'..='Z')),
            ..RecognizeParams::default()
        };
        assert_eq!(recognize_with(&scene.image, "x", &all).unwrap().filtered_text, "DHA1234");
    }

    #[test]
    fn blank_scene_is_not_a_plate() {
        let blank = GrayBitmap::filled(320, 240, 128).unwrap();
        assert!(matches!(recognize(&blank, "b"), Err(VisionError::NoPlateFound)));
    }
}
