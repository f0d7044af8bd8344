use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CorpusError;
use crate::bitmap::GrayBitmap;
use crate::font::{self, GLYPH_H, GLYPH_W};
use crate::rng;
use crate::text::{PlateString, MAX_PLATE_LEN};

/// Per-pixel shade jitter applied to paper and ink.
const SHADE_JITTER: i16 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlateStyle {
    pub char_w: usize,
    pub char_h: usize,
    pub margin: usize,
    pub ink: u8,
    pub paper_shade: u8,
}

impl Default for PlateStyle {
    fn default() -> Self {
        Self {
            char_w: 15,
            char_h: 21,
            margin: 6,
            ink: 30,
            paper_shade: 225,
        }
    }
}

impl PlateStyle {
    /// Blank columns between neighbouring glyphs: one font column.
    pub fn spacing(&self) -> usize {
        (self.char_w / GLYPH_W).max(1)
    }

    pub fn plate_size(&self, chars: usize) -> (usize, usize) {
        let n = chars.max(1);
        (
            2 * self.margin + n * self.char_w + (n - 1) * self.spacing(),
            2 * self.margin + self.char_h,
        )
    }
}

/// Draws `text` in the built-in font on a plain plate. Each glyph is scaled
/// nearest-neighbour to `char_w`×`char_h`; shades jitter slightly under `seed`.
pub fn render_plate(text: &PlateString, style: &PlateStyle, seed: u64) -> Result<GrayBitmap, CorpusError> {
    if style.char_w < GLYPH_W || style.char_h < GLYPH_H {
        return Err(CorpusError::StyleTooSmall {
            char_w: style.char_w,
            char_h: style.char_h,
        });
    }
    let chars: Vec<char> = text.normalized().chars().collect();
    if chars.len() > MAX_PLATE_LEN {
        return Err(CorpusError::TextTooLong(chars.len()));
    }
    let glyphs = chars
        .iter()
        .map(|&c| font::glyph(c).ok_or(CorpusError::UnsupportedChar(c)))
        .collect::<Result<Vec<_>, _>>()?;

    let (width, height) = style.plate_size(chars.len());
    let mut ink_mask = vec![false; width * height];
    let pitch = style.char_w + style.spacing();
    for (i, g) in glyphs.iter().enumerate() {
        let x0 = style.margin + i * pitch;
        for dy in 0..style.char_h {
            let gy = (2 * dy + 1) * GLYPH_H / (2 * style.char_h);
            for dx in 0..style.char_w {
                let gx = (2 * dx + 1) * GLYPH_W / (2 * style.char_w);
                if g.ink(gx, gy) {
                    ink_mask[(style.margin + dy) * width + x0 + dx] = true;
                }
            }
        }
    }

    let mut rng = rng::seeded(seed);
    let pixels = ink_mask
        .into_iter()
        .map(|ink| {
            let base = if ink { style.ink } else { style.paper_shade };
            let jitter = rng.gen_range(-SHADE_JITTER..=SHADE_JITTER);
            (base as i16 + jitter).clamp(0, 255) as u8
        })
        .collect();
    Ok(GrayBitmap::new(width, height, pixels)?)
}
