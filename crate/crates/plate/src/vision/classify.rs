use super::{binarize, Threshold};
use crate::bitmap::GrayBitmap;
use crate::font::{self, GLYPH_H, GLYPH_PIXELS, GLYPH_W};

/// Cells are rendered ink-on-white; anything darker than mid-gray is ink.
const CELL_THRESHOLD: u8 = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharMatch {
    pub ch: char,
    /// Fraction of the 35 template pixels that agree.
    pub score: f64,
}

/// Majority-vote downsampling of a cell to the 5×7 glyph grid. Each source
/// pixel votes for the target pixel containing its centre; a target is ink
/// when strictly more than half of its votes are ink. Targets that receive
/// no votes (cells narrower or shorter than the grid) sample the nearest
/// source pixel.
pub fn resample_to_glyph(cell: &GrayBitmap) -> [bool; GLYPH_PIXELS] {
    let bin = binarize(cell, Threshold::Fixed(CELL_THRESHOLD));
    let (w, h) = (cell.width(), cell.height());
    let mut ink = [0u32; GLYPH_PIXELS];
    let mut votes = [0u32; GLYPH_PIXELS];
    for y in 0..h {
        let ty = (2 * y + 1) * GLYPH_H / (2 * h);
        for x in 0..w {
            let tx = (2 * x + 1) * GLYPH_W / (2 * w);
            let t = ty * GLYPH_W + tx;
            votes[t] += 1;
            ink[t] += bin.get(x, y) as u32;
        }
    }
    let mut out = [false; GLYPH_PIXELS];
    for ty in 0..GLYPH_H {
        for tx in 0..GLYPH_W {
            let t = ty * GLYPH_W + tx;
            out[t] = if votes[t] == 0 {
                bin.get((2 * tx + 1) * w / (2 * GLYPH_W), (2 * ty + 1) * h / (2 * GLYPH_H))
            } else {
                2 * ink[t] > votes[t]
            };
        }
    }
    out
}

/// Best-matching font character; ties go to the lowest codepoint.
pub fn classify_char(cell: &GrayBitmap) -> CharMatch {
    let sample = resample_to_glyph(cell);
    let mut best = CharMatch { ch: '\0', score: -1.0 };
    for g in font::glyphs() {
        let agree = g.bits.iter().zip(&sample).filter(|(a, b)| a == b).count();
        let score = agree as f64 / GLYPH_PIXELS as f64;
        if score > best.score {
            best = CharMatch { ch: g.ch, score };
        }
    }
    best
}
