//! Built-in 5×7 plate font for `0-9` and `A-Z`.
//!
//! Every glyph fills its full 5×7 cell (touches all four edges) and its ink
//! forms a single 4-connected component. Diagonal strokes are drawn as
//! staircases so that 4-connected labelling never splits a character.
//! The tables double as the OCR templates; bump [`FONT_VERSION`] whenever a
//! glyph changes.

pub const GLYPH_W: usize = 5;
pub const GLYPH_H: usize = 7;
pub const GLYPH_PIXELS: usize = GLYPH_W * GLYPH_H;
pub const FONT_VERSION: u32 = 1;

/// Row strings, `#` = ink.
const TABLE: [(char, [&str; GLYPH_H]); 36] = [
    ('0', [".###.", "##.##", "#...#", "#...#", "#...#", "##.##", ".###."]),
    ('1', ["..#..", ".##..", "..#..", "..#..", "..#..", "..#..", "#####"]),
    ('2', [".###.", "##.##", "....#", "...##", "..##.", ".##..", "#####"]),
    ('3', ["#####", "...##", "..##.", "...##", "....#", "##.##", ".###."]),
    ('4', ["#..#.", "#..#.", "#..#.", "#####", "...#.", "...#.", "...#."]),
    ('5', ["#####", "#....", "#....", "#####", "....#", "....#", "#####"]),
    ('6', [".###.", "##...", "#....", "####.", "#..##", "##.##", ".###."]),
    ('7', ["#####", "....#", "...##", "...#.", "..##.", "..#..", "..#.."]),
    ('8', [".###.", "##.##", "##.##", ".###.", "##.##", "##.##", ".###."]),
    ('9', [".###.", "##.##", "#...#", "##.##", ".####", "...##", "####."]),
    ('A', [".###.", "##.##", "#...#", "#####", "#...#", "#...#", "#...#"]),
    ('B', ["####.", "#..##", "#...#", "####.", "#..##", "#...#", "####."]),
    ('C', [".####", "##...", "#....", "#....", "#....", "##...", ".####"]),
    ('D', ["####.", "#..##", "#...#", "#...#", "#...#", "#..##", "####."]),
    ('E', ["#####", "#....", "#....", "####.", "#....", "#....", "#####"]),
    ('F', ["#####", "#....", "#....", "####.", "#....", "#....", "#...."]),
    ('G', [".####", "##...", "#....", "#..##", "#...#", "##..#", ".####"]),
    ('H', ["#...#", "#...#", "#...#", "#####", "#...#", "#...#", "#...#"]),
    ('I', ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "#####"]),
    ('J', ["#####", "...#.", "...#.", "...#.", "...#.", "#..#.", "####."]),
    ('K', ["#...#", "#..##", "#.##.", "###..", "#.##.", "#..##", "#...#"]),
    ('L', ["#....", "#....", "#....", "#....", "#....", "#....", "#####"]),
    ('M', ["#...#", "##.##", "#####", "#.#.#", "#...#", "#...#", "#...#"]),
    ('N', ["#...#", "##..#", "###.#", "#.###", "#..##", "#...#", "#...#"]),
    ('O', ["#####", "#...#", "#...#", "#...#", "#...#", "#...#", "#####"]),
    ('P', ["####.", "#..##", "#...#", "#..##", "####.", "#....", "#...."]),
    ('Q', [".###.", "##.##", "#...#", "#...#", "#.###", "##..#", ".####"]),
    ('R', ["####.", "#..##", "#...#", "#..##", "####.", "#..##", "#...#"]),
    ('S', [".####", "##...", ".##..", "..##.", "...##", "...##", "####."]),
    ('T', ["#####", "..#..", "..#..", "..#..", "..#..", "..#..", "..#.."]),
    ('U', ["#...#", "#...#", "#...#", "#...#", "#...#", "##.##", ".###."]),
    ('V', ["#...#", "#...#", "#...#", "##.##", ".#.#.", ".###.", "..#.."]),
    ('W', ["#...#", "#...#", "#.#.#", "#.#.#", "#####", "##.##", "#...#"]),
    ('X', ["#...#", "##.##", ".###.", "..#..", ".###.", "##.##", "#...#"]),
    ('Y', ["#...#", "##.##", ".###.", "..#..", "..#..", "..#..", "..#.."]),
    ('Z', ["#####", "...##", "..##.", ".##..", "##...", "#....", "#####"]),
];

/// A glyph as a 5×7 ink mask, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Glyph {
    pub ch: char,
    pub bits: [bool; GLYPH_PIXELS],
}

impl Glyph {
    #[inline]
    pub fn ink(&self, x: usize, y: usize) -> bool {
        self.bits[y * GLYPH_W + x]
    }

    pub fn ink_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

fn build(ch: char, rows: &[&str; GLYPH_H]) -> Glyph {
    let mut bits = [false; GLYPH_PIXELS];
    for (y, row) in rows.iter().enumerate() {
        for (x, c) in row.bytes().enumerate() {
            bits[y * GLYPH_W + x] = c == b'#';
        }
    }
    Glyph { ch, bits }
}

/// All glyphs in codepoint order.
pub fn glyphs() -> &'static [Glyph] {
    static GLYPHS: std::sync::OnceLock<Vec<Glyph>> = std::sync::OnceLock::new();
    GLYPHS.get_or_init(|| {
        let mut all: Vec<Glyph> = TABLE.iter().map(|(c, rows)| build(*c, rows)).collect();
        all.sort_by_key(|g| g.ch);
        all
    })
}

pub fn glyph(ch: char) -> Option<&'static Glyph> {
    let ch = ch.to_ascii_uppercase();
    glyphs().iter().find(|g| g.ch == ch)
}

pub fn supports(ch: char) -> bool {
    glyph(ch).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn cells(g: &Glyph) -> BTreeSet<(usize, usize)> {
        (0..GLYPH_H)
            .flat_map(|y| (0..GLYPH_W).map(move |x| (x, y)))
            .filter(|&(x, y)| g.ink(x, y))
            .collect()
    }

    #[test]
    fn covers_digits_and_uppercase() {
        assert_eq!(glyphs().len(), 36);
        for c in ('0'..='9').chain('A'..='Z') {
            assert!(supports(c), "missing {c}");
        }
        assert!(!supports('-'));
        assert_eq!(glyph('a').unwrap().ch, 'A');
    }

    #[test]
    fn glyphs_span_cell_and_are_4_connected() {
        for g in glyphs() {
            let ink = cells(g);
            assert_eq!(ink.iter().map(|c| c.0).min(), Some(0), "{}", g.ch);
            assert_eq!(ink.iter().map(|c| c.0).max(), Some(GLYPH_W - 1), "{}", g.ch);
            assert_eq!(ink.iter().map(|c| c.1).min(), Some(0), "{}", g.ch);
            assert_eq!(ink.iter().map(|c| c.1).max(), Some(GLYPH_H - 1), "{}", g.ch);

            let start = *ink.iter().next().unwrap();
            let mut seen = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some((x, y)) = stack.pop() {
                let mut next = vec![(x + 1, y), (x, y + 1)];
                if x > 0 {
                    next.push((x - 1, y));
                }
                if y > 0 {
                    next.push((x, y - 1));
                }
                for n in next {
                    if ink.contains(&n) && seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
            assert_eq!(seen, ink, "glyph {} is not 4-connected", g.ch);
        }
    }

    #[test]
    fn templates_are_pairwise_distinct() {
        let all = glyphs();
        for (i, a) in all.iter().enumerate() {
            for b in &all[i + 1..] {
                let diff = a.bits.iter().zip(&b.bits).filter(|(p, q)| p != q).count();
                assert!(diff >= 3, "{} and {} differ in {diff} pixels", a.ch, b.ch);
            }
        }
    }
}
