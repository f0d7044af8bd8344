use serde::{Deserialize, Serialize};

use super::{histogram, label_components, otsu_threshold, BinaryImage, DetectionResult, VisionError};
use crate::bitmap::{BoundingBox, GrayBitmap};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    /// Minimum candidate box area in pixels.
    pub min_area: u64,
    /// Accepted width/height range.
    pub aspect_min: f64,
    pub aspect_max: f64,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            min_area: 400,
            aspect_min: 1.5,
            aspect_max: 8.0,
        }
    }
}

/// Smallest gap between class means for a split to count as real contrast.
pub(crate) const MIN_CONTRAST: f64 = 48.0;
/// Edge rows/columns of a region covered less than this are noise fringe.
const FRINGE_COVER: f64 = 0.5;
/// Ink fraction range a plate with a row of characters falls into.
const FILL_BAND: (f64, f64) = (0.08, 0.5);
/// A glyph is at least this fraction of the plate height.
const MIN_GLYPH_HEIGHT: f64 = 0.4;
const MIN_GLYPH_PIXELS: u32 = 4;
/// Row merge: vertical overlap relative to the shorter box.
const ROW_OVERLAP: f64 = 0.6;
/// Row merge: horizontal gap in median character widths.
const ROW_GAP_WIDTHS: u32 = 2;

/// Groups boxes into text rows. Two boxes join when their vertical extents
/// overlap by at least 60% of the shorter one and the horizontal gap between
/// them is at most twice the median box width. Returns each row's box with
/// its member count, ordered by xmin then ymin.
pub fn row_merge(boxes: &[BoundingBox]) -> Vec<(BoundingBox, usize)> {
    if boxes.is_empty() {
        return Vec::new();
    }
    let mut widths: Vec<u32> = boxes.iter().map(BoundingBox::width).collect();
    widths.sort_unstable();
    let max_gap = ROW_GAP_WIDTHS * widths[(widths.len() - 1) / 2];

    let mut parent: Vec<usize> = (0..boxes.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            let (a, b) = (&boxes[i], &boxes[j]);
            let overlap = a.ymax.min(b.ymax).saturating_sub(a.ymin.max(b.ymin));
            let shorter = a.height().min(b.height());
            if (overlap as f64) < ROW_OVERLAP * shorter as f64 {
                continue;
            }
            let gap = b.xmin.saturating_sub(a.xmax).max(a.xmin.saturating_sub(b.xmax));
            if gap <= max_gap {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut rows: Vec<(usize, BoundingBox, usize)> = Vec::new();
    for i in 0..boxes.len() {
        let root = find(&mut parent, i);
        match rows.iter_mut().find(|r| r.0 == root) {
            Some(row) => {
                row.1 = row.1.union(&boxes[i]);
                row.2 += 1;
            }
            None => rows.push((root, boxes[i], 1)),
        }
    }
    let mut out: Vec<(BoundingBox, usize)> = rows.into_iter().map(|(_, b, n)| (b, n)).collect();
    out.sort_by_key(|(b, _)| (b.xmin, b.ymin));
    out
}

fn band_plausibility(value: f64, (lo, hi): (f64, f64)) -> f64 {
    if value < lo {
        value / lo
    } else if value > hi {
        ((1.0 - value) / (1.0 - hi)).max(0.0)
    } else {
        1.0
    }
}

/// Scores one bright region; `None` when it holds no glyph row.
fn score_candidate(scene: &GrayBitmap, bbox: &BoundingBox, threshold: u8, params: &DetectParams) -> Option<f64> {
    let crop = scene.crop(bbox).ok()?;
    let ink = BinaryImage::new(
        crop.width(),
        crop.height(),
        crop.pixels().iter().map(|&p| p < threshold).collect(),
    );
    let min_h = (MIN_GLYPH_HEIGHT * crop.height() as f64).ceil() as u32;
    let glyphs: Vec<BoundingBox> = label_components(&ink)
        .1
        .into_iter()
        .filter(|c| c.pixel_count >= MIN_GLYPH_PIXELS && c.bbox.height() >= min_h)
        .filter(|c| c.bbox.height() < crop.height() as u32)
        .map(|c| c.bbox)
        .collect();
    if row_merge(&glyphs).is_empty() {
        return None;
    }

    let fill = ink.ink_count() as f64 / bbox.area() as f64;
    let aspect = bbox.width() as f64 / bbox.height() as f64;
    let ideal = (params.aspect_min * params.aspect_max).sqrt();
    let aspect_fit = aspect.min(ideal) / aspect.max(ideal);
    let score = (aspect_fit * band_plausibility(fill, FILL_BAND)).sqrt();
    (score > 0.0).then_some(score)
}

/// Plate candidates, best first.
///
/// The scene is split with Otsu's threshold, then once more with Otsu over
/// the bright class, so a plate brighter than its surroundings separates
/// whether the first split falls below or above the background shade. At
/// each level the ink-inverted mask (bright pixels) is labelled; regions
/// passing the area and aspect bounds must contain a row of glyph
/// components. Score is the geometric mean of aspect fit and ink-fill
/// plausibility.
pub fn detect_plate(scene: &GrayBitmap, params: &DetectParams) -> Vec<DetectionResult> {
    let hist = histogram(scene);
    let mut levels = Vec::new();
    if let Some(first) = contrast_split(&hist) {
        levels.push(first);
        let mut upper = [0u64; 256];
        upper[first as usize..].copy_from_slice(&hist[first as usize..]);
        if let Some(second) = contrast_split(&upper) {
            levels.push(second);
        }
    }

    let mut found: Vec<DetectionResult> = Vec::new();
    for &t in &levels {
        let bright = BinaryImage::new(
            scene.width(),
            scene.height(),
            scene.pixels().iter().map(|&p| p >= t).collect(),
        );
        let (labels, comps) = label_components(&bright);
        for (id, comp) in comps.iter().enumerate() {
            if comp.bbox.area() < params.min_area {
                continue;
            }
            let b = trim_fringe(&labels, scene.width(), id as u32 + 1, comp.bbox);
            if b.area() < params.min_area {
                continue;
            }
            let aspect = b.width() as f64 / b.height() as f64;
            if aspect < params.aspect_min || aspect > params.aspect_max {
                continue;
            }
            let Some(score) = score_candidate(scene, &b, t, params) else {
                continue;
            };
            match found.iter_mut().find(|d| d.bbox == b) {
                Some(d) => d.score = d.score.max(score),
                None => found.push(DetectionResult { bbox: b, score }),
            }
        }
    }
    found.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.bbox.xmin.cmp(&b.bbox.xmin))
            .then(a.bbox.ymin.cmp(&b.bbox.ymin))
    });
    found
}

/// Otsu split of `hist`, kept only when the two class means are at least
/// `MIN_CONTRAST` apart.
pub(crate) fn contrast_split(hist: &[u64; 256]) -> Option<u8> {
    let t = otsu_threshold(hist);
    if t == 0 {
        return None;
    }
    let mean = |r: std::ops::Range<usize>| {
        let n: u64 = hist[r.clone()].iter().sum();
        let s: u64 = r.map(|v| v as u64 * hist[v]).sum();
        s as f64 / n.max(1) as f64
    };
    (mean(t as usize..256) - mean(0..t as usize) >= MIN_CONTRAST).then_some(t)
}

/// Pulls each side of `bbox` inwards while that edge line is mostly not part
/// of component `label`, which strips speckle glued to a region's border.
fn trim_fringe(labels: &[u32], width: usize, label: u32, bbox: BoundingBox) -> BoundingBox {
    let (mut x0, mut y0, mut x1, mut y1) = (bbox.xmin, bbox.ymin, bbox.xmax, bbox.ymax);
    let hit = |x: u32, y: u32| labels[y as usize * width + x as usize] == label;
    let sparse = |n: usize, len: u32| (n as f64) < FRINGE_COVER * len as f64;
    loop {
        let mut moved = false;
        if y1 - y0 > 1 && sparse((x0..x1).filter(|&x| hit(x, y0)).count(), x1 - x0) {
            y0 += 1;
            moved = true;
        }
        if y1 - y0 > 1 && sparse((x0..x1).filter(|&x| hit(x, y1 - 1)).count(), x1 - x0) {
            y1 -= 1;
            moved = true;
        }
        if x1 - x0 > 1 && sparse((y0..y1).filter(|&y| hit(x0, y)).count(), y1 - y0) {
            x0 += 1;
            moved = true;
        }
        if x1 - x0 > 1 && sparse((y0..y1).filter(|&y| hit(x1 - 1, y)).count(), y1 - y0) {
            x1 -= 1;
            moved = true;
        }
        if !moved {
            return BoundingBox { xmin: x0, ymin: y0, xmax: x1, ymax: y1 };
        }
    }
}

pub fn best_plate(scene: &GrayBitmap, params: &DetectParams) -> Result<DetectionResult, VisionError> {
    detect_plate(scene, params)
        .into_iter()
        .next()
        .ok_or(VisionError::NoPlateFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_scenes, CorpusConfig};

    fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
        let inter = a.intersection_area(b) as f64;
        inter / (a.area() as f64 + b.area() as f64 - inter)
    }

    #[test]
    fn blank_canvas_has_no_plate() {
        let blank = GrayBitmap::filled(320, 240, 128).unwrap();
        assert!(detect_plate(&blank, &DetectParams::default()).is_empty());
        assert!(matches!(
            best_plate(&blank, &DetectParams::default()),
            Err(VisionError::NoPlateFound)
        ));
    }

    #[test]
    fn row_merge_rule() {
        let b = |x0, y0, x1, y1| BoundingBox::new(x0, y0, x1, y1).unwrap();
        // gap 20 equals 2 x median width 10: merged
        let rows = row_merge(&[b(0, 0, 10, 20), b(30, 2, 40, 22)]);
        assert_eq!(rows, vec![(b(0, 0, 40, 22), 2)]);
        // gap 21: separate
        assert_eq!(row_merge(&[b(0, 0, 10, 20), b(31, 0, 41, 20)]).len(), 2);
        // vertical overlap 11/20 < 60%: separate
        assert_eq!(row_merge(&[b(0, 0, 10, 20), b(12, 9, 22, 29)]).len(), 2);
        // overlap 12/20 = 60%: merged
        assert_eq!(row_merge(&[b(0, 0, 10, 20), b(12, 8, 22, 28)]).len(), 1);
    }

    #[test]
    fn detections_are_sound() {
        let scenes = generate_scenes(&CorpusConfig {
            count: 20,
            noise_rate: 0.05,
            seed: 77,
            ..CorpusConfig::default()
        })
        .unwrap();
        for s in &scenes {
            let dets = detect_plate(&s.image, &DetectParams::default());
            for w in dets.windows(2) {
                assert!(w[0].score >= w[1].score);
            }
            for d in &dets {
                assert!((0.0..=1.0).contains(&d.score));
                assert!(d.bbox.check_within(s.image.width(), s.image.height()).is_ok());
            }
        }
    }

    #[test]
    fn clean_scenes_are_found_exactly() {
        let scenes = generate_scenes(&CorpusConfig {
            count: 100,
            seed: 5,
            ..CorpusConfig::default()
        })
        .unwrap();
        for s in &scenes {
            let top = best_plate(&s.image, &DetectParams::default()).unwrap();
            assert!(iou(&top.bbox, &s.truth) >= 0.9, "{}: {} vs {}", s.image_id, top.bbox, s.truth);
        }
    }
}
