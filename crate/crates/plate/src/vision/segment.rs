use super::{histogram, label_components, otsu_threshold, BinaryImage, VisionError};
use crate::bitmap::{BoundingBox, GrayBitmap};

/// Components shorter than this fraction of the crop are speckle.
const SPECKLE_HEIGHT: f64 = 0.25;
/// Survivors must reach half the median component height.
const MEDIAN_HEIGHT_RATIO: f64 = 0.5;
/// Class means closer than this are paper texture, not print.
const MIN_CONTRAST: f64 = 48.0;
/// Boxes whose horizontal overlap exceeds this share of the narrower box merge.
const MERGE_OVERLAP: f64 = 0.5;

/// Character boxes in the crop, left to right, together with the ink mask
/// they were cut from.
pub fn segment_mask(plate_crop: &GrayBitmap) -> Result<(Vec<BoundingBox>, BinaryImage), VisionError> {
    let hist = histogram(plate_crop);
    let t = otsu_threshold(&hist) as usize;
    let mean = |r: std::ops::Range<usize>| {
        let n: u64 = hist[r.clone()].iter().sum();
        let s: u64 = r.map(|v| v as u64 * hist[v]).sum();
        s as f64 / n.max(1) as f64
    };
    if t == 0 || mean(t..256) - mean(0..t) < MIN_CONTRAST {
        return Err(VisionError::NoGlyphs);
    }
    let ink = BinaryImage::new(
        plate_crop.width(),
        plate_crop.height(),
        plate_crop.pixels().iter().map(|&p| (p as usize) < t).collect(),
    );
    let min_h = ((SPECKLE_HEIGHT * plate_crop.height() as f64).floor() as u32).max(1);
    let mut boxes: Vec<BoundingBox> = label_components(&ink)
        .1
        .into_iter()
        .map(|c| c.bbox)
        .filter(|b| b.height() >= min_h)
        .collect();
    if boxes.is_empty() {
        return Err(VisionError::NoGlyphs);
    }
    let mut heights: Vec<u32> = boxes.iter().map(BoundingBox::height).collect();
    heights.sort_unstable();
    let median = heights[(heights.len() - 1) / 2] as f64;
    boxes.retain(|b| b.height() as f64 >= MEDIAN_HEIGHT_RATIO * median);
    boxes.sort_by_key(|b| (b.xmin, b.ymin));

    let mut merged: Vec<BoundingBox> = Vec::with_capacity(boxes.len());
    for b in boxes {
        if let Some(last) = merged.last_mut() {
            let overlap = last.xmax.min(b.xmax).saturating_sub(last.xmin.max(b.xmin));
            let narrower = last.width().min(b.width());
            if overlap as f64 > MERGE_OVERLAP * narrower as f64 {
                *last = last.union(&b);
                continue;
            }
        }
        merged.push(b);
    }
    // a merge can widen a box over its left neighbour's xmin only if boxes
    // were unsorted, which they are not; xmin stays strictly increasing
    merged.dedup_by_key(|b| b.xmin);
    if merged.is_empty() {
        return Err(VisionError::NoGlyphs);
    }
    Ok((merged, ink))
}

/// Character boxes in left-to-right order.
pub fn segment_chars(plate_crop: &GrayBitmap) -> Result<Vec<BoundingBox>, VisionError> {
    segment_mask(plate_crop).map(|(boxes, _)| boxes)
}
