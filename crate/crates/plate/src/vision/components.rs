use super::BinaryImage;
use crate::bitmap::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Component {
    pub bbox: BoundingBox,
    pub pixel_count: u32,
}

/// 4-connected labelling of ink pixels. `labels[i]` is 0 for background,
/// otherwise the 1-based index into the returned components. Components are
/// numbered in raster order of their first pixel.
pub fn label_components(bin: &BinaryImage) -> (Vec<u32>, Vec<Component>) {
    let (w, h) = (bin.width(), bin.height());
    let mut labels = vec![0u32; w * h];
    let mut comps = Vec::new();
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !bin.bits()[start] || labels[start] != 0 {
            continue;
        }
        let label = comps.len() as u32 + 1;
        let (sx, sy) = ((start % w) as u32, (start / w) as u32);
        let mut bbox = BoundingBox {
            xmin: sx,
            ymin: sy,
            xmax: sx + 1,
            ymax: sy + 1,
        };
        let mut count = 0u32;
        labels[start] = label;
        stack.push(start);
        while let Some(i) = stack.pop() {
            count += 1;
            let (x, y) = (i % w, i / w);
            bbox.xmin = bbox.xmin.min(x as u32);
            bbox.ymin = bbox.ymin.min(y as u32);
            bbox.xmax = bbox.xmax.max(x as u32 + 1);
            bbox.ymax = bbox.ymax.max(y as u32 + 1);
            let mut visit = |j: usize| {
                if bin.bits()[j] && labels[j] == 0 {
                    labels[j] = label;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < w {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - w);
            }
            if y + 1 < h {
                visit(i + w);
            }
        }
        comps.push(Component {
            bbox,
            pixel_count: count,
        });
    }
    (labels, comps)
}

pub fn connected_components(bin: &BinaryImage) -> Vec<Component> {
    label_components(bin).1
}
