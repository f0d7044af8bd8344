use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use tollgate_plate::{BoundingBox, DetectionResult};

use crate::eval::{DetectionSet, GroundTruthSet};
use crate::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredBox {
    pub xmin: u32,
    pub ymin: u32,
    pub xmax: u32,
    pub ymax: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

/// One element of the interchange array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageBoxes {
    pub image_id: String,
    pub boxes: Vec<ScoredBox>,
}

impl ScoredBox {
    fn to_bbox(self) -> Result<BoundingBox, EvalError> {
        Ok(BoundingBox::new(self.xmin, self.ymin, self.xmax, self.ymax)?)
    }
}

/// Parses the interchange array. Boxes carrying a score are detections and
/// the score must lie in `[0, 1]`; boxes without one are truth.
pub fn read_boxes_json(reader: impl Read) -> Result<(GroundTruthSet, DetectionSet), EvalError> {
    let images: Vec<ImageBoxes> = serde_json::from_reader(reader)?;
    let mut truths: GroundTruthSet = BTreeMap::new();
    let mut dets: DetectionSet = BTreeMap::new();
    for (i, img) in images.into_iter().enumerate() {
        let t = truths.entry(img.image_id.clone()).or_default();
        let d = dets.entry(img.image_id.clone()).or_default();
        for b in img.boxes {
            match b.score {
                Some(score) if !(0.0..=1.0).contains(&score) => {
                    return Err(EvalError::Parse {
                        line: i + 1,
                        reason: format!("score {score} outside [0, 1] for {}", img.image_id),
                    })
                }
                Some(score) => d.push(DetectionResult {
                    bbox: b.to_bbox()?,
                    score,
                }),
                None => t.push(b.to_bbox()?),
            }
        }
    }
    truths.retain(|_, v| !v.is_empty());
    dets.retain(|_, v| !v.is_empty());
    Ok((truths, dets))
}

/// Writes truths (no score) and detections (with score) for the same images.
pub fn write_boxes_json(writer: impl Write, truths: &GroundTruthSet, dets: &DetectionSet) -> Result<(), EvalError> {
    let mut by_image: BTreeMap<&str, Vec<ScoredBox>> = BTreeMap::new();
    for (id, boxes) in truths {
        by_image.entry(id).or_default().extend(boxes.iter().map(|b| plain(b, None)));
    }
    for (id, ds) in dets {
        by_image
            .entry(id)
            .or_default()
            .extend(ds.iter().map(|d| plain(&d.bbox, Some(d.score))));
    }
    let images: Vec<ImageBoxes> = by_image
        .into_iter()
        .map(|(id, boxes)| ImageBoxes {
            image_id: id.to_string(),
            boxes,
        })
        .collect();
    serde_json::to_writer_pretty(writer, &images)?;
    Ok(())
}

fn plain(b: &BoundingBox, score: Option<f64>) -> ScoredBox {
    ScoredBox {
        xmin: b.xmin,
        ymin: b.ymin,
        xmax: b.xmax,
        ymax: b.ymax,
        score,
    }
}
