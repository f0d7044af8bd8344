use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use tollgate_plate::{BoundingBox, DetectionResult};

use crate::iou::iou;
use crate::EvalError;

/// Truth boxes per image id.
pub type GroundTruthSet = BTreeMap<String, Vec<BoundingBox>>;
/// Scored detections per image id.
pub type DetectionSet = BTreeMap<String, Vec<DetectionResult>>;

/// IoU thresholds 0.50:0.05:0.95, as percentages.
pub const IOU_THRESHOLDS: [u32; 10] = [50, 55, 60, 65, 70, 75, 80, 85, 90, 95];
/// Recall sample points for interpolated AP.
pub const RECALL_POINTS: usize = 101;
/// Per-image detection cap used for AP.
pub const MAX_DETS: usize = 100;

const SMALL_MAX: u64 = 32 * 32;
const MEDIUM_MAX: u64 = 96 * 96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AreaBucket {
    All,
    Small,
    Medium,
    Large,
}

impl AreaBucket {
    pub const EVERY: [AreaBucket; 4] = [Self::All, Self::Small, Self::Medium, Self::Large];

    /// Small is `< 32²`, medium is `32²..=96²`, large is `> 96²`.
    pub fn contains(self, area: u64) -> bool {
        match self {
            Self::All => true,
            Self::Small => area < SMALL_MAX,
            Self::Medium => (SMALL_MAX..=MEDIUM_MAX).contains(&area),
            Self::Large => area > MEDIUM_MAX,
        }
    }
}

impl fmt::Display for AreaBucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::All => "all",
            Self::Small => "small",
            Self::Medium => "medium",
            Self::Large => "large",
        })
    }
}

impl std::str::FromStr for AreaBucket {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Self::All),
            "small" => Ok(Self::Small),
            "medium" => Ok(Self::Medium),
            "large" => Ok(Self::Large),
            other => Err(format!("unknown area bucket {other:?}")),
        }
    }
}

/// Eight Table-2 style figures. `None` means no truth fell in the bucket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ap_all: Option<f64>,
    pub ap_small: Option<f64>,
    pub ap_medium: Option<f64>,
    pub ap_large: Option<f64>,
    pub ar1_all: Option<f64>,
    pub ar1_small: Option<f64>,
    pub ar1_medium: Option<f64>,
    pub ar1_large: Option<f64>,
}

fn ranked(dets: &[DetectionResult]) -> Vec<&DetectionResult> {
    let mut v: Vec<&DetectionResult> = dets.iter().collect();
    // total order so that ties never depend on input order
    v.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.bbox.xmin.cmp(&b.bbox.xmin))
            .then(a.bbox.ymin.cmp(&b.bbox.ymin))
            .then(a.bbox.xmax.cmp(&b.bbox.xmax))
            .then(a.bbox.ymax.cmp(&b.bbox.ymax))
    });
    v
}

/// Greedy one-to-one matching. Detections are taken in score order (ties:
/// lower xmin first) and capped at `max_dets`; each claims the still-free
/// truth with the highest IoU at or above `iou_thresh`, lowest index on ties.
pub fn match_detections(
    dets: &[DetectionResult],
    truths: &[BoundingBox],
    iou_thresh: f64,
    max_dets: usize,
) -> Vec<(DetectionResult, Option<usize>)> {
    let mut taken = vec![false; truths.len()];
    ranked(dets)
        .into_iter()
        .take(max_dets)
        .map(|d| {
            let mut best: Option<(usize, f64)> = None;
            for (i, t) in truths.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let v = iou(&d.bbox, t);
                if v >= iou_thresh && best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
            if let Some((i, _)) = best {
                taken[i] = true;
            }
            (*d, best.map(|(i, _)| i))
        })
        .collect()
}

/// Ranked TP/FP flags pooled over all images, plus the truth count.
struct Pooled {
    hits: Vec<bool>,
    n_truths: usize,
}

fn pool(dets: &DetectionSet, truths: &GroundTruthSet, bucket: AreaBucket, thresh: f64, max_dets: usize) -> Pooled {
    let empty_d: Vec<DetectionResult> = Vec::new();
    let mut ids: Vec<&String> = truths.keys().chain(dets.keys()).collect();
    ids.sort();
    ids.dedup();

    let mut scored: Vec<(f64, usize, usize, bool)> = Vec::new();
    let mut n_truths = 0;
    for (img, id) in ids.into_iter().enumerate() {
        let kept: Vec<BoundingBox> = truths
            .get(id)
            .map(|ts| ts.iter().filter(|t| bucket.contains(t.area())).copied().collect())
            .unwrap_or_default();
        n_truths += kept.len();
        let image_dets = dets.get(id).unwrap_or(&empty_d);
        for (rank, (d, m)) in match_detections(image_dets, &kept, thresh, max_dets).into_iter().enumerate() {
            let hit = m.is_some();
            // an unmatched detection outside the bucket is neither TP nor FP
            if hit || bucket.contains(d.bbox.area()) {
                scored.push((d.score, img, rank, hit));
            }
        }
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    Pooled {
        hits: scored.into_iter().map(|s| s.3).collect(),
        n_truths,
    }
}

fn thresh_of(percent: u32) -> f64 {
    percent as f64 / 100.0
}

fn interpolated_ap(p: &Pooled) -> f64 {
    let n = p.n_truths;
    let mut tp = Vec::with_capacity(p.hits.len());
    let mut precision = Vec::with_capacity(p.hits.len());
    let mut acc = 0usize;
    for (i, &h) in p.hits.iter().enumerate() {
        acc += h as usize;
        tp.push(acc);
        precision.push(acc as f64 / (i + 1) as f64);
    }
    // make precision non-increasing from the right
    for i in (0..precision.len().saturating_sub(1)).rev() {
        if precision[i] < precision[i + 1] {
            precision[i] = precision[i + 1];
        }
    }
    let mut sum = 0.0;
    let mut j = 0;
    for r in 0..RECALL_POINTS {
        // first rank whose recall tp/n reaches r/100, compared exactly
        while j < tp.len() && tp[j] * 100 < r * n {
            j += 1;
        }
        if j < tp.len() {
            sum += precision[j];
        }
    }
    sum / RECALL_POINTS as f64
}

fn total_in_bucket(truths: &GroundTruthSet, bucket: AreaBucket) -> usize {
    truths.values().flatten().filter(|t| bucket.contains(t.area())).count()
}

/// 101-point interpolated AP over every image at a single IoU threshold.
pub fn average_precision(dets: &DetectionSet, truths: &GroundTruthSet, iou_thresh: f64) -> Result<f64, EvalError> {
    bucket_ap(dets, truths, iou_thresh, AreaBucket::All)
}

fn bucket_ap(dets: &DetectionSet, truths: &GroundTruthSet, thresh: f64, bucket: AreaBucket) -> Result<f64, EvalError> {
    let p = pool(dets, truths, bucket, thresh, MAX_DETS);
    if p.n_truths == 0 {
        return Err(EvalError::NoGroundTruth);
    }
    Ok(interpolated_ap(&p))
}

/// AP averaged over IoU 0.50:0.05:0.95 for truths in `bucket`.
pub fn mean_ap(dets: &DetectionSet, truths: &GroundTruthSet, bucket: AreaBucket) -> Result<f64, EvalError> {
    if total_in_bucket(truths, bucket) == 0 {
        return Err(EvalError::NoGroundTruth);
    }
    let mut sum = 0.0;
    for &t in &IOU_THRESHOLDS {
        sum += bucket_ap(dets, truths, thresh_of(t), bucket)?;
    }
    Ok(sum / IOU_THRESHOLDS.len() as f64)
}

/// Recall with the top `k` detections per image, averaged over IoU 0.50:0.05:0.95.
pub fn average_recall_at_k(
    dets: &DetectionSet,
    truths: &GroundTruthSet,
    k: usize,
    bucket: AreaBucket,
) -> Result<f64, EvalError> {
    let k = k.max(1);
    let n = total_in_bucket(truths, bucket);
    if n == 0 {
        return Err(EvalError::NoGroundTruth);
    }
    let mut sum = 0.0;
    for &t in &IOU_THRESHOLDS {
        let p = pool(dets, truths, bucket, thresh_of(t), k);
        let tp = p.hits.iter().filter(|&&h| h).count();
        sum += tp as f64 / n as f64;
    }
    Ok(sum / IOU_THRESHOLDS.len() as f64)
}

pub fn evaluate(dets: &DetectionSet, truths: &GroundTruthSet) -> Result<MetricsReport, EvalError> {
    if total_in_bucket(truths, AreaBucket::All) == 0 {
        return Err(EvalError::NoGroundTruth);
    }
    let ap = |b| mean_ap(dets, truths, b).ok();
    let ar = |b| average_recall_at_k(dets, truths, 1, b).ok();
    Ok(MetricsReport {
        ap_all: ap(AreaBucket::All),
        ap_small: ap(AreaBucket::Small),
        ap_medium: ap(AreaBucket::Medium),
        ap_large: ap(AreaBucket::Large),
        ar1_all: ar(AreaBucket::All),
        ar1_small: ar(AreaBucket::Small),
        ar1_medium: ar(AreaBucket::Medium),
        ar1_large: ar(AreaBucket::Large),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: u32, y0: u32, x1: u32, y1: u32) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    fn det(b: BoundingBox, score: f64) -> DetectionResult {
        DetectionResult { bbox: b, score }
    }

    fn one(id: &str, truths: Vec<BoundingBox>, dets: Vec<DetectionResult>) -> (DetectionSet, GroundTruthSet) {
        (
            BTreeMap::from([(id.to_string(), dets)]),
            BTreeMap::from([(id.to_string(), truths)]),
        )
    }

    #[test]
    fn bucket_edges() {
        assert!(AreaBucket::Small.contains(1023));
        assert!(AreaBucket::Medium.contains(1024));
        assert!(AreaBucket::Medium.contains(9216));
        assert!(AreaBucket::Large.contains(9217));
        assert!(!AreaBucket::Small.contains(1024));
    }

    #[test]
    fn matching_basics() {
        let t = bx(0, 0, 10, 10);
        let m = match_detections(&[det(t, 0.9)], &[t], 0.5, 10);
        assert_eq!(m[0].1, Some(0));
        let m = match_detections(&[det(t, 0.9)], &[], 0.5, 10);
        assert_eq!(m[0].1, None);
    }

    #[test]
    fn higher_score_claims_shared_truth() {
        let t = bx(0, 0, 10, 10);
        let low = det(bx(0, 0, 10, 9), 0.3);
        let high = det(bx(0, 0, 10, 8), 0.8);
        let m = match_detections(&[low.clone(), high.clone()], &[t], 0.5, 10);
        // two possible one-to-one assignments; greedy by score picks the second
        assert_eq!(m[0].0, high);
        assert_eq!(m[0].1, Some(0));
        assert_eq!(m[1].0, low);
        assert_eq!(m[1].1, None);
    }

    #[test]
    fn score_ties_break_on_xmin_and_cap() {
        let a = det(bx(5, 0, 9, 4), 0.5);
        let b = det(bx(1, 0, 5, 4), 0.5);
        let m = match_detections(&[a, b.clone()], &[], 0.5, 1);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].0, b);
    }

    #[test]
    fn ap_examples() {
        let t = bx(0, 0, 10, 10);
        let far = bx(50, 50, 60, 60);
        let (d, g) = one("a", vec![t], vec![det(t, 0.9)]);
        assert_eq!(average_precision(&d, &g, 0.5).unwrap(), 1.0);
        let (d, g) = one("a", vec![t], vec![]);
        assert_eq!(average_precision(&d, &g, 0.5).unwrap(), 0.0);
        let (d, g) = one("a", vec![t], vec![det(t, 0.9), det(far, 0.1)]);
        assert_eq!(average_precision(&d, &g, 0.5).unwrap(), 1.0);
        // ranked [FP, TP]: precision 0.5 is reached only at recall 1, and
        // right-to-left interpolation carries it to all 101 samples
        let (d, g) = one("a", vec![t], vec![det(far, 0.9), det(t, 0.1)]);
        let hand = (0..101).map(|_| 0.5).sum::<f64>() / 101.0;
        assert_eq!(average_precision(&d, &g, 0.5).unwrap(), hand);
        let (d, g) = one("a", vec![], vec![det(t, 0.9)]);
        assert!(matches!(average_precision(&d, &g, 0.5), Err(EvalError::NoGroundTruth)));
    }

    #[test]
    fn iou_exactly_three_quarters() {
        let t = bx(0, 0, 100, 100);
        let (d, g) = one("a", vec![t], vec![det(bx(0, 0, 100, 75), 0.9)]);
        let hand: f64 = [1., 1., 1., 1., 1., 1., 0., 0., 0., 0.].iter().sum::<f64>() / 10.0;
        assert_eq!(mean_ap(&d, &g, AreaBucket::All).unwrap(), hand);
        assert_eq!(hand, 0.6);
    }

    #[test]
    fn ar1_counts_only_the_top_detection() {
        let t = bx(0, 0, 100, 100);
        // IoU 0.55 for the top-scored, 0.95 for the runner-up
        let top = det(bx(0, 0, 100, 55), 0.9);
        let second = det(bx(0, 0, 100, 95), 0.8);
        let (d, g) = one("a", vec![t], vec![top, second]);
        let hand: f64 = [1., 1., 0., 0., 0., 0., 0., 0., 0., 0.].iter().sum::<f64>() / 10.0;
        assert_eq!(average_recall_at_k(&d, &g, 1, AreaBucket::All).unwrap(), hand);
        assert_eq!(average_recall_at_k(&d, &g, 2, AreaBucket::All).unwrap(), 1.0);
    }

    #[test]
    fn bucket_filtered_report() {
        let big = bx(0, 0, 120, 100);
        let small = bx(200, 200, 220, 210);
        let d = BTreeMap::from([
            ("a".to_string(), vec![det(big, 0.9)]),
            ("b".to_string(), vec![det(small, 0.8)]),
        ]);
        let g = BTreeMap::from([("a".to_string(), vec![big]), ("b".to_string(), vec![small])]);
        let r = evaluate(&d, &g).unwrap();
        assert_eq!(r.ap_all, Some(1.0));
        assert_eq!(r.ap_large, Some(1.0));
        assert_eq!(r.ap_small, Some(1.0));
        assert_eq!(r.ap_medium, None);
        assert_eq!(r.ar1_medium, None);
        let json = serde_json::to_value(r).unwrap();
        assert!(json["ap_medium"].is_null());
    }

    #[test]
    fn out_of_bucket_false_positive_is_ignored() {
        let big = bx(0, 0, 120, 100);
        let stray_small = bx(300, 300, 310, 310);
        let (d, g) = one("a", vec![big], vec![det(stray_small, 0.95), det(big, 0.5)]);
        assert_eq!(mean_ap(&d, &g, AreaBucket::Large).unwrap(), 1.0);
        assert!(mean_ap(&d, &g, AreaBucket::All).unwrap() < 1.0);
        assert!(mean_ap(&d, &g, AreaBucket::Small).is_err());
    }

    #[test]
    fn empty_truths_fail_evaluate() {
        let g: GroundTruthSet = BTreeMap::from([("a".to_string(), vec![])]);
        assert!(matches!(evaluate(&DetectionSet::new(), &g), Err(EvalError::NoGroundTruth)));
    }
}
