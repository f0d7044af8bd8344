//! Brute-force reference for mean AP and AR@k. Shares no code with the
//! evaluator: IoU comes from row-by-row pixel counting, matchings from
//! enumerating every one-to-one assignment, interpolated precision from its
//! max-over-prefixes definition.

#![allow(dead_code)]

use std::cmp::Ordering;

use rand::Rng;
use tollgate_metrics::{AreaBucket, DetectionSet, GroundTruthSet};
use tollgate_plate::{BoundingBox, DetectionResult};

/// IoU as an exact fraction (intersection, union) in pixels.
pub fn iou_frac(a: &BoundingBox, b: &BoundingBox) -> (u64, u64) {
    let mut inter = 0;
    for y in a.ymin..a.ymax {
        if y < b.ymin || y >= b.ymax {
            continue;
        }
        for x in a.xmin..a.xmax {
            if x >= b.xmin && x < b.xmax {
                inter += 1;
            }
        }
    }
    let area = |r: &BoundingBox| (r.xmin..r.xmax).count() as u64 * (r.ymin..r.ymax).count() as u64;
    (inter, area(a) + area(b) - inter)
}

fn in_bucket(bucket: AreaBucket, area: u64) -> bool {
    match bucket {
        AreaBucket::All => true,
        AreaBucket::Small => area < 1024,
        AreaBucket::Medium => area >= 1024 && area <= 9216,
        AreaBucket::Large => area > 9216,
    }
}

fn area(b: &BoundingBox) -> u64 {
    (b.xmax - b.xmin) as u64 * (b.ymax - b.ymin) as u64
}

/// Selection sort by score desc, then xmin, ymin, xmax, ymax.
fn rank(dets: &[DetectionResult]) -> Vec<DetectionResult> {
    let mut left: Vec<DetectionResult> = dets.to_vec();
    let mut out = Vec::new();
    while !left.is_empty() {
        let mut best = 0;
        for i in 1..left.len() {
            let (a, b) = (&left[i], &left[best]);
            let key = |d: &DetectionResult| (d.bbox.xmin, d.bbox.ymin, d.bbox.xmax, d.bbox.ymax);
            if a.score > b.score || (a.score == b.score && key(a) < key(b)) {
                best = i;
            }
        }
        out.push(left.remove(best));
    }
    out
}

/// Per-detection preference key: unmatched lowest, then by IoU, then by
/// lower truth index.
#[derive(Clone, Copy)]
enum Choice {
    None,
    Truth { inter: u64, union: u64, idx: usize },
}

fn cmp_choice(a: &Choice, b: &Choice) -> Ordering {
    match (a, b) {
        (Choice::None, Choice::None) => Ordering::Equal,
        (Choice::None, _) => Ordering::Less,
        (_, Choice::None) => Ordering::Greater,
        (
            Choice::Truth { inter: i1, union: u1, idx: t1 },
            Choice::Truth { inter: i2, union: u2, idx: t2 },
        ) => ((*i1 as u128) * (*u2 as u128))
            .cmp(&((*i2 as u128) * (*u1 as u128)))
            .then(t2.cmp(t1)),
    }
}

/// Every injective partial assignment of detections to truths that only
/// uses pairs at or above `pct` percent IoU; returns the one whose sequence
/// of per-detection choices is lexicographically greatest.
fn best_assignment(dets: &[DetectionResult], truths: &[BoundingBox], pct: u64) -> Vec<bool> {
    fn go(
        i: usize,
        dets: &[DetectionResult],
        truths: &[BoundingBox],
        pct: u64,
        used: &mut Vec<bool>,
        cur: &mut Vec<Choice>,
        best: &mut Option<Vec<Choice>>,
    ) {
        if i == dets.len() {
            let better = match best {
                None => true,
                Some(b) => {
                    let mut ord = Ordering::Equal;
                    for (x, y) in cur.iter().zip(b.iter()) {
                        ord = cmp_choice(x, y);
                        if ord != Ordering::Equal {
                            break;
                        }
                    }
                    ord == Ordering::Greater
                }
            };
            if better {
                *best = Some(cur.clone());
            }
            return;
        }
        cur.push(Choice::None);
        go(i + 1, dets, truths, pct, used, cur, best);
        cur.pop();
        for t in 0..truths.len() {
            if used[t] {
                continue;
            }
            let (inter, union) = iou_frac(&dets[i].bbox, &truths[t]);
            if inter == 0 || inter * 100 < pct * union {
                continue;
            }
            used[t] = true;
            cur.push(Choice::Truth { inter, union, idx: t });
            go(i + 1, dets, truths, pct, used, cur, best);
            cur.pop();
            used[t] = false;
        }
    }
    let mut best = None;
    go(0, dets, truths, pct, &mut vec![false; truths.len()], &mut Vec::new(), &mut best);
    best.unwrap()
        .into_iter()
        .map(|c| matches!(c, Choice::Truth { .. }))
        .collect()
}

/// Pooled (score, image order, rank, hit) list and bucket truth count.
fn pooled(dets: &DetectionSet, truths: &GroundTruthSet, bucket: AreaBucket, pct: u64, cap: usize) -> (Vec<bool>, u64) {
    let mut ids: Vec<String> = truths.keys().cloned().collect();
    for k in dets.keys() {
        if !ids.contains(k) {
            ids.push(k.clone());
        }
    }
    ids.sort();
    let mut entries: Vec<(f64, usize, usize, bool)> = Vec::new();
    let mut n = 0u64;
    for (img, id) in ids.iter().enumerate() {
        let ts: Vec<BoundingBox> = truths
            .get(id)
            .map(|v| v.iter().filter(|t| in_bucket(bucket, area(t))).copied().collect())
            .unwrap_or_default();
        n += ts.len() as u64;
        let ranked: Vec<DetectionResult> = rank(dets.get(id).map(|v| v.as_slice()).unwrap_or(&[]))
            .into_iter()
            .take(cap)
            .collect();
        let hits = best_assignment(&ranked, &ts, pct);
        for (r, (d, hit)) in ranked.iter().zip(hits).enumerate() {
            if hit || in_bucket(bucket, area(&d.bbox)) {
                entries.push((d.score, img, r, hit));
            }
        }
    }
    // insertion sort into score desc, image, rank
    let mut order: Vec<(f64, usize, usize, bool)> = Vec::new();
    for e in entries {
        let pos = order
            .iter()
            .position(|o| e.0 > o.0 || (e.0 == o.0 && (e.1, e.2) < (o.1, o.2)))
            .unwrap_or(order.len());
        order.insert(pos, e);
    }
    (order.into_iter().map(|e| e.3).collect(), n)
}

fn ap_definition(hits: &[bool], n: u64) -> f64 {
    let mut total = 0.0;
    for i in 0..=100u64 {
        let mut best: f64 = 0.0;
        let mut tp = 0u64;
        for (k, &h) in hits.iter().enumerate() {
            tp += h as u64;
            if tp * 100 >= i * n {
                best = best.max(tp as f64 / (k + 1) as f64);
            }
        }
        total += best;
    }
    total / 101.0
}

pub fn oracle_mean_ap(dets: &DetectionSet, truths: &GroundTruthSet, bucket: AreaBucket) -> Option<f64> {
    let mut sum = 0.0;
    for pct in (50..=95).step_by(5) {
        let (hits, n) = pooled(dets, truths, bucket, pct, 100);
        if n == 0 {
            return None;
        }
        sum += ap_definition(&hits, n);
    }
    Some(sum / 10.0)
}

pub fn oracle_ar(dets: &DetectionSet, truths: &GroundTruthSet, k: usize, bucket: AreaBucket) -> Option<f64> {
    let mut sum = 0.0;
    for pct in (50..=95).step_by(5) {
        let (hits, n) = pooled(dets, truths, bucket, pct, k);
        if n == 0 {
            return None;
        }
        sum += hits.iter().filter(|&&h| h).count() as f64 / n as f64;
    }
    Some(sum / 10.0)
}

fn random_box<R: Rng>(rng: &mut R) -> BoundingBox {
    // side lengths spread so that all three area buckets show up
    let side = |rng: &mut R| match rng.gen_range(0..3) {
        0 => rng.gen_range(4..30),
        1 => rng.gen_range(30..90),
        _ => rng.gen_range(90..130),
    };
    let (w, h) = (side(rng), side(rng));
    let (x, y) = (rng.gen_range(0..40), rng.gen_range(0..40));
    BoundingBox::new(x, y, x + w, y + h).unwrap()
}

fn near<R: Rng>(rng: &mut R, t: &BoundingBox) -> BoundingBox {
    let j = |rng: &mut R, v: u32, d: u32| (v as i64 + rng.gen_range(-(d as i64)..=d as i64)).max(0) as u32;
    let dw = (t.xmax - t.xmin) / 4 + 1;
    let dh = (t.ymax - t.ymin) / 4 + 1;
    let (x0, y0) = (j(rng, t.xmin, dw), j(rng, t.ymin, dh));
    let (x1, y1) = (j(rng, t.xmax, dw).max(x0 + 1), j(rng, t.ymax, dh).max(y0 + 1));
    BoundingBox::new(x0, y0, x1, y1).unwrap()
}

/// Up to 3 images, 3 truths and 4 detections each. Scores come from a
/// coarse grid so ties are common.
pub fn random_instance<R: Rng>(rng: &mut R) -> (DetectionSet, GroundTruthSet) {
    let mut dets = DetectionSet::new();
    let mut truths = GroundTruthSet::new();
    for img in 0..rng.gen_range(1..=3) {
        let id = format!("img_{img}");
        let ts: Vec<BoundingBox> = (0..rng.gen_range(0..=3)).map(|_| random_box(rng)).collect();
        let ds: Vec<DetectionResult> = (0..rng.gen_range(0..=4))
            .map(|_| {
                let bbox = if !ts.is_empty() && rng.gen_bool(0.7) {
                    let t = ts[rng.gen_range(0..ts.len())];
                    if rng.gen_bool(0.2) { t } else { near(rng, &t) }
                } else {
                    random_box(rng)
                };
                DetectionResult {
                    bbox,
                    score: rng.gen_range(0..=5) as f64 / 5.0,
                }
            })
            .collect();
        truths.insert(id.clone(), ts);
        dets.insert(id, ds);
    }
    (dets, truths)
}
