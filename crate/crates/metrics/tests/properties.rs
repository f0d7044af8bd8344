mod oracle;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tollgate_metrics::{evaluate, iou, mean_ap, AreaBucket, DetectionSet, GroundTruthSet};
use tollgate_plate::{BoundingBox, DetectionResult};

fn instance(seed: u64) -> (DetectionSet, GroundTruthSet) {
    oracle::random_instance(&mut ChaCha8Rng::seed_from_u64(seed))
}

/// No two truths in one image overlap at the lowest IoU threshold.
fn separated(truths: &GroundTruthSet) -> bool {
    truths.values().all(|ts| {
        ts.iter()
            .enumerate()
            .all(|(i, a)| ts[i + 1..].iter().all(|b| iou(a, b) < 0.5))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn report_values_lie_in_unit_interval(seed in any::<u64>()) {
        let (dets, truths) = instance(seed);
        if let Ok(r) = evaluate(&dets, &truths) {
            for v in [r.ap_all, r.ap_small, r.ap_medium, r.ap_large, r.ar1_all, r.ar1_small, r.ar1_medium, r.ar1_large]
                .into_iter()
                .flatten()
            {
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn top_ranked_exact_hit_never_lowers_ap(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (mut dets, truths) = instance(seed);
        // only truths no existing detection can reach, so nothing is displaced
        let all: Vec<(String, BoundingBox)> = truths
            .iter()
            .flat_map(|(id, ts)| ts.iter().map(move |t| (id.clone(), *t)))
            .filter(|(id, t)| dets.get(id).map_or(true, |ds| ds.iter().all(|d| iou(&d.bbox, t) < 0.5)))
            .collect();
        prop_assume!(!all.is_empty());
        let before = mean_ap(&dets, &truths, AreaBucket::All).unwrap();
        let (id, t) = pick.get(&all).clone();
        // score above the coarse grid's maximum puts it first everywhere
        dets.entry(id).or_default().push(DetectionResult { bbox: t, score: 1.0 + f64::EPSILON });
        let after = mean_ap(&dets, &truths, AreaBucket::All).unwrap();
        prop_assert!(after >= before - 1e-12, "{before} -> {after}");
    }

    #[test]
    fn all_large_boxes_make_all_equal_large(seed in any::<u64>()) {
        // small detections are FPs for "all" but ignored for "large", so the
        // detections are restricted along with the truths
        let (dets, truths) = instance(seed);
        let large: GroundTruthSet = truths
            .into_iter()
            .map(|(id, ts)| (id, ts.into_iter().filter(|t| t.area() > 96 * 96).collect::<Vec<_>>()))
            .collect();
        let dets: DetectionSet = dets
            .into_iter()
            .map(|(id, ds)| (id, ds.into_iter().filter(|d| d.bbox.area() > 96 * 96).collect::<Vec<_>>()))
            .collect();
        prop_assume!(large.values().any(|v| !v.is_empty()));
        let r = evaluate(&dets, &large).unwrap();
        prop_assert_eq!(r.ap_all, r.ap_large);
        prop_assert_eq!(r.ar1_all, r.ar1_large);
        prop_assert!(r.ap_small.is_none() && r.ap_medium.is_none());
        prop_assert!(r.ar1_small.is_none() && r.ar1_medium.is_none());
    }

    #[test]
    fn perfect_detector_scores_one(seed in any::<u64>()) {
        let (_, truths) = instance(seed);
        prop_assume!(separated(&truths));
        let dets: DetectionSet = truths
            .iter()
            .map(|(id, ts)| (id.clone(), ts.iter().map(|t| DetectionResult { bbox: *t, score: 0.9 }).collect()))
            .collect();
        if let Ok(r) = evaluate(&dets, &truths) {
            for v in [r.ap_all, r.ap_small, r.ap_medium, r.ap_large].into_iter().flatten() {
                prop_assert_eq!(v, 1.0);
            }
        }
    }
}
