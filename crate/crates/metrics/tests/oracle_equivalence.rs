mod oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tollgate_metrics::{average_recall_at_k, iou, mean_ap, AreaBucket};

#[test]
fn mean_ap_and_ar1_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    let mut fractional = 0;
    for _ in 0..1500 {
        let (dets, truths) = oracle::random_instance(&mut rng);
        for bucket in AreaBucket::EVERY {
            let want = oracle::oracle_mean_ap(&dets, &truths, bucket);
            let got = mean_ap(&dets, &truths, bucket).ok();
            match (want, got) {
                (Some(w), Some(g)) => {
                    assert!((w - g).abs() <= 1e-12, "mAP {bucket}: {w} vs {g}\n{truths:?}\n{dets:?}");
                    fractional += (w > 0.0 && w < 1.0) as usize;
                }
                (None, None) => {}
                other => panic!("presence differs for {bucket}: {other:?}"),
            }
            let want = oracle::oracle_ar(&dets, &truths, 1, bucket);
            let got = average_recall_at_k(&dets, &truths, 1, bucket).ok();
            match (want, got) {
                (Some(w), Some(g)) => assert!((w - g).abs() <= 1e-12, "AR@1 {bucket}: {w} vs {g}"),
                (None, None) => {}
                other => panic!("presence differs for {bucket}: {other:?}"),
            }
            compared += 1;
        }
    }
    assert_eq!(compared, 6000);
    // the generator must reach partial scores, not just 0 and 1
    assert!(fractional > 600, "{fractional}");
}

#[test]
fn pixel_count_iou_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let (dets, truths) = oracle::random_instance(&mut rng);
        for (id, ts) in &truths {
            for t in ts {
                for d in &dets[id] {
                    let (i, u) = oracle::iou_frac(&d.bbox, t);
                    assert_eq!(iou(&d.bbox, t), i as f64 / u as f64);
                }
            }
        }
    }
}
