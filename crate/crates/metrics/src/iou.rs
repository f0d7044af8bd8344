use tollgate_plate::BoundingBox;

/// Intersection over union of two half-open pixel boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bx(x0: u32, y0: u32, x1: u32, y1: u32) -> BoundingBox {
        BoundingBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(iou(&bx(0, 0, 10, 10), &bx(0, 0, 10, 10)), 1.0);
        assert_eq!(iou(&bx(0, 0, 10, 10), &bx(10, 0, 20, 10)), 0.0);
        // 50 shared pixels of 150 covered
        assert_eq!(iou(&bx(0, 0, 10, 10), &bx(5, 0, 15, 10)), 50.0 / 150.0);
        assert_eq!(iou(&bx(0, 0, 100, 100), &bx(0, 0, 100, 75)), 0.75);
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (0u32..30, 0u32..30, 1u32..20, 1u32..20).prop_map(|(x, y, w, h)| bx(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let v = iou(&a, &b);
            prop_assert_eq!(v, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(iou(&a, &a), 1.0);
        }
    }
}
