use broadcd_core::imagery::{
    difference_magnitude, extract_patterns, rgb_to_lab, split_dataset, DifferenceImage, ImagePair,
    LabelGrid,
};
use proptest::prelude::*;

fn image_strategy() -> impl Strategy<Value = (usize, usize, Vec<u8>, Vec<u8>, Vec<u8>)> {
    (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
        (
            Just(w),
            Just(h),
            prop::collection::vec(any::<u8>(), w * h * 3),
            prop::collection::vec(any::<u8>(), w * h * 3),
            prop::collection::vec(0u8..2, w * h),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn difference_is_symmetric((w, h, a, b, _) in image_strategy()) {
        let pair = ImagePair::new(w, h, a, b).unwrap();
        let d = difference_magnitude(&pair);
        prop_assert_eq!(&d, &difference_magnitude(&pair.swapped()));
        prop_assert!(d.values().iter().all(|&v| v >= 0.0));
        prop_assert_eq!((d.width(), d.height()), (w, h));
    }

    #[test]
    fn patterns_reuse_existing_values((w, h, a, b, labels) in image_strategy()) {
        let d = difference_magnitude(&ImagePair::new(w, h, a, b).unwrap());
        let grid = LabelGrid::new(w, h, labels.clone()).unwrap();
        let data = extract_patterns(&d, &grid).unwrap();
        prop_assert_eq!(data.len(), w * h);
        prop_assert_eq!(data.class_count(1), grid.changed_count());
        prop_assert_eq!(data.class_count(0), w * h - grid.changed_count());
        for p in data.patterns() {
            for v in p {
                prop_assert!(d.values().contains(v));
            }
        }
        // the center component is the pixel itself
        for (i, p) in data.patterns().iter().enumerate() {
            prop_assert_eq!(p[4], d.values()[i]);
        }
    }

    #[test]
    fn grays_have_no_chroma(v in any::<u8>()) {
        let lab = rgb_to_lab(&[v, v, v])[0];
        prop_assert!(lab.a.abs() < 0.5 && lab.b.abs() < 0.5);
    }

    #[test]
    fn split_counts_and_determinism(n0 in 2usize..200, n1 in 2usize..50, f in 0.05f64..0.95, seed in any::<u64>()) {
        let values: Vec<f64> = (0..n0 + n1).map(|i| i as f64).collect();
        let labels: Vec<u8> = (0..n0 + n1).map(|i| u8::from(i >= n0)).collect();
        let d = DifferenceImage::new(n0 + n1, 1, values).unwrap();
        let grid = LabelGrid::new(n0 + n1, 1, labels).unwrap();
        let data = extract_patterns(&d, &grid).unwrap();
        let (train, test) = split_dataset(&data, f, seed).unwrap();
        for (class, n) in [(0u8, n0), (1u8, n1)] {
            let want = ((f * n as f64).floor() as usize).max(1);
            prop_assert_eq!(train.class_count(class), want);
            prop_assert_eq!(test.class_count(class), n - want);
        }
        let (train2, test2) = split_dataset(&data, f, seed).unwrap();
        prop_assert_eq!(train, train2);
        prop_assert_eq!(test, test2);
    }
}
