use proptest::prelude::*;

use geotrack_core::metrics::{clear_mot, default_alphas, hota, idf1, EvalSequence, LabeledBox};
use geotrack_core::par::Execution;
use geotrack_core::BoundingBox3D;

/// Boxes along a short random walk per id; ids may skip frames.
fn sequence(prefix: &'static str) -> impl Strategy<Value = Vec<LabeledBox>> {
    let object = (0u64..6, 1u64..8, -2.0f64..2.0, -2.0f64..2.0, prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 8));
    prop::collection::vec(object, 1..5).prop_map(move |objects| {
        let mut out = Vec::new();
        for (k, (start, len, x0, y0, steps)) in objects.into_iter().enumerate() {
            let (mut x, mut y) = (x0, y0);
            for (f, (dx, dy)) in (start..start + len).zip(steps) {
                x += dx;
                y += dy;
                let b = BoundingBox3D::new([x, y, 0.9], [0.6, 0.6, 1.8]).unwrap();
                out.push(LabeledBox::new(f, format!("{prefix}{k}"), b));
            }
        }
        out
    })
}

fn jitter(boxes: &[LabeledBox], noise: &[(f64, f64)]) -> Vec<LabeledBox> {
    boxes
        .iter()
        .zip(noise.iter().cycle())
        .map(|(l, &(dx, dy))| LabeledBox::new(l.frame, l.id.clone(), l.bbox.translated([dx, dy, 0.0]).unwrap()))
        .collect()
}

fn scores(seq: &EvalSequence) -> [f64; 5] {
    let h = hota(seq, &default_alphas(), Execution::Sequential);
    let c = clear_mot(seq, 0.5);
    [h.hota, h.det_a, h.ass_a, idf1(seq, 0.5).idf1, c.mota]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn perfect_predictions_score_one(gt in sequence("g")) {
        let pred: Vec<LabeledBox> =
            gt.iter().map(|l| LabeledBox::new(l.frame, format!("p{}", l.id), l.bbox)).collect();
        let seq = EvalSequence::new(&gt, &pred).unwrap();
        prop_assert_eq!(scores(&seq), [1.0; 5]);
        prop_assert_eq!(clear_mot(&seq, 0.5).idsw, 0);
    }

    #[test]
    fn relabeling_predictions_changes_nothing(
        gt in sequence("g"),
        pred in sequence("p"),
        noise in prop::collection::vec((-0.2f64..0.2, -0.2f64..0.2), 1..10),
    ) {
        // predictions near the ground truth so that matches actually occur
        let mut pred = pred;
        pred.extend(jitter(&gt, &noise).into_iter().map(|l| LabeledBox::new(l.frame, format!("q{}", l.id), l.bbox)));
        let relabeled: Vec<LabeledBox> = pred
            .iter()
            .map(|l| {
                let renamed: String = l.id.chars().rev().collect();
                LabeledBox::new(l.frame, format!("z{renamed}"), l.bbox)
            })
            .collect();
        let a = EvalSequence::new(&gt, &pred).unwrap();
        let b = EvalSequence::new(&gt, &relabeled).unwrap();
        for (x, y) in scores(&a).into_iter().zip(scores(&b)) {
            prop_assert!((x - y).abs() <= 1e-12, "{} vs {}", x, y);
        }
        let (ca, cb) = (clear_mot(&a, 0.5), clear_mot(&b, 0.5));
        prop_assert_eq!((ca.tp, ca.fp, ca.fn_, ca.idsw), (cb.tp, cb.fp, cb.fn_, cb.idsw));
    }

    #[test]
    fn scores_stay_in_range(gt in sequence("g"), pred in sequence("p")) {
        let seq = EvalSequence::new(&gt, &pred).unwrap();
        let [h, det, ass, id, mota] = scores(&seq);
        for v in [h, det, ass, id] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(mota <= 1.0);
    }
}

#[test]
fn mota_goes_negative_with_clutter() {
    let b = |x: f64| BoundingBox3D::new([x, 0.0, 0.9], [0.6, 0.6, 1.8]).unwrap();
    let gt = vec![LabeledBox::new(0, "a", b(0.0))];
    let pred: Vec<LabeledBox> = (0..3).map(|k| LabeledBox::new(0, format!("p{k}"), b(5.0 + k as f64))).collect();
    let c = clear_mot(&EvalSequence::new(&gt, &pred).unwrap(), 0.5);
    assert_eq!((c.fn_, c.fp, c.num_gt), (1, 3, 1));
    assert_eq!(c.mota, -3.0);
}
