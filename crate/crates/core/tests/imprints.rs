use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use geotrack_core::config::PipelineConfig;
use geotrack_core::imprints::{color_parameter, proximity_events, RegionKind, RegionOfInterest};
use geotrack_core::par::Execution;
use geotrack_core::pipeline::run_pipeline;

/// Winding number of `poly` around `p`; non-zero means inside.
fn winding_number(p: [f64; 2], poly: &[[f64; 2]]) -> i32 {
    let mut wn = 0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let side = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] && b[1] > p[1] && side > 0.0 {
            wn += 1;
        } else if a[1] > p[1] && b[1] <= p[1] && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

/// Distance to the closed segment `ab`, via the foot of the perpendicular.
fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let t = ((p[0] - a[0]) * ux + (p[1] - a[1]) * uy) / (ux * ux + uy * uy);
    let t = t.clamp(0.0, 1.0);
    ((p[0] - a[0] - t * ux).powi(2) + (p[1] - a[1] - t * uy).powi(2)).sqrt()
}

fn oracle_distance(p: [f64; 2], poly: &[[f64; 2]]) -> f64 {
    if winding_number(p, poly) != 0 {
        return 0.0;
    }
    (0..poly.len()).map(|i| segment_distance(p, poly[i], poly[(i + 1) % poly.len()])).fold(f64::INFINITY, f64::min)
}

#[test]
fn expanded_polygon_membership_matches_oracle() {
    let polygons: Vec<Vec<[f64; 2]>> = vec![
        vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]],
        // L-shape, clockwise
        vec![[0.0, 0.0], [0.0, 2.0], [1.0, 2.0], [1.0, 1.0], [2.0, 1.0], [2.0, 0.0]],
        // concave star
        (0..10)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 5.0;
                let r = if k % 2 == 0 { 1.5 } else { 0.6 };
                [r * a.cos(), r * a.sin()]
            })
            .collect(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut inside = [0usize; 2];
    for (k, poly) in polygons.iter().enumerate() {
        let roi = RegionOfInterest::new(format!("r{k}"), poly.clone(), 0.3048, RegionKind::Sterile).unwrap();
        for _ in 0..10_000 / polygons.len() + 1 {
            let p = [rng.random_range(-2.5..3.5), rng.random_range(-2.5..3.5)];
            let expected = oracle_distance(p, poly);
            let got = roi.distance(p);
            assert!((got - expected).abs() <= 1e-9, "{p:?} in r{k}: {got} vs {expected}");
            // membership is only compared away from the boundary band
            if (expected - roi.margin()).abs() > 1e-9 {
                assert_eq!(roi.contains_expanded(p), expected <= roi.margin(), "{p:?} in r{k}");
                inside[usize::from(expected <= roi.margin())] += 1;
            }
        }
    }
    assert!(inside[0] > 1000 && inside[1] > 1000, "{inside:?}");
}

#[test]
fn imprint_colors_and_events() {
    let cfg = PipelineConfig::from_toml(
        "[scenario]\nframe_count = 900\nnum_agents = 3\n[scenario.features]\ndim = 8\n[scenario.motion]\nabsence_secs = [1.0, 3.0]\n",
    )
    .unwrap();
    let run = run_pipeline(&cfg, 5, Execution::Parallel).unwrap();
    let rois = cfg.room().regions().unwrap();
    assert!(!rois.is_empty());
    let mut checked_events = 0;
    for out in &run.imprints {
        let imprint = &out.imprint;
        for line in &imprint.polylines {
            let c: Vec<f64> = line.points.iter().map(|p| color_parameter(&imprint.range, p.t)).collect();
            assert!(c.windows(2).all(|w| w[0] < w[1]), "{}: colors not increasing", imprint.identity);
            assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let events = proximity_events(imprint, &rois);
        for roi in &rois {
            let mine: Vec<_> = events.iter().filter(|e| e.roi == roi.name()).collect();
            assert!(mine.windows(2).all(|w| w[0].exit_s < w[1].enter_s), "overlapping events in {}", roi.name());
            for e in &mine {
                let line = imprint
                    .polylines
                    .iter()
                    .find(|l| l.points.iter().any(|p| p.t == e.enter_s))
                    .expect("event starts on a sample");
                let pts = &line.points;
                let first = pts.iter().position(|p| p.t == e.enter_s).unwrap();
                let last = pts.iter().position(|p| p.t == e.exit_s).expect("event ends on the same polyline");
                let mut min_d = f64::INFINITY;
                for i in first..=last {
                    let d = roi.distance([pts[i].x, pts[i].y]);
                    assert!(d <= roi.margin());
                    if i > first {
                        assert_eq!(pts[i].frame, pts[i - 1].frame + 1);
                    }
                    min_d = min_d.min(d);
                }
                assert_eq!(min_d, e.min_dist_m);
                // maximal: the neighbours are outside or not contiguous
                if first > 0 && pts[first - 1].frame + 1 == pts[first].frame {
                    assert!(!roi.contains_expanded([pts[first - 1].x, pts[first - 1].y]));
                }
                if last + 1 < pts.len() && pts[last].frame + 1 == pts[last + 1].frame {
                    assert!(!roi.contains_expanded([pts[last + 1].x, pts[last + 1].y]));
                }
                checked_events += 1;
            }
        }
    }
    assert!(checked_events > 0);
}
