//! Assignment and association properties, including simulator-driven ones.

use proptest::prelude::*;

use geotrack_core::assignment::{solve_assignment, CostMatrix};
use geotrack_core::association::{build_cost_matrix, gate, run_sequence, Tracker};
use geotrack_core::metrics::{idf1, EvalSequence, LabeledBox};
use geotrack_core::par::Execution;
use geotrack_core::simulator::{simulate, ScenarioConfig};
use geotrack_core::{AssociationConfig, Detection, Frame, MultiViewDescriptor, Tracklet};

/// All matchings of size `min(rows, cols)`; returns the minimum row-order
/// total and the lexicographically smallest row-sorted optimum.
fn brute_force(cost: &[Vec<f64>]) -> (f64, Vec<(usize, usize)>) {
    let (rows, cols) = (cost.len(), cost[0].len());
    let target = rows.min(cols);
    let mut best: Option<(f64, Vec<(usize, usize)>)> = None;
    let mut stack: Vec<(usize, Vec<(usize, usize)>)> = vec![(0, Vec::new())];
    while let Some((row, pairs)) = stack.pop() {
        if row == rows {
            if pairs.len() == target {
                let total = pairs.iter().fold(0.0, |acc, &(r, c)| acc + cost[r][c]);
                let better = match &best {
                    None => true,
                    Some((bt, bp)) => total < *bt || (total == *bt && pairs < *bp),
                };
                if better {
                    best = Some((total, pairs));
                }
            }
            continue;
        }
        if target - pairs.len() < rows - row {
            stack.push((row + 1, pairs.clone()));
        }
        for c in 0..cols {
            if pairs.iter().all(|&(_, used)| used != c) {
                let mut next = pairs.clone();
                next.push((row, c));
                stack.push((row + 1, next));
            }
        }
    }
    best.unwrap()
}

fn matrix(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max, 1..=max, any::<bool>()).prop_flat_map(|(r, c, ints)| {
        let cell = if ints { (0u8..4).prop_map(f64::from).boxed() } else { (-3.0f64..3.0).boxed() };
        prop::collection::vec(prop::collection::vec(cell, c), r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn assignment_matches_brute_force(cost in matrix(6)) {
        let m = CostMatrix::from_rows(&cost).unwrap();
        let got = solve_assignment(&m).unwrap();
        let (total, pairs) = brute_force(&cost);
        prop_assert_eq!(got.total_cost(&m), total);
        prop_assert_eq!(got.pairs, pairs);
    }

    #[test]
    fn raising_gate_keeps_every_match(cost in matrix(5), g1 in 0.0f64..4.0, dg in 0.0f64..2.0) {
        let m = CostMatrix::from_rows(&cost).unwrap();
        let solved = solve_assignment(&m).unwrap();
        let low = gate(&solved, &m, g1);
        let high = gate(&solved, &m, g1 + dg);
        prop_assert!(low.pairs.iter().all(|p| high.pairs.contains(p)));
    }
}

fn scenario(frames: u64, agents: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig { frame_count: frames, num_agents: agents, ..Default::default() };
    cfg.features.dim = 16;
    cfg.motion.absence_secs = [1.0, 3.0];
    cfg
}

/// Tracklet structure without ids: the frame list of each tracklet.
fn structure(tracklets: &[Tracklet]) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = tracklets.iter().map(|t| t.states().iter().map(|s| s.0).collect()).collect();
    out.sort();
    out
}

#[test]
fn step_conserves_tracks_and_detections() {
    let (_, rendered) = simulate(&scenario(600, 4), 3, Execution::Parallel).unwrap();
    let mut tracker = Tracker::new(AssociationConfig::default()).unwrap();
    for frame in &rendered.frames {
        let tracks_in = tracker.tracks().len();
        let out = tracker.step(frame.index, &frame.detections).unwrap();
        let a = &out.association;
        assert_eq!(a.matches.len() + a.unmatched_detections.len(), frame.detections.len());
        assert_eq!(a.matches.len() + a.unmatched_tracks.len(), tracks_in);
    }
}

#[test]
fn shape_only_ignores_box_scale() {
    let (_, rendered) = simulate(&scenario(600, 4), 5, Execution::Parallel).unwrap();
    let scaled: Vec<Frame> = rendered
        .frames
        .iter()
        .map(|f| Frame {
            index: f.index,
            detections: f
                .detections
                .iter()
                .map(|d| Detection { bbox: d.bbox.scaled(3.7).unwrap(), ..d.clone() })
                .collect(),
        })
        .collect();
    let cfg = AssociationConfig { shape_weight: 1.0, ..Default::default() };
    let a = run_sequence(&rendered.frames, &cfg).unwrap();
    let b = run_sequence(&scaled, &cfg).unwrap();
    assert_eq!(structure(&a), structure(&b));
    let ids = |ts: &[Tracklet]| ts.iter().map(|t| (t.tracklet_id, t.track_id)).collect::<Vec<_>>();
    assert_eq!(ids(&a), ids(&b));
}

#[test]
fn spatial_only_ignores_descriptors() {
    let (_, rendered) = simulate(&scenario(600, 4), 6, Execution::Parallel).unwrap();
    let other = MultiViewDescriptor::from_rows(&vec![vec![0.0, 1.0]; 8]).unwrap();
    let replaced: Vec<Frame> = rendered
        .frames
        .iter()
        .map(|f| Frame {
            index: f.index,
            detections: f.detections.iter().map(|d| Detection { descriptor: other.clone(), ..d.clone() }).collect(),
        })
        .collect();
    let cfg = AssociationConfig { shape_weight: 0.0, ..Default::default() };
    let a = run_sequence(&rendered.frames, &cfg).unwrap();
    let b = run_sequence(&replaced, &cfg).unwrap();
    assert_eq!(structure(&a), structure(&b));
    // the cost matrix itself never consults descriptors
    let tracker = {
        let mut t = Tracker::new(cfg.clone()).unwrap();
        t.step(0, &rendered.frames[0].detections).unwrap();
        t
    };
    let f1 = &rendered.frames[1];
    let c1 = build_cost_matrix(tracker.tracks(), &f1.detections, 1, &cfg).unwrap();
    let c2 = build_cost_matrix(tracker.tracks(), &replaced[1].detections, 1, &cfg).unwrap();
    assert_eq!(c1, c2);
}

#[test]
fn run_sequence_is_bit_exact() {
    let (_, rendered) = simulate(&scenario(900, 5), 9, Execution::Parallel).unwrap();
    let cfg = AssociationConfig::default();
    assert_eq!(run_sequence(&rendered.frames, &cfg).unwrap(), run_sequence(&rendered.frames, &cfg).unwrap());
}

#[test]
fn zero_noise_gives_one_tracklet_per_agent_for_any_weight() {
    let cfg = scenario(900, 5).noiseless();
    for seed in [1, 2] {
        let (_, rendered) = simulate(&cfg, seed, Execution::Parallel).unwrap();
        let gt: Vec<LabeledBox> = rendered.ground_truth.iter().map(LabeledBox::from).collect();
        for lambda in [0.0, 0.25, 0.5, 1.0] {
            let tracker = AssociationConfig { shape_weight: lambda, ..Default::default() };
            let tracklets = run_sequence(&rendered.frames, &tracker).unwrap();
            assert_eq!(tracklets.len(), 5, "seed {seed}, λ {lambda}");
            let seq = EvalSequence::from_tracklets(&gt, &tracklets).unwrap();
            assert_eq!(idf1(&seq, 0.5).idf1, 1.0, "seed {seed}, λ {lambda}");
        }
    }
}

/// One-sided sign test: across 20 seeds, raising p_miss must not lower the
/// tracklet count more often than chance allows.
#[test]
fn fragmentation_grows_with_miss_rate() {
    let seeds: Vec<u64> = (0..20).collect();
    let counts = Execution::Parallel.map(&seeds, |&seed| {
        [0.05, 0.3].map(|p_miss| {
            let mut cfg = scenario(900, 4);
            cfg.detection.p_miss = p_miss;
            let (_, rendered) = simulate(&cfg, seed, Execution::Sequential).unwrap();
            run_sequence(&rendered.frames, &AssociationConfig::default()).unwrap().len()
        })
    });
    let decreases = counts.iter().filter(|[lo, hi]| hi < lo).count();
    let increases = counts.iter().filter(|[lo, hi]| hi > lo).count();
    // P(X <= 5 | n = 20, p = 1/2) ≈ 0.021
    assert!(decreases <= 5, "{counts:?}");
    assert!(increases > decreases, "{counts:?}");
}
