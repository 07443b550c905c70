//! Identity gallery: per-view one-vs-rest linear SVMs with a majority vote
//! over the eight views.
//!
//! Each binary classifier minimizes `reg/2·|w|² + mean(hinge)` by stochastic
//! subgradient descent with step `1 / (reg·t)` (Pegasos), the bias carried as
//! an extra constant feature. Samples are put into a canonical order before
//! training, so the model does not depend on the order they were supplied in.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MultiViewDescriptor, NUM_VIEWS};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GalleryTrainingConfig {
    pub regularization: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Winners whose summed decision score falls below this are "unknown".
    pub score_floor: f64,
}

impl Default for GalleryTrainingConfig {
    fn default() -> Self {
        Self { regularization: 1e-3, epochs: 200, seed: 0, score_floor: -0.2 }
    }
}

/// One-vs-rest classifiers for a single view.
#[derive(Debug, Clone, PartialEq)]
pub struct ViewClassifier {
    /// `K` weight vectors of length `dim`.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl ViewClassifier {
    fn scores(&self, x: &[f32]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(x).map(|(&wi, &xi)| wi * xi as f64).sum::<f64>() + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalleryModel {
    identities: Vec<String>,
    dim: usize,
    views: Vec<ViewClassifier>,
    config: GalleryTrainingConfig,
    training_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Winning identity index, or `None` when below the score floor.
    pub identity: Option<usize>,
    pub label: String,
    pub vote_count: usize,
    /// Summed score of the winner minus that of the runner-up.
    pub margin: f64,
    /// Decision scores summed over the eight views, per identity.
    pub summed_scores: Vec<f64>,
    pub votes: Vec<usize>,
    /// Identities ordered by (votes, summed score, index).
    pub ranking: Vec<usize>,
}

impl Classification {
    pub fn second_best(&self) -> Option<usize> {
        self.ranking.get(1).copied()
    }
}

pub const UNKNOWN_PREFIX: &str = "unknown";

impl GalleryModel {
    pub fn from_parts(
        identities: Vec<String>,
        dim: usize,
        views: Vec<ViewClassifier>,
        config: GalleryTrainingConfig,
        training_accuracy: f64,
    ) -> Result<Self> {
        if identities.len() < 2 {
            return Err(Error::Gallery("at least two identities are required".into()));
        }
        if views.len() != NUM_VIEWS {
            return Err(Error::Gallery(format!("expected {NUM_VIEWS} views, got {}", views.len())));
        }
        for (k, v) in views.iter().enumerate() {
            if v.weights.len() != identities.len() || v.biases.len() != identities.len() {
                return Err(Error::Gallery(format!("view {k}: classifier count mismatch")));
            }
            if v.weights.iter().any(|w| w.len() != dim) {
                return Err(Error::Gallery(format!("view {k}: weight length mismatch")));
            }
            if v.weights.iter().flatten().chain(&v.biases).any(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("gallery view {k}")));
            }
        }
        Ok(Self { identities, dim, views, config, training_accuracy })
    }

    pub fn identities(&self) -> &[String] {
        &self.identities
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn views(&self) -> &[ViewClassifier] {
        &self.views
    }

    pub fn config(&self) -> &GalleryTrainingConfig {
        &self.config
    }

    pub fn training_accuracy(&self) -> f64 {
        self.training_accuracy
    }

    /// Majority vote of the per-view argmax identities.
    ///
    /// Vote ties go to the larger summed decision score, then to the earlier
    /// identity.
    pub fn classify(&self, d: &MultiViewDescriptor) -> Result<Classification> {
        if d.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, d.dim()));
        }
        let k = self.identities.len();
        let mut votes = vec![0usize; k];
        let mut summed = vec![0.0f64; k];
        for (view, clf) in self.views.iter().enumerate() {
            let scores = clf.scores(d.view(view));
            let mut best = 0;
            for j in 1..k {
                if scores[j] > scores[best] {
                    best = j;
                }
            }
            votes[best] += 1;
            for (s, v) in summed.iter_mut().zip(&scores) {
                *s += v;
            }
        }
        let mut ranking: Vec<usize> = (0..k).collect();
        ranking.sort_by(|&a, &b| {
            votes[b]
                .cmp(&votes[a])
                .then(summed[b].partial_cmp(&summed[a]).unwrap_or(Ordering::Equal))
                .then(a.cmp(&b))
        });
        let winner = ranking[0];
        let margin = summed[winner] - summed[ranking[1]];
        let known = summed[winner] >= self.config.score_floor;
        Ok(Classification {
            identity: known.then_some(winner),
            label: if known { self.identities[winner].clone() } else { UNKNOWN_PREFIX.into() },
            vote_count: votes[winner],
            margin,
            summed_scores: summed,
            votes,
            ranking,
        })
    }
}

pub fn classify_descriptor(g: &GalleryModel, d: &MultiViewDescriptor) -> Result<Classification> {
    g.classify(d)
}

/// Trains the gallery from labeled enrollment descriptors.
pub fn train_gallery(
    labeled: &[(MultiViewDescriptor, String)],
    cfg: &GalleryTrainingConfig,
    exec: Execution,
) -> Result<GalleryModel> {
    if !(cfg.regularization > 0.0 && cfg.regularization.is_finite()) {
        return Err(Error::InvalidConfig("gallery regularization must be > 0".into()));
    }
    if cfg.epochs == 0 {
        return Err(Error::InvalidConfig("gallery epochs must be >= 1".into()));
    }
    let first = labeled.first().ok_or_else(|| Error::Gallery("no enrollment samples".into()))?;
    let dim = first.0.dim();
    if let Some((d, _)) = labeled.iter().find(|(d, _)| d.dim() != dim) {
        return Err(Error::DimensionMismatch(dim, d.dim()));
    }
    let mut identities: Vec<String> = labeled.iter().map(|(_, l)| l.clone()).collect();
    identities.sort();
    identities.dedup();
    if identities.len() < 2 {
        return Err(Error::Gallery(format!(
            "need at least two identities, got {}",
            identities.len()
        )));
    }

    // canonical sample order: by identity, then by descriptor bits
    let mut samples: Vec<(usize, &MultiViewDescriptor)> = labeled
        .iter()
        .map(|(d, l)| (identities.binary_search(l).expect("label present"), d))
        .collect();
    samples.sort_by(|a, b| {
        a.0.cmp(&b.0).then_with(|| {
            let ab = a.1.as_slice().iter().map(|v| v.to_bits());
            let bb = b.1.as_slice().iter().map(|v| v.to_bits());
            ab.cmp(bb)
        })
    });

    let k = identities.len();
    let trained = exec.map_range(0..NUM_VIEWS * k, |job| {
        let (view, class) = (job / k, job % k);
        train_binary(&samples, view, class, dim, cfg, job as u64)
    });
    let views = (0..NUM_VIEWS)
        .map(|view| {
            let (weights, biases) = trained[view * k..(view + 1) * k].iter().cloned().unzip();
            ViewClassifier { weights, biases }
        })
        .collect();

    let mut model = GalleryModel::from_parts(identities, dim, views, cfg.clone(), 0.0)?;
    let correct = samples
        .iter()
        .filter(|(label, d)| model.classify(d).map(|c| c.identity == Some(*label)).unwrap_or(false))
        .count();
    model.training_accuracy = correct as f64 / samples.len() as f64;
    Ok(model)
}

/// Pegasos for one (view, identity) pair; returns `(weights, bias)`.
fn train_binary(
    samples: &[(usize, &MultiViewDescriptor)],
    view: usize,
    class: usize,
    dim: usize,
    cfg: &GalleryTrainingConfig,
    stream: u64,
) -> (Vec<f64>, f64) {
    let reg = cfg.regularization;
    let radius = 1.0 / reg.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    // last slot is the bias feature
    let mut w = vec![0.0f64; dim + 1];
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut t = 0u64;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let (label, d) = samples[i];
            let x = d.view(view);
            let y = if label == class { 1.0 } else { -1.0 };
            let eta = 1.0 / (reg * t as f64);
            let score: f64 =
                w[..dim].iter().zip(x).map(|(&wi, &xi)| wi * xi as f64).sum::<f64>() + w[dim];
            let shrink = 1.0 - eta * reg;
            for wi in w.iter_mut() {
                *wi *= shrink;
            }
            if y * score < 1.0 {
                for (wi, &xi) in w[..dim].iter_mut().zip(x) {
                    *wi += eta * y * xi as f64;
                }
                w[dim] += eta * y;
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                for wi in w.iter_mut() {
                    *wi *= s;
                }
            }
        }
    }
    let bias = w.pop().expect("bias slot");
    (w, bias)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(row: &[f64]) -> MultiViewDescriptor {
        MultiViewDescriptor::from_rows(&vec![row.to_vec(); NUM_VIEWS]).unwrap()
    }

    fn antipodal_set() -> Vec<(MultiViewDescriptor, String)> {
        vec![
            (constant(&[1.0, 0.2, 0.0]), "A".to_string()),
            (constant(&[1.0, -0.2, 0.1]), "A".to_string()),
            (constant(&[-1.0, -0.2, 0.0]), "B".to_string()),
            (constant(&[-1.0, 0.2, -0.1]), "B".to_string()),
        ]
    }

    fn fast_cfg() -> GalleryTrainingConfig {
        GalleryTrainingConfig { epochs: 50, ..Default::default() }
    }

    #[test]
    fn antipodal_identities_are_separable() {
        let g = train_gallery(&antipodal_set(), &fast_cfg(), Execution::Sequential).unwrap();
        assert_eq!(g.training_accuracy(), 1.0);
        let c = g.classify(&constant(&[0.9, 0.1, 0.0])).unwrap();
        assert_eq!((c.label.as_str(), c.vote_count), ("A", 8));
    }

    #[test]
    fn training_is_deterministic_and_order_free() {
        let data = antipodal_set();
        let a = train_gallery(&data, &fast_cfg(), Execution::Sequential).unwrap();
        let b = train_gallery(&data, &fast_cfg(), Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let mut reversed = data.clone();
        reversed.reverse();
        assert_eq!(a, train_gallery(&reversed, &fast_cfg(), Execution::Sequential).unwrap());
    }

    #[test]
    fn rejects_single_identity_and_dim_mismatch() {
        let one = vec![(constant(&[1.0, 0.0]), "A".to_string())];
        assert!(matches!(
            train_gallery(&one, &fast_cfg(), Execution::Sequential),
            Err(Error::Gallery(_))
        ));
        let mixed = vec![(constant(&[1.0, 0.0]), "A".to_string()), (constant(&[1.0]), "B".to_string())];
        assert!(matches!(
            train_gallery(&mixed, &fast_cfg(), Execution::Sequential),
            Err(Error::DimensionMismatch(2, 1))
        ));
    }

    /// Hand-built classifiers whose view `k` votes for `winners[k]`.
    fn voting_model(winners: [usize; 8], bias: [f64; 2]) -> GalleryModel {
        let views = winners
            .iter()
            .map(|&w| {
                let mut weights = vec![vec![0.0], vec![0.0]];
                weights[w][0] = 1.0;
                ViewClassifier { weights, biases: bias.to_vec() }
            })
            .collect();
        GalleryModel::from_parts(
            vec!["A".into(), "B".into()],
            1,
            views,
            GalleryTrainingConfig::default(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn majority_vote() {
        let d = constant(&[1.0]);
        let g = voting_model([0, 0, 0, 0, 0, 1, 1, 1], [0.0, 0.0]);
        let c = g.classify(&d).unwrap();
        assert_eq!((c.label.as_str(), c.vote_count), ("A", 5));
        let g = voting_model([0; 8], [0.0, 0.0]);
        assert_eq!(g.classify(&d).unwrap().vote_count, 8);
    }

    #[test]
    fn vote_tie_uses_summed_scores() {
        let d = constant(&[1.0]);
        // 4-4 tie; per-view scores for the winner are 1 + bias
        let g = voting_model([1, 1, 1, 1, 0, 0, 0, 0], [-0.1125, -0.1625]);
        let c = g.classify(&d).unwrap();
        assert_eq!(c.votes, vec![4, 4]);
        assert!((c.summed_scores[0] - 3.1).abs() < 1e-12);
        assert!((c.summed_scores[1] - 2.7).abs() < 1e-12);
        assert_eq!(c.label, "A");
        assert_eq!(c.second_best(), Some(1));
    }

    #[test]
    fn low_scores_are_unknown() {
        let g = voting_model([0; 8], [-2.0, -2.0]);
        let c = g.classify(&constant(&[1.0])).unwrap();
        assert_eq!(c.identity, None);
        assert_eq!(c.label, UNKNOWN_PREFIX);
    }
}
