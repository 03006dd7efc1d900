use serde::{Deserialize, Serialize};

use super::confusion::{confusion, mean_accuracy_present};
use super::{MetricsError, N_CLASSES};
use crate::par;

pub const K_CANDIDATES: [usize; 5] = [3, 4, 5, 7, 10];
const INV_DIST_EPS: f64 = 1e-9;

/// Labelled reference set for Euclidean nearest-neighbour voting.
#[derive(Debug, Clone)]
pub struct KnnModel {
    features: Vec<Vec<f32>>,
    labels: Vec<usize>,
}

impl KnnModel {
    pub fn new(features: Vec<Vec<f32>>, labels: Vec<usize>) -> Result<Self, MetricsError> {
        if features.len() != labels.len() {
            return Err(MetricsError::LengthMismatch {
                preds: features.len(),
                truth: labels.len(),
            });
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= N_CLASSES) {
            return Err(MetricsError::LabelOutOfRange(l));
        }
        Ok(KnnModel { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The `k` nearest `(distance, label)` pairs. Equal distances are
    /// ordered by label so the result does not depend on storage order.
    pub fn neighbors(&self, query: &[f32], k: usize) -> Vec<(f64, usize)> {
        let mut all: Vec<(f64, usize)> = self
            .features
            .iter()
            .zip(&self.labels)
            .map(|(f, &l)| {
                let d2: f64 = f
                    .iter()
                    .zip(query)
                    .map(|(&a, &b)| (f64::from(a) - f64::from(b)).powi(2))
                    .sum();
                (d2.sqrt(), l)
            })
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.truncate(k);
        all
    }

    fn check_k(&self, k: usize) -> Result<(), MetricsError> {
        if k == 0 || k > self.len() {
            return Err(MetricsError::InvalidK { k, n: self.len() });
        }
        Ok(())
    }

    pub fn classify(&self, query: &[f32], k: usize) -> Result<usize, MetricsError> {
        self.check_k(k)?;
        Ok(vote(&self.neighbors(query, k)))
    }

    /// Predictions for every query at each requested `k`, from a single
    /// neighbour search per query.
    pub fn predict_many(
        &self,
        queries: &[Vec<f32>],
        ks: &[usize],
    ) -> Result<Vec<Vec<usize>>, MetricsError> {
        for &k in ks {
            self.check_k(k)?;
        }
        let kmax = ks.iter().copied().max().unwrap_or(0);
        let per_query = par::map(queries, |q| {
            let n = self.neighbors(q, kmax);
            ks.iter().map(|&k| vote(&n[..k])).collect::<Vec<usize>>()
        });
        Ok((0..ks.len())
            .map(|j| per_query.iter().map(|p| p[j]).collect())
            .collect())
    }
}

/// Inverse-distance weighted vote; ties go to the lowest label.
fn vote(neighbors: &[(f64, usize)]) -> usize {
    let mut score = [0.0f64; N_CLASSES];
    for &(d, l) in neighbors {
        score[l] += 1.0 / (d + INV_DIST_EPS);
    }
    let mut best = 0;
    for (i, s) in score.iter().enumerate() {
        if *s > score[best] {
            best = i;
        }
    }
    best
}

pub fn knn_classify(
    train: &[Vec<f32>],
    labels: &[usize],
    query: &[f32],
    k: usize,
) -> Result<usize, MetricsError> {
    KnnModel::new(train.to_vec(), labels.to_vec())?.classify(query, k)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnSelection {
    pub k: usize,
    /// `(k, validation mean accuracy)` for every candidate.
    pub val_accuracy: Vec<(usize, f64)>,
}

/// Picks the candidate `k` with the best validation mean accuracy
/// (smallest `k` on ties).
pub fn knn_select_k(
    model: &KnnModel,
    val: &[Vec<f32>],
    val_labels: &[usize],
    candidates: &[usize],
) -> Result<KnnSelection, MetricsError> {
    if model.is_empty() || val.is_empty() {
        return Err(MetricsError::EmptySplit);
    }
    let ks: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|&k| k >= 1 && k <= model.len())
        .collect();
    if ks.is_empty() {
        return Err(MetricsError::InvalidK {
            k: candidates.first().copied().unwrap_or(0),
            n: model.len(),
        });
    }
    let preds = model.predict_many(val, &ks)?;
    let mut val_accuracy = Vec::with_capacity(ks.len());
    for (k, p) in ks.iter().zip(&preds) {
        val_accuracy.push((*k, mean_accuracy_present(&confusion(p, val_labels)?)));
    }
    let mut best = val_accuracy[0];
    for &(k, a) in &val_accuracy[1..] {
        if a > best.1 {
            best = (k, a);
        }
    }
    Ok(KnnSelection {
        k: best.0,
        val_accuracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    #[test]
    fn exact_match_and_nearest_neighbour() {
        let train = vec![
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            vec![1.1, 1.0],
            vec![1.0, 1.2],
        ];
        let labels = vec![2, 1, 1, 1];
        assert_eq!(knn_classify(&train, &labels, &[0.0, 0.0], 4).unwrap(), 2);
        assert_eq!(knn_classify(&train, &labels, &[0.2, 0.1], 1).unwrap(), 2);
        assert!(knn_classify(&train, &labels, &[0.2, 0.1], 5).is_err());
    }

    #[test]
    fn hand_computed_weighted_vote() {
        // Query at the origin; distances 1 (label 0), 2 and 2.5 (label 1).
        // Weights: label 0 = 1, label 1 = 0.5 + 0.4 = 0.9, so label 0 wins
        // although label 1 has the majority.
        let train = vec![
            vec![1.0, 0.0],
            vec![0.0, 2.0],
            vec![-2.5, 0.0],
            vec![9.0, 9.0],
            vec![-9.0, 9.0],
        ];
        let labels = vec![0, 1, 1, 3, 3];
        assert_eq!(knn_classify(&train, &labels, &[0.0, 0.0], 3).unwrap(), 0);
        // With k = 5 the far label-3 pair adds only ~0.16.
        assert_eq!(knn_classify(&train, &labels, &[0.0, 0.0], 5).unwrap(), 0);
        // Moving the label-0 point away flips the vote.
        let mut far = train.clone();
        far[0] = vec![3.0, 0.0];
        assert_eq!(knn_classify(&far, &labels, &[0.0, 0.0], 3).unwrap(), 1);
    }

    #[test]
    fn select_k_prefers_smallest_on_ties() {
        let train: Vec<Vec<f32>> = (0..12).map(|i| vec![i as f32]).collect();
        let labels = vec![0; 12];
        let model = KnnModel::new(train, labels).unwrap();
        let sel = knn_select_k(&model, &[vec![0.5], vec![3.0]], &[0, 0], &K_CANDIDATES).unwrap();
        assert_eq!(sel.k, 3);
        let ks: Vec<usize> = sel.val_accuracy.iter().map(|p| p.0).collect();
        assert_eq!(ks, K_CANDIDATES.to_vec());
    }

    proptest! {
        #[test]
        fn training_order_is_irrelevant(seed in any::<u64>(), k in 1usize..8) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            use rand::Rng;
            // Coarse grid values make exact distance ties common.
            let mut pts: Vec<(Vec<f32>, usize)> = (0..20)
                .map(|_| (vec![rng.gen_range(0..4) as f32, rng.gen_range(0..4) as f32], rng.gen_range(0..4)))
                .collect();
            let q = [rng.gen_range(0..4) as f32, rng.gen_range(0..4) as f32];
            let (f, l): (Vec<_>, Vec<_>) = pts.iter().cloned().unzip();
            let a = knn_classify(&f, &l, &q, k).unwrap();
            pts.shuffle(&mut rng);
            let (f, l): (Vec<_>, Vec<_>) = pts.into_iter().unzip();
            prop_assert_eq!(a, knn_classify(&f, &l, &q, k).unwrap());
        }
    }
}
