//! Exact k-nearest-neighbor queries over a point set.
//!
//! Distances are squared Euclidean (monotone with Euclidean, no square
//! roots) and every query is an exact scan, so results are reproducible and
//! serve as the reference geometry for everything built on top. Ties are
//! broken by ascending point index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Squared Euclidean distance between two equal-length vectors.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// A flat store of points with parallel binary labels, answering exact
/// nearest-neighbor queries. Appends are cheap; existing indices are stable.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborIndex {
    points: Vec<Vec<f64>>,
    labels: Vec<u8>,
    dim: usize,
}

/// Candidate ordering: worst (largest distance, then largest index) on top
/// of the max-heap so it can be displaced by better candidates.
#[derive(Debug, PartialEq)]
struct Candidate {
    dist: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl NeighborIndex {
    /// Builds an index over `points` with parallel `labels`.
    pub fn build(points: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if points.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: points.len(),
                right: labels.len(),
            });
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        Ok(Self { points, labels, dim })
    }

    /// Builds an index over a dataset's samples.
    pub fn from_dataset(dataset: &crate::data::Dataset) -> Result<Self> {
        Self::build(
            dataset.iter().map(|s| s.features.clone()).collect(),
            dataset.labels().collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    pub fn label(&self, index: usize) -> u8 {
        self.labels[index]
    }

    /// Appends one point; earlier indices remain valid.
    pub fn append(&mut self, point: Vec<f64>, label: u8) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: point.len(),
            });
        }
        self.points.push(point);
        self.labels.push(label);
        Ok(())
    }

    /// Drops every point at index `len` or beyond.
    pub fn truncate(&mut self, len: usize) {
        self.points.truncate(len);
        self.labels.truncate(len);
    }

    fn check_query(&self, query: &[f64]) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if query.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: query.len(),
            });
        }
        Ok(())
    }

    /// The `k` points closest to `query` as `(index, squared distance)`,
    /// ascending by distance with ties broken by ascending index. Asking for
    /// more points than the index holds returns them all.
    pub fn k_nearest(&self, query: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
        self.check_query(query)?;
        let k = k.min(self.points.len());
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        for (index, point) in self.points.iter().enumerate() {
            let dist = squared_distance(query, point);
            if heap.len() < k {
                heap.push(Candidate { dist, index });
            } else if let Some(worst) = heap.peek() {
                if (Candidate { dist, index }) < *worst {
                    heap.pop();
                    heap.push(Candidate { dist, index });
                }
            }
        }
        Ok(heap
            .into_sorted_vec()
            .into_iter()
            .map(|c| (c.index, c.dist))
            .collect())
    }

    /// The nearest point whose label equals `wanted_label`, with the same
    /// tie rule as [`Self::k_nearest`].
    pub fn nearest_with_label(&self, query: &[f64], wanted_label: u8) -> Result<(usize, f64)> {
        self.check_query(query)?;
        let mut best: Option<(usize, f64)> = None;
        for (index, point) in self.points.iter().enumerate() {
            if self.labels[index] != wanted_label {
                continue;
            }
            let dist = squared_distance(query, point);
            match best {
                Some((_, best_dist)) if dist >= best_dist => {}
                _ => best = Some((index, dist)),
            }
        }
        best.ok_or(Error::NoSuchLabel(wanted_label))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn index_2d(points: &[(f64, f64)], labels: &[u8]) -> NeighborIndex {
        NeighborIndex::build(
            points.iter().map(|&(x, y)| vec![x, y]).collect(),
            labels.to_vec(),
        )
        .unwrap()
    }

    /// Independent reference: full sort of all (distance, index) pairs.
    fn sorted_by_distance(points: &[Vec<f64>], query: &[f64]) -> Vec<(usize, f64)> {
        let mut order: Vec<(usize, f64)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (i, squared_distance(query, p)))
            .collect();
        order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        order
    }

    #[test]
    fn build_and_append() {
        let mut idx = index_2d(&[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)], &[0, 0, 1]);
        assert_eq!(idx.len(), 3);
        idx.append(vec![5.0, 5.0], 1).unwrap();
        assert_eq!(idx.len(), 4);
        assert_eq!(idx.point(1), &[1.0, 0.0]);
    }

    #[test]
    fn build_rejects_mixed_dimension() {
        let err = NeighborIndex::build(vec![vec![0.0, 1.0], vec![2.0]], vec![0, 1]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, got: 1 }));
    }

    #[test]
    fn k_nearest_orders_by_distance() {
        let idx = index_2d(&[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)], &[0, 0, 1]);
        let got = idx.k_nearest(&[0.9, 0.0], 2).unwrap();
        assert_eq!(got.iter().map(|&(i, _)| i).collect::<Vec<_>>(), vec![1, 0]);
    }

    #[test]
    fn k_nearest_clamps_oversized_k() {
        let idx = index_2d(&[(0.0, 0.0), (1.0, 0.0), (3.0, 0.0)], &[0, 0, 1]);
        assert_eq!(idx.k_nearest(&[0.0, 0.0], 10).unwrap().len(), 3);
    }

    #[test]
    fn k_nearest_breaks_ties_by_index() {
        let idx = index_2d(&[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)], &[0, 0, 0]);
        let got = idx.k_nearest(&[0.0, 0.0], 3).unwrap();
        assert_eq!(got.iter().map(|&(i, _)| i).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn nearest_with_label_filters() {
        let idx = index_2d(&[(0.0, 0.0), (5.0, 0.0), (6.0, 0.0)], &[0, 1, 1]);
        let (i, _) = idx.nearest_with_label(&[4.0, 0.0], 1).unwrap();
        assert_eq!(i, 1);
    }

    #[test]
    fn nearest_with_label_missing_class() {
        let idx = index_2d(&[(0.0, 0.0)], &[0]);
        assert!(matches!(idx.nearest_with_label(&[0.0, 0.0], 1).unwrap_err(), Error::NoSuchLabel(1)));
    }

    #[test]
    fn nearest_with_label_accepts_distance_zero() {
        let idx = index_2d(&[(2.0, 2.0), (4.0, 0.0)], &[0, 1]);
        let (i, d) = idx.nearest_with_label(&[4.0, 0.0], 1).unwrap();
        assert_eq!((i, d), (1, 0.0));
    }

    #[test]
    fn matches_full_sort_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let n = rng.random_range(1..=200);
            let d = rng.random_range(1..=8);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.random_range(-4.0..4.0)).collect())
                .collect();
            let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.3))).collect();
            let idx = NeighborIndex::build(points.clone(), labels.clone()).unwrap();
            let query: Vec<f64> = (0..d).map(|_| rng.random_range(-4.0..4.0)).collect();
            let k = rng.random_range(1..=n + 2);

            let reference = sorted_by_distance(&points, &query);
            let got = idx.k_nearest(&query, k).unwrap();
            assert_eq!(got, reference[..k.min(n)].to_vec());

            for wanted in [0u8, 1u8] {
                let expected = reference
                    .iter()
                    .find(|&&(i, _)| labels[i] == wanted)
                    .copied();
                match (idx.nearest_with_label(&query, wanted), expected) {
                    (Ok(got), Some(want)) => assert_eq!(got, want),
                    (Err(Error::NoSuchLabel(_)), None) => {}
                    (got, want) => panic!("mismatch: {got:?} vs {want:?}"),
                }
            }
        }
    }

    #[test]
    fn distances_are_nondecreasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let points: Vec<Vec<f64>> = (0..60)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let idx = NeighborIndex::build(points, vec![0; 60]).unwrap();
        let got = idx.k_nearest(&[0.2, -0.3], 60).unwrap();
        for pair in got.windows(2) {
            assert!(pair[0].1 <= pair[1].1);
        }
    }
}
