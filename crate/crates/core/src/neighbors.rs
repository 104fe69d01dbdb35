//! Exact k-nearest-neighbour retrieval under Euclidean distance.
//!
//! Search is brute force. Ties at equal distance are broken by ascending
//! pool index, so results are fully deterministic.

use std::cmp::Ordering;

use crate::dataset::Dataset;
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub distance: f64,
    pub label: usize,
    pub pool_index: usize,
}

impl Neighbor {
    /// Total order used for ranking: distance, then pool index.
    pub fn rank_cmp(&self, other: &Neighbor) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.pool_index.cmp(&other.pool_index))
    }
}

/// The `K' = min(K, pool size)` nearest labelled points, nearest first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NeighborSet {
    pub entries: Vec<Neighbor>,
}

impl NeighborSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Neighbor> {
        self.entries.iter()
    }
}

pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(squared_distance(a, b).sqrt())
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// Nearest neighbours of `query` among the rows of a class-labelled dataset.
pub fn knn(pool: &Dataset, query: &[f64], k: usize) -> Result<NeighborSet> {
    let (labels, _) = pool.class_ids();
    let ids: Vec<usize> = (0..pool.n_rows()).collect();
    knn_rows(pool.features(), &labels, &ids, query, k)
}

/// Nearest neighbours among `points`, where row `r` carries `labels[r]` and
/// pool index `ids[r]` (pool indices must be distinct).
pub fn knn_rows(points: &Matrix, labels: &[usize], ids: &[usize], query: &[f64], k: usize) -> Result<NeighborSet> {
    if points.is_empty() {
        return Err(Error::Empty("kNN pool has no points".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    if query.len() != points.cols() {
        return Err(Error::DimensionMismatch {
            expected: points.cols(),
            found: query.len(),
        });
    }
    debug_assert_eq!(labels.len(), points.rows());
    debug_assert_eq!(ids.len(), points.rows());

    let mut all: Vec<Neighbor> = points
        .iter_rows()
        .enumerate()
        .map(|(r, row)| Neighbor {
            distance: squared_distance(row, query).sqrt(),
            label: labels[r],
            pool_index: ids[r],
        })
        .collect();
    let keep = k.min(all.len());
    if keep < all.len() {
        all.select_nth_unstable_by(keep - 1, Neighbor::rank_cmp);
        all.truncate(keep);
    }
    all.sort_unstable_by(Neighbor::rank_cmp);
    Ok(NeighborSet { entries: all })
}
