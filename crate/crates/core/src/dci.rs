//! Distance-weighted class impurity.
//!
//! For a query with nearest labelled neighbours at distances `d_k` and labels
//! `y_k`, each neighbour gets the weighted distance `d_k^alpha + epsilon`. The
//! impurity of class `j` is the sum of reciprocal weighted distances of the
//! neighbours outside `j`, divided by `sum_k (d_k^alpha + epsilon)^-beta`.
//! The score is the minimum impurity over classes. It is zero in a pure
//! neighbourhood, grows where classes mix, and (for `beta > 1`) grows with the
//! distance to the labelled data.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::format::sig9;
use crate::neighbors::{knn_rows, Neighbor, NeighborSet};
use crate::{Error, Matrix, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DciParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl Default for DciParams {
    fn default() -> Self {
        DciParams {
            k: 20,
            alpha: 1.5,
            beta: 1.2,
            epsilon: DciParams::DEFAULT_EPSILON,
        }
    }
}

impl DciParams {
    pub const DEFAULT_EPSILON: f64 = 1e-12;

    pub fn new(k: usize, alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        let p = DciParams {
            k,
            alpha,
            beta,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("epsilon", self.epsilon)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a positive number, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// `d^alpha + epsilon`; strictly positive for `d >= 0`.
#[inline]
pub fn weighted_distance(d: f64, params: &DciParams) -> f64 {
    d.powf(params.alpha) + params.epsilon
}

/// Scores one neighbourhood. The minimum is taken over classes present among
/// the neighbours; an absent class would have the full weight sum as its
/// numerator and can never be smaller.
pub fn dci_score(neighbors: &NeighborSet, params: &DciParams, class_count: usize) -> Result<f64> {
    if neighbors.is_empty() {
        return Err(Error::Empty("DCI needs at least one neighbour".into()));
    }
    if let Some(n) = neighbors.iter().find(|n| n.label >= class_count) {
        return Err(Error::InvalidParameter(format!(
            "neighbour label {} outside {class_count} classes",
            n.label
        )));
    }
    let mut sorted;
    let entries: &[Neighbor] = if neighbors.entries.is_sorted_by(|a, b| a.rank_cmp(b).is_le()) {
        &neighbors.entries
    } else {
        sorted = neighbors.entries.clone();
        sorted.sort_unstable_by(Neighbor::rank_cmp);
        &sorted
    };
    Ok(impurity(entries, params))
}

/// Core of [`dci_score`]; `entries` must already be in canonical (rank) order
/// so that floating-point sums do not depend on the caller's ordering.
fn impurity(entries: &[Neighbor], params: &DciParams) -> f64 {
    let mut inv = Vec::with_capacity(entries.len());
    let mut density = 0.0;
    for n in entries {
        let w = weighted_distance(n.distance, params);
        inv.push(1.0 / w);
        density += 1.0 / w.powf(params.beta);
    }

    let mut classes: Vec<usize> = entries.iter().map(|n| n.label).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() == 1 {
        return 0.0;
    }

    classes
        .iter()
        .map(|&j| {
            entries
                .iter()
                .zip(&inv)
                .filter(|(n, _)| n.label != j)
                .map(|(_, w)| w)
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
        / density
}

/// DCI of `query` against labelled `points` (row `r` has `labels[r]` and pool index `ids[r]`).
pub fn dci_at(
    points: &Matrix,
    labels: &[usize],
    ids: &[usize],
    class_count: usize,
    query: &[f64],
    params: &DciParams,
) -> Result<f64> {
    let set = knn_rows(points, labels, ids, query, params.k)?;
    dci_score(&set, params, class_count)
}

/// DCI of every row of `queries` against a labelled pool, in row order.
pub fn dci_batch(pool: &Dataset, queries: &Matrix, params: &DciParams) -> Result<Vec<f64>> {
    params.validate()?;
    let (labels, class_count) = pool.class_ids();
    let ids: Vec<usize> = (0..pool.n_rows()).collect();
    queries
        .iter_rows()
        .map(|q| dci_at(pool.features(), &labels, &ids, class_count, q, params))
        .collect()
}

/// Regular 2D evaluation grid; both axes include their endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub resolution: usize,
}

impl GridSpec {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), resolution: usize) -> Result<Self> {
        let g = GridSpec {
            x_range,
            y_range,
            resolution,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::InvalidParameter("grid resolution must be at least 2".into()));
        }
        for (lo, hi) in [self.x_range, self.y_range] {
            if !(lo.is_finite() && hi.is_finite() && lo != hi) {
                return Err(Error::InvalidParameter(format!("degenerate grid range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn axis((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
        let step = (hi - lo) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
            .collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.x_range, self.resolution)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.y_range, self.resolution)
    }
}

/// DCI over a grid for a 2D pool. `field[r][c]` is the score at `(xs[c], ys[r])`.
pub fn dci_field(pool: &Dataset, grid: &GridSpec, params: &DciParams) -> Result<Vec<Vec<f64>>> {
    if pool.n_features() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: pool.n_features(),
        });
    }
    grid.validate()?;
    params.validate()?;
    let (labels, class_count) = pool.class_ids();
    let ids: Vec<usize> = (0..pool.n_rows()).collect();
    let xs = grid.xs();
    grid.ys()
        .par_iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| dci_at(pool.features(), &labels, &ids, class_count, &[x, y], params))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Renders a field as `x,y,dci` CSV, y-major, 9 significant digits.
pub fn field_csv(grid: &GridSpec, field: &[Vec<f64>]) -> String {
    let xs = grid.xs();
    let mut out = String::from("x,y,dci\n");
    for (y, row) in grid.ys().iter().zip(field) {
        for (x, v) in xs.iter().zip(row) {
            out.push_str(&format!("{},{},{}\n", sig9(*x), sig9(*y), sig9(*v)));
        }
    }
    out
}
