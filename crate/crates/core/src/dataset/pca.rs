use nalgebra::{DMatrix, SymmetricEigen};

use crate::{Error, Matrix, Result};

/// Principal axes of a centred data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// One orthonormal component per row, strongest first.
    pub components: Matrix,
    /// Eigenvalue over total variance, non-increasing; zero past the data rank.
    pub explained_variance_ratio: Vec<f64>,
    /// Set when fewer than `n_components` directions carry variance; the
    /// trailing components then complete an arbitrary orthonormal basis.
    pub rank_deficient: bool,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }
}

/// Relative eigenvalue floor below which a direction counts as variance-free.
const RANK_TOL: f64 = 1e-12;

/// Fits PCA by eigendecomposition of the population covariance. When there
/// are fewer rows than columns the (smaller) Gram matrix is decomposed instead.
pub fn pca_fit(x: &Matrix, n_components: usize) -> Result<PcaModel> {
    let (n, d) = (x.rows(), x.cols());
    if n < 2 {
        return Err(Error::InvalidParameter(format!("PCA needs at least 2 rows, got {n}")));
    }
    if n_components == 0 || n_components > n.min(d) {
        return Err(Error::InvalidParameter(format!(
            "n_components must be in 1..={}, got {n_components}",
            n.min(d)
        )));
    }

    let mut mean = vec![0.0; d];
    for row in x.iter_rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centred = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - mean[j]);
    let total: f64 = centred.iter().map(|v| v * v).sum::<f64>() / n as f64;

    // (eigenvalue, direction in feature space) for the leading directions
    let mut pairs: Vec<(f64, Vec<f64>)> = if n >= d {
        let cov = centred.transpose() * &centred / n as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        order
            .into_iter()
            .take(n_components)
            .map(|k| (eig.eigenvalues[k], eig.eigenvectors.column(k).iter().copied().collect()))
            .collect()
    } else {
        let gram = &centred * centred.transpose() / n as f64;
        let eig = SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        order
            .into_iter()
            .take(n_components)
            .map(|k| {
                let u = eig.eigenvectors.column(k);
                let v = centred.transpose() * u;
                (eig.eigenvalues[k], v.iter().copied().collect())
            })
            .collect()
    };

    let floor = RANK_TOL * total.max(f64::MIN_POSITIVE);
    let mut rank_deficient = false;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n_components);
    let mut ratios = Vec::with_capacity(n_components);
    for (lambda, dir) in pairs.iter_mut() {
        if *lambda > floor {
            normalise(dir);
            basis.push(std::mem::take(dir));
            ratios.push(*lambda / total);
        } else {
            rank_deficient = true;
            ratios.push(0.0);
        }
    }
    complete_basis(&mut basis, d, n_components);

    let rows: Vec<Vec<f64>> = basis;
    Ok(PcaModel {
        mean,
        components: Matrix::from_rows(&rows)?,
        explained_variance_ratio: ratios,
        rank_deficient,
    })
}

/// Projects rows onto the components and weights column `k` by the
/// component's explained variance ratio.
pub fn pca_project(model: &PcaModel, x: &Matrix) -> Result<Matrix> {
    if x.cols() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            found: x.cols(),
        });
    }
    let k = model.n_components();
    let mut out = Matrix::zeros(x.rows(), k);
    let mut centred = vec![0.0; x.cols()];
    for (i, row) in x.iter_rows().enumerate() {
        for ((c, v), m) in centred.iter_mut().zip(row).zip(&model.mean) {
            *c = v - m;
        }
        for (c, ratio) in model.explained_variance_ratio.iter().enumerate() {
            let dot: f64 = centred.iter().zip(model.components.row(c)).map(|(a, b)| a * b).sum();
            out.set(i, c, dot * ratio);
        }
    }
    Ok(out)
}

fn normalise(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Appends unit vectors orthogonal to `basis` (Gram-Schmidt over the standard basis).
fn complete_basis(basis: &mut Vec<Vec<f64>>, d: usize, target: usize) {
    let mut e = 0;
    while basis.len() < target && e < d {
        let mut v = vec![0.0; d];
        v[e] = 1.0;
        e += 1;
        // two passes keep the result orthogonal to working precision
        for _ in 0..2 {
            for b in basis.iter() {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
}
