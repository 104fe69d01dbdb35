use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::{Path, PathBuf};

use dci_core::dataset::{
    load_csv, load_idx, pca_fit, pca_project, read_column_specs, standardize, write_idx, Dataset, Labels, Pipeline,
    PipelineOptions,
};
use dci_core::{Error, Matrix};
use proptest::prelude::*;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn gunzip(path: &Path) -> String {
    let mut text = String::new();
    flate2::read::GzDecoder::new(std::fs::File::open(path).unwrap())
        .read_to_string(&mut text)
        .unwrap();
    text
}

fn adult() -> Dataset {
    load_csv(data("adult.csv.gz"), &read_column_specs(data("adult.columns")).unwrap()).unwrap()
}

#[test]
fn adult_rows_match_line_filter() {
    // Independent count: keep data lines with no "?" and no empty field.
    let text = gunzip(&data("adult.csv.gz"));
    let kept: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(str::trim).collect::<Vec<_>>())
        .filter(|f| f.iter().all(|v| !v.is_empty() && *v != "?"))
        .collect();
    let ds = adult();
    assert_eq!(ds.n_rows(), kept.len());
    assert_eq!(ds.n_rows(), 45_222);

    let rich = kept.iter().filter(|f| f[14] == ">50K").count();
    let names = ds.class_names().unwrap();
    let rich_id = names.iter().position(|n| n == ">50K").unwrap();
    let Labels::Class(ids) = ds.labels() else {
        panic!("class labels expected")
    };
    assert_eq!(ids.iter().filter(|&&i| i == rich_id).count(), rich);

    // one-hot width: numeric columns plus one indicator per observed category
    let categorical = [1, 3, 5, 6, 7, 8, 9, 13];
    let categories: usize = categorical
        .iter()
        .map(|&c| kept.iter().map(|f| f[c]).collect::<BTreeSet<_>>().len())
        .sum();
    let (_, encoded) = Pipeline::fit(&ds, PipelineOptions::default()).unwrap();
    assert_eq!(encoded.n_features(), 6 + categories);
}

#[test]
fn one_hot_blocks_sum_to_one() {
    let ds = adult();
    let opts = PipelineOptions {
        standardize: false,
        ..PipelineOptions::default()
    };
    let (_, encoded) = Pipeline::fit(&ds, opts).unwrap();
    // group indicator columns by their source column name
    let mut blocks: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (j, c) in encoded.columns().iter().enumerate() {
        if let Some((src, _)) = c.name.split_once('=') {
            blocks.entry(src.to_string()).or_default().push(j);
        }
    }
    assert_eq!(blocks.len(), 8);
    for row in encoded.features().iter_rows().step_by(97) {
        for cols in blocks.values() {
            assert_eq!(cols.iter().map(|&j| row[j]).sum::<f64>(), 1.0);
        }
    }
}

#[test]
fn wine_loads_and_standardizes() {
    let specs = read_column_specs(data("winequality-red.columns")).unwrap();
    let ds = load_csv(data("winequality-red.csv.gz"), &specs).unwrap();
    assert_eq!((ds.n_rows(), ds.n_features()), (1599, 11));
    assert!(!ds.is_classification());

    // first data row, parsed independently
    let text = gunzip(&data("winequality-red.csv.gz"));
    let first: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert_eq!(ds.features().row(0), &first[..11]);

    let all: Vec<usize> = (0..ds.n_rows()).collect();
    let z = standardize(&ds, &all).unwrap();
    for j in 0..z.n_features() {
        let col = z.features().column(j);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-12, "column {j} mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 1e-12, "column {j} std {}", var.sqrt());
    }
    let twice = standardize(&z, &all).unwrap();
    for (a, b) in z.features().as_slice().iter().zip(twice.features().as_slice()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn unknown_or_missing_columns_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    std::fs::write(&csv, "a,b,y\n1,2,x\n").unwrap();
    let specs = dci_core::dataset::parse_column_specs("a = numeric\ny = label_class\n").unwrap();
    assert!(matches!(load_csv(&csv, &specs), Err(Error::UnknownColumn(c)) if c == "b"));
    let specs =
        dci_core::dataset::parse_column_specs("a = numeric\nb = numeric\nc = numeric\ny = label_class\n").unwrap();
    assert!(matches!(load_csv(&csv, &specs), Err(Error::MissingColumn(c)) if c == "c"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn idx_round_trip(
        (n, rows, cols) in (1usize..12, 1usize..5, 1usize..5),
        seed in any::<u64>(),
    ) {
        let width = rows * cols;
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let pixels: Vec<f64> = (0..n * width).map(|_| (next() % 256) as f64 / 255.0).collect();
        let labels: Vec<usize> = (0..n).map(|_| (next() % 10) as usize).collect();
        let ds = Dataset::from_classes(Matrix::from_vec(n, width, pixels).unwrap(), labels.clone(), 10).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (img, lab) = (dir.path().join("img"), dir.path().join("lab"));
        write_idx(&ds, &img, &lab, rows, cols).unwrap();
        let back = load_idx(&img, &lab).unwrap();
        prop_assert_eq!(back.features().as_slice(), ds.features().as_slice());
        prop_assert_eq!(back.labels(), &Labels::Class(labels));
    }
}

#[test]
fn idx_rejects_damaged_files() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("img");
    let lab = dir.path().join("lab");
    let mut header = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2];
    header.extend([0u8; 7]); // one byte short of two 2x2 images
    std::fs::write(&img, &header).unwrap();
    std::fs::write(&lab, [0, 0, 8, 1, 0, 0, 0, 2, 3, 4]).unwrap();
    assert!(matches!(load_idx(&img, &lab), Err(Error::Truncated(_))));

    header.push(0);
    std::fs::write(&img, &header).unwrap();
    assert_eq!(load_idx(&img, &lab).unwrap().n_rows(), 2);

    std::fs::write(&lab, [0, 0, 8, 3, 0, 0, 0, 2, 3, 4]).unwrap();
    assert!(matches!(load_idx(&img, &lab), Err(Error::BadMagic { .. })));
}

/// Cyclic Jacobi eigen-solver for a small symmetric matrix; returns
/// (eigenvalues, eigenvectors as columns of `v`).
#[allow(clippy::needless_range_loop)]
fn jacobi(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
        .collect();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

fn covariance(x: &Matrix) -> (Vec<f64>, Vec<Vec<f64>>) {
    let (n, d) = (x.rows(), x.cols());
    let mean: Vec<f64> = (0..d).map(|j| x.column(j).iter().sum::<f64>() / n as f64).collect();
    let cov = (0..d)
        .map(|a| {
            (0..d)
                .map(|b| {
                    (0..n)
                        .map(|i| (x.get(i, a) - mean[a]) * (x.get(i, b) - mean[b]))
                        .sum::<f64>()
                        / n as f64
                })
                .collect()
        })
        .collect();
    (mean, cov)
}

fn sample(n: usize, scales: &[f64], seed: u64) -> Matrix {
    let mut state = seed;
    let mut unit = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let z: Vec<f64> = scales.iter().map(|s| s * unit()).collect();
            // mix coordinates so components are not axis-aligned
            (0..z.len()).map(|j| z[j] + 0.3 * z[(j + 1) % z.len()]).collect()
        })
        .collect();
    Matrix::from_rows(&rows).unwrap()
}

fn check_against_jacobi(x: &Matrix, k: usize) {
    let model = pca_fit(x, k).unwrap();
    let (mean, cov) = covariance(x);
    let (vals, vecs) = jacobi(cov);
    let total: f64 = vals.iter().sum();
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    for (c, &o) in order.iter().take(k).enumerate() {
        let ratio = vals[o] / total;
        assert!((model.explained_variance_ratio[c] - ratio).abs() < 1e-9, "ratio {c}");
        let dot: f64 = (0..vals.len()).map(|j| model.components.get(c, j) * vecs[j][o]).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-8, "component {c} alignment {dot}");
    }
    for (m, o) in model.mean.iter().zip(&mean) {
        assert!((m - o).abs() < 1e-12);
    }

    let proj = pca_project(&model, x).unwrap();
    for i in 0..x.rows() {
        for c in 0..k {
            let direct: f64 = (0..x.cols())
                .map(|j| (x.get(i, j) - mean[j]) * model.components.get(c, j))
                .sum::<f64>()
                * model.explained_variance_ratio[c];
            assert!((proj.get(i, c) - direct).abs() < 1e-10);
        }
    }
}

#[test]
fn pca_matches_jacobi_oracle() {
    check_against_jacobi(&sample(200, &[5.0, 3.0, 2.0, 1.0, 0.5, 0.2], 1), 4);
}

#[test]
fn pca_gram_route_matches_jacobi_oracle() {
    // fewer rows than columns: leading directions still agree
    check_against_jacobi(&sample(6, &[9.0, 5.0, 3.0, 2.0, 1.0, 0.7, 0.4, 0.2], 2), 4);
}
