//! Distance-weighted class impurity (DCI) and a pool-based active-learning
//! simulator.
//!
//! DCI scores a query point by looking at its `K` nearest labelled neighbours:
//! every neighbour contributes `1 / (d^alpha + epsilon)` to the impurity of each
//! class it does not belong to, the class sums are normalised by
//! `sum 1 / (d^alpha + epsilon)^beta`, and the score is the smallest such class
//! impurity. It needs no trained model, so it can drive acquisition from the
//! very first labelled points.
//!
//! Module map:
//!
//! - [`dataset`]: CSV / IDX loading, one-hot encoding, standardisation, PCA.
//! - [`neighbors`]: exact brute-force k-nearest-neighbour retrieval.
//! - [`dci`]: the score itself and 2D score fields.
//! - [`models`]: bagged decision trees, a kNN predictor and committee uncertainties.
//! - [`active`]: selection strategies, the simulation loop and curve aggregation.
//! - [`metrics`]: AUROC, accuracy, RMSE and the uncertainty decile analysis.

pub mod active;
pub mod dataset;
pub mod dci;
mod error;
pub mod format;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod neighbors;
pub mod rng;

pub use error::{Error, Result};
pub use matrix::Matrix;
