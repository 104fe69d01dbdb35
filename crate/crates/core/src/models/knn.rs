use crate::dataset::{Dataset, Labels};
use crate::neighbors::knn;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Probabilities(Vec<f64>),
    Value(f64),
}

/// Vote fractions (classification) or neighbour mean (regression) over the
/// `min(K, n)` nearest rows of `pool`.
pub fn knn_predict(pool: &Dataset, query: &[f64], k: usize) -> Result<Prediction> {
    let set = knn(pool, query, k)?;
    let n = set.len() as f64;
    match pool.labels() {
        Labels::Class(ids) => {
            let n_classes = pool.class_names().map_or(0, |c| c.len());
            let mut votes = vec![0.0; n_classes];
            for nb in set.iter() {
                votes[ids[nb.pool_index]] += 1.0;
            }
            votes.iter_mut().for_each(|v| *v /= n);
            Ok(Prediction::Probabilities(votes))
        }
        Labels::Numeric(values) => Ok(Prediction::Value(
            set.iter().map(|nb| values[nb.pool_index]).sum::<f64>() / n,
        )),
    }
}
