//! Evaluation measures and the uncertainty-decile analysis.

use crate::format::sig9;
use crate::{Error, Result};

/// Area under the ROC curve in its Mann-Whitney form: the probability that a
/// random positive outscores a random negative, ties counting one half.
/// `labels` are 0 (negative) / 1 (positive).
pub fn auroc(scores: &[f64], labels: &[usize]) -> Result<f64> {
    check_lengths(scores.len(), labels.len())?;
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::InvalidParameter("AUROC labels must be 0 or 1".into()));
    }
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidParameter("AUROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Twice the positive rank sum, so tied (half-integer) ranks stay integral.
    let mut twice_rank_sum: u128 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && scores[order[end + 1]] == scores[order[start]] {
            end += 1;
        }
        // 1-based ranks start+1 ..= end+1 share the average (start + end + 2) / 2
        let twice_avg = (start + end + 2) as u128;
        let pos_in_group = order[start..=end].iter().filter(|&&i| labels[i] == 1).count() as u128;
        twice_rank_sum += twice_avg * pos_in_group;
        start = end + 1;
    }
    let n_pos = n_pos as u128;
    let twice_u = twice_rank_sum - n_pos * (n_pos + 1);
    Ok(twice_u as f64 / (2 * n_pos * n_neg as u128) as f64)
}

pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(predicted.len(), truth.len())?;
    if truth.is_empty() {
        return Err(Error::Empty("accuracy of zero items".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

pub fn rmse(predicted: &[f64], truth: &[f64]) -> Result<f64> {
    check_lengths(predicted.len(), truth.len())?;
    if truth.is_empty() {
        return Err(Error::Empty("RMSE of zero items".into()));
    }
    let ss: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((ss / truth.len() as f64).sqrt())
}

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecileBucket {
    /// Percentile range `[lo, hi]` of the uncertainty ordering.
    pub percentile_range: (f64, f64),
    pub count: usize,
    pub accuracy: f64,
}

/// Accuracy within each tenth of the data ordered by increasing uncertainty.
#[derive(Debug, Clone, PartialEq)]
pub struct DecileReport {
    pub buckets: Vec<DecileBucket>,
}

impl DecileReport {
    pub fn accuracies(&self) -> Vec<f64> {
        self.buckets.iter().map(|b| b.accuracy).collect()
    }

    /// `decile,count,accuracy` with deciles numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("decile,count,accuracy\n");
        for (i, b) in self.buckets.iter().enumerate() {
            out.push_str(&format!("{},{},{}\n", i + 1, b.count, sig9(b.accuracy)));
        }
        out
    }

    /// Bucket-wise mean accuracy over reports of equal bucket counts.
    pub fn average(reports: &[DecileReport]) -> Result<DecileReport> {
        let first = reports
            .first()
            .ok_or_else(|| Error::Empty("no decile reports to average".into()))?;
        for r in reports {
            if r.buckets
                .iter()
                .map(|b| b.count)
                .ne(first.buckets.iter().map(|b| b.count))
            {
                return Err(Error::InvalidParameter(
                    "decile reports have different bucket counts".into(),
                ));
            }
        }
        let n = reports.len() as f64;
        let buckets = first
            .buckets
            .iter()
            .enumerate()
            .map(|(i, b)| DecileBucket {
                percentile_range: b.percentile_range,
                count: b.count,
                accuracy: reports.iter().map(|r| r.buckets[i].accuracy).sum::<f64>() / n,
            })
            .collect();
        Ok(DecileReport { buckets })
    }
}

/// Sorts items by uncertainty (ties by original index) and splits them into
/// ten buckets; with `n = 10q + r`, the first `r` buckets hold `q + 1` items.
pub fn decile_analysis(uncertainties: &[f64], correct: &[bool]) -> Result<DecileReport> {
    check_lengths(uncertainties.len(), correct.len())?;
    let n = uncertainties.len();
    if n < 10 {
        return Err(Error::InvalidParameter(format!(
            "decile analysis needs at least 10 items, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| uncertainties[a].total_cmp(&uncertainties[b]).then(a.cmp(&b)));
    let (q, r) = (n / 10, n % 10);
    let mut buckets = Vec::with_capacity(10);
    let mut start = 0;
    for b in 0..10 {
        let size = q + usize::from(b < r);
        let hits = order[start..start + size].iter().filter(|&&i| correct[i]).count();
        buckets.push(DecileBucket {
            percentile_range: (10.0 * b as f64, 10.0 * (b + 1) as f64),
            count: size,
            accuracy: hits as f64 / size as f64,
        });
        start += size;
    }
    Ok(DecileReport { buckets })
}

/// Quantile of sorted data by linear interpolation between order statistics
/// (position `p * (n - 1)`).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a.len(), b.len())?;
    if a.len() < 2 {
        return Err(Error::InvalidParameter("correlation needs at least two points".into()));
    }
    let (ra, rb) = (average_ranks(a), average_ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (va * vb).sqrt())
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && v[order[end + 1]] == v[order[start]] {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &i in &order[start..=end] {
            ranks[i] = avg;
        }
        start = end + 1;
    }
    ranks
}

/// One-sided exact sign test p-value for "`wins` out of `trials` non-tied
/// pairs favour the hypothesis": `P(X >= wins)` for `X ~ Binomial(trials, 1/2)`.
pub fn sign_test_p(wins: usize, trials: usize) -> f64 {
    if wins == 0 {
        return 1.0;
    }
    let mut log_choose = 0.0f64; // ln C(trials, 0)
    let mut tail = 0.0;
    let half_pow = -(trials as f64) * std::f64::consts::LN_2;
    for k in 0..=trials {
        if k > 0 {
            log_choose += ((trials - k + 1) as f64).ln() - (k as f64).ln();
        }
        if k >= wins {
            tail += (log_choose + half_pow).exp();
        }
    }
    tail.min(1.0)
}
