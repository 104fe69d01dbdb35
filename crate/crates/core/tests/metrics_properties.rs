use dci_core::metrics::{accuracy, auroc, decile_analysis, quantile_sorted, rmse, sign_test_p, spearman, DecileReport};
use proptest::prelude::*;

fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
    (2usize..120).prop_flat_map(|n| {
        (
            prop::collection::vec((0u8..8).prop_map(|v| v as f64 * 0.125), n),
            prop::collection::vec(0usize..2, n),
        )
            .prop_map(|(s, mut y)| {
                y[0] = 0;
                y[1] = 1;
                (s, y)
            })
    })
}

fn pairwise(scores: &[f64], labels: &[usize]) -> f64 {
    let (mut twice, mut pairs) = (0u64, 0u64);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] == 1 && labels[j] == 0 {
                pairs += 1;
                twice += if si > sj {
                    2
                } else if si == sj {
                    1
                } else {
                    0
                };
            }
        }
    }
    twice as f64 / (2 * pairs) as f64
}

proptest! {
    #[test]
    fn auroc_equals_pairwise_count((s, y) in scored_labels()) {
        prop_assert_eq!(auroc(&s, &y).unwrap(), pairwise(&s, &y));
    }

    #[test]
    fn auroc_flipped_labels_sum_to_one((s, y) in scored_labels()) {
        let flipped: Vec<usize> = y.iter().map(|&l| 1 - l).collect();
        prop_assert_eq!(auroc(&s, &y).unwrap() + auroc(&s, &flipped).unwrap(), 1.0);
    }

    #[test]
    fn auroc_ignores_increasing_transforms((s, y) in scored_labels()) {
        let t: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() - 7.0).collect();
        prop_assert_eq!(auroc(&s, &y).unwrap(), auroc(&t, &y).unwrap());
    }

    #[test]
    fn rmse_symmetric_and_shift_invariant(
        ab in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 1..50),
        c in -50.0f64..50.0,
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = ab.into_iter().unzip();
        let r = rmse(&a, &b).unwrap();
        prop_assert_eq!(r, rmse(&b, &a).unwrap());
        let a2: Vec<f64> = a.iter().map(|v| v + c).collect();
        let b2: Vec<f64> = b.iter().map(|v| v + c).collect();
        prop_assert!((rmse(&a2, &b2).unwrap() - r).abs() <= 1e-9 * r.max(1.0));
        // direct summation oracle
        let direct = (a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt();
        prop_assert!((r - direct).abs() <= 1e-12 * direct.max(1e-300));
    }

    #[test]
    fn decile_counts_weight_back_to_overall_accuracy(
        items in prop::collection::vec(((0u8..20).prop_map(f64::from), any::<bool>()), 10..400),
    ) {
        let (u, ok): (Vec<f64>, Vec<bool>) = items.into_iter().unzip();
        let report = decile_analysis(&u, &ok).unwrap();
        let counts: Vec<usize> = report.buckets.iter().map(|b| b.count).collect();
        prop_assert_eq!(counts.iter().sum::<usize>(), u.len());
        prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        let weighted: f64 = report.buckets.iter().map(|b| b.accuracy * b.count as f64).sum::<f64>() / u.len() as f64;
        let overall = ok.iter().filter(|&&c| c).count() as f64 / u.len() as f64;
        prop_assert!((weighted - overall).abs() <= 1e-12);
        for (i, b) in report.buckets.iter().enumerate() {
            prop_assert_eq!(b.percentile_range, (10.0 * i as f64, 10.0 * (i + 1) as f64));
        }
    }

    #[test]
    fn spearman_is_bounded(
        ab in prop::collection::vec((-5i32..5, -5i32..5), 2..40),
    ) {
        let (a, b): (Vec<f64>, Vec<f64>) = ab.into_iter().map(|(x, y)| (x as f64, y as f64)).unzip();
        let r = spearman(&a, &b).unwrap();
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
    }
}

#[test]
fn accuracy_checks_lengths() {
    assert!(accuracy(&[], &[]).is_err());
    assert!(accuracy(&[0, 1], &[0]).is_err());
}

#[test]
fn averaged_report_is_bucketwise_mean() {
    let u: Vec<f64> = (0..20).map(f64::from).collect();
    let a = decile_analysis(&u, &[true; 20]).unwrap();
    let ok: Vec<bool> = (0..20).map(|i| i % 2 == 0).collect();
    let b = decile_analysis(&u, &ok).unwrap();
    let avg = DecileReport::average(&[a.clone(), b.clone()]).unwrap();
    for i in 0..10 {
        assert_eq!(
            avg.buckets[i].accuracy,
            (a.buckets[i].accuracy + b.buckets[i].accuracy) / 2.0
        );
    }
}

#[test]
fn quantiles_follow_linear_rule() {
    let v = [1.0, 2.0, 4.0, 8.0, 16.0];
    assert_eq!(quantile_sorted(&v, 0.0), 1.0);
    assert_eq!(quantile_sorted(&v, 1.0), 16.0);
    assert_eq!(quantile_sorted(&v, 0.25), 2.0);
    assert_eq!(quantile_sorted(&v, 0.6), 5.6);
}

#[test]
fn sign_test_matches_exact_binomial_tail() {
    // P(X >= w) with X ~ Bin(n, 1/2), summed with exact integer binomials
    for (n, w) in [(10u64, 7u64), (30, 23), (30, 15), (60, 40)] {
        let mut c: u128 = 1;
        let mut tail: u128 = 0;
        for k in 0..=n {
            if k > 0 {
                c = c * (n - k + 1) as u128 / k as u128;
            }
            if k >= w {
                tail += c;
            }
        }
        let exact = tail as f64 / 2f64.powi(n as i32);
        let got = sign_test_p(w as usize, n as usize);
        assert!((got - exact).abs() <= 1e-12 * exact, "{n} {w}: {got} vs {exact}");
    }
}
