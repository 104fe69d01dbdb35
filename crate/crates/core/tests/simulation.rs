use std::collections::BTreeSet;

use dci_core::active::{
    aggregate, curves_csv, run_experiment, run_seeds, select_next, split_rows, summary_csv, CandidateScorer,
    ExperimentConfig, FeatureSpace, Metric, Strategy, Task,
};
use dci_core::dataset::Dataset;
use dci_core::dci::{dci_at, DciParams};
use dci_core::models::{EnsembleConfig, ModelConfig, UncertaintyKind};
use dci_core::{rng, Error, Matrix};

/// Three noisy classes in the plane.
fn toy(n: usize) -> Dataset {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut unit = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let centers = [(0.0, 0.0), (1.0, 0.2), (0.4, 1.0)];
    let rows: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let (cx, cy) = centers[i % 3];
            [cx + unit(), cy + unit()]
        })
        .collect();
    Dataset::from_classes(Matrix::from_rows(&rows).unwrap(), (0..n).map(|i| i % 3).collect(), 3).unwrap()
}

fn config(strategy: Strategy) -> ExperimentConfig {
    ExperimentConfig {
        task: Task::Classification,
        test_size: 60,
        pool_size: None,
        initial_train_size: 10,
        candidate_batch_size: 5,
        additions_per_update: 4,
        n_updates: 5,
        n_seeds: 1,
        strategy,
        model: ModelConfig::Forest(EnsembleConfig {
            n_trees: 5,
            max_depth: Some(4),
            ..Default::default()
        }),
        metric: Metric::Accuracy,
    }
}

fn dci_high() -> Strategy {
    Strategy::DciHigh {
        params: DciParams::default(),
        space: FeatureSpace::Raw,
    }
}

#[test]
fn curves_follow_the_schedule() {
    let ds = toy(240);
    for s in [
        Strategy::Random,
        dci_high(),
        Strategy::DciLow {
            params: DciParams::default(),
            space: FeatureSpace::Pca(1),
        },
        Strategy::ModelUncertainty(UncertaintyKind::MaxProb),
        Strategy::ModelUncertainty(UncertaintyKind::MeanStd),
    ] {
        let curve = run_experiment(&ds, &config(s), 3).unwrap();
        let sizes: Vec<usize> = curve.points.iter().map(|p| p.train_size).collect();
        assert_eq!(sizes, vec![10, 14, 18, 22, 26, 30], "{s}");
        assert!(curve.points.iter().all(|p| (0.0..=1.0).contains(&p.value)));
    }
}

#[test]
fn zero_updates_gives_single_point() {
    let ds = toy(120);
    let cfg = ExperimentConfig {
        n_updates: 0,
        ..config(dci_high())
    };
    assert_eq!(run_experiment(&ds, &cfg, 0).unwrap().points.len(), 1);
}

#[test]
fn reruns_are_bit_identical() {
    let ds = toy(240);
    for s in [
        Strategy::Random,
        dci_high(),
        Strategy::ModelUncertainty(UncertaintyKind::MaxProb),
    ] {
        let a = run_seeds(&ds, &config(s), &[1, 2, 3]).unwrap();
        let b = run_seeds(&ds, &config(s), &[1, 2, 3]).unwrap();
        assert_eq!(curves_csv(&a), curves_csv(&b));
        for (x, y) in a.iter().zip(&b) {
            for (p, q) in x.points.iter().zip(&y.points) {
                assert_eq!(p.value.to_bits(), q.value.to_bits());
            }
        }
    }
}

#[test]
fn preset_schedules_reach_their_final_sizes() {
    let wine = ExperimentConfig {
        initial_train_size: 200,
        additions_per_update: 10,
        n_updates: 18,
        ..config(dci_high())
    };
    assert_eq!(wine.final_train_size(), 380);
    assert_eq!(wine.schedule().len(), 19);
    let adult = ExperimentConfig {
        initial_train_size: 1162,
        additions_per_update: 200,
        n_updates: 29,
        ..config(dci_high())
    };
    assert_eq!(adult.final_train_size(), 6962);
}

#[test]
fn oversized_schedule_is_rejected() {
    let ds = toy(120);
    let cfg = ExperimentConfig {
        n_updates: 100,
        ..config(Strategy::Random)
    };
    assert!(matches!(run_experiment(&ds, &cfg, 0), Err(Error::PoolExhausted { .. })));
}

struct ByDci<'a> {
    ds: &'a Dataset,
    labelled: &'a [usize],
}

impl CandidateScorer for ByDci<'_> {
    fn score(&self, i: usize) -> dci_core::Result<f64> {
        let x = self.ds.features();
        let points = x.select_rows(self.labelled);
        let (ids, classes) = self.ds.class_ids();
        let labels: Vec<usize> = self.labelled.iter().map(|&j| ids[j]).collect();
        dci_at(
            &points,
            &labels,
            self.labelled,
            classes,
            x.row(i),
            &DciParams::default(),
        )
    }
}

#[test]
fn labelled_and_unlabelled_stay_a_partition() {
    let ds = toy(150);
    let split = split_rows(ds.n_rows(), 30, None, 10, 8).unwrap();
    let pool: BTreeSet<usize> = split.labelled.iter().chain(&split.unlabelled).copied().collect();
    let (mut labelled, mut unlabelled) = (split.labelled.clone(), split.unlabelled.clone());
    let mut r = rng::stream(8, rng::STREAM_CANDIDATES);
    while !unlabelled.is_empty() {
        let pick = {
            let scorer = ByDci {
                ds: &ds,
                labelled: &labelled,
            };
            select_next(&unlabelled, &dci_high(), 5, &scorer, &mut r).unwrap()
        };
        assert!(!labelled.contains(&pick));
        unlabelled.retain(|&i| i != pick);
        labelled.push(pick);
        let now: BTreeSet<usize> = labelled.iter().chain(&unlabelled).copied().collect();
        assert_eq!(now, pool);
        assert_eq!(labelled.len() + unlabelled.len(), pool.len());
    }
}

#[test]
fn between_classes_point_wins_over_pure_cluster() {
    // labelled: two tight clusters; candidates 0..4 sit in cluster A, candidate 5 between
    let labelled_rows = [[0.0, 0.0], [0.1, 0.0], [0.0, 0.1], [5.0, 0.0], [5.1, 0.0], [5.0, 0.1]];
    let cand_rows = [
        [0.05, 0.05],
        [0.02, 0.0],
        [0.0, 0.02],
        [0.08, 0.01],
        [0.01, 0.07],
        [2.5, 0.05],
    ];
    let rows: Vec<[f64; 2]> = labelled_rows.iter().chain(&cand_rows).copied().collect();
    let labels = vec![0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0];
    let ds = Dataset::from_classes(Matrix::from_rows(&rows).unwrap(), labels, 2).unwrap();
    let labelled: Vec<usize> = (0..6).collect();
    let scorer = ByDci {
        ds: &ds,
        labelled: &labelled,
    };
    let candidates: Vec<usize> = (6..12).collect();
    let mut r = rng::seeded(0);
    let params = DciParams::new(3, 1.5, 1.2, 1e-12).unwrap();
    let strategy = Strategy::DciHigh {
        params,
        space: FeatureSpace::Raw,
    };
    assert_eq!(select_next(&candidates, &strategy, 6, &scorer, &mut r).unwrap(), 11);
}

#[test]
fn random_strategy_ignores_class_relabelling() {
    // with a 1-NN model and no ties, permuting class ids permutes predictions
    let ds = toy(200);
    let (ids, _) = ds.class_ids();
    let permuted: Vec<usize> = ids.iter().map(|&c| (c + 1) % 3).collect();
    let ds2 = Dataset::from_classes(ds.features().clone(), permuted, 3).unwrap();
    let cfg = ExperimentConfig {
        model: ModelConfig::Knn { k: 1 },
        ..config(Strategy::Random)
    };
    for seed in 0..4 {
        assert_eq!(
            run_experiment(&ds, &cfg, seed).unwrap().points,
            run_experiment(&ds2, &cfg, seed).unwrap().points
        );
    }
}

#[test]
fn strategies_share_split_and_initial_model() {
    let ds = toy(240);
    let a = run_experiment(&ds, &config(Strategy::Random), 11).unwrap();
    let b = run_experiment(&ds, &config(dci_high()), 11).unwrap();
    assert_eq!(a.points[0], b.points[0]);
}

#[test]
fn aggregate_of_identical_curves_has_zero_iqr() {
    let ds = toy(150);
    let curve = run_experiment(&ds, &config(Strategy::Random), 4).unwrap();
    let copies = vec![curve.clone(); 20];
    let rows = aggregate(&copies).unwrap();
    for (r, p) in rows.iter().zip(&curve.points) {
        assert_eq!(r.q25, r.q75);
        assert_eq!(r.median, p.value);
    }
    let csv = summary_csv(&[("random".into(), rows)]);
    assert!(csv.starts_with("strategy,train_size,mean,median,q25,q75\nrandom,10,"));
}
