//! Committee uncertainties. All four are means or population standard
//! deviations over members, so duplicating every member changes nothing.

use std::fmt;
use std::str::FromStr;

use super::EnsemblePrediction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UncertaintyKind {
    /// `-(1/M) sum_i |0.5 - p_i|` over member positive-class probabilities.
    Eq3Binary,
    /// Population std of member regression outputs.
    RegressionStd,
    /// `1 - max_c p_c` of the aggregate.
    MaxProb,
    /// Per-class population std across members, averaged over classes.
    MeanStd,
}

impl UncertaintyKind {
    pub fn evaluate(self, pred: &EnsemblePrediction) -> Result<f64> {
        match self {
            UncertaintyKind::Eq3Binary => ensemble_binary_uncertainty(pred),
            UncertaintyKind::RegressionStd => regression_std_uncertainty(pred),
            UncertaintyKind::MaxProb => max_prob_uncertainty(pred),
            UncertaintyKind::MeanStd => mean_std_uncertainty(pred),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UncertaintyKind::Eq3Binary => "eq3_binary",
            UncertaintyKind::RegressionStd => "regression_std",
            UncertaintyKind::MaxProb => "max_prob",
            UncertaintyKind::MeanStd => "mean_std",
        }
    }
}

impl fmt::Display for UncertaintyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UncertaintyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eq3_binary" => Ok(UncertaintyKind::Eq3Binary),
            "regression_std" => Ok(UncertaintyKind::RegressionStd),
            "max_prob" => Ok(UncertaintyKind::MaxProb),
            "mean_std" => Ok(UncertaintyKind::MeanStd),
            other => Err(Error::InvalidParameter(format!("unknown uncertainty kind `{other}`"))),
        }
    }
}

/// Binary committee uncertainty in `[-0.5, 0]`; 0 exactly when every member says 0.5.
pub fn ensemble_binary_uncertainty(pred: &EnsemblePrediction) -> Result<f64> {
    match pred {
        EnsemblePrediction::Classification { per_member, .. } if per_member.first().is_some_and(|p| p.len() == 2) => {
            let gap: f64 = per_member.iter().map(|p| (0.5 - p[1]).abs()).sum();
            Ok(-gap / per_member.len() as f64)
        }
        EnsemblePrediction::Classification { per_member, .. } => Err(Error::WrongTask(format!(
            "binary uncertainty needs 2 classes, got {}",
            per_member.first().map_or(0, Vec::len)
        ))),
        EnsemblePrediction::Regression { .. } => Err(Error::WrongTask(
            "binary uncertainty needs a classification committee".into(),
        )),
    }
}

pub fn regression_std_uncertainty(pred: &EnsemblePrediction) -> Result<f64> {
    match pred {
        EnsemblePrediction::Regression { per_member, .. } => Ok(population_std(per_member.iter().copied())),
        EnsemblePrediction::Classification { .. } => {
            Err(Error::WrongTask("prediction std needs a regression committee".into()))
        }
    }
}

pub fn max_prob_uncertainty(pred: &EnsemblePrediction) -> Result<f64> {
    match pred {
        EnsemblePrediction::Classification { aggregate, .. } => {
            Ok(1.0 - aggregate.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        }
        EnsemblePrediction::Regression { .. } => Err(Error::WrongTask(
            "max-probability uncertainty needs class probabilities".into(),
        )),
    }
}

pub fn mean_std_uncertainty(pred: &EnsemblePrediction) -> Result<f64> {
    match pred {
        EnsemblePrediction::Classification { per_member, aggregate } => {
            if per_member.len() < 2 {
                return Err(Error::InvalidParameter("mean std needs at least two members".into()));
            }
            let total: f64 = (0..aggregate.len())
                .map(|c| population_std(per_member.iter().map(|p| p[c])))
                .sum();
            Ok(total / aggregate.len() as f64)
        }
        EnsemblePrediction::Regression { .. } => {
            Err(Error::WrongTask("mean std needs a classification committee".into()))
        }
    }
}

/// Two-pass population standard deviation; exactly 0 when all values are equal.
fn population_std(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let mut it = values.clone();
    let Some(first) = it.next() else { return 0.0 };
    if it.all(|v| v == first) {
        return 0.0;
    }
    let (n, sum) = values.clone().fold((0usize, 0.0), |(n, s), v| (n + 1, s + v));
    let mean = sum / n as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (ss / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cls(members: &[&[f64]]) -> EnsemblePrediction {
        EnsemblePrediction::from_probabilities(members.iter().map(|m| m.to_vec()).collect()).unwrap()
    }

    #[test]
    fn binary_disagreement_values() {
        assert_eq!(
            ensemble_binary_uncertainty(&cls(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap(),
            0.0
        );
        assert_eq!(
            ensemble_binary_uncertainty(&cls(&[&[0.0, 1.0], &[0.0, 1.0]])).unwrap(),
            -0.5
        );
        assert_eq!(
            ensemble_binary_uncertainty(&cls(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap(),
            -0.5
        );
        assert!(ensemble_binary_uncertainty(&cls(&[&[0.2, 0.3, 0.5]])).is_err());
        let reg = EnsemblePrediction::from_values(vec![1.0]).unwrap();
        assert!(ensemble_binary_uncertainty(&reg).is_err());
    }

    #[test]
    fn regression_std_values() {
        let same = EnsemblePrediction::from_values(vec![0.1; 7]).unwrap();
        assert_eq!(regression_std_uncertainty(&same).unwrap(), 0.0);
        let two = EnsemblePrediction::from_values(vec![0.0, 2.0]).unwrap();
        assert_eq!(regression_std_uncertainty(&two).unwrap(), 1.0);
        assert!(regression_std_uncertainty(&cls(&[&[1.0, 0.0]])).is_err());
    }

    #[test]
    fn max_prob_values() {
        assert_eq!(max_prob_uncertainty(&cls(&[&[0.0, 0.0, 1.0]])).unwrap(), 0.0);
        let uniform = vec![0.1; 10];
        assert!((max_prob_uncertainty(&cls(&[&uniform])).unwrap() - 0.9).abs() < 1e-15);
        assert!((max_prob_uncertainty(&cls(&[&[0.6, 0.3, 0.1]])).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn mean_std_values() {
        assert_eq!(mean_std_uncertainty(&cls(&[&[0.3, 0.7], &[0.3, 0.7]])).unwrap(), 0.0);
        assert_eq!(mean_std_uncertainty(&cls(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap(), 0.5);
        assert!(mean_std_uncertainty(&cls(&[&[1.0, 0.0]])).is_err());
    }

    #[test]
    fn kind_round_trips_through_name() {
        for k in [
            UncertaintyKind::Eq3Binary,
            UncertaintyKind::RegressionStd,
            UncertaintyKind::MaxProb,
            UncertaintyKind::MeanStd,
        ] {
            assert_eq!(k.name().parse::<UncertaintyKind>().unwrap(), k);
        }
        assert!("entropy".parse::<UncertaintyKind>().is_err());
    }
}
