//! Forecast error metrics and the validation-RMSE fitness used to tune LSSVM
//! hyperparameters.

use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lssvm::{self, Hyperparams, LssvmModel, SquaredDistances};
use crate::pipeline::LaggedDataset;
use crate::swarm::SearchSpace;

/// Targets with `|y| <= MAPE_FLOOR` make MAPE undefined.
pub const MAPE_FLOOR: f64 = 1e-6;

/// Lower corner of the hyperparameter box, `(gamma, sigma2)`.
pub const HYPERPARAM_MIN: [f64; 2] = [1e-4, 8.0];
/// Upper corner of the hyperparameter box, `(gamma, sigma2)`.
pub const HYPERPARAM_MAX: [f64; 2] = [1e6, 4e4];

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::invalid("metrics need at least one sample"));
    }
    if y.len() != yhat.len() {
        return Err(Error::invalid(format!(
            "{} actual values but {} forecasts",
            y.len(),
            yhat.len()
        )));
    }
    Ok(())
}

/// Mean absolute error.
pub fn mae(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).sum::<f64>() / y.len() as f64)
}

/// Root mean squared error.
pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let mse = y
        .iter()
        .zip(yhat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / y.len() as f64;
    Ok(mse.sqrt())
}

/// Mean absolute percentage error, in percent, with the default zero guard.
pub fn mape(y: &[f64], yhat: &[f64]) -> Result<f64> {
    mape_with_floor(y, yhat, MAPE_FLOOR)
}

/// MAPE that rejects any target with `|y_i| <= floor`.
pub fn mape_with_floor(y: &[f64], yhat: &[f64], floor: f64) -> Result<f64> {
    check_pair(y, yhat)?;
    if let Some(index) = y.iter().position(|v| !(v.abs() > floor)) {
        return Err(Error::NearZeroTarget {
            index,
            value: y[index],
        });
    }
    let sum: f64 = y.iter().zip(yhat).map(|(a, b)| ((a - b) / a).abs()).sum();
    Ok(sum / y.len() as f64 * 100.0)
}

/// The three forecast scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mae: f64,
    pub rmse: f64,
    /// Percent.
    pub mape: f64,
}

impl MetricReport {
    pub fn compute(y: &[f64], yhat: &[f64]) -> Result<Self> {
        Ok(Self {
            mae: mae(y, yhat)?,
            rmse: rmse(y, yhat)?,
            mape: mape(y, yhat)?,
        })
    }
}

/// Search box for `(log10 gamma, log10 sigma2)`.
pub fn lssvm_search_space() -> SearchSpace {
    SearchSpace::new(
        HYPERPARAM_MIN.iter().map(|v| v.log10()).collect(),
        HYPERPARAM_MAX.iter().map(|v| v.log10()).collect(),
    )
    .expect("constant bounds are ordered")
}

/// Validation RMSE of an LSSVM trained with hyperparameters decoded from a
/// log10 position.
///
/// Distances among training rows and from validation rows to training rows
/// are computed once at construction. Evaluation is pure apart from the
/// failure counter, and safe to call from several threads.
#[derive(Debug)]
pub struct LssvmFitness {
    train_x: Array2<f64>,
    train_y: Vec<f64>,
    val_y: Vec<f64>,
    train_distances: SquaredDistances,
    val_distances: SquaredDistances,
    failures: AtomicUsize,
}

impl LssvmFitness {
    pub fn new(train: &LaggedDataset, val: &LaggedDataset) -> Result<Self> {
        if train.n_rows() == 0 || val.n_rows() == 0 {
            return Err(Error::invalid(
                "training and validation sets must be non-empty",
            ));
        }
        if train.lag_indices() != val.lag_indices() {
            return Err(Error::invalid(
                "training and validation sets use different feature columns",
            ));
        }
        let all_finite = train
            .features()
            .iter()
            .chain(val.features().iter())
            .chain(train.targets())
            .chain(val.targets())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("datasets contain non-finite values"));
        }
        Ok(Self {
            train_x: train.features().clone(),
            train_y: train.targets().to_vec(),
            val_y: val.targets().to_vec(),
            train_distances: SquaredDistances::pairwise(train.features().view()),
            val_distances: SquaredDistances::cross(val.features().view(), train.features().view())?,
            failures: AtomicUsize::new(0),
        })
    }

    /// Validation RMSE at `position = (log10 gamma, log10 sigma2)`; `+inf`
    /// when the hyperparameters are invalid or the solver fails.
    pub fn evaluate(&self, position: &[f64]) -> f64 {
        match self.try_evaluate(position) {
            Ok(v) if v.is_finite() => v,
            _ => {
                self.failures.fetch_add(1, Ordering::Relaxed);
                f64::INFINITY
            }
        }
    }

    fn try_evaluate(&self, position: &[f64]) -> Result<f64> {
        let hp = Hyperparams::from_log10(position)?;
        let (a, b) = lssvm::solve_dual(&self.train_distances, &self.train_y, hp)?;
        let forecast = lssvm::predict_dual(&self.val_distances, &a, b, hp.sigma2());
        rmse(&self.val_y, &forecast)
    }

    /// Number of evaluations that returned `+inf`.
    pub fn failures(&self) -> usize {
        self.failures.load(Ordering::Relaxed)
    }

    /// Trains the final model on the training block.
    pub fn train_model(&self, hp: Hyperparams) -> Result<LssvmModel> {
        lssvm::train_with_distances(
            self.train_x.view(),
            &self.train_distances,
            &self.train_y,
            hp,
        )
    }
}

/// One-shot fitness: trains on `train`, returns RMSE on `val`.
pub fn lssvm_fitness(position: &[f64], train: &LaggedDataset, val: &LaggedDataset) -> Result<f64> {
    Ok(LssvmFitness::new(train, val)?.evaluate(position))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_values() {
        let y = [2.0, 4.0];
        let yhat = [1.0, 6.0];
        assert!((mae(&y, &yhat).unwrap() - 1.5).abs() < 1e-12);
        assert!((rmse(&y, &yhat).unwrap() - 2.5f64.sqrt()).abs() < 1e-12);
        assert!((mape(&y, &yhat).unwrap() - 50.0).abs() < 1e-12);
        assert_eq!(mae(&[5.0], &[3.0]).unwrap(), 2.0);
    }

    #[test]
    fn perfect_forecast_scores_zero() {
        let y = [1.0, 2.5, 7.0];
        let r = MetricReport::compute(&y, &y).unwrap();
        assert_eq!((r.mae, r.rmse, r.mape), (0.0, 0.0, 0.0));
    }

    #[test]
    fn constant_error_rmse() {
        let y = [1.0, 2.0, 3.0, 4.0];
        let yhat: Vec<f64> = y.iter().map(|v| v - 0.75).collect();
        assert!((rmse(&y, &yhat).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn mape_names_the_zero_target() {
        match mape(&[1.0, 0.0, 2.0], &[1.0, 1.0, 1.0]) {
            Err(Error::NearZeroTarget { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected zero-target error, got {other:?}"),
        }
        assert!(mape_with_floor(&[0.5], &[0.4], 1.0).is_err());
    }

    #[test]
    fn length_checks() {
        assert!(mae(&[], &[]).is_err());
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mape(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn search_space_is_the_log_box() {
        let s = lssvm_search_space();
        assert!((s.lower()[0] + 4.0).abs() < 1e-12);
        assert!((s.upper()[0] - 6.0).abs() < 1e-12);
        assert!((s.lower()[1] - 8f64.log10()).abs() < 1e-12);
        assert!((s.upper()[1] - 4e4f64.log10()).abs() < 1e-12);
    }
}
