use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::TimeSeries;
use crate::error::{Error, Result};

/// Lagged feature matrix with aligned targets.
///
/// Column `c` of row `r` holds `x[target_indices[r] - lag_indices[c]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedDataset {
    features: Array2<f64>,
    targets: Vec<f64>,
    lag_indices: Vec<usize>,
    target_indices: Vec<usize>,
}

/// Builds one row per target that has every lag in `lags` available.
pub fn make_lagged_dataset_with_lags(series: &TimeSeries, lags: &[usize]) -> Result<LaggedDataset> {
    let x = series.complete_values()?;
    if lags.is_empty() || lags.contains(&0) {
        return Err(Error::invalid(
            "lags must be a non-empty list of positive offsets",
        ));
    }
    let max_lag = *lags.iter().max().expect("non-empty");
    if x.len() <= max_lag {
        return Err(Error::invalid(format!(
            "series of length {} is too short for lag {max_lag}",
            x.len()
        )));
    }
    let rows = x.len() - max_lag;
    let target_indices: Vec<usize> = (max_lag..x.len()).collect();
    let features =
        Array2::from_shape_fn((rows, lags.len()), |(r, c)| x[target_indices[r] - lags[c]]);
    Ok(LaggedDataset {
        features,
        targets: target_indices.iter().map(|&t| x[t]).collect(),
        lag_indices: lags.to_vec(),
        target_indices,
    })
}

/// Rows of lags `1..=n_lags`, lag 1 first; the target of row `r` is
/// `x[r + n_lags]`.
pub fn make_lagged_dataset(series: &TimeSeries, n_lags: usize) -> Result<LaggedDataset> {
    if n_lags == 0 {
        return Err(Error::invalid("n_lags must be positive"));
    }
    let lags: Vec<usize> = (1..=n_lags).collect();
    make_lagged_dataset_with_lags(series, &lags)
}

impl LaggedDataset {
    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn lag_indices(&self) -> &[usize] {
        &self.lag_indices
    }

    /// Series index of each row's target.
    pub fn target_indices(&self) -> &[usize] {
        &self.target_indices
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.lag_indices.len()
    }

    /// Keeps the listed lags as columns, in the given order.
    pub fn select_lags(&self, lags: &[usize]) -> Result<LaggedDataset> {
        let cols: Vec<usize> = lags
            .iter()
            .map(|lag| {
                self.lag_indices
                    .iter()
                    .position(|l| l == lag)
                    .ok_or_else(|| Error::invalid(format!("lag {lag} is not in the dataset")))
            })
            .collect::<Result<_>>()?;
        let features = Array2::from_shape_fn((self.n_rows(), cols.len()), |(r, c)| {
            self.features[[r, cols[c]]]
        });
        Ok(LaggedDataset {
            features,
            targets: self.targets.clone(),
            lag_indices: lags.to_vec(),
            target_indices: self.target_indices.clone(),
        })
    }

    fn rows(&self, start: usize, end: usize) -> LaggedDataset {
        LaggedDataset {
            features: self.features.slice(ndarray::s![start..end, ..]).to_owned(),
            targets: self.targets[start..end].to_vec(),
            lag_indices: self.lag_indices.clone(),
            target_indices: self.target_indices[start..end].to_vec(),
        }
    }
}

/// Chronological train / validation / test fractions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::invalid(format!(
                "split fractions must be positive, got {parts:?}"
            )));
        }
        let total: f64 = parts.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "split fractions sum to {total}, expected 1"
            )));
        }
        Ok(())
    }

    /// Block sizes for `rows` rows: floors for train and validation, the
    /// remainder for test.
    pub fn sizes(&self, rows: usize) -> (usize, usize, usize) {
        let floor = |f: f64| ((f * rows as f64) + 1e-9).floor() as usize;
        let train = floor(self.train);
        let val = floor(self.val);
        (train, val, rows - train - val)
    }
}

/// The three contiguous blocks of a chronological split.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: LaggedDataset,
    pub val: LaggedDataset,
    pub test: LaggedDataset,
}

/// Splits `ds` into contiguous blocks without shuffling.
pub fn split(ds: &LaggedDataset, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    if ds.n_rows() < 5 {
        return Err(Error::invalid(format!(
            "need at least 5 rows to split, got {}",
            ds.n_rows()
        )));
    }
    let (train, val, test) = spec.sizes(ds.n_rows());
    if train == 0 || val == 0 || test == 0 {
        return Err(Error::invalid(format!(
            "split of {} rows leaves an empty block ({train}/{val}/{test})",
            ds.n_rows()
        )));
    }
    Ok(Split {
        train: ds.rows(0, train),
        val: ds.rows(train, train + val),
        test: ds.rows(train + val, ds.n_rows()),
    })
}
