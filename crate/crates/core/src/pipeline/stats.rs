use rayon::prelude::*;

use super::{LaggedDataset, TimeSeries};
use crate::error::{Error, Result};

/// Default number of equal-width bins per axis for mutual information.
pub const DEFAULT_MI_BINS: usize = 16;

/// Pearson correlation between the series and its `k`-step lagged copy, for
/// `k = 1..=max_lag`.
pub fn autocorrelation(series: &TimeSeries, max_lag: usize) -> Result<Vec<f64>> {
    let x = series.complete_values()?;
    if max_lag == 0 || x.len() <= max_lag + 1 {
        return Err(Error::invalid(format!(
            "series of length {} is too short for {max_lag} autocorrelation lags",
            x.len()
        )));
    }
    (1..=max_lag)
        .map(|k| {
            pearson(&x[k..], &x[..x.len() - k]).ok_or_else(|| {
                Error::invalid(format!(
                    "correlation at lag {k} is undefined (constant series)"
                ))
            })
        })
        .collect()
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (da, db) = (x - ma, y - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Equal-width bin index of every sample over `[min, max]`; the maximum falls
/// in the last bin and a constant input maps to bin 0.
fn bin_labels(x: &[f64], bins: usize) -> Vec<usize> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    x.iter()
        .map(|v| {
            if width > 0.0 {
                (((v - lo) / width * bins as f64) as usize).min(bins - 1)
            } else {
                0
            }
        })
        .collect()
}

/// Plug-in entropy (nats) of a histogram. Counts are summed in sorted order,
/// so any relabeling of the bins gives a bit-identical value.
fn entropy_of_counts(mut counts: Vec<usize>, total: usize) -> f64 {
    counts.retain(|&c| c > 0);
    counts.sort_unstable();
    let n = total as f64;
    let sum: f64 = counts.iter().map(|&c| c as f64 * (c as f64).ln()).sum();
    n.ln() - sum / n
}

/// Mutual information of two label sequences, `H(X) + H(Y) - H(X, Y)`.
pub(crate) fn mutual_information_of_labels(x: &[usize], y: &[usize]) -> f64 {
    use std::collections::HashMap;
    let n = x.len();
    let mut cx: HashMap<usize, usize> = HashMap::new();
    let mut cy: HashMap<usize, usize> = HashMap::new();
    let mut cxy: HashMap<(usize, usize), usize> = HashMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *cx.entry(a).or_default() += 1;
        *cy.entry(b).or_default() += 1;
        *cxy.entry((a, b)).or_default() += 1;
    }
    let hx = entropy_of_counts(cx.into_values().collect(), n);
    let hy = entropy_of_counts(cy.into_values().collect(), n);
    let hxy = entropy_of_counts(cxy.into_values().collect(), n);
    (hx + hy - hxy).max(0.0)
}

/// Histogram (plug-in) estimate of mutual information in nats, using a
/// `bins x bins` equal-width grid.
pub fn mutual_information(feature: &[f64], target: &[f64], bins: usize) -> Result<f64> {
    if feature.len() != target.len() {
        return Err(Error::invalid(format!(
            "feature has {} samples, target has {}",
            feature.len(),
            target.len()
        )));
    }
    if bins == 0 {
        return Err(Error::invalid("bins must be positive"));
    }
    if feature.len() < 2 * bins {
        return Err(Error::invalid(format!(
            "{} samples are too few for {bins} bins (need at least {})",
            feature.len(),
            2 * bins
        )));
    }
    if !feature.iter().chain(target).all(|v| v.is_finite()) {
        return Err(Error::invalid("mutual information inputs must be finite"));
    }
    Ok(mutual_information_of_labels(
        &bin_labels(feature, bins),
        &bin_labels(target, bins),
    ))
}

/// Mutual information between one lag column and the targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureScore {
    pub lag: usize,
    pub mi: f64,
}

/// Scores every column and sorts by decreasing MI, smaller lag first on ties.
pub fn rank_features(ds: &LaggedDataset, bins: usize) -> Result<Vec<FeatureScore>> {
    let scores: Vec<f64> = (0..ds.n_features())
        .into_par_iter()
        .map(|c| {
            let column = ds.features().column(c).to_vec();
            mutual_information(&column, ds.targets(), bins)
        })
        .collect::<Result<_>>()?;
    let mut ranked: Vec<FeatureScore> = ds
        .lag_indices()
        .iter()
        .zip(scores)
        .map(|(&lag, mi)| FeatureScore { lag, mi })
        .collect();
    ranked.sort_by(|a, b| b.mi.total_cmp(&a.mi).then(a.lag.cmp(&b.lag)));
    Ok(ranked)
}

/// Number of columns kept for a fraction: `ceil(fraction * n)`, at least one.
pub fn selected_count(fraction: f64, n: usize) -> usize {
    (((fraction * n as f64) - 1e-9).ceil() as usize).clamp(1, n)
}

/// Keeps the `ceil(fraction * n)` columns with the highest MI against the
/// targets, ordered by decreasing MI.
pub fn select_features(ds: &LaggedDataset, fraction: f64, bins: usize) -> Result<LaggedDataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::invalid(format!(
            "selection fraction must lie in (0, 1], got {fraction}"
        )));
    }
    if ds.n_rows() == 0 || ds.n_features() == 0 {
        return Err(Error::invalid(
            "cannot select features from an empty dataset",
        ));
    }
    let keep = selected_count(fraction, ds.n_features());
    let lags: Vec<usize> = rank_features(ds, bins)?
        .into_iter()
        .take(keep)
        .map(|s| s.lag)
        .collect();
    ds.select_lags(&lags)
}
