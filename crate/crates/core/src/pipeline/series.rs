use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling interval of the SCADA exports this crate was built around.
pub const DEFAULT_CADENCE_MINUTES: u32 = 20;

/// An evenly spaced univariate series with an explicit missing-value mask.
///
/// Missing samples hold `NaN` in [`values`](Self::values).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    missing: Vec<bool>,
    cadence_minutes: u32,
    timestamps: Option<Vec<String>>,
}

impl TimeSeries {
    /// A fully observed series. Non-finite values are treated as missing.
    pub fn new(values: Vec<f64>) -> Self {
        Self::from_options(values.into_iter().map(Some).collect())
    }

    /// `None` (or a non-finite value) marks a missing sample.
    pub fn from_options(samples: Vec<Option<f64>>) -> Self {
        let missing: Vec<bool> = samples
            .iter()
            .map(|s| !matches!(s, Some(v) if v.is_finite()))
            .collect();
        let values = samples
            .into_iter()
            .zip(&missing)
            .map(|(s, &m)| if m { f64::NAN } else { s.unwrap_or(f64::NAN) })
            .collect();
        Self {
            values,
            missing,
            cadence_minutes: DEFAULT_CADENCE_MINUTES,
            timestamps: None,
        }
    }

    pub fn with_cadence(mut self, minutes: u32) -> Self {
        self.cadence_minutes = minutes;
        self
    }

    /// Attaches one timestamp label per sample.
    pub fn with_timestamps(mut self, timestamps: Vec<String>) -> Result<Self> {
        if timestamps.len() != self.values.len() {
            return Err(Error::invalid(format!(
                "{} timestamps for {} samples",
                timestamps.len(),
                self.values.len()
            )));
        }
        self.timestamps = Some(timestamps);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn cadence_minutes(&self) -> u32 {
        self.cadence_minutes
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    /// Values of a series with no missing samples.
    pub(crate) fn complete_values(&self) -> Result<&[f64]> {
        match self.missing.iter().position(|&m| m) {
            None => Ok(&self.values),
            Some(i) => Err(Error::invalid(format!(
                "sample {i} is missing; clean the series first"
            ))),
        }
    }
}

/// Outlier gate used by [`clean`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanPolicy {
    /// A sample is an outlier when it lies more than this many standard
    /// deviations from the mean of the other samples.
    pub z_threshold: f64,
}

impl Default for CleanPolicy {
    fn default() -> Self {
        Self { z_threshold: 4.0 }
    }
}

/// A cleaned series and what was replaced.
#[derive(Debug, Clone, PartialEq)]
pub struct Cleaned {
    pub series: TimeSeries,
    pub missing_replaced: usize,
    pub outliers_replaced: usize,
}

impl Cleaned {
    pub fn replacements(&self) -> usize {
        self.missing_replaced + self.outliers_replaced
    }
}

/// Replaces missing samples and outliers by the mean of the valid samples.
///
/// Negative speeds are always outliers. A sample `x_i` is also an outlier when
/// `|x_i - mean_{-i}| > z * std_{-i}`, the mean and (population) standard
/// deviation of all *other* samples. Outliers are flagged one at a time,
/// most extreme first, re-testing the repaired series after each, until none
/// is left; the result passes its own gate, so cleaning is idempotent.
pub fn clean(series: &TimeSeries, policy: &CleanPolicy) -> Result<Cleaned> {
    if series.is_empty() {
        return Err(Error::invalid("cannot clean an empty series"));
    }
    if !(policy.z_threshold.is_finite() && policy.z_threshold > 0.0) {
        return Err(Error::invalid(format!(
            "z_threshold must be positive, got {}",
            policy.z_threshold
        )));
    }
    let n = series.len();
    let raw = series.values();
    let mut flagged: Vec<bool> = (0..n).map(|i| !series.missing[i] && raw[i] < 0.0).collect();

    let repaired = loop {
        let valid: Vec<f64> = (0..n)
            .filter(|&i| !series.missing[i] && !flagged[i])
            .map(|i| raw[i])
            .collect();
        if valid.is_empty() {
            return Err(Error::invalid(
                "series has no valid samples to compute a replacement mean",
            ));
        }
        let fill = valid.iter().sum::<f64>() / valid.len() as f64;
        let repaired: Vec<f64> = (0..n)
            .map(|i| {
                if series.missing[i] || flagged[i] {
                    fill
                } else {
                    raw[i]
                }
            })
            .collect();

        // One sample per pass, the most extreme first, so a pair of
        // mutually "outlying" samples cannot both be discarded.
        match most_extreme_outlier(&repaired, policy.z_threshold, |i| {
            !series.missing[i] && !flagged[i]
        }) {
            Some(i) => flagged[i] = true,
            None => break repaired,
        }
    };

    let mut out = TimeSeries::new(repaired).with_cadence(series.cadence_minutes);
    out.timestamps = series.timestamps.clone();
    Ok(Cleaned {
        series: out,
        missing_replaced: series.missing_count(),
        outliers_replaced: flagged.iter().filter(|&&f| f).count(),
    })
}

/// Index of the eligible sample with the largest leave-one-out z-score
/// above `z`; ties go to the larger deviation, then the lower index.
fn most_extreme_outlier(x: &[f64], z: f64, eligible: impl Fn(usize) -> bool) -> Option<usize> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let m2: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let rest = nf - 1.0;
    // Deviations at rounding level (e.g. in a constant series) never count.
    let noise = 1e-12 * x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if (0..n).filter(|&i| eligible(i)).count() < 2 {
        return None;
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for (i, &v) in x.iter().enumerate() {
        if !eligible(i) {
            continue;
        }
        let mean_rest = (nf * mean - v) / rest;
        let m2_rest = (m2 - (v - mean) * (v - mean_rest)).max(0.0);
        let std_rest = (m2_rest / rest).sqrt();
        let dev = (v - mean_rest).abs();
        if !(dev > z * std_rest + noise) {
            continue;
        }
        let score = dev / std_rest;
        let better = match best {
            None => true,
            Some((_, s, d)) => score > s || (score == s && dev > d),
        };
        if better {
            best = Some((i, score, dev));
        }
    }
    best.map(|(i, _, _)| i)
}
