use chrono::{Duration, NaiveDate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{TimeSeries, DEFAULT_CADENCE_MINUTES};

/// Shortest series the generator accepts.
pub const MIN_SYNTH_LEN: usize = 500;

/// One periodic component, `amplitude * sin(2 pi t / period + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    /// Period in samples.
    pub period: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Wind-speed-like series: a level, periodic terms, an AR(1) anomaly and
/// white measurement noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub n: usize,
    pub seed: u64,
    pub base_level: f64,
    pub sinusoids: Vec<Sinusoid>,
    pub ar_coeff: f64,
    /// Standard deviation of the AR(1) innovations.
    pub ar_std: f64,
    pub noise_std: f64,
    /// The series is shifted up so its minimum is at least this.
    pub min_level: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 4393,
            seed: 7,
            base_level: 7.0,
            // 20-minute samples: 72 per day
            sinusoids: vec![
                Sinusoid {
                    period: 72.0,
                    amplitude: 2.0,
                    phase: 0.0,
                },
                Sinusoid {
                    period: 36.0,
                    amplitude: 0.6,
                    phase: 1.0,
                },
            ],
            ar_coeff: 0.9,
            ar_std: 0.6,
            noise_std: 0.25,
            min_level: 0.5,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_SYNTH_LEN {
            return Err(Error::invalid(format!(
                "synthetic series needs n >= {MIN_SYNTH_LEN}, got {}",
                self.n
            )));
        }
        if !(self.ar_coeff.abs() < 1.0) {
            return Err(Error::invalid(format!(
                "ar_coeff must lie in (-1, 1), got {}",
                self.ar_coeff
            )));
        }
        let nonneg = [self.ar_std, self.noise_std];
        if nonneg.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid(
                "noise levels must be finite and non-negative",
            ));
        }
        if !(self.base_level.is_finite() && self.min_level.is_finite()) {
            return Err(Error::invalid("levels must be finite"));
        }
        for s in &self.sinusoids {
            if !(s.period.is_finite() && s.period > 0.0)
                || !s.amplitude.is_finite()
                || !s.phase.is_finite()
            {
                return Err(Error::invalid(format!("bad sinusoid {s:?}")));
            }
        }
        Ok(())
    }
}

/// Draws a series with ISO timestamps every 20 minutes from 2015-04-01.
///
/// Per sample the RNG yields the AR innovation, then the measurement noise.
pub fn generate_synthetic(spec: &SynthSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let stationary_std = spec.ar_std / (1.0 - spec.ar_coeff * spec.ar_coeff).sqrt();
    let mut anomaly = stationary_std * unit.sample(&mut rng);

    let mut values = Vec::with_capacity(spec.n);
    for t in 0..spec.n {
        if t > 0 {
            anomaly = spec.ar_coeff * anomaly + spec.ar_std * unit.sample(&mut rng);
        }
        let noise = spec.noise_std * unit.sample(&mut rng);
        let periodic: f64 = spec
            .sinusoids
            .iter()
            .map(|s| s.amplitude * (std::f64::consts::TAU * t as f64 / s.period + s.phase).sin())
            .sum();
        values.push(spec.base_level + periodic + anomaly + noise);
    }

    let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
    if lowest < spec.min_level {
        let shift = spec.min_level - lowest;
        values.iter_mut().for_each(|v| *v += shift);
    }

    let start = NaiveDate::from_ymd_opt(2015, 4, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid start date");
    let step = Duration::minutes(DEFAULT_CADENCE_MINUTES as i64);
    let stamps = (0..spec.n)
        .map(|t| {
            (start + step * t as i32)
                .format("%Y-%m-%dT%H:%M")
                .to_string()
        })
        .collect();
    TimeSeries::new(values).with_timestamps(stamps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_spec_same_series() {
        let spec = SynthSpec {
            n: 600,
            ..Default::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&SynthSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn noiseless_single_sinusoid_is_exact() {
        let spec = SynthSpec {
            n: 500,
            base_level: 5.0,
            sinusoids: vec![Sinusoid {
                period: 50.0,
                amplitude: 2.0,
                phase: 0.3,
            }],
            ar_std: 0.0,
            noise_std: 0.0,
            ..Default::default()
        };
        let s = generate_synthetic(&spec).unwrap();
        for (t, v) in s.values().iter().enumerate() {
            let want = 5.0 + 2.0 * (std::f64::consts::TAU * t as f64 / 50.0 + 0.3).sin();
            assert_eq!(*v, want);
        }
    }

    #[test]
    fn timestamps_step_twenty_minutes() {
        let s = generate_synthetic(&SynthSpec {
            n: 500,
            ..Default::default()
        })
        .unwrap();
        let t = s.timestamps().unwrap();
        assert_eq!(t[0], "2015-04-01T00:00");
        assert_eq!(t[1], "2015-04-01T00:20");
        assert_eq!(t[72], "2015-04-02T00:00");
    }

    #[test]
    fn output_respects_the_floor() {
        let spec = SynthSpec {
            n: 800,
            base_level: -3.0,
            ..Default::default()
        };
        let s = generate_synthetic(&spec).unwrap();
        let lowest = s.values().iter().copied().fold(f64::INFINITY, f64::min);
        assert!((lowest - spec.min_level).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_synthetic(&SynthSpec {
            n: 499,
            ..Default::default()
        })
        .is_err());
        assert!(generate_synthetic(&SynthSpec {
            ar_coeff: 1.0,
            ..Default::default()
        })
        .is_err());
        assert!(generate_synthetic(&SynthSpec {
            noise_std: -1.0,
            ..Default::default()
        })
        .is_err());
    }
}
