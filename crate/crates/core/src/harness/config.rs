use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::synth::SynthSpec;
use crate::error::{Error, Result};
use crate::metrics::lssvm_search_space;
use crate::pipeline::{CleanPolicy, SplitSpec, DEFAULT_MI_BINS};
use crate::swarm::{Strategy, SwarmConfig};

/// Everything needed to reproduce a forecasting experiment.
///
/// Read from TOML; unknown keys are rejected. When neither `csv` nor
/// `[synthetic]` is given, the default synthetic series is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub csv: Option<PathBuf>,
    pub synthetic: Option<SynthSpec>,
    pub n_lags: usize,
    pub select_fraction: f64,
    pub mi_bins: usize,
    pub clean: CleanPolicy,
    pub split: SplitSpec,
    pub strategies: Vec<Strategy>,
    pub swarm: SwarmConfig,
    pub trials: usize,
    /// Trial `k` uses seed `seed + k` for every strategy.
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            csv: None,
            synthetic: None,
            n_lags: 100,
            select_fraction: 0.1,
            mi_bins: DEFAULT_MI_BINS,
            clean: CleanPolicy::default(),
            split: SplitSpec::default(),
            strategies: Strategy::ALL.to_vec(),
            swarm: SwarmConfig::default(),
            trials: 5,
            seed: 0,
            output_dir: None,
        }
    }
}

/// Where the series comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Csv(PathBuf),
    Synthetic(SynthSpec),
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn input(&self) -> Result<InputSource> {
        match (&self.csv, &self.synthetic) {
            (Some(_), Some(_)) => Err(Error::Config(
                "give either csv or [synthetic], not both".into(),
            )),
            (Some(p), None) => Ok(InputSource::Csv(p.clone())),
            (None, Some(s)) => Ok(InputSource::Synthetic(s.clone())),
            (None, None) => Ok(InputSource::Synthetic(SynthSpec::default())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if let InputSource::Synthetic(spec) = self.input()? {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.n_lags == 0 {
            return bad("n_lags must be positive".into());
        }
        if !(self.select_fraction > 0.0 && self.select_fraction <= 1.0) {
            return bad(format!(
                "select_fraction must lie in (0, 1], got {}",
                self.select_fraction
            ));
        }
        if self.mi_bins < 2 {
            return bad(format!("mi_bins must be at least 2, got {}", self.mi_bins));
        }
        if !(self.clean.z_threshold.is_finite() && self.clean.z_threshold > 0.0) {
            return bad(format!(
                "z_threshold must be positive, got {}",
                self.clean.z_threshold
            ));
        }
        self.split
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.strategies.is_empty() {
            return bad("at least one strategy is required".into());
        }
        let mut seen = self.strategies.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.strategies.len() {
            return bad("strategies are listed more than once".into());
        }
        self.swarm
            .validate(&lssvm_search_space())
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.seed.checked_add(self.trials as u64).is_none() {
            return bad("seed + trials overflows".into());
        }
        Ok(())
    }
}
