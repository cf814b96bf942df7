//! From a raw wind-speed series to lagged, feature-selected, chronologically
//! split datasets.
//!
//! Raw samples are used as features without standardization.

mod lagged;
mod series;
mod stats;

pub use lagged::{
    make_lagged_dataset, make_lagged_dataset_with_lags, split, LaggedDataset, Split, SplitSpec,
};
pub use series::{clean, CleanPolicy, Cleaned, TimeSeries, DEFAULT_CADENCE_MINUTES};
pub use stats::{
    autocorrelation, mutual_information, rank_features, select_features, selected_count,
    FeatureScore, DEFAULT_MI_BINS,
};
