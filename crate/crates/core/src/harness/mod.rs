//! Configuration, file formats, synthetic data and the multi-trial
//! experiment runner.

mod config;
mod experiment;
mod io;
mod persist;
mod synth;

pub use config::{ExperimentConfig, InputSource};
pub use experiment::{
    load_input, load_meta, meta_path, persistence_forecast, prepare_data, render_table,
    report_rows, run_experiment, run_prepared, run_trial, save_model_with_meta, write_outputs,
    write_predictions, ExperimentReport, MeanStd, ModelMeta, PreparedData, StrategySummary,
    TrialOutcome, TrialRecord,
};
pub use io::{load_csv, save_series_csv, series_to_csv, write_atomic};
pub use persist::{
    decode_model, encode_model, load_model, save_model, MODEL_FORMAT_VERSION, MODEL_MAGIC,
};
pub use synth::{generate_synthetic, Sinusoid, SynthSpec, MIN_SYNTH_LEN};
