//! Short-term time-series forecasting with least-squares support vector
//! regression (LSSVM) whose hyperparameters are tuned by particle swarms.
//!
//! The crate is organized bottom-up:
//!
//! * [`lssvm`]: RBF-kernel LSSVM training and prediction.
//! * [`swarm`]: PSO, quantum-behaved PSO and QPSO with elitist breeding
//!   through transposon operators.
//! * [`pipeline`]: cleaning, lag features, mutual-information feature
//!   selection and chronological splitting.
//! * [`metrics`]: MAE / RMSE / MAPE and the validation-RMSE fitness.
//! * [`harness`]: CSV and model I/O, synthetic series, configuration and the
//!   multi-trial experiment runner.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod error;
pub mod harness;
pub mod lssvm;
pub mod metrics;
pub mod pipeline;
pub mod swarm;

pub use error::{Error, Result};
