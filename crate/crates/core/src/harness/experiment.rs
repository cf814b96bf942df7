use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InputSource};
use super::io::{format_f64, load_csv, write_atomic, write_table};
use super::persist::save_model;
use super::synth::generate_synthetic;
use crate::error::{Error, Result};
use crate::lssvm::{Hyperparams, LssvmModel};
use crate::metrics::{lssvm_search_space, LssvmFitness, MetricReport};
use crate::pipeline::{
    clean, make_lagged_dataset, rank_features, selected_count, split, Cleaned, FeatureScore,
    LaggedDataset, Split, TimeSeries,
};
use crate::swarm::{optimize, Strategy};

/// Loads the configured input series.
pub fn load_input(config: &ExperimentConfig) -> Result<TimeSeries> {
    match config.input()? {
        InputSource::Csv(path) => load_csv(&path),
        InputSource::Synthetic(spec) => generate_synthetic(&spec),
    }
}

/// Cleaned series, MI ranking and the split restricted to the selected lags.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub cleaned: Cleaned,
    /// Ranking of all candidate lags, computed on the training block.
    pub ranking: Vec<FeatureScore>,
    pub selected_lags: Vec<usize>,
    pub split: Split,
}

/// Clean, build lags, split chronologically, rank lags by MI on the
/// training block only and keep the top fraction in every block.
pub fn prepare_data(series: &TimeSeries, config: &ExperimentConfig) -> Result<PreparedData> {
    let cleaned = clean(series, &config.clean)?;
    let lagged = make_lagged_dataset(&cleaned.series, config.n_lags)?;
    let full = split(&lagged, &config.split)?;
    let ranking = rank_features(&full.train, config.mi_bins)?;
    let keep = selected_count(config.select_fraction, lagged.n_features());
    let selected_lags: Vec<usize> = ranking.iter().take(keep).map(|s| s.lag).collect();
    let split = Split {
        train: full.train.select_lags(&selected_lags)?,
        val: full.val.select_lags(&selected_lags)?,
        test: full.test.select_lags(&selected_lags)?,
    };
    Ok(PreparedData {
        cleaned,
        ranking,
        selected_lags,
        split,
    })
}

/// One-step persistence forecast, `y_hat_t = y_{t-1}`, for each row.
pub fn persistence_forecast(series: &TimeSeries, block: &LaggedDataset) -> Vec<f64> {
    block
        .target_indices()
        .iter()
        .map(|&t| series.values()[t - 1])
        .collect()
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub hyperparams: (f64, f64),
    /// Best validation RMSE found by the swarm.
    pub val_rmse: f64,
    pub test: MetricReport,
    pub evaluations: usize,
    pub rejected_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub strategy: Strategy,
    pub trial: usize,
    pub seed: u64,
    pub outcome: std::result::Result<TrialOutcome, String>,
    pub wall_seconds: f64,
    /// Test-block forecasts of the retrained model.
    pub forecast: Option<Vec<f64>>,
    pub model: Option<LssvmModel>,
}

/// Mean and sample standard deviation of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Sample (n - 1) standard deviation; zero for a single value.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Self { mean, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub completed: usize,
    pub failed: usize,
    pub rmse: Option<MeanStd>,
    pub mae: Option<MeanStd>,
    pub mape: Option<MeanStd>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub trials: Vec<TrialRecord>,
    pub summaries: Vec<StrategySummary>,
    pub persistence: MetricReport,
    pub selected_lags: Vec<usize>,
    pub test_targets: Vec<f64>,
    pub test_target_indices: Vec<usize>,
}

impl ExperimentReport {
    pub fn summary(&self, strategy: Strategy) -> Option<&StrategySummary> {
        self.summaries.iter().find(|s| s.strategy == strategy)
    }

    pub fn trials_of(&self, strategy: Strategy) -> impl Iterator<Item = &TrialRecord> {
        self.trials.iter().filter(move |t| t.strategy == strategy)
    }
}

fn summarize(strategy: Strategy, trials: &[TrialRecord]) -> StrategySummary {
    let ok: Vec<&TrialOutcome> = trials
        .iter()
        .filter(|t| t.strategy == strategy)
        .filter_map(|t| t.outcome.as_ref().ok())
        .collect();
    let failed = trials
        .iter()
        .filter(|t| t.strategy == strategy && t.outcome.is_err())
        .count();
    let pick = |f: fn(&MetricReport) -> f64| {
        MeanStd::of(&ok.iter().map(|o| f(&o.test)).collect::<Vec<_>>())
    };
    StrategySummary {
        strategy,
        completed: ok.len(),
        failed,
        rmse: pick(|m| m.rmse),
        mae: pick(|m| m.mae),
        mape: pick(|m| m.mape),
    }
}

/// Tunes, retrains and tests one strategy on prepared data.
pub fn run_trial(
    fitness: &LssvmFitness,
    test: &LaggedDataset,
    strategy: Strategy,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<(TrialOutcome, LssvmModel, Vec<f64>)> {
    let swarm = config.swarm.clone().with_seed(seed);
    let space = lssvm_search_space();
    let result = optimize(strategy, &|p: &[f64]| fitness.evaluate(p), &space, &swarm)?;
    if !result.best_fitness.is_finite() {
        return Err(Error::Residual {
            residual: f64::INFINITY,
            tolerance: crate::lssvm::RESIDUAL_TOLERANCE,
        });
    }
    let hp = Hyperparams::from_log10(&result.best_position)?;
    let model = fitness.train_model(hp)?;
    let forecast = model.predict(test.features().view())?;
    let report = MetricReport::compute(test.targets(), &forecast)?;
    Ok((
        TrialOutcome {
            hyperparams: (hp.gamma(), hp.sigma2()),
            val_rmse: result.best_fitness,
            test: report,
            evaluations: result.evaluations,
            rejected_evaluations: result.rejected_evaluations,
        },
        model,
        forecast,
    ))
}

/// Runs every configured strategy for every trial on prepared data.
/// A failing trial is recorded and the rest continue.
pub fn run_prepared(data: &PreparedData, config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let test = &data.split.test;
    let persistence = MetricReport::compute(
        test.targets(),
        &persistence_forecast(&data.cleaned.series, test),
    )?;
    let fitness = LssvmFitness::new(&data.split.train, &data.split.val)?;
    let trials = run_trials(config, |strategy, seed| {
        run_trial(&fitness, test, strategy, config, seed)
    });
    let summaries = config
        .strategies
        .iter()
        .map(|&s| summarize(s, &trials))
        .collect();
    Ok(ExperimentReport {
        trials,
        summaries,
        persistence,
        selected_lags: data.selected_lags.clone(),
        test_targets: test.targets().to_vec(),
        test_target_indices: test.target_indices().to_vec(),
    })
}

type TrialResult = Result<(TrialOutcome, LssvmModel, Vec<f64>)>;

/// Every strategy for every trial, in order; errors become failed records.
fn run_trials(
    config: &ExperimentConfig,
    mut trial_fn: impl FnMut(Strategy, u64) -> TrialResult,
) -> Vec<TrialRecord> {
    let mut trials = Vec::new();
    for &strategy in &config.strategies {
        for trial in 0..config.trials {
            let seed = config.seed + trial as u64;
            let start = Instant::now();
            let run = trial_fn(strategy, seed);
            let wall_seconds = start.elapsed().as_secs_f64();
            let (outcome, model, forecast) = match run {
                Ok((o, m, f)) => (Ok(o), Some(m), Some(f)),
                Err(e) => (Err(e.to_string()), None, None),
            };
            trials.push(TrialRecord {
                strategy,
                trial,
                seed,
                outcome,
                wall_seconds,
                forecast,
                model,
            });
        }
    }
    trials
}

/// Loads data, runs all trials and, when `output_dir` is set, writes every
/// artifact there.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let series = load_input(config)?;
    let data = prepare_data(&series, config)?;
    let report = run_prepared(&data, config)?;
    if let Some(dir) = &config.output_dir {
        write_outputs(&report, dir)?;
    }
    Ok(report)
}

/// Lag list stored next to a model file so forecasts can rebuild features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelMeta {
    pub lags: Vec<usize>,
}

pub fn meta_path(model_path: &Path) -> std::path::PathBuf {
    let mut name = model_path.as_os_str().to_owned();
    name.push(".meta.toml");
    name.into()
}

pub fn save_model_with_meta(model: &LssvmModel, lags: &[usize], path: &Path) -> Result<()> {
    if lags.len() != model.n_features() {
        return Err(Error::invalid(format!(
            "{} lags for a model with {} features",
            lags.len(),
            model.n_features()
        )));
    }
    save_model(model, path)?;
    let meta = ModelMeta {
        lags: lags.to_vec(),
    };
    let text = toml::to_string(&meta).map_err(|e| Error::Config(e.to_string()))?;
    write_atomic(&meta_path(path), text.as_bytes())
}

pub fn load_meta(model_path: &Path) -> Result<ModelMeta> {
    let text = fs::read_to_string(meta_path(model_path))?;
    toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
}

const REPORT_HEADER: [&str; 13] = [
    "row",
    "strategy",
    "trial",
    "seed",
    "status",
    "gamma",
    "sigma2",
    "val_rmse",
    "rmse",
    "mae",
    "mape",
    "evaluations",
    "rejected",
];

/// Per-trial rows, then `mean` and `std` rows per strategy, then the
/// persistence baseline. Wall times are kept out so reruns are bit-identical.
pub fn report_rows(report: &ExperimentReport) -> Vec<Vec<String>> {
    let f = |v: f64| format_f64(v);
    let mut rows = Vec::new();
    for t in &report.trials {
        let mut row = vec![
            "trial".to_string(),
            t.strategy.to_string(),
            t.trial.to_string(),
            t.seed.to_string(),
        ];
        match &t.outcome {
            Ok(o) => row.extend([
                "ok".to_string(),
                f(o.hyperparams.0),
                f(o.hyperparams.1),
                f(o.val_rmse),
                f(o.test.rmse),
                f(o.test.mae),
                f(o.test.mape),
                o.evaluations.to_string(),
                o.rejected_evaluations.to_string(),
            ]),
            Err(msg) => {
                row.push(format!("failed: {msg}"));
                row.extend(std::iter::repeat_n(String::new(), 8));
            }
        }
        rows.push(row);
    }
    for s in &report.summaries {
        for (label, pick) in [("mean", 0usize), ("std", 1)] {
            let cell = |m: Option<MeanStd>| {
                m.map(|m| f(if pick == 0 { m.mean } else { m.std }))
                    .unwrap_or_default()
            };
            let mut row = vec![
                label.to_string(),
                s.strategy.to_string(),
                String::new(),
                String::new(),
                format!("{}/{}", s.completed, s.completed + s.failed),
            ];
            row.extend(std::iter::repeat_n(String::new(), 3));
            row.extend([cell(s.rmse), cell(s.mae), cell(s.mape)]);
            row.extend([String::new(), String::new()]);
            rows.push(row);
        }
    }
    let p = &report.persistence;
    let mut row = vec!["baseline".to_string(), "persistence".to_string()];
    row.extend(std::iter::repeat_n(String::new(), 2));
    row.push("ok".to_string());
    row.extend(std::iter::repeat_n(String::new(), 3));
    row.extend([f(p.rmse), f(p.mae), f(p.mape)]);
    row.extend([String::new(), String::new()]);
    rows.push(row);
    rows
}

/// Human-readable comparison table, one row per strategy plus the baseline.
pub fn render_table(report: &ExperimentReport) -> String {
    let cell = |m: Option<MeanStd>| match m {
        Some(m) => format!("{:.3} ± {:.3}", m.mean, m.std),
        None => "n/a".to_string(),
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<26} {:>17} {:>17} {:>17}",
        "LSSVM optimizer strategy", "RMSE", "MAE", "MAPE (%)"
    );
    for s in &report.summaries {
        let name = match s.strategy {
            Strategy::Pso => "PSO",
            Strategy::Qpso => "QPSO",
            Strategy::Ebqpso => "EBQPSO",
        };
        let _ = writeln!(
            out,
            "{:<26} {:>17} {:>17} {:>17}",
            name,
            cell(s.rmse),
            cell(s.mae),
            cell(s.mape)
        );
    }
    let p = &report.persistence;
    let _ = writeln!(
        out,
        "{:<26} {:>17.3} {:>17.3} {:>17.3}",
        "persistence baseline", p.rmse, p.mae, p.mape
    );
    out
}

/// Writes `report.csv`, `timings.csv`, `table.txt`, and per trial
/// `predictions_<strategy>_<trial>.csv` plus `model_<strategy>_<trial>`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_table(
        &dir.join("report.csv"),
        &REPORT_HEADER,
        &report_rows(report),
    )?;
    let timings: Vec<Vec<String>> = report
        .trials
        .iter()
        .map(|t| {
            vec![
                t.strategy.to_string(),
                t.trial.to_string(),
                format!("{:.6}", t.wall_seconds),
            ]
        })
        .collect();
    write_table(
        &dir.join("timings.csv"),
        &["strategy", "trial", "wall_seconds"],
        &timings,
    )?;
    write_atomic(&dir.join("table.txt"), render_table(report).as_bytes())?;

    for t in &report.trials {
        let stem = format!("{}_{}", t.strategy, t.trial);
        if let Some(forecast) = &t.forecast {
            write_predictions(
                &dir.join(format!("predictions_{stem}.csv")),
                &report.test_target_indices,
                &report.test_targets,
                forecast,
            )?;
        }
        if let Some(model) = &t.model {
            save_model_with_meta(
                model,
                &report.selected_lags,
                &dir.join(format!("model_{stem}")),
            )?;
        }
    }
    Ok(())
}

/// `index,actual,forecast,abs_error` rows.
pub fn write_predictions(
    path: &Path,
    indices: &[usize],
    actual: &[f64],
    forecast: &[f64],
) -> Result<()> {
    if indices.len() != actual.len() || actual.len() != forecast.len() {
        return Err(Error::invalid("prediction columns differ in length"));
    }
    let rows: Vec<Vec<String>> = indices
        .iter()
        .zip(actual.iter().zip(forecast))
        .map(|(i, (a, f))| {
            vec![
                i.to_string(),
                format_f64(*a),
                format_f64(*f),
                format_f64((a - f).abs()),
            ]
        })
        .collect();
    write_table(path, &["index", "actual", "forecast", "abs_error"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_rules() {
        assert_eq!(MeanStd::of(&[]), None);
        assert_eq!(
            MeanStd::of(&[3.0]),
            Some(MeanStd {
                mean: 3.0,
                std: 0.0
            })
        );
        let m = MeanStd::of(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.mean, 2.5);
        assert!((m.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn failed_trials_are_recorded_and_the_rest_run() {
        let config = ExperimentConfig {
            strategies: vec![Strategy::Qpso, Strategy::Ebqpso],
            trials: 3,
            seed: 10,
            ..Default::default()
        };
        let model = crate::lssvm::train(
            ndarray::array![[0.0], [1.0]].view(),
            &[1.0, 2.0],
            Hyperparams::new(1.0, 1.0).unwrap(),
        )
        .unwrap();
        let mut calls = Vec::new();
        let trials = run_trials(&config, |strategy, seed| {
            calls.push((strategy, seed));
            if seed == 11 {
                return Err(Error::Residual {
                    residual: 1.0,
                    tolerance: 1e-8,
                });
            }
            let test = MetricReport {
                mae: seed as f64,
                rmse: seed as f64,
                mape: 1.0,
            };
            let outcome = TrialOutcome {
                hyperparams: (1.0, 1.0),
                val_rmse: 0.5,
                test,
                evaluations: 1,
                rejected_evaluations: 0,
            };
            Ok((outcome, model.clone(), vec![0.0]))
        });
        assert_eq!(calls.len(), 6);
        assert_eq!(trials.len(), 6);
        assert!(trials[1].outcome.is_err() && trials[4].outcome.is_err());
        assert!(trials[1].model.is_none());
        let s = summarize(Strategy::Qpso, &trials);
        assert_eq!((s.completed, s.failed), (2, 1));
        assert_eq!(s.rmse.unwrap().mean, 11.0);
        let rows = report_rows(&ExperimentReport {
            trials,
            summaries: vec![s],
            persistence: MetricReport {
                mae: 1.0,
                rmse: 1.0,
                mape: 1.0,
            },
            selected_lags: vec![1],
            test_targets: vec![1.0],
            test_target_indices: vec![5],
        });
        assert!(rows[1][4].starts_with("failed: "));
        assert!(rows.iter().all(|r| r.len() == REPORT_HEADER.len()));
    }

    #[test]
    fn meta_path_appends_suffix() {
        assert_eq!(
            meta_path(Path::new("out/model_pso_0")),
            Path::new("out/model_pso_0.meta.toml")
        );
    }

    #[test]
    fn persistence_uses_previous_sample() {
        let s = TimeSeries::new(vec![1.0, 2.0, 4.0, 8.0, 16.0]);
        let ds = make_lagged_dataset(&s, 2).unwrap();
        assert_eq!(persistence_forecast(&s, &ds), vec![2.0, 4.0, 8.0]);
    }
}
