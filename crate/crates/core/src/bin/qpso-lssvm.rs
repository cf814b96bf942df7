//! Command-line front end. Exit codes: 0 ok, 1 usage, 2 data, 3 numeric.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qpso_lssvm::harness::{
    self, load_input, load_meta, load_model, prepare_data, render_table, run_experiment,
    save_model_with_meta, save_series_csv, write_predictions, ExperimentConfig,
};
use qpso_lssvm::lssvm::Hyperparams;
use qpso_lssvm::metrics::{LssvmFitness, MetricReport};
use qpso_lssvm::pipeline::{
    autocorrelation, clean, make_lagged_dataset, make_lagged_dataset_with_lags, split,
};
use qpso_lssvm::swarm::Strategy;
use qpso_lssvm::Error;

#[derive(Parser)]
#[command(
    name = "qpso-lssvm",
    version,
    about = "LSSVM forecasting tuned by particle swarms"
)]
struct Cli {
    /// TOML experiment configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic wind-speed series as CSV.
    Synth {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Replace missing samples and outliers, writing the cleaned CSV.
    Clean {
        #[command(flatten)]
        data: DataArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Write the MI ranking of lags (training block) and the autocorrelation.
    Features {
        #[command(flatten)]
        data: DataArgs,
        #[arg(short, long)]
        output_dir: PathBuf,
    },
    /// Tune (gamma, sigma2) with one strategy and report the tuned model.
    Tune {
        #[arg(long)]
        strategy: Strategy,
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        swarm: SwarmArgs,
        /// Save the tuned model here.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Train with given hyperparameters and save the model.
    Train {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        sigma2: f64,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
    },
    /// Forecast every sample of a series that has enough history.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score a saved model on the test block.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DataArgs,
    },
    /// Run every strategy over all trials and write the comparison report.
    Benchmark {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        swarm: SwarmArgs,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(short, long)]
        output_dir: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct DataArgs {
    /// `timestamp,value` CSV; without it the synthetic series is used.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n_lags: Option<usize>,
    #[arg(long)]
    select_fraction: Option<f64>,
    #[arg(long)]
    mi_bins: Option<usize>,
    #[arg(long)]
    z_threshold: Option<f64>,
    /// Train/validation/test fractions, e.g. `0.6,0.2,0.2`.
    #[arg(long, value_parser = parse_split)]
    split: Option<[f64; 3]>,
}

fn parse_split(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|_| "expected three comma-separated fractions".to_string())
}

#[derive(Args, Default)]
struct SwarmArgs {
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    jumping_rate: Option<f64>,
    #[arg(long)]
    n_transposons: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl DataArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(p) = &self.input {
            cfg.csv = Some(p.clone());
            cfg.synthetic = None;
        }
        set(&mut cfg.n_lags, self.n_lags);
        set(&mut cfg.select_fraction, self.select_fraction);
        set(&mut cfg.mi_bins, self.mi_bins);
        set(&mut cfg.clean.z_threshold, self.z_threshold);
        if let Some([train, val, test]) = self.split {
            cfg.split.train = train;
            cfg.split.val = val;
            cfg.split.test = test;
        }
    }
}

impl SwarmArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        set(&mut cfg.swarm.population, self.population);
        set(&mut cfg.swarm.max_iter, self.max_iter);
        set(&mut cfg.swarm.jumping_rate, self.jumping_rate);
        set(&mut cfg.swarm.n_transposons, self.n_transposons);
        set(&mut cfg.swarm.lambda, self.lambda);
        set(&mut cfg.seed, self.seed);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config(_) => 1,
            e if e.is_numeric() => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { 1 } else { 0 };
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn base_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        Some(p) => ExperimentConfig::from_file(p).map_err(|e| match e {
            Error::Io(io) => usage(format!("cannot read config {}: {io}", p.display())),
            other => other.into(),
        }),
        None => Ok(ExperimentConfig::default()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = base_config(cli.config.as_deref())?;
    match cli.command {
        Command::Synth { n, seed, output } => {
            let mut spec = cfg.synthetic.clone().unwrap_or_default();
            set(&mut spec.n, n);
            set(&mut spec.seed, seed);
            spec.validate().map_err(|e| usage(e.to_string()))?;
            let series = harness::generate_synthetic(&spec)?;
            save_series_csv(&series, &output)?;
            println!("wrote {} samples to {}", series.len(), output.display());
        }
        Command::Clean { data, output } => {
            data.apply(&mut cfg);
            cfg.validate()?;
            let cleaned = clean(&load_input(&cfg)?, &cfg.clean)?;
            save_series_csv(&cleaned.series, &output)?;
            println!(
                "replaced {} missing and {} outlying samples; wrote {}",
                cleaned.missing_replaced,
                cleaned.outliers_replaced,
                output.display()
            );
        }
        Command::Features { data, output_dir } => {
            data.apply(&mut cfg);
            cfg.validate()?;
            let prepared = prepare_data(&load_input(&cfg)?, &cfg)?;
            std::fs::create_dir_all(&output_dir).map_err(Error::from)?;
            let ranking: Vec<String> = prepared
                .ranking
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    format!(
                        "{},{},{:?},{}",
                        i + 1,
                        s.lag,
                        s.mi,
                        prepared.selected_lags.contains(&s.lag)
                    )
                })
                .collect();
            write_lines(
                &output_dir.join("mi_ranking.csv"),
                "rank,lag,mi,selected",
                &ranking,
            )?;
            let acf = autocorrelation(&prepared.cleaned.series, cfg.n_lags)?;
            let acf: Vec<String> = acf
                .iter()
                .enumerate()
                .map(|(k, r)| format!("{},{r:?}", k + 1))
                .collect();
            write_lines(
                &output_dir.join("autocorrelation.csv"),
                "lag,correlation",
                &acf,
            )?;
            println!("selected lags: {:?}", prepared.selected_lags);
        }
        Command::Tune {
            strategy,
            data,
            swarm,
            model,
        } => {
            data.apply(&mut cfg);
            swarm.apply(&mut cfg);
            cfg.strategies = vec![strategy];
            cfg.validate()?;
            let prepared = prepare_data(&load_input(&cfg)?, &cfg)?;
            let fitness = LssvmFitness::new(&prepared.split.train, &prepared.split.val)?;
            let (outcome, tuned, _) =
                harness::run_trial(&fitness, &prepared.split.test, strategy, &cfg, cfg.seed)?;
            println!("strategy {strategy} seed {}", cfg.seed);
            println!("gamma {:e}", outcome.hyperparams.0);
            println!("sigma2 {:e}", outcome.hyperparams.1);
            println!("validation rmse {:.6}", outcome.val_rmse);
            print_metrics("test", &outcome.test);
            println!(
                "{} evaluations ({} rejected)",
                outcome.evaluations, outcome.rejected_evaluations
            );
            if let Some(path) = model {
                save_model_with_meta(&tuned, &prepared.selected_lags, &path)?;
                println!("saved model to {}", path.display());
            }
        }
        Command::Train {
            gamma,
            sigma2,
            data,
            model,
        } => {
            data.apply(&mut cfg);
            cfg.validate()?;
            let hp = Hyperparams::new(gamma, sigma2).map_err(|e| usage(e.to_string()))?;
            let prepared = prepare_data(&load_input(&cfg)?, &cfg)?;
            let fitness = LssvmFitness::new(&prepared.split.train, &prepared.split.val)?;
            let trained = fitness.train_model(hp)?;
            let val = trained.predict(prepared.split.val.features().view())?;
            print_metrics(
                "validation",
                &MetricReport::compute(prepared.split.val.targets(), &val)?,
            );
            save_model_with_meta(&trained, &prepared.selected_lags, &model)?;
            println!("saved model to {}", model.display());
        }
        Command::Predict {
            model,
            data,
            output,
        } => {
            data.apply(&mut cfg);
            cfg.validate()?;
            let trained = load_model(&model)?;
            let meta = load_meta(&model)?;
            let cleaned = clean(&load_input(&cfg)?, &cfg.clean)?;
            let ds = make_lagged_dataset_with_lags(&cleaned.series, &meta.lags)?;
            let forecast = trained.predict(ds.features().view())?;
            write_predictions(&output, ds.target_indices(), ds.targets(), &forecast)?;
            let x = cleaned.series.values();
            let next: Vec<f64> = meta.lags.iter().map(|&l| x[x.len() - l]).collect();
            let next = trained.predict(
                ndarray::Array2::from_shape_vec((1, next.len()), next)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?
                    .view(),
            )?;
            println!("wrote {} forecasts to {}", forecast.len(), output.display());
            println!("next-step forecast {:.6}", next[0]);
        }
        Command::Evaluate { model, data } => {
            data.apply(&mut cfg);
            cfg.validate()?;
            let trained = load_model(&model)?;
            let meta = load_meta(&model)?;
            let max_lag = meta.lags.iter().copied().max().unwrap_or(0);
            if max_lag > cfg.n_lags {
                return Err(usage(format!(
                    "model uses lag {max_lag}, beyond n_lags {}",
                    cfg.n_lags
                )));
            }
            let cleaned = clean(&load_input(&cfg)?, &cfg.clean)?;
            let blocks = split(
                &make_lagged_dataset(&cleaned.series, cfg.n_lags)?,
                &cfg.split,
            )?;
            let test = blocks.test.select_lags(&meta.lags)?;
            let forecast = trained.predict(test.features().view())?;
            print_metrics("test", &MetricReport::compute(test.targets(), &forecast)?);
            let persistence = harness::persistence_forecast(&cleaned.series, &test);
            print_metrics(
                "persistence",
                &MetricReport::compute(test.targets(), &persistence)?,
            );
        }
        Command::Benchmark {
            data,
            swarm,
            trials,
            output_dir,
        } => {
            data.apply(&mut cfg);
            swarm.apply(&mut cfg);
            set(&mut cfg.trials, trials);
            if output_dir.is_some() {
                cfg.output_dir = output_dir;
            }
            cfg.validate()?;
            let report = run_experiment(&cfg)?;
            print!("{}", render_table(&report));
            for t in &report.trials {
                if let Err(e) = &t.outcome {
                    eprintln!("{} trial {} failed: {e}", t.strategy, t.trial);
                }
            }
            if let Some(dir) = &cfg.output_dir {
                println!("wrote report to {}", dir.display());
            }
            if report.trials.iter().all(|t| t.outcome.is_err()) {
                return Err(Failure {
                    code: 3,
                    message: "every trial failed".into(),
                });
            }
        }
    }
    Ok(())
}

fn print_metrics(label: &str, m: &MetricReport) {
    println!(
        "{label} rmse {:.6} mae {:.6} mape {:.4}%",
        m.rmse, m.mae, m.mape
    );
}

fn write_lines(path: &Path, header: &str, lines: &[String]) -> Result<(), Failure> {
    let mut text = String::from(header);
    text.push('\n');
    for l in lines {
        text.push_str(l);
        text.push('\n');
    }
    harness::write_atomic(path, text.as_bytes())?;
    Ok(())
}
