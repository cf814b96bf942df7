//! Tunes LSSVM hyperparameters with one optimizer on a synthetic series and
//! compares the resulting test forecast against persistence.
//!
//!     cargo run --release --example tune_forecast -- [pso|qpso|ebqpso]

use qpso_lssvm::harness::{
    load_input, persistence_forecast, prepare_data, run_trial, ExperimentConfig, SynthSpec,
};
use qpso_lssvm::metrics::{LssvmFitness, MetricReport};
use qpso_lssvm::swarm::{Strategy, SwarmConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let strategy: Strategy = std::env::args()
        .nth(1)
        .as_deref()
        .unwrap_or("ebqpso")
        .parse()?;
    let config = ExperimentConfig {
        synthetic: Some(SynthSpec {
            n: 800,
            ..Default::default()
        }),
        n_lags: 20,
        swarm: SwarmConfig {
            max_iter: 20,
            ..Default::default()
        },
        ..Default::default()
    };
    let data = prepare_data(&load_input(&config)?, &config)?;
    println!("selected lags {:?}", data.selected_lags);

    let fitness = LssvmFitness::new(&data.split.train, &data.split.val)?;
    let test = &data.split.test;
    let (outcome, _model, forecast) = run_trial(&fitness, test, strategy, &config, 0)?;
    let (gamma, sigma2) = outcome.hyperparams;
    println!(
        "{strategy}: gamma {gamma:.4}, sigma2 {sigma2:.4}, validation rmse {:.4}, {} evaluations",
        outcome.val_rmse, outcome.evaluations
    );

    let persistence = MetricReport::compute(
        test.targets(),
        &persistence_forecast(&data.cleaned.series, test),
    )?;
    println!("            rmse     mae      mape");
    for (name, m) in [("lssvm", outcome.test), ("persistence", persistence)] {
        println!("{name:<11} {:.4}   {:.4}   {:.2}%", m.rmse, m.mae, m.mape);
    }
    for (y, p) in test.targets().iter().zip(&forecast).take(5) {
        println!("  observed {y:.3}  forecast {p:.3}");
    }
    Ok(())
}
