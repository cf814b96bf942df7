//! Runs the three optimizers on a synthetic series over several paired
//! trials and prints the comparison table.
//!
//!     cargo run --release --example benchmark_table -- [output_dir]

use qpso_lssvm::harness::{render_table, run_experiment, ExperimentConfig, SynthSpec};
use qpso_lssvm::swarm::SwarmConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ExperimentConfig {
        synthetic: Some(SynthSpec {
            n: 1000,
            ..Default::default()
        }),
        n_lags: 20,
        swarm: SwarmConfig {
            max_iter: 15,
            ..Default::default()
        },
        trials: 5,
        output_dir: std::env::args().nth(1).map(Into::into),
        ..Default::default()
    };
    let start = std::time::Instant::now();
    let report = run_experiment(&config)?;
    print!("{}", render_table(&report));
    println!("selected lags: {:?}", report.selected_lags);
    for t in &report.trials {
        match &t.outcome {
            Ok(o) => println!(
                "{:<7} trial {} seed {}: gamma {:.4e} sigma2 {:.4e} test rmse {:.4} ({} evaluations, {:.1}s)",
                t.strategy, t.trial, t.seed, o.hyperparams.0, o.hyperparams.1, o.test.rmse, o.evaluations, t.wall_seconds
            ),
            Err(e) => println!("{:<7} trial {} failed: {e}", t.strategy, t.trial),
        }
    }
    println!("total {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
