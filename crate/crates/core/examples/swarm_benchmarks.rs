//! Compares PSO, QPSO and QPSO with elitist breeding on standard test
//! functions over a handful of seeds.
//!
//!     cargo run --release --example swarm_benchmarks

use qpso_lssvm::swarm::benchmarks::{rastrigin, rosenbrock, sphere};
use qpso_lssvm::swarm::{optimize, SearchSpace, Strategy, SwarmConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let problems: [(&str, fn(&[f64]) -> f64, f64); 3] = [
        ("sphere", sphere, 5.0),
        ("rastrigin", rastrigin, 5.12),
        ("rosenbrock", rosenbrock, 2.0),
    ];
    for (name, f, bound) in problems {
        let space = SearchSpace::uniform(2, -bound, bound)?;
        println!("{name}");
        for strategy in Strategy::ALL {
            let mut best = Vec::new();
            let mut evals = 0;
            for seed in 0..10 {
                let cfg = SwarmConfig {
                    max_iter: 100,
                    ..Default::default()
                }
                .with_seed(seed);
                let r = optimize(strategy, &f, &space, &cfg)?;
                best.push(r.best_fitness);
                evals += r.evaluations;
            }
            best.sort_by(f64::total_cmp);
            println!(
                "  {:<7} median {:.3e}  worst {:.3e}  mean evaluations {}",
                strategy.name(),
                best[best.len() / 2],
                best[best.len() - 1],
                evals / 10
            );
        }
    }
    Ok(())
}
