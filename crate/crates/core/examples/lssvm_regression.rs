//! Fits an RBF LSSVM to noisy samples of sin(x) and shows how the
//! regularization constant trades smoothness against fit.
//!
//!     cargo run --release --example lssvm_regression

use ndarray::Array2;
use qpso_lssvm::lssvm::{train, Hyperparams};
use qpso_lssvm::metrics::MetricReport;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<f64> = (0..80).map(|i| i as f64 * 0.1).collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|x| x.sin() + 0.1 * (rng.random::<f64>() - 0.5))
        .collect();
    let x = Array2::from_shape_vec((xs.len(), 1), xs.clone())?;

    let grid: Vec<f64> = (0..40).map(|i| 0.05 + i as f64 * 0.2).collect();
    let truth: Vec<f64> = grid.iter().map(|x| x.sin()).collect();
    let queries = Array2::from_shape_vec((grid.len(), 1), grid)?;

    for gamma in [0.01, 1.0, 100.0, 1e6] {
        let model = train(x.view(), &ys, Hyperparams::new(gamma, 0.5)?)?;
        let fit = MetricReport::compute(&ys, &model.predict(x.view())?)?;
        let off = MetricReport::compute(&truth, &model.predict(queries.view())?)?;
        println!(
            "gamma {gamma:>8}: train rmse {:.4}, rmse vs sin(x) between samples {:.4}, bias {:+.4}",
            fit.rmse,
            off.rmse,
            model.bias()
        );
    }
    Ok(())
}
