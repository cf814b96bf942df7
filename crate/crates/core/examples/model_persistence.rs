//! Trains a model, saves it in the binary format with its lag sidecar,
//! reloads both and checks the predictions match bit for bit.
//!
//!     cargo run --release --example model_persistence -- [dir]

use qpso_lssvm::harness::{
    generate_synthetic, load_meta, load_model, meta_path, save_model_with_meta, SynthSpec,
};
use qpso_lssvm::lssvm::{train, Hyperparams};
use qpso_lssvm::pipeline::make_lagged_dataset_with_lags;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let series = generate_synthetic(&SynthSpec {
        n: 600,
        ..Default::default()
    })?;
    let lags = [1, 2, 3, 72];
    let ds = make_lagged_dataset_with_lags(&series, &lags)?;
    let model = train(
        ds.features().view(),
        ds.targets(),
        Hyperparams::new(40.0, 8.0)?,
    )?;

    let path = dir.join("example_model.lssvm");
    save_model_with_meta(&model, &lags, &path)?;
    println!(
        "wrote {} ({} bytes) and {}",
        path.display(),
        std::fs::metadata(&path)?.len(),
        meta_path(&path).display()
    );

    let loaded = load_model(&path)?;
    let meta = load_meta(&path)?;
    let before = model.predict(ds.features().view())?;
    let after = loaded.predict(ds.features().view())?;
    let identical = before
        .iter()
        .zip(&after)
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!(
        "lags {:?}, {} support vectors, gamma {}, sigma2 {}, predictions identical: {identical}",
        meta.lags,
        loaded.dual_coeffs().len(),
        loaded.hyperparams().gamma(),
        loaded.hyperparams().sigma2()
    );
    Ok(())
}
