//! Cleans a synthetic wind-speed series with a few injected faults, builds
//! lagged features and ranks the lags by mutual information.
//!
//!     cargo run --release --example lag_features

use qpso_lssvm::harness::{generate_synthetic, SynthSpec};
use qpso_lssvm::pipeline::{
    autocorrelation, clean, make_lagged_dataset, rank_features, selected_count, split, CleanPolicy,
    SplitSpec, TimeSeries,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let synth = generate_synthetic(&SynthSpec {
        n: 1500,
        ..Default::default()
    })?;
    let mut samples: Vec<Option<f64>> = synth.values().iter().copied().map(Some).collect();
    samples[100] = None;
    samples[101] = None;
    samples[500] = Some(-1.0);
    samples[900] = Some(250.0);
    let raw = TimeSeries::from_options(samples);

    let cleaned = clean(&raw, &CleanPolicy::default())?;
    println!(
        "cleaning: {} missing and {} outliers replaced",
        cleaned.missing_replaced, cleaned.outliers_replaced
    );

    let acf = autocorrelation(&cleaned.series, 72)?;
    for lag in [1, 2, 6, 18, 36, 72] {
        println!("  autocorrelation at lag {lag:>2}: {:+.3}", acf[lag - 1]);
    }

    let lagged = make_lagged_dataset(&cleaned.series, 80)?;
    let blocks = split(&lagged, &SplitSpec::default())?;
    // rank on the training block only so the test block stays unseen
    let ranking = rank_features(&blocks.train, 16)?;
    let keep = selected_count(0.1, lagged.n_features());
    println!(
        "\ntop {keep} of {} lags by mutual information:",
        lagged.n_features()
    );
    for s in ranking.iter().take(keep) {
        println!("  lag {:>2}  mi {:.4}", s.lag, s.mi);
    }
    Ok(())
}
