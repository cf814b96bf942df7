mod common;

use std::fs;

use ndarray::Array2;

use common::*;
use qpso_lssvm::harness::{
    generate_synthetic, load_csv, load_model, run_experiment, save_model, save_series_csv,
    ExperimentConfig, MeanStd, SynthSpec,
};
use qpso_lssvm::lssvm::{train, Hyperparams};
use qpso_lssvm::pipeline::{autocorrelation, TimeSeries};
use qpso_lssvm::swarm::{Strategy, SwarmConfig};
use qpso_lssvm::Error;

fn small_config(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        synthetic: Some(SynthSpec {
            n: 600,
            ..Default::default()
        }),
        n_lags: 12,
        strategies: vec![Strategy::Ebqpso],
        swarm: SwarmConfig {
            population: 6,
            max_iter: 4,
            ..Default::default()
        },
        trials: 1,
        output_dir: Some(dir.to_path_buf()),
        ..Default::default()
    }
}

#[test]
fn model_round_trip_is_bit_exact() {
    let mut r = rng(1);
    let dir = tempfile::tempdir().unwrap();
    for k in 0..10 {
        let inst = random_instance(&mut r, 30, 4, (1e-2, 1e3), (0.5, 50.0));
        let model = train(
            inst.x.view(),
            &inst.y,
            Hyperparams::new(inst.gamma, inst.sigma2).unwrap(),
        )
        .unwrap();
        let path = dir.path().join(format!("m{k}"));
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        let q = Array2::from_shape_fn((9, inst.x.ncols()), |(i, j)| {
            (i as f64 - 4.0) * 0.7 + j as f64
        });
        let a = model.predict(q.view()).unwrap();
        let b = back.predict(q.view()).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn damaged_model_files_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let x = Array2::from_shape_fn((4, 2), |(i, j)| (i + j) as f64);
    let model = train(
        x.view(),
        &[1.0, 2.0, 3.0, 5.0],
        Hyperparams::new(5.0, 2.0).unwrap(),
    )
    .unwrap();
    let path = dir.path().join("m");
    save_model(&model, &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 3]).unwrap();
    assert!(matches!(load_model(&path), Err(Error::CorruptModel(_))));
    let mut future = bytes.clone();
    future[4] = 9;
    fs::write(&path, &future).unwrap();
    assert!(matches!(
        load_model(&path),
        Err(Error::UnsupportedVersion { found: 9, .. })
    ));
}

#[test]
fn default_synthetic_series_is_strongly_autocorrelated() {
    let s = generate_synthetic(&SynthSpec::default()).unwrap();
    assert_eq!(s.len(), 4393);
    assert!(autocorrelation(&s, 1).unwrap()[0] > 0.8);
    assert!(s.values().iter().all(|v| *v >= 0.0));
}

#[test]
fn csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let s = generate_synthetic(&SynthSpec {
        n: 500,
        ..Default::default()
    })
    .unwrap();
    save_series_csv(&s, &path).unwrap();
    assert_eq!(load_csv(&path).unwrap(), s);
    fs::write(&path, "").unwrap();
    assert!(matches!(load_csv(&path), Err(Error::EmptyInput(_))));
}

#[test]
fn single_trial_experiment_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small_config(dir.path())).unwrap();
    assert_eq!(report.trials.len(), 1);
    let o = report.trials[0].outcome.as_ref().unwrap();
    assert!(o.test.rmse.is_finite() && o.test.mae.is_finite() && o.test.mape.is_finite());
    for f in [
        "report.csv",
        "timings.csv",
        "table.txt",
        "predictions_ebqpso_0.csv",
        "model_ebqpso_0",
        "model_ebqpso_0.meta.toml",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let preds = fs::read_to_string(dir.path().join("predictions_ebqpso_0.csv")).unwrap();
    assert_eq!(preds.lines().count() - 1, report.test_targets.len());
    let model = load_model(&dir.path().join("model_ebqpso_0")).unwrap();
    assert_eq!(model, *report.trials[0].model.as_ref().unwrap());
}

#[test]
fn aggregates_recompute_from_trial_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path());
    cfg.trials = 3;
    cfg.strategies = vec![Strategy::Pso, Strategy::Qpso];
    run_experiment(&cfg).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("report.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    for strategy in ["pso", "qpso"] {
        for (col, name) in [(8, "rmse"), (9, "mae"), (10, "mape")] {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| &r[0] == "trial" && &r[1] == strategy)
                .map(|r| r[col].parse().unwrap())
                .collect();
            assert_eq!(values.len(), 3);
            let want = MeanStd::of(&values).unwrap();
            let cell = |kind: &str| -> f64 {
                rows.iter()
                    .find(|r| &r[0] == kind && &r[1] == strategy)
                    .unwrap()[col]
                    .parse()
                    .unwrap()
            };
            assert!(
                (cell("mean") - want.mean).abs() <= 1e-12,
                "{strategy} {name}"
            );
            assert!((cell("std") - want.std).abs() <= 1e-12, "{strategy} {name}");
        }
    }
    assert!(rows
        .iter()
        .any(|r| &r[0] == "baseline" && &r[1] == "persistence"));
}

#[test]
fn zero_target_in_test_block_is_a_data_error() {
    // A zero target in the test block makes the percentage error undefined.
    let dir = tempfile::tempdir().unwrap();
    let mut values: Vec<f64> = (0..300).map(|t| 3.0 + (t as f64 * 0.3).sin()).collect();
    values[290] = 0.0;
    let csv_path = dir.path().join("zero.csv");
    save_series_csv(&TimeSeries::new(values), &csv_path).unwrap();
    let mut cfg = small_config(&dir.path().join("out"));
    cfg.synthetic = None;
    cfg.csv = Some(csv_path);
    cfg.n_lags = 4;
    cfg.clean.z_threshold = 100.0;
    cfg.trials = 2;
    cfg.strategies = vec![Strategy::Qpso, Strategy::Ebqpso];
    let err = run_experiment(&cfg).unwrap_err();
    // The persistence baseline is scored before any trial runs.
    assert!(matches!(err, Error::NearZeroTarget { .. }), "{err}");
}
