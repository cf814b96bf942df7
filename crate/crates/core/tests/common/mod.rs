//! Shared helpers for integration and acceptance tests: a dense-inversion
//! LSSVM oracle, random instances and swarm invariant checks.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpso_lssvm::lssvm::LssvmModel;
use qpso_lssvm::swarm::{optimize_observed, OptimizeResult, SearchSpace, Strategy, SwarmConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Gaussian kernel written out directly.
pub fn gauss(a: &[f64], b: &[f64], sigma2: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (-d2 / (2.0 * sigma2)).exp()
}

/// Full bordered system `[[0, 1^T], [1, K + I/gamma]]` and its right-hand side.
pub fn bordered_system(
    x: &Array2<f64>,
    y: &[f64],
    gamma: f64,
    sigma2: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
    let mut a = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        a[(0, i + 1)] = 1.0;
        a[(i + 1, 0)] = 1.0;
        for j in 0..n {
            a[(i + 1, j + 1)] = gauss(&rows[i], &rows[j], sigma2);
        }
        a[(i + 1, i + 1)] += 1.0 / gamma;
    }
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        rhs[i + 1] = y[i];
    }
    (a, rhs)
}

/// `(a, b)` by explicit inversion of the bordered matrix.
pub fn oracle_solve(x: &Array2<f64>, y: &[f64], gamma: f64, sigma2: f64) -> (Vec<f64>, f64) {
    let (a, rhs) = bordered_system(x, y, gamma, sigma2);
    let inv = a.try_inverse().expect("bordered system is invertible");
    let z = inv * rhs;
    (z.iter().skip(1).copied().collect(), z[0])
}

/// `||A [b; a] - rhs|| / ||rhs||` of a trained model.
pub fn relative_residual(x: &Array2<f64>, y: &[f64], model: &LssvmModel) -> f64 {
    let hp = model.hyperparams();
    let (a, rhs) = bordered_system(x, y, hp.gamma(), hp.sigma2());
    let mut z = DVector::zeros(y.len() + 1);
    z[0] = model.bias();
    for (i, v) in model.dual_coeffs().iter().enumerate() {
        z[i + 1] = *v;
    }
    let r = a * z - &rhs;
    r.norm() / rhs.norm().max(f64::MIN_POSITIVE)
}

/// `|sum a_i| <= 1e-6 N max|a_i|`.
pub fn dual_constraint_holds(model: &LssvmModel) -> bool {
    let a = model.dual_coeffs();
    let sum: f64 = a.iter().sum();
    let max = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    sum.abs() <= 1e-6 * a.len() as f64 * max
}

/// A random regression problem with rows drawn from `[-3, 3]^d`.
pub struct Instance {
    pub x: Array2<f64>,
    pub y: Vec<f64>,
    pub gamma: f64,
    pub sigma2: f64,
}

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..=hi.log10()))
}

pub fn random_instance<R: Rng>(
    rng: &mut R,
    max_n: usize,
    max_d: usize,
    gamma: (f64, f64),
    sigma2: (f64, f64),
) -> Instance {
    let n = rng.random_range(1..=max_n);
    let d = rng.random_range(1..=max_d);
    let x = Array2::from_shape_fn((n, d), |_| rng.random_range(-3.0..3.0));
    let y = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
    Instance {
        x,
        y,
        gamma: log_uniform(rng, gamma.0, gamma.1),
        sigma2: log_uniform(rng, sigma2.0, sigma2.1),
    }
}

/// Runs an optimizer and asserts, after every iteration, that personal bests
/// never get worse, the reported global best is the argmin of the personal
/// bests, and every position lies in the box. Also checks that a rerun is
/// bit-identical.
pub fn checked_optimize<F>(
    strategy: Strategy,
    f: &F,
    space: &SearchSpace,
    config: &SwarmConfig,
) -> OptimizeResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let mut previous: Option<Vec<f64>> = None;
    let mut trace: Vec<Vec<u64>> = Vec::new();
    let result = optimize_observed(strategy, f, space, config, |snap| {
        let pbest: Vec<f64> = snap.particles.iter().map(|p| p.pbest_fitness).collect();
        if let Some(prev) = &previous {
            for (i, (now, before)) in pbest.iter().zip(prev).enumerate() {
                assert!(
                    now <= before,
                    "{strategy}: pbest {i} rose from {before} to {now} at t={}",
                    snap.iteration
                );
            }
        }
        let min = pbest.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(
            pbest[snap.gbest_index], min,
            "{strategy}: gbest is not the argmin"
        );
        for p in snap.particles {
            assert!(
                space.contains(&p.position),
                "{strategy}: position {:?} out of bounds",
                p.position
            );
            assert!(
                space.contains(&p.pbest_position),
                "{strategy}: pbest out of bounds"
            );
        }
        trace.push(
            snap.particles
                .iter()
                .flat_map(|p| {
                    p.position
                        .iter()
                        .chain(&p.pbest_position)
                        .map(|v| v.to_bits())
                })
                .collect(),
        );
        previous = Some(pbest);
    })
    .expect("valid optimizer configuration");
    assert_eq!(trace.len(), config.max_iter);
    assert!(space.contains(&result.best_position));
    assert_eq!(result.history.last().copied(), Some(result.best_fitness));
    assert!(result.history.windows(2).all(|w| w[1] <= w[0]));

    let mut rerun: Vec<Vec<u64>> = Vec::new();
    let again = optimize_observed(strategy, f, space, config, |snap| {
        rerun.push(
            snap.particles
                .iter()
                .flat_map(|p| {
                    p.position
                        .iter()
                        .chain(&p.pbest_position)
                        .map(|v| v.to_bits())
                })
                .collect(),
        );
    })
    .expect("valid optimizer configuration");
    assert_eq!(trace, rerun, "{strategy}: rerun diverged");
    assert_eq!(again.best_position, result.best_position);
    assert_eq!(again.best_fitness.to_bits(), result.best_fitness.to_bits());
    result
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
