//! Least-squares support vector regression with a Gaussian RBF kernel.
//!
//! Training solves the KKT system
//!
//! ```text
//! | 0   1^T              | | b |   | 0 |
//! | 1   Omega + I/gamma  | | a | = | y |
//! ```
//!
//! and prediction evaluates `f(x) = sum_i a_i k(x, x_i) + b`.
//!
//! The lower-right block `H = Omega + I/gamma` is symmetric positive definite
//! for every `gamma > 0`, so the system is solved through one Cholesky
//! factorization of `H` and two triangular solves (`H eta = y`, `H nu = 1`),
//! giving `b = 1^T eta / 1^T nu` and `a = eta - b nu`. The residual of the
//! full bordered system is checked afterwards and refined if needed.

mod cholesky;
mod kernel;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use cholesky::Cholesky;
pub use kernel::{build_kernel_matrix, rbf_kernel, SquaredDistances};

/// Relative residual the solved KKT system must reach.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

const REFINEMENT_STEPS: usize = 3;

/// Regularization `gamma` and squared kernel width `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    gamma: f64,
    sigma2: f64,
}

impl Hyperparams {
    pub fn new(gamma: f64, sigma2: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        kernel::check_sigma2(sigma2)?;
        Ok(Self { gamma, sigma2 })
    }

    /// Decodes a `(log10 gamma, log10 sigma2)` search position.
    pub fn from_log10(position: &[f64]) -> Result<Self> {
        match position {
            [g, s] => Self::new(10f64.powf(*g), 10f64.powf(*s)),
            _ => Err(Error::invalid(format!(
                "hyperparameter position must have 2 coordinates, got {}",
                position.len()
            ))),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

/// A trained dual model.
#[derive(Debug, Clone, PartialEq)]
pub struct LssvmModel {
    support_inputs: Array2<f64>,
    dual_coeffs: Vec<f64>,
    bias: f64,
    hyperparams: Hyperparams,
}

impl LssvmModel {
    /// Assembles a model from stored parts, checking shapes and finiteness.
    pub fn from_parts(
        support_inputs: Array2<f64>,
        dual_coeffs: Vec<f64>,
        bias: f64,
        hyperparams: Hyperparams,
    ) -> Result<Self> {
        if support_inputs.nrows() != dual_coeffs.len() {
            return Err(Error::invalid(format!(
                "{} support rows but {} dual coefficients",
                support_inputs.nrows(),
                dual_coeffs.len()
            )));
        }
        if support_inputs.nrows() == 0 {
            return Err(Error::invalid("model needs at least one support vector"));
        }
        let finite = support_inputs.iter().all(|v| v.is_finite())
            && dual_coeffs.iter().all(|v| v.is_finite())
            && bias.is_finite();
        if !finite {
            return Err(Error::invalid("model parameters must be finite"));
        }
        Ok(Self {
            support_inputs,
            dual_coeffs,
            bias,
            hyperparams,
        })
    }

    pub fn support_inputs(&self) -> ArrayView2<'_, f64> {
        self.support_inputs.view()
    }

    pub fn dual_coeffs(&self) -> &[f64] {
        &self.dual_coeffs
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn hyperparams(&self) -> Hyperparams {
        self.hyperparams
    }

    pub fn n_features(&self) -> usize {
        self.support_inputs.ncols()
    }

    /// Forecasts one value per row of `queries`.
    pub fn predict(&self, queries: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if queries.ncols() != self.n_features() {
            return Err(Error::invalid(format!(
                "queries have {} features, model expects {}",
                queries.ncols(),
                self.n_features()
            )));
        }
        let scale = -1.0 / (2.0 * self.hyperparams.sigma2);
        let support: Vec<Vec<f64>> = self
            .support_inputs
            .rows()
            .into_iter()
            .map(|r| r.to_vec())
            .collect();
        Ok(queries
            .rows()
            .into_iter()
            .map(|q| {
                let q = q.to_vec();
                support
                    .iter()
                    .zip(&self.dual_coeffs)
                    .map(|(s, a)| a * (kernel::squared_distance(&q, s) * scale).exp())
                    .sum::<f64>()
                    + self.bias
            })
            .collect())
    }

    /// Forecasts from a precomputed query-by-support distance table.
    pub fn predict_from_distances(&self, distances: &SquaredDistances) -> Result<Vec<f64>> {
        if distances.ncols() != self.dual_coeffs.len() {
            return Err(Error::invalid(format!(
                "distance table has {} columns, model has {} support vectors",
                distances.ncols(),
                self.dual_coeffs.len()
            )));
        }
        Ok(predict_dual(
            distances,
            &self.dual_coeffs,
            self.bias,
            self.hyperparams.sigma2,
        ))
    }
}

pub(crate) fn predict_dual(
    distances: &SquaredDistances,
    a: &[f64],
    b: f64,
    sigma2: f64,
) -> Vec<f64> {
    let scale = -1.0 / (2.0 * sigma2);
    (0..distances.nrows())
        .map(|i| {
            distances
                .row(i)
                .iter()
                .zip(a)
                .map(|(d, ai)| ai * (d * scale).exp())
                .sum::<f64>()
                + b
        })
        .collect()
}

fn check_training_inputs(x: ArrayView2<'_, f64>, y: &[f64]) -> Result<()> {
    if x.nrows() == 0 {
        return Err(Error::invalid("training set is empty"));
    }
    if x.nrows() != y.len() {
        return Err(Error::invalid(format!(
            "{} training rows but {} targets",
            x.nrows(),
            y.len()
        )));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::invalid("training data contains non-finite values"));
    }
    Ok(())
}

/// Fits an LSSVM regression model on the rows of `x` with targets `y`.
pub fn train(x: ArrayView2<'_, f64>, y: &[f64], hp: Hyperparams) -> Result<LssvmModel> {
    check_training_inputs(x, y)?;
    let distances = SquaredDistances::pairwise(x);
    let (a, b) = solve_dual(&distances, y, hp)?;
    LssvmModel::from_parts(x.to_owned(), a, b, hp)
}

/// Like [`train`], reusing a pairwise distance table of `x`.
pub fn train_with_distances(
    x: ArrayView2<'_, f64>,
    distances: &SquaredDistances,
    y: &[f64],
    hp: Hyperparams,
) -> Result<LssvmModel> {
    check_training_inputs(x, y)?;
    if distances.nrows() != x.nrows() || distances.ncols() != x.nrows() {
        return Err(Error::invalid(
            "distance table does not match training rows",
        ));
    }
    let (a, b) = solve_dual(distances, y, hp)?;
    LssvmModel::from_parts(x.to_owned(), a, b, hp)
}

/// Lower triangle of `H = Omega + I/gamma`, row-major, upper part zero.
fn regularized_gram(distances: &SquaredDistances, hp: Hyperparams) -> Vec<f64> {
    let n = distances.nrows();
    let scale = -1.0 / (2.0 * hp.sigma2);
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        let d = distances.row(i);
        let row = &mut h[i * n..i * n + i + 1];
        for (hij, dij) in row.iter_mut().zip(d) {
            *hij = (dij * scale).exp();
        }
        row[i] += 1.0 / hp.gamma;
    }
    h
}

/// `H a` from the lower triangle.
fn symmetric_product(h: &[f64], a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let row = &h[i * n..i * n + i + 1];
        let mut acc = row[i] * a[i];
        for j in 0..i {
            acc += row[j] * a[j];
            out[j] += row[j] * a[i];
        }
        out[i] += acc;
    }
    out
}

/// Residual `rhs - A [b; a]` of the bordered system, with its relative norm.
fn kkt_residual(h: &[f64], y: &[f64], a: &[f64], b: f64) -> (f64, Vec<f64>, f64) {
    let ha = symmetric_product(h, a);
    let r0 = -a.iter().sum::<f64>();
    let r: Vec<f64> = y.iter().zip(&ha).map(|(yi, hai)| yi - hai - b).collect();
    let num = (r0 * r0 + r.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let den = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rel = if den > 0.0 { num / den } else { num };
    (r0, r, rel)
}

/// Removes the rounding left in `sum(a)` by `a = eta - b nu`, which would
/// otherwise dominate when every coefficient is that small (e.g. one sample).
fn center(a: &mut [f64]) {
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    for v in a.iter_mut() {
        *v -= mean;
    }
}

pub(crate) fn solve_dual(
    distances: &SquaredDistances,
    y: &[f64],
    hp: Hyperparams,
) -> Result<(Vec<f64>, f64)> {
    let h = regularized_gram(distances, hp);
    let chol = Cholesky::factor(h.clone(), y.len())?;

    let mut nu = vec![1.0; y.len()];
    chol.solve_in_place(&mut nu);
    let s: f64 = nu.iter().sum();
    let mut eta = y.to_vec();
    chol.solve_in_place(&mut eta);
    let b = eta.iter().sum::<f64>() / s;
    let mut a: Vec<f64> = eta.iter().zip(&nu).map(|(e, n)| e - b * n).collect();
    center(&mut a);
    let mut b = b;

    let (mut r0, mut r, mut rel) = kkt_residual(&h, y, &a, b);
    for _ in 0..REFINEMENT_STEPS {
        if rel <= RESIDUAL_TOLERANCE {
            break;
        }
        chol.solve_in_place(&mut r);
        let db = (r.iter().sum::<f64>() - r0) / s;
        for ((ai, wi), ni) in a.iter_mut().zip(&r).zip(&nu) {
            *ai += wi - db * ni;
        }
        center(&mut a);
        b += db;
        (r0, r, rel) = kkt_residual(&h, y, &a, b);
    }
    if !(rel <= RESIDUAL_TOLERANCE) {
        return Err(Error::Residual {
            residual: rel,
            tolerance: RESIDUAL_TOLERANCE,
        });
    }
    Ok((a, b))
}
