//! Gaussian RBF kernel and reusable squared-distance tables.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

pub(crate) fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "kernel width sigma^2 must be positive and finite, got {sigma2}"
        )))
    }
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `exp(-||x - x2||^2 / (2 sigma2))`.
pub fn rbf_kernel(x: &[f64], x2: &[f64], sigma2: f64) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(Error::invalid(format!(
            "kernel arguments differ in dimension ({} vs {})",
            x.len(),
            x2.len()
        )));
    }
    check_sigma2(sigma2)?;
    Ok((-squared_distance(x, x2) / (2.0 * sigma2)).exp())
}

/// Gram matrix `K[i][j] = k(x_i, x_j)` over the rows of `x`.
pub fn build_kernel_matrix(x: ArrayView2<'_, f64>, sigma2: f64) -> Result<Array2<f64>> {
    check_sigma2(sigma2)?;
    if x.nrows() == 0 {
        return Err(Error::invalid("kernel matrix needs at least one row"));
    }
    Ok(SquaredDistances::pairwise(x).kernel(sigma2))
}

/// Squared Euclidean distances between two row sets, stored row-major.
///
/// The distances do not depend on the kernel width, so a table computed once
/// per training set serves every hyperparameter evaluation.
#[derive(Debug, Clone)]
pub struct SquaredDistances {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SquaredDistances {
    /// Symmetric table over the rows of `x`; the diagonal is exactly zero.
    pub fn pairwise(x: ArrayView2<'_, f64>) -> Self {
        let n = x.nrows();
        let rows: Vec<Vec<f64>> = x.rows().into_iter().map(|r| r.to_vec()).collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let d = squared_distance(&rows[i], &rows[j]);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Table with one row per query and one column per reference row.
    pub fn cross(queries: ArrayView2<'_, f64>, reference: ArrayView2<'_, f64>) -> Result<Self> {
        if queries.ncols() != reference.ncols() {
            return Err(Error::invalid(format!(
                "query rows have {} features, reference rows have {}",
                queries.ncols(),
                reference.ncols()
            )));
        }
        let refs: Vec<Vec<f64>> = reference.rows().into_iter().map(|r| r.to_vec()).collect();
        let mut data = Vec::with_capacity(queries.nrows() * refs.len());
        for q in queries.rows() {
            let q = q.to_vec();
            data.extend(refs.iter().map(|r| squared_distance(&q, r)));
        }
        Ok(Self {
            rows: queries.nrows(),
            cols: refs.len(),
            data,
        })
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Kernel values for this table. `sigma2` must already be validated.
    pub fn kernel(&self, sigma2: f64) -> Array2<f64> {
        let scale = -1.0 / (2.0 * sigma2);
        Array2::from_shape_vec(
            (self.rows, self.cols),
            self.data.iter().map(|d| (d * scale).exp()).collect(),
        )
        .expect("shape matches buffer")
    }
}
