//! Dense Cholesky factorization for the symmetric positive definite block of
//! the LSSVM system.
//!
//! Storage is row-major and only the lower triangle is read or written. The
//! factorization is the row-oriented (Cholesky-Crout) form, so every inner
//! product runs over two contiguous row prefixes.

use crate::error::{Error, Result};

/// Ratio below which a pivot counts as singular, relative to `max |A_ij|`.
pub(crate) const PIVOT_GUARD: f64 = 1e-12;

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Rows and columns per register tile of the factorization.
const TILE: usize = 4;
/// Independent partial sums per tile entry; fixes the summation order so
/// every instruction set gives bit-identical factors.
const LANES: usize = 8;

/// `out[r][c] = sum_{k < len} L[row0 + r, k] * L[col0 + c, k]`.
#[inline(always)]
fn tile_products(l: &[f64], n: usize, row0: usize, col0: usize, len: usize) -> [[f64; TILE]; TILE] {
    assert!(col0 + TILE <= row0 + TILE && row0 + TILE <= n && len <= n && l.len() >= n * n);
    let p = l.as_ptr();
    let mut acc = [[[0.0f64; LANES]; TILE]; TILE];
    let chunks = len / LANES;
    for q in 0..chunks {
        let k = q * LANES;
        // SAFETY: rows row0..row0+TILE and col0..col0+TILE are below n and
        // k + LANES <= len <= n, so every read stays inside `l`.
        unsafe {
            let mut cols = [[0.0; LANES]; TILE];
            for (c, v) in cols.iter_mut().enumerate() {
                *v = *(p.add((col0 + c) * n + k) as *const [f64; LANES]);
            }
            for (r, acc_r) in acc.iter_mut().enumerate() {
                let row = *(p.add((row0 + r) * n + k) as *const [f64; LANES]);
                for (acc_rc, col) in acc_r.iter_mut().zip(&cols) {
                    for w in 0..LANES {
                        acc_rc[w] += row[w] * col[w];
                    }
                }
            }
        }
    }
    let mut out = [[0.0; TILE]; TILE];
    for r in 0..TILE {
        for c in 0..TILE {
            let mut s = acc[r][c].iter().sum::<f64>();
            for k in chunks * LANES..len {
                s += l[(row0 + r) * n + k] * l[(col0 + c) * n + k];
            }
            out[r][c] = s;
        }
    }
    out
}

/// Row-oriented factorization; full row blocks use register tiles for the
/// part left of their diagonal block.
#[inline(always)]
fn factor_lower(a: &mut [f64], n: usize, threshold: f64) -> Result<()> {
    let mut i0 = 0;
    while i0 < n {
        let rows = if i0 + TILE <= n { TILE } else { n - i0 };
        let mut j0 = 0;
        if rows == TILE {
            while j0 + TILE <= i0 {
                let t = tile_products(a, n, i0, j0, j0);
                for (r, t_r) in t.iter().enumerate() {
                    let i = i0 + r;
                    for (c, &prefix) in t_r.iter().enumerate() {
                        let j = j0 + c;
                        let s = prefix + (j0..j).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>();
                        a[i * n + j] = (a[i * n + j] - s) / a[j * n + j];
                    }
                }
                j0 += TILE;
            }
        }
        for i in i0..i0 + rows {
            for j in j0..i {
                let s = dot(&a[i * n..i * n + j], &a[j * n..j * n + j]);
                a[i * n + j] = (a[i * n + j] - s) / a[j * n + j];
            }
            let pivot = a[i * n + i] - dot(&a[i * n..i * n + i], &a[i * n..i * n + i]);
            if !(pivot > threshold) {
                return Err(Error::Singular {
                    index: i,
                    pivot,
                    threshold,
                });
            }
            a[i * n + i] = pivot.sqrt();
        }
        i0 += rows;
    }
    Ok(())
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn factor_lower_avx512(a: &mut [f64], n: usize, threshold: f64) -> Result<()> {
    factor_lower(a, n, threshold)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn factor_lower_avx2(a: &mut [f64], n: usize, threshold: f64) -> Result<()> {
    factor_lower(a, n, threshold)
}

fn factor_dispatch(a: &mut [f64], n: usize, threshold: f64) -> Result<()> {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the feature was detected at runtime.
            return unsafe { factor_lower_avx512(a, n, threshold) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: as above.
            return unsafe { factor_lower_avx2(a, n, threshold) };
        }
    }
    factor_lower(a, n, threshold)
}

/// Lower-triangular factor `L` with `A = L L^T`.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors `a` (n x n, row-major, lower triangle significant) in place.
    pub(crate) fn factor(mut a: Vec<f64>, n: usize) -> Result<Self> {
        debug_assert_eq!(a.len(), n * n);
        let scale = (0..n)
            .flat_map(|i| a[i * n..i * n + i + 1].iter().copied())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let threshold = PIVOT_GUARD * scale;
        factor_dispatch(&mut a, n, threshold)?;
        Ok(Self { n, l: a })
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        for i in 0..n {
            let row = &self.l[i * n..i * n + i + 1];
            b[i] = (b[i] - dot(&row[..i], &b[..i])) / row[i];
        }
        for i in (0..n).rev() {
            let row = &self.l[i * n..i * n + i + 1];
            let xi = b[i] / row[i];
            b[i] = xi;
            for (bk, lik) in b[..i].iter_mut().zip(&row[..i]) {
                *bk -= lik * xi;
            }
        }
    }
}
