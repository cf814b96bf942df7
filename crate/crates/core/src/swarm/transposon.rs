//! Transposon (jumping gene) breeding of the elitist pool.
//!
//! Each row of the pool is a chromosome whose genes are the particle's
//! coordinates, rescaled to `[0, 1]` so genes from different dimensions are
//! interchangeable. Transposons always span one gene.

use rand::Rng;

use super::{SearchSpace, SwarmConfig};
use crate::error::{Error, Result};

/// The two transposon moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transposon {
    CutAndPaste,
    CopyAndPaste,
}

/// Maps `x` into the unit box: `(x - lower) / (upper - lower)`.
pub fn normalize(x: &[f64], space: &SearchSpace) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(j, v)| (v - space.lower()[j]) / space.width(j))
        .collect()
}

/// Inverse of [`normalize`]: `xn (upper - lower) + lower`.
pub fn denormalize(xn: &[f64], space: &SearchSpace) -> Vec<f64> {
    xn.iter()
        .enumerate()
        .map(|(j, v)| v * space.width(j) + space.lower()[j])
        .collect()
}

fn check_loci(pool: &[Vec<f64>], row: usize, locus: usize) {
    assert!(row < pool.len(), "row {row} outside pool of {}", pool.len());
    assert!(
        locus < pool[row].len(),
        "locus {locus} outside chromosome of length {}",
        pool[row].len()
    );
}

/// Moves the gene at `(src_row, src)` to `(dst_row, dst)`.
///
/// Within one row the gene is excised, the remaining genes close ranks and it
/// is reinserted at `dst`. Across rows the displaced target gene takes the
/// vacated source locus, so both chromosomes keep their length.
///
/// # Panics
///
/// If a row or locus is out of range.
pub fn cut_and_paste(
    pool: &mut [Vec<f64>],
    src_row: usize,
    src: usize,
    dst_row: usize,
    dst: usize,
) {
    check_loci(pool, src_row, src);
    check_loci(pool, dst_row, dst);
    if src_row == dst_row {
        let row = &mut pool[src_row];
        let gene = row.remove(src);
        row.insert(dst, gene);
    } else {
        let moved = pool[src_row][src];
        pool[src_row][src] = pool[dst_row][dst];
        pool[dst_row][dst] = moved;
    }
}

/// Overwrites the gene at `(dst_row, dst)` with a copy of `(src_row, src)`.
///
/// # Panics
///
/// If a row or locus is out of range.
pub fn copy_and_paste(
    pool: &mut [Vec<f64>],
    src_row: usize,
    src: usize,
    dst_row: usize,
    dst: usize,
) {
    check_loci(pool, src_row, src);
    check_loci(pool, dst_row, dst);
    pool[dst_row][dst] = pool[src_row][src];
}

/// Breeds a copy of `epool` (personal bests followed by the global best).
///
/// For every row `i`, with probability `jumping_rate` a partner row
/// `ceil(U * rows)` is chosen and either cut-and-paste or copy-and-paste is
/// applied `n_transposons` times. Draw order per row: activation, partner,
/// operation, then source and target loci for each transposon. Within one row
/// the target locus differs from the source locus.
///
/// Genes that end up unchanged are copied bit-for-bit from the input, so
/// rows no operation touched are identical to their originals.
pub fn transposon_operator<R: Rng + ?Sized>(
    epool: &[Vec<f64>],
    config: &SwarmConfig,
    space: &SearchSpace,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let d = space.dim();
    if epool.is_empty() {
        return Err(Error::invalid("elitist pool is empty"));
    }
    if epool.iter().any(|r| r.len() != d) {
        return Err(Error::invalid(format!(
            "every pool row must have dimension {d}"
        )));
    }
    let rows = epool.len();
    let original: Vec<Vec<f64>> = epool.iter().map(|r| normalize(r, space)).collect();
    let mut bred = original.clone();

    for i in 0..rows {
        if rng.random::<f64>() >= config.jumping_rate {
            continue;
        }
        let partner = ((rng.random::<f64>() * rows as f64).ceil() as usize).clamp(1, rows) - 1;
        let op = if rng.random::<f64>() > 0.5 {
            Transposon::CutAndPaste
        } else {
            Transposon::CopyAndPaste
        };
        for _ in 0..config.n_transposons {
            let src = rng.random_range(0..d);
            let dst = if partner == i && d > 1 {
                (src + 1 + rng.random_range(0..d - 1)) % d
            } else {
                rng.random_range(0..d)
            };
            match op {
                Transposon::CutAndPaste => cut_and_paste(&mut bred, i, src, partner, dst),
                Transposon::CopyAndPaste => copy_and_paste(&mut bred, i, src, partner, dst),
            }
        }
    }

    Ok(epool
        .iter()
        .zip(original.iter().zip(&bred))
        .map(|(input, (before, after))| {
            let mut row = input.clone();
            for j in 0..d {
                if before[j].to_bits() != after[j].to_bits() {
                    let v = after[j] * space.width(j) + space.lower()[j];
                    row[j] = v.clamp(space.lower()[j], space.upper()[j]);
                }
            }
            row
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn space() -> SearchSpace {
        SearchSpace::new(vec![-4.0, 0.0], vec![6.0, 10.0]).unwrap()
    }

    #[test]
    fn normalization_examples() {
        let s = space();
        assert_eq!(normalize(&[-4.0, 0.0], &s), vec![0.0, 0.0]);
        assert_eq!(normalize(&[6.0, 10.0], &s), vec![1.0, 1.0]);
        assert_eq!(normalize(&[1.0, 5.0], &s), vec![0.5, 0.5]);
        assert_eq!(denormalize(&[0.0, 0.0], &s), vec![-4.0, 0.0]);
        assert_eq!(denormalize(&[0.5, 0.5], &s), vec![1.0, 5.0]);
    }

    #[test]
    fn same_row_cut_and_paste_swaps_two_genes() {
        let mut pool = vec![vec![1.0, 2.0]];
        cut_and_paste(&mut pool, 0, 0, 0, 1);
        assert_eq!(pool[0], vec![2.0, 1.0]);
        cut_and_paste(&mut pool, 0, 1, 0, 0);
        assert_eq!(pool[0], vec![1.0, 2.0]);
    }

    #[test]
    fn same_row_cut_and_paste_closes_ranks() {
        let mut pool = vec![vec![1.0, 2.0, 3.0, 4.0]];
        cut_and_paste(&mut pool, 0, 0, 0, 2);
        assert_eq!(pool[0], vec![2.0, 3.0, 1.0, 4.0]);
    }

    #[test]
    fn cross_row_cut_and_paste_exchanges_genes() {
        let mut pool = vec![vec![1.0, 2.0], vec![10.0, 20.0]];
        cut_and_paste(&mut pool, 0, 0, 1, 1);
        assert_eq!(pool, vec![vec![20.0, 2.0], vec![10.0, 1.0]]);
    }

    #[test]
    fn cut_and_paste_onto_itself_is_identity() {
        let mut pool = vec![vec![1.0, 2.0]];
        cut_and_paste(&mut pool, 0, 1, 0, 1);
        assert_eq!(pool[0], vec![1.0, 2.0]);
    }

    #[test]
    fn copy_and_paste_examples() {
        let mut pool = vec![vec![1.0, 2.0]];
        copy_and_paste(&mut pool, 0, 0, 0, 0);
        assert_eq!(pool[0], vec![1.0, 2.0]);
        copy_and_paste(&mut pool, 0, 1, 0, 0);
        assert_eq!(pool[0], vec![2.0, 2.0]);

        let mut pool = vec![vec![1.0, 2.0], vec![10.0, 20.0]];
        copy_and_paste(&mut pool, 0, 0, 1, 0);
        assert_eq!(pool, vec![vec![1.0, 2.0], vec![1.0, 20.0]]);

        let mut pool = vec![vec![1.0, 2.0]];
        copy_and_paste(&mut pool, 0, 0, 0, 1);
        assert_eq!(pool[0], vec![1.0, 1.0]);
    }

    #[test]
    #[should_panic]
    fn out_of_range_locus_panics() {
        let mut pool = vec![vec![1.0, 2.0]];
        cut_and_paste(&mut pool, 0, 2, 0, 0);
    }

    #[test]
    fn zero_jumping_rate_is_identity() {
        let s = space();
        let pool = vec![vec![0.1, 3.0], vec![-2.0, 9.9], vec![5.5, 0.0]];
        let cfg = SwarmConfig {
            jumping_rate: 0.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert_eq!(
                transposon_operator(&pool, &cfg, &s, &mut rng).unwrap(),
                pool
            );
        }
    }

    #[test]
    fn operator_output_stays_in_bounds_and_input_is_untouched() {
        let s = space();
        let pool = vec![
            vec![0.1, 3.0],
            vec![-2.0, 9.9],
            vec![5.5, 0.0],
            vec![6.0, 10.0],
        ];
        let snapshot = pool.clone();
        let cfg = SwarmConfig {
            jumping_rate: 1.0,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut changed = 0;
        for _ in 0..200 {
            let out = transposon_operator(&pool, &cfg, &s, &mut rng).unwrap();
            assert_eq!(out.len(), pool.len());
            assert!(out.iter().all(|r| s.contains(r)));
            changed += out.iter().zip(&pool).filter(|(a, b)| a != b).count();
        }
        assert_eq!(pool, snapshot);
        assert!(changed > 0);
    }

    #[test]
    fn operator_rejects_bad_pool() {
        let s = space();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cfg = SwarmConfig::default();
        assert!(transposon_operator(&[], &cfg, &s, &mut rng).is_err());
        assert!(transposon_operator(&[vec![1.0]], &cfg, &s, &mut rng).is_err());
    }
}
