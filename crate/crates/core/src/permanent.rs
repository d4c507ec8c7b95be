//! Permanent and determinant kernels for dense complex matrices.
//!
//! [`permanent_ryser`] is the production kernel: inclusion-exclusion over
//! column subsets visited in Gray-code order so each step updates the row
//! sums with a single column, `O(2^n n)` overall. Subsets are split into
//! fixed-size blocks whose partial sums are combined in block order, so the
//! result does not depend on how many worker threads evaluate them.
//! [`permanent_glynn`] is an independent second kernel and
//! [`permanent_naive`] enumerates permutations for small reference checks.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{CompensatedSum, Real};

pub use crate::linalg::determinant;

/// Largest size accepted by [`permanent_naive`].
pub const NAIVE_LIMIT: usize = 10;

/// Gray-code steps per block; blocks are re-seeded from scratch.
const BLOCK_BITS: usize = 18;
/// Below this size the whole sum runs on the calling thread.
const PARALLEL_MIN_N: usize = 20;

#[inline]
fn gray(k: u64) -> u64 {
    k ^ (k >> 1)
}

fn ryser_block<T: Real>(m: &ComplexMatrix<T>, lo: u64, hi: u64) -> Complex<T> {
    let n = m.rows();
    let zero = Complex::new(T::zero(), T::zero());
    let mut sums = vec![zero; n];
    let mut acc = CompensatedSum::new();

    let mut g = gray(lo);
    for j in 0..n {
        if g >> j & 1 == 1 {
            for (i, s) in sums.iter_mut().enumerate() {
                *s += m[(i, j)];
            }
        }
    }
    let mut k = lo;
    loop {
        if k != 0 {
            let prod = sums.iter().fold(Complex::new(T::one(), T::zero()), |p, s| p * s);
            if g.count_ones() % 2 == 1 {
                acc.add(-prod);
            } else {
                acc.add(prod);
            }
        }
        k += 1;
        if k >= hi {
            break;
        }
        let j = k.trailing_zeros() as usize;
        let next = gray(k);
        if next >> j & 1 == 1 {
            for (i, s) in sums.iter_mut().enumerate() {
                *s += m[(i, j)];
            }
        } else {
            for (i, s) in sums.iter_mut().enumerate() {
                *s -= m[(i, j)];
            }
        }
        g = next;
    }
    acc.value()
}

/// Permanent by Ryser's formula with Gray-code updates. `perm` of the 0x0 matrix is 1.
pub fn permanent_ryser<T: Real>(m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    let n = m.square_dim()?;
    if n == 0 {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    if n >= 63 {
        return Err(Error::SizeLimit {
            what: "permanent dimension",
            size: n,
            limit: 62,
        });
    }
    let total = 1u64 << n;
    let block = 1u64 << BLOCK_BITS.min(n);
    let blocks = total / block;
    let partials: Vec<Complex<T>> = if n >= PARALLEL_MIN_N {
        (0..blocks)
            .into_par_iter()
            .map(|b| ryser_block(m, b * block, (b + 1) * block))
            .collect()
    } else {
        (0..blocks).map(|b| ryser_block(m, b * block, (b + 1) * block)).collect()
    };
    let mut acc = CompensatedSum::new();
    for p in partials {
        acc.add(p);
    }
    let v = acc.value();
    Ok(if n % 2 == 1 { -v } else { v })
}

/// Permanent by Glynn's formula over sign vectors with the first sign fixed.
pub fn permanent_glynn<T: Real>(m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    let n = m.square_dim()?;
    if n == 0 {
        return Ok(Complex::new(T::one(), T::zero()));
    }
    if n >= 63 {
        return Err(Error::SizeLimit {
            what: "permanent dimension",
            size: n,
            limit: 62,
        });
    }
    let mut sums: Vec<Complex<T>> = (0..n)
        .map(|i| m.row(i).iter().fold(Complex::new(T::zero(), T::zero()), |a, b| a + b))
        .collect();
    let mut signs = vec![true; n];
    let mut positive = true;
    let mut acc = CompensatedSum::new();
    let two = T::lit(2.0);
    let steps = 1u64 << (n - 1);
    for k in 0..steps {
        if k > 0 {
            let j = k.trailing_zeros() as usize + 1;
            for (i, s) in sums.iter_mut().enumerate() {
                let delta = m[(i, j)] * two;
                if signs[j] {
                    *s -= delta;
                } else {
                    *s += delta;
                }
            }
            signs[j] = !signs[j];
            positive = !positive;
        }
        let prod = sums.iter().fold(Complex::new(T::one(), T::zero()), |p, s| p * s);
        acc.add(if positive { prod } else { -prod });
    }
    let scale = T::one() / T::from_f64(2f64.powi(n as i32 - 1)).unwrap();
    Ok(acc.value() * scale)
}

/// Reference permanent: explicit sum over all `n!` permutations. Restricted to `n <= 10`.
pub fn permanent_naive<T: Real>(m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    let n = m.square_dim()?;
    if n > NAIVE_LIMIT {
        return Err(Error::SizeLimit {
            what: "naive permanent dimension",
            size: n,
            limit: NAIVE_LIMIT,
        });
    }
    fn rec<T: Real>(m: &ComplexMatrix<T>, row: usize, used: u32, prefix: Complex<T>, acc: &mut CompensatedSum<T>) {
        let n = m.rows();
        if row == n {
            acc.add(prefix);
            return;
        }
        for j in 0..n {
            if used >> j & 1 == 0 {
                rec(m, row + 1, used | (1 << j), prefix * m[(row, j)], acc);
            }
        }
    }
    let mut acc = CompensatedSum::new();
    rec(m, 0, 0, Complex::new(T::one(), T::zero()), &mut acc);
    Ok(acc.value())
}

/// Default permanent used throughout the crate.
#[inline]
pub fn permanent<T: Real>(m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    permanent_ryser(m)
}

pub fn minor<T: Real>(m: &ComplexMatrix<T>, drop_row: usize, drop_col: usize) -> Result<ComplexMatrix<T>> {
    m.square_dim()?;
    m.minor(drop_row, drop_col)
}

pub fn hadamard_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    a.hadamard(b)
}
