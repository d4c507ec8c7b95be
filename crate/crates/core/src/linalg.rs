//! Dense complex linear algebra on top of `nalgebra`: determinants, Hermitian
//! eigendecomposition, QR-based orthonormalization and unitary completion.
//!
//! Factorizations run in `f64` whatever the crate scalar, and results are
//! converted back to `T`.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::Real;

type C = Complex<f64>;

fn to_na<T: Real>(m: &ComplexMatrix<T>) -> DMatrix<C> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        let z = m[(i, j)];
        C::new(z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN))
    })
}

fn from_na<T: Real>(m: &DMatrix<C>) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        Complex::new(T::lit(z.re), T::lit(z.im))
    })
}

/// Determinant by LU factorization with partial pivoting.
pub fn determinant<T: Real>(m: &ComplexMatrix<T>) -> Result<Complex<T>> {
    m.square_dim()?;
    let d = to_na(m).lu().determinant();
    Ok(Complex::new(T::lit(d.re), T::lit(d.im)))
}

/// Eigenvalues (ascending) and eigenvectors (as columns) of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

/// Eigendecomposition of the Hermitian part `(A + A†)/2`.
pub fn hermitian_eigen<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    let n = m.square_dim()?;
    let a = to_na(m);
    let herm = (&a + a.adjoint()) * C::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    Ok(HermitianEigen {
        values: order.iter().map(|&k| T::lit(eig.eigenvalues[k])).collect(),
        vectors: ComplexMatrix::from_fn(n, n, |i, j| {
            let z = eig.eigenvectors[(i, order[j])];
            Complex::new(T::lit(z.re), T::lit(z.im))
        }),
    })
}

pub fn min_eigenvalue<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    let eig = hermitian_eigen(m)?;
    Ok(eig.values.first().copied().unwrap_or(T::zero()))
}

/// Number of eigenvalues of the Hermitian part above `threshold`.
pub fn numerical_rank<T: Real>(m: &ComplexMatrix<T>, threshold: T) -> Result<usize> {
    let eig = hermitian_eigen(m)?;
    Ok(eig.values.iter().filter(|&&l| l > threshold).count())
}

/// Principal square root of a PSD matrix.
///
/// Eigenvalues within round-off of zero (or negative) are clipped to zero, since
/// `sqrt` would amplify a `1e-17` residue to `3e-9`.
pub fn psd_sqrt<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = hermitian_eigen(m)?;
    let top = eig.values.iter().fold(T::one(), |a, &l| a.max(l.abs()));
    let floor = T::epsilon() * T::lit(64.0) * T::from_count(m.rows().max(1)) * top;
    let roots: Vec<Complex<T>> = eig
        .values
        .iter()
        .map(|&l| Complex::new(if l > floor { l.sqrt() } else { T::zero() }, T::zero()))
        .collect();
    eig.vectors
        .matmul(&ComplexMatrix::diagonal(&roots))?
        .matmul(&eig.vectors.adjoint())
}

/// Thin QR with the phases of `diag(R)` moved into `Q`, so `R` has a nonnegative real diagonal.
fn qr_positive(a: DMatrix<C>) -> (DMatrix<C>, Vec<f64>) {
    let k = a.nrows().min(a.ncols());
    let qr = a.qr();
    let (mut q, r) = (qr.q(), qr.r());
    let mut diag = Vec::with_capacity(k);
    for j in 0..k {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        diag.push(norm);
        if norm > 0.0 {
            let phase = rjj / norm;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    (q, diag)
}

/// Orthonormalizes the columns in order: the `Q` of a QR factorization whose
/// `R` has a positive real diagonal (equivalently, Gram-Schmidt).
pub fn orthonormalize_columns<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if m.cols() > m.rows() {
        return Err(Error::CompletionFailure(format!(
            "{} columns cannot be orthonormal in dimension {}",
            m.cols(),
            m.rows()
        )));
    }
    let a = to_na(m);
    let norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let (q, diag) = qr_positive(a);
    for (j, (&d, &n)) in diag.iter().zip(&norms).enumerate() {
        if d <= 1e-12 * n.max(1.0) {
            return Err(Error::CompletionFailure(format!(
                "column {j} is linearly dependent on the previous ones"
            )));
        }
    }
    Ok(from_na(&q))
}

/// Extends orthonormal rows (`r x n`) to an `n x n` unitary whose first `r` rows are the input.
///
/// The complement comes from a QR factorization of `[rows† | I]`.
pub fn complete_orthonormal_rows<T: Real>(rows: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let (r, n) = (rows.rows(), rows.cols());
    if r > n {
        return Err(Error::CompletionFailure(format!("{r} rows cannot be orthonormal in dimension {n}")));
    }
    let gram = rows.matmul(&rows.adjoint())?;
    let dev = gram.max_abs_diff(&ComplexMatrix::identity(r))?;
    if dev > T::lit(1e-8).max(T::validation_tol()) {
        return Err(Error::CompletionFailure(format!("rows are not orthonormal (deviation {dev})")));
    }
    let b = to_na(rows);
    let mut stacked = DMatrix::<C>::zeros(n, r + n);
    stacked.columns_mut(0, r).copy_from(&b.adjoint());
    stacked.columns_mut(r, n).fill_with_identity();
    let (q, _) = qr_positive(stacked);
    let mut u: ComplexMatrix<T> = from_na(&q.adjoint());
    for i in 0..r {
        for j in 0..n {
            u[(i, j)] = rows[(i, j)];
        }
    }
    Ok(u)
}
