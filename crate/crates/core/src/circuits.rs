//! Interferometer constructors: Fourier networks, beam splitters, the
//! `n`-mode violation family, the Drury matrix embedding and Haar sampling.
//!
//! Mode ordering of the family: Fourier modes `0..q` keep their indices and
//! the ancilla modes `0'`, `1'` sit at indices `q` and `q + 1`.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distinguishability::{gram_from_states, random_unit_states, GramMatrix};
use crate::error::{Error, Result};
use crate::interferometry::{BunchingInstance, Interferometer, OutputSubset};
use crate::linalg::{hermitian_eigen, orthonormalize_columns, psd_sqrt};
use crate::matrix::ComplexMatrix;
use crate::scalar::{root_of_unity, Real};

/// `U_jk = ω^{jk}/√q` with `ω = exp(2πi/q)`.
pub fn dft_unitary<T: Real>(q: usize) -> Result<Interferometer<T>> {
    if q == 0 {
        return Err(Error::InvalidParameter("DFT needs q >= 1".into()));
    }
    let norm = T::one() / T::from_count(q).sqrt();
    Interferometer::new(ComplexMatrix::from_fn(q, q, |j, k| {
        root_of_unity::<T>(q, ((j * k) % q) as i64) * norm
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSplitterSpec<T> {
    pub mode_a: usize,
    pub mode_b: usize,
    /// Transmittance in `[0, 1]`.
    pub eta: T,
}

impl<T: Real> BeamSplitterSpec<T> {
    pub fn new(mode_a: usize, mode_b: usize, eta: T) -> Result<Self> {
        if mode_a == mode_b {
            return Err(Error::InvalidParameter(format!("beam splitter on a single mode {mode_a}")));
        }
        if !(eta >= T::zero() && eta <= T::one()) {
            return Err(Error::InvalidParameter(format!("transmittance {eta} outside [0, 1]")));
        }
        Ok(Self { mode_a, mode_b, eta })
    }
}

/// Identity on `m` modes except `[[√η, √(1-η)], [-√(1-η), √η]]` on `(mode_a, mode_b)`.
pub fn beam_splitter_unitary<T: Real>(m: usize, spec: &BeamSplitterSpec<T>) -> Result<Interferometer<T>> {
    let spec = BeamSplitterSpec::new(spec.mode_a, spec.mode_b, spec.eta)?;
    for idx in [spec.mode_a, spec.mode_b] {
        if idx >= m {
            return Err(Error::IndexOutOfRange {
                what: "beam splitter mode",
                index: idx,
                size: m,
            });
        }
    }
    let t = spec.eta.sqrt();
    let r = (T::one() - spec.eta).sqrt();
    let (a, b) = (spec.mode_a, spec.mode_b);
    let mut u = ComplexMatrix::identity(m);
    u[(a, a)] = Complex::new(t, T::zero());
    u[(a, b)] = Complex::new(r, T::zero());
    u[(b, a)] = Complex::new(-r, T::zero());
    u[(b, b)] = Complex::new(t, T::zero());
    Interferometer::new(u)
}

/// The `n`-mode network: a `q = n - 2` mode Fourier transform followed by
/// beam splitters `(0, 0')` and `(1, 1')`, bunching monitored on `{0', 1'}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyCircuit<T> {
    pub n: usize,
    pub q: usize,
    pub eta: T,
    pub interferometer: Interferometer<T>,
    pub subset: OutputSubset,
}

impl<T: Real> FamilyCircuit<T> {
    /// Bunching instance of this network with Gram matrix `gram`.
    pub fn instance(&self, gram: GramMatrix<T>) -> Result<BunchingInstance<T>> {
        BunchingInstance::new(self.interferometer.clone(), self.subset.clone(), gram)
    }
}

/// Transmittance maximizing the family's bunching probability.
pub fn default_eta<T: Real>(n: usize) -> T {
    T::lit(2.0) / T::from_count(n)
}

pub fn family_circuit<T: Real>(n: usize, eta: T) -> Result<FamilyCircuit<T>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("family needs n >= 4, got {n}")));
    }
    if !(eta > T::zero() && eta < T::one()) {
        return Err(Error::InvalidParameter(format!("transmittance {eta} outside (0, 1)")));
    }
    let q = n - 2;
    let fourier = dft_unitary::<T>(q)?.into_matrix().direct_sum(&ComplexMatrix::identity(2));
    let bs0 = beam_splitter_unitary(n, &BeamSplitterSpec::new(0, q, eta)?)?;
    let bs1 = beam_splitter_unitary(n, &BeamSplitterSpec::new(1, q + 1, eta)?)?;
    let u = bs0.matrix().matmul(bs1.matrix())?.matmul(&fourier)?;
    Ok(FamilyCircuit {
        n,
        q,
        eta,
        interferometer: Interferometer::new(u)?,
        subset: OutputSubset::new(vec![q, q + 1], n)?,
    })
}

/// Drury's 7x7 matrix `A = M†M` and its 2x7 factor
/// `M = (1/√2) [[√2, 0, 1, 1, 1, 1, 1], [0, √2, 1, ω, ω², ω³, ω⁴]]`, `ω = exp(2πi/5)`.
pub fn drury_matrices<T: Real>() -> (GramMatrix<T>, ComplexMatrix<T>) {
    let s2 = T::SQRT_2();
    let h = T::FRAC_1_SQRT_2();
    let m = ComplexMatrix::from_fn(2, 7, |i, j| match (i, j) {
        (0, 0) | (1, 1) => Complex::new(s2 * h, T::zero()),
        (0, 1) | (1, 0) => Complex::new(T::zero(), T::zero()),
        (0, _) => Complex::new(h, T::zero()),
        (_, k) => root_of_unity::<T>(5, k as i64 - 2) * h,
    });
    let a = m.adjoint().matmul(&m).expect("2x7 factor");
    // Exactly unit diagonal; the product leaves round-off of order 1e-16.
    let a = ComplexMatrix::from_fn(7, 7, |i, j| {
        if i == j {
            Complex::new(T::one(), T::zero())
        } else {
            a[(i, j)]
        }
    });
    (GramMatrix::new(a).expect("Drury matrix is a valid Gram matrix"), m)
}

/// Embeds `√α·conj(M)` as the first `r` rows of a unitary, so that the
/// bunching matrix on those rows with photons in inputs `0..n` is `α M†M`.
///
/// `α = 1/σ_max(M)²`. When the scaled rows are orthonormal the unitary is
/// `n x n`; otherwise it is the `(n + r)`-mode dilation
/// `[[B, √(I - BB†)], [√(I - B†B), -B†]]` of `B = √α·conj(M)`.
pub fn embed_factor_into_unitary<T: Real>(
    m: &ComplexMatrix<T>,
) -> Result<(Interferometer<T>, OutputSubset, T)> {
    let (r, n) = (m.rows(), m.cols());
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("factor must have 1..=n rows, got {r}x{n}")));
    }
    let mmh = m.matmul(&m.adjoint())?;
    let top = *hermitian_eigen(&mmh)?.values.last().expect("r >= 1");
    if !(top > T::rank_tol()) {
        return Err(Error::CompletionFailure("factor is numerically zero".into()));
    }
    let alpha = T::one() / top;
    let b = m.conjugate().scale(alpha.sqrt());
    let bbh = b.matmul(&b.adjoint())?;
    let orthonormal = bbh.max_abs_diff(&ComplexMatrix::identity(r))? <= T::validation_tol();
    let u = if orthonormal {
        crate::linalg::complete_orthonormal_rows(&b)?
    } else {
        let defect_rows = psd_sqrt(&ComplexMatrix::identity(r).sub(&bbh)?)?;
        let defect_cols = psd_sqrt(&ComplexMatrix::identity(n).sub(&b.adjoint().matmul(&b)?)?)?;
        let minus_bh = b.adjoint().scale(-T::one());
        ComplexMatrix::from_fn(n + r, n + r, |i, j| match (i < r, j < n) {
            (true, true) => b[(i, j)],
            (true, false) => defect_rows[(i, j - n)],
            (false, true) => defect_cols[(i - r, j)],
            (false, false) => minus_bh[(i - r, j - n)],
        })
    };
    let size = u.rows();
    Ok((Interferometer::new(u)?, OutputSubset::first(r, size)?, alpha))
}

/// Haar-distributed `m x m` unitary: Gram-Schmidt on a complex Ginibre matrix,
/// i.e. `Q` of its QR factorization with the phases of `diag(R)` absorbed.
pub fn haar_random_unitary<T: Real, R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Interferometer<T>> {
    if m == 0 {
        return Err(Error::InvalidParameter("Haar unitary needs m >= 1".into()));
    }
    let g = ComplexMatrix::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re), T::lit(im))
    });
    Interferometer::new(orthonormalize_columns(&g)?)
}

/// Gram matrix of `n` states uniform on the unit sphere of `C^r`.
pub fn random_rank_r_gram<T: Real, R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<GramMatrix<T>> {
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("rank must satisfy 1 <= r <= n, got r = {r}, n = {n}")));
    }
    Ok(gram_from_states(&random_unit_states::<T, R>(n, r, rng)?))
}
