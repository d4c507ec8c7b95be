//! Internal photon states and their Gram (distinguishability) matrices.
//!
//! Photon `j` carries a unit vector `|φ_j⟩` in an `r`-dimensional internal
//! space (polarization, time bin, ...). The Gram matrix `S_ij = ⟨φ_i|φ_j⟩`
//! is all that the interference statistics depend on: `S = 𝔼` (all ones)
//! for identical photons, `S = 𝟙` for mutually orthogonal ones.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::matrix::ComplexMatrix;
use crate::permanent::permanent;
use crate::scalar::{factorial, root_of_unity, Real};

/// `n` unit vectors of a common dimension `r`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InternalStateSet<T> {
    vectors: Vec<Vec<Complex<T>>>,
}

fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

impl<T: Real> InternalStateSet<T> {
    pub fn new(vectors: Vec<Vec<Complex<T>>>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidParameter("state set needs at least one photon".into()));
        }
        let r = vectors[0].len();
        if r == 0 {
            return Err(Error::InvalidParameter("internal dimension must be at least 1".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != r {
                return Err(Error::DimensionMismatch {
                    expected: format!("internal dimension {r}"),
                    found: format!("state {i} of dimension {}", v.len()),
                });
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { row: i, col: 0 });
            }
            let nv = norm(v);
            if (nv - T::one()).abs() > T::validation_tol() {
                return Err(Error::NotNormalized {
                    index: i,
                    norm: nv.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        Ok(Self { vectors })
    }

    /// Normalizes each vector before validating; zero vectors are rejected.
    pub fn normalized(mut vectors: Vec<Vec<Complex<T>>>) -> Result<Self> {
        for (i, v) in vectors.iter_mut().enumerate() {
            let nv = norm(v);
            if nv <= T::zero() || !nv.is_finite() {
                return Err(Error::NotNormalized {
                    index: i,
                    norm: nv.to_f64().unwrap_or(f64::NAN),
                });
            }
            for z in v.iter_mut() {
                *z /= nv;
            }
        }
        Self::new(vectors)
    }

    /// Photons whose states are the columns of `factor` (`r x n`).
    pub fn from_columns(factor: &ComplexMatrix<T>) -> Result<Self> {
        Self::new((0..factor.cols()).map(|j| factor.column(j)).collect())
    }

    pub fn photon_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn internal_dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Vec<Complex<T>>] {
        &self.vectors
    }

    pub fn state(&self, j: usize) -> &[Complex<T>] {
        &self.vectors[j]
    }

    /// Multiplies photon `j`'s state by `exp(i·phases[j])`.
    pub fn with_phases(&self, phases: &[T]) -> Result<Self> {
        if phases.len() != self.photon_count() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} phases", self.photon_count()),
                found: format!("{}", phases.len()),
            });
        }
        let vectors = self
            .vectors
            .iter()
            .zip(phases)
            .map(|(v, &t)| {
                let ph = Complex::new(t.cos(), t.sin());
                v.iter().map(|z| z * ph).collect()
            })
            .collect();
        Self::new(vectors)
    }

    /// Reorders photons: output photon `i` is input photon `order[i]`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        let mut vectors = Vec::with_capacity(order.len());
        for &k in order {
            let v = self.vectors.get(k).ok_or(Error::IndexOutOfRange {
                what: "photon",
                index: k,
                size: self.photon_count(),
            })?;
            vectors.push(v.clone());
        }
        Self::new(vectors)
    }
}

/// Hermitian, unit-diagonal, positive semidefinite `n x n` matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix<T>(ComplexMatrix<T>);

impl<T: Real> GramMatrix<T> {
    pub fn new(m: ComplexMatrix<T>) -> Result<Self> {
        let n = m.square_dim()?;
        if n == 0 {
            return Err(Error::InvalidParameter("Gram matrix must be at least 1x1".into()));
        }
        let dev = m.hermitian_deviation();
        if dev > T::validation_tol() {
            return Err(Error::NotHermitian(dev.to_f64().unwrap_or(f64::NAN)));
        }
        for i in 0..n {
            let d = m[(i, i)];
            if (d - Complex::new(T::one(), T::zero())).norm() > T::validation_tol() {
                return Err(Error::NonUnitDiagonal {
                    index: i,
                    value: d.re.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let min = hermitian_eigen(&m)?.values[0];
        if min < -T::psd_tol() {
            return Err(Error::NotPositiveSemidefinite(min.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self(m))
    }

    /// `𝔼`: fully indistinguishable photons.
    pub fn indistinguishable(n: usize) -> Self {
        Self(ComplexMatrix::ones(n))
    }

    /// `𝟙`: fully distinguishable photons.
    pub fn distinguishable(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.0
    }

    /// `D† S D` with `D = diag(exp(i·θ_j))`, the phase-equivalent Gram matrix.
    pub fn gauge_transform(&self, phases: &[T]) -> Result<Self> {
        if phases.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} phases", self.dim()),
                found: format!("{}", phases.len()),
            });
        }
        let m = ComplexMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            let t = phases[j] - phases[i];
            self.0[(i, j)] * Complex::new(t.cos(), t.sin())
        });
        Ok(Self(m))
    }
}

/// `S_ij = ⟨φ_i|φ_j⟩`, conjugate-linear in the first slot.
pub fn gram_from_states<T: Real>(states: &InternalStateSet<T>) -> GramMatrix<T> {
    let n = states.photon_count();
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return Complex::new(T::one(), T::zero());
        }
        states
            .state(i)
            .iter()
            .zip(states.state(j))
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    });
    GramMatrix(m)
}

/// Rank-revealing factorization `S = F† F`; the photons are the columns of `F`.
///
/// Uses the eigendecomposition of `S`, dropping eigenvalues at or below the
/// rank threshold (slightly negative round-off included).
pub fn states_from_gram<T: Real>(s: &GramMatrix<T>) -> Result<InternalStateSet<T>> {
    let n = s.dim();
    let eig = hermitian_eigen(s.matrix())?;
    if eig.values[0] < -T::psd_tol() {
        return Err(Error::NotPositiveSemidefinite(eig.values[0].to_f64().unwrap_or(f64::NAN)));
    }
    let kept: Vec<usize> = (0..n).rev().filter(|&k| eig.values[k] > T::rank_tol()).collect();
    let vectors = (0..n)
        .map(|j| {
            kept.iter()
                .map(|&k| eig.vectors[(j, k)].conj() * eig.values[k].sqrt())
                .collect()
        })
        .collect();
    InternalStateSet::normalized(vectors)
}

/// `q` polarization states `(|H⟩ + ω^j |V⟩)/√2`, `ω = exp(2πi/q)`, equally spaced on the equator.
pub fn star_states<T: Real>(q: usize) -> Result<InternalStateSet<T>> {
    if q == 0 {
        return Err(Error::InvalidParameter("star pattern needs q >= 1".into()));
    }
    let h = T::FRAC_1_SQRT_2();
    let vectors = (0..q)
        .map(|j| vec![Complex::new(h, T::zero()), root_of_unity::<T>(q, j as i64) * h])
        .collect();
    InternalStateSet::new(vectors)
}

/// Input pattern of the `n`-photon family: the `(n-2)`-star on the Fourier
/// inputs, then `|V⟩` on ancilla mode `0'` and `|H⟩` on ancilla mode `1'`.
pub fn violation_family_states<T: Real>(n: usize) -> Result<InternalStateSet<T>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("family needs n >= 4, got {n}")));
    }
    let mut vectors = star_states::<T>(n - 2)?.vectors;
    let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
    vectors.push(vec![z, o]);
    vectors.push(vec![o, z]);
    InternalStateSet::new(vectors)
}

/// `S(x, y) = (1 - x - y) S★ + x 𝔼 + y 𝟙` on the family pattern of size `n`.
pub fn interpolated_gram<T: Real>(x: T, y: T, n: usize) -> Result<GramMatrix<T>> {
    let slack = T::lit(1e-12).max(T::epsilon() * T::lit(8.0));
    if x < -slack || y < -slack || x + y > T::one() + slack || !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidParameter(format!("(x, y) = ({x}, {y}) outside the simplex")));
    }
    let x = x.max(T::zero());
    let y = y.max(T::zero());
    let w = (T::one() - x - y).max(T::zero());
    let star = gram_from_states(&violation_family_states::<T>(n)?).into_matrix();
    let m = star
        .scale(w)
        .add(&ComplexMatrix::ones(n).scale(x))?
        .add(&ComplexMatrix::identity(n).scale(y))?;
    GramMatrix::new(m)
}

/// Adds independent Gaussian noise (std `epsilon` on real and imaginary parts)
/// to every component, then renormalizes each state.
pub fn perturb_states<T: Real, R: Rng + ?Sized>(
    states: &InternalStateSet<T>,
    epsilon: T,
    rng: &mut R,
) -> Result<InternalStateSet<T>> {
    if epsilon < T::zero() || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if epsilon == T::zero() {
        return Ok(states.clone());
    }
    let vectors = states
        .vectors()
        .iter()
        .map(|v| {
            v.iter()
                .map(|z| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    z + Complex::new(T::lit(re), T::lit(im)) * epsilon
                })
                .collect()
        })
        .collect();
    InternalStateSet::normalized(vectors)
}

/// `n` independent states uniform on the unit sphere of `C^r`.
pub fn random_unit_states<T: Real, R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> Result<InternalStateSet<T>> {
    if n == 0 || r == 0 {
        return Err(Error::InvalidParameter("need n >= 1 and r >= 1".into()));
    }
    let vectors = (0..n)
        .map(|_| {
            (0..r)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex::new(T::lit(re), T::lit(im))
                })
                .collect()
        })
        .collect();
    InternalStateSet::normalized(vectors)
}

/// Weight of the fully symmetric component of `|φ_1⟩…|φ_n⟩`: `perm(S)/n!`.
pub fn symmetric_component<T: Real>(s: &GramMatrix<T>) -> Result<T> {
    let p = permanent(s.matrix())?;
    Ok(p.re / factorial::<T>(s.dim()))
}
