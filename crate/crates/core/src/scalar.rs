//! Scalar abstraction shared by every numerical kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating-point type the library is generic over (`f32` or `f64`).
///
/// Validation tolerances depend on the precision, so each implementation
/// carries its own thresholds.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Threshold for Hermiticity, unit norms and unit diagonals.
    fn validation_tol() -> Self;
    /// Smallest eigenvalue accepted for a positive semidefinite matrix (as a negative bound).
    fn psd_tol() -> Self;
    /// Largest imaginary residue tolerated before a probability is rejected.
    fn imag_tol() -> Self;
    /// Unitarity threshold (Frobenius norm of `U†U - 1`).
    fn unitarity_tol() -> Self;
    /// Eigenvalues at or below this value count as zero when taking a numerical rank.
    fn rank_tol() -> Self;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target float")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in target float")
    }
}

impl Real for f64 {
    fn validation_tol() -> Self {
        1e-10
    }
    fn psd_tol() -> Self {
        1e-9
    }
    fn imag_tol() -> Self {
        1e-8
    }
    fn unitarity_tol() -> Self {
        1e-9
    }
    fn rank_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn validation_tol() -> Self {
        1e-4
    }
    fn psd_tol() -> Self {
        1e-4
    }
    fn imag_tol() -> Self {
        1e-3
    }
    fn unitarity_tol() -> Self {
        1e-4
    }
    fn rank_tol() -> Self {
        1e-4
    }
}

/// `exp(i·theta)`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Primitive `q`-th root of unity raised to `k`, reduced modulo `q` before the trig call.
pub fn root_of_unity<T: Real>(q: usize, k: i64) -> Complex<T> {
    let q_i = q as i64;
    let r = k.rem_euclid(q_i);
    cis(T::TAU() * T::from_count(r as usize) / T::from_count(q))
}

/// `n!` in floating point.
pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_count(k))
}

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum<T: Real> {
    re: T,
    re_c: T,
    im: T,
    im_c: T,
}

#[inline]
fn neumaier_step<T: Real>(sum: &mut T, comp: &mut T, x: T) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            re: T::zero(),
            re_c: T::zero(),
            im: T::zero(),
            im_c: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex<T>) {
        neumaier_step(&mut self.re, &mut self.re_c, z.re);
        neumaier_step(&mut self.im, &mut self.im_c, z.im);
    }

    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re + self.re_c, self.im + self.im_c)
    }
}
