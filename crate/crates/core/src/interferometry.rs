//! Bunching and event probabilities for partially distinguishable photons.
//!
//! # Conventions
//!
//! An [`Interferometer`] stores `U` acting on column vectors of mode
//! amplitudes: `U[(k, j)]` is the amplitude for a photon entering input `j`
//! to leave through output `k`. Photons occupy inputs `0..n`, photon `j`
//! carrying internal state `|φ_j⟩`, and `S_ij = ⟨φ_i|φ_j⟩`.
//!
//! With this orientation the bunching matrix of an output subset `K` is
//! `H_ab = Σ_{l∈K} U_la · conj(U_lb)` and the probability that every photon
//! lands in `K` is `perm(H ⊙ Sᵀ)`.

use std::collections::HashMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::distinguishability::{states_from_gram, GramMatrix, InternalStateSet};
use crate::error::{Error, Result};
use crate::linalg::determinant;
use crate::matrix::ComplexMatrix;
use crate::permanent::permanent;
use crate::scalar::{factorial, CompensatedSum, Real};

/// Largest photon number accepted by [`event_probability`].
pub const EVENT_PHOTON_LIMIT: usize = 9;
/// Largest photon number accepted by [`event_probability_double_sum`].
pub const DOUBLE_SUM_PHOTON_LIMIT: usize = 5;
pub const FOCK_PHOTON_LIMIT: usize = 5;
pub const FOCK_MODE_LIMIT: usize = 7;

/// A unitary `m x m` linear-optical network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interferometer<T> {
    u: ComplexMatrix<T>,
}

impl<T: Real> Interferometer<T> {
    pub fn new(u: ComplexMatrix<T>) -> Result<Self> {
        u.square_dim()?;
        let dev = u.unitarity_deviation();
        if !(dev <= T::unitarity_tol()) {
            return Err(Error::NotUnitary(dev.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(Self { u })
    }

    pub fn mode_count(&self) -> usize {
        self.u.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.u
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.u
    }

    /// The network `other` applied after `self`.
    pub fn then(&self, other: &Self) -> Result<Self> {
        Self::new(other.u.matmul(&self.u)?)
    }
}

/// Non-empty strictly increasing set of output modes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputSubset {
    modes: Vec<usize>,
}

impl OutputSubset {
    /// Sorts and validates `modes` against a network of `m` modes.
    pub fn new(mut modes: Vec<usize>, m: usize) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::InvalidParameter("output subset must be non-empty".into()));
        }
        modes.sort_unstable();
        if modes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("output subset has duplicate modes".into()));
        }
        if let Some(&bad) = modes.iter().find(|&&k| k >= m) {
            return Err(Error::IndexOutOfRange {
                what: "output mode",
                index: bad,
                size: m,
            });
        }
        Ok(Self { modes })
    }

    /// The first `k` output modes.
    pub fn first(k: usize, m: usize) -> Result<Self> {
        Self::new((0..k).collect(), m)
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Output occupation numbers `s` (one entry per mode).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OutcomeSpec {
    occupation: Vec<usize>,
}

impl OutcomeSpec {
    pub fn new(occupation: Vec<usize>) -> Self {
        Self { occupation }
    }

    /// Builds the occupation vector from a list of output modes, one per photon.
    pub fn from_assignment(modes: &[usize], m: usize) -> Result<Self> {
        let mut occupation = vec![0; m];
        for &k in modes {
            *occupation.get_mut(k).ok_or(Error::IndexOutOfRange {
                what: "output mode",
                index: k,
                size: m,
            })? += 1;
        }
        Ok(Self { occupation })
    }

    pub fn occupation(&self) -> &[usize] {
        &self.occupation
    }

    pub fn photon_count(&self) -> usize {
        self.occupation.iter().sum()
    }

    /// Mode-assignment list: each mode index repeated by its occupation, nondecreasing.
    pub fn assignment(&self) -> Vec<usize> {
        self.occupation
            .iter()
            .enumerate()
            .flat_map(|(k, &s)| std::iter::repeat_n(k, s))
            .collect()
    }

    /// `μ(s) = Π_k s_k!`.
    pub fn multiplicity<T: Real>(&self) -> T {
        self.occupation.iter().fold(T::one(), |acc, &s| acc * factorial::<T>(s))
    }

    /// Every occupation vector of `n` photons over `m` modes, in lexicographic order.
    pub fn enumerate(n: usize, m: usize) -> Vec<Self> {
        fn rec(left: usize, mode: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<OutcomeSpec>) {
            if mode + 1 == m {
                cur.push(left);
                out.push(OutcomeSpec::new(cur.clone()));
                cur.pop();
                return;
            }
            for s in (0..=left).rev() {
                cur.push(s);
                rec(left - s, mode + 1, m, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if m > 0 {
            rec(n, 0, m, &mut Vec::with_capacity(m), &mut out);
        }
        out
    }
}

/// Interferometer, output subset and Gram matrix of the photons in inputs `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BunchingInstance<T> {
    pub interferometer: Interferometer<T>,
    pub subset: OutputSubset,
    pub gram: GramMatrix<T>,
}

impl<T: Real> BunchingInstance<T> {
    pub fn new(interferometer: Interferometer<T>, subset: OutputSubset, gram: GramMatrix<T>) -> Result<Self> {
        let m = interferometer.mode_count();
        if gram.dim() > m {
            return Err(Error::DimensionMismatch {
                expected: format!("at most {m} photons"),
                found: format!("{} photons", gram.dim()),
            });
        }
        if let Some(&bad) = subset.modes().iter().find(|&&k| k >= m) {
            return Err(Error::IndexOutOfRange {
                what: "output mode",
                index: bad,
                size: m,
            });
        }
        Ok(Self {
            interferometer,
            subset,
            gram,
        })
    }

    pub fn from_states(
        interferometer: Interferometer<T>,
        subset: OutputSubset,
        states: &InternalStateSet<T>,
    ) -> Result<Self> {
        Self::new(interferometer, subset, crate::distinguishability::gram_from_states(states))
    }

    pub fn photon_count(&self) -> usize {
        self.gram.dim()
    }

    /// Same network and subset with a different Gram matrix.
    pub fn with_gram(&self, gram: GramMatrix<T>) -> Result<Self> {
        Self::new(self.interferometer.clone(), self.subset.clone(), gram)
    }
}

fn czero<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

/// Rejects values whose imaginary part is beyond tolerance, and snaps
/// round-off just outside `[0, 1]` back onto the interval.
pub(crate) fn real_probability<T: Real>(z: Complex<T>) -> Result<T> {
    let tol = T::imag_tol();
    if !(z.im.abs() <= tol) || !z.re.is_finite() {
        return Err(Error::ImaginaryResidue {
            real: z.re.to_f64().unwrap_or(f64::NAN),
            imag: z.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    let p = z.re;
    Ok(if p < T::zero() && p > -tol {
        T::zero()
    } else if p > T::one() && p < T::one() + tol {
        T::one()
    } else {
        p
    })
}

/// `H_ab = Σ_{l∈K} U_la · conj(U_lb)` over the `n` occupied inputs.
pub fn h_matrix<T: Real>(inst: &BunchingInstance<T>) -> Result<ComplexMatrix<T>> {
    h_matrix_of(inst.interferometer.matrix(), inst.subset.modes(), inst.photon_count())
}

pub fn h_matrix_of<T: Real>(u: &ComplexMatrix<T>, subset: &[usize], n: usize) -> Result<ComplexMatrix<T>> {
    if n > u.cols() {
        return Err(Error::DimensionMismatch {
            expected: format!("at most {} inputs", u.cols()),
            found: format!("{n}"),
        });
    }
    for &l in subset {
        if l >= u.rows() {
            return Err(Error::IndexOutOfRange {
                what: "output mode",
                index: l,
                size: u.rows(),
            });
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |a, b| {
        subset
            .iter()
            .fold(czero(), |acc, &l| acc + u[(l, a)] * u[(l, b)].conj())
    }))
}

/// `(H ⊙ Sᵀ)_ij = H_ij · S_ji`.
pub fn bunching_kernel<T: Real>(h: &ComplexMatrix<T>, s: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    h.hadamard(&s.transpose())
}

/// Probability that all photons exit in the subset: `perm(H ⊙ Sᵀ)`.
pub fn bunching_probability<T: Real>(inst: &BunchingInstance<T>) -> Result<T> {
    let h = h_matrix(inst)?;
    real_probability(permanent(&bunching_kernel(&h, inst.gram.matrix())?)?)
}

/// Single-output-mode shortcut `Π_j |U_kj|² · perm(S)`.
pub fn single_mode_bunching<T: Real>(inst: &BunchingInstance<T>) -> Result<T> {
    if inst.subset.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "single-mode bunching needs |K| = 1, got {}",
            inst.subset.len()
        )));
    }
    let k = inst.subset.modes()[0];
    let u = inst.interferometer.matrix();
    let weight = (0..inst.photon_count()).fold(T::one(), |acc, j| acc * u[(k, j)].norm_sqr());
    real_probability(permanent(inst.gram.matrix())? * weight)
}

/// Fermionic counterpart `det(H ⊙ Sᵀ)`.
pub fn fermionic_bunching_probability<T: Real>(inst: &BunchingInstance<T>) -> Result<T> {
    let h = h_matrix(inst)?;
    real_probability(determinant(&bunching_kernel(&h, inst.gram.matrix())?)?)
}

fn check_outcome<T: Real>(inst: &BunchingInstance<T>, outcome: &OutcomeSpec) -> Result<()> {
    let m = inst.interferometer.mode_count();
    if outcome.occupation().len() != m {
        return Err(Error::DimensionMismatch {
            expected: format!("occupation vector of length {m}"),
            found: format!("{}", outcome.occupation().len()),
        });
    }
    if outcome.photon_count() != inst.photon_count() {
        return Err(Error::PhotonCountMismatch {
            expected: inst.photon_count(),
            found: outcome.photon_count(),
        });
    }
    Ok(())
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Σ_ρ perm(W_ρ) with `(W_ρ)_jk = U_{d_j,k} · S_{ρ_j,k} · conj(U_{d_j,ρ_j})`.
fn event_sum_over_permutations<T: Real>(u: &ComplexMatrix<T>, s: &ComplexMatrix<T>, d: &[usize]) -> Result<Complex<T>> {
    let n = d.len();
    let mut acc = CompensatedSum::new();
    let mut w = ComplexMatrix::zeros(n, n);
    let mut err = None;
    for_each_permutation(n, |rho| {
        if err.is_some() {
            return;
        }
        for j in 0..n {
            let left = u[(d[j], rho[j])].conj();
            for k in 0..n {
                w[(j, k)] = u[(d[j], k)] * s[(rho[j], k)] * left;
            }
        }
        match permanent(&w) {
            Ok(p) => acc.add(p),
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(acc.value()),
    }
}

/// Σ_b |perm(M_b)|² over internal basis labels `b ∈ [r]^n`, `(M_b)_jk = U_{d_j,k} F_{b_j,k}`,
/// where `S = F† F`.
fn event_sum_over_internal_labels<T: Real>(u: &ComplexMatrix<T>, factor: &[Vec<Complex<T>>], r: usize, d: &[usize]) -> Result<T> {
    let n = d.len();
    let mut labels = vec![0usize; n];
    let mut total = T::zero();
    let mut comp = T::zero();
    let mut w = ComplexMatrix::zeros(n, n);
    loop {
        for j in 0..n {
            for k in 0..n {
                w[(j, k)] = u[(d[j], k)] * factor[k][labels[j]];
            }
        }
        let term = permanent(&w)?.norm_sqr();
        let y = term - comp;
        let t = total + y;
        comp = (t - total) - y;
        total = t;

        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(total);
            }
            labels[pos] += 1;
            if labels[pos] < r {
                break;
            }
            labels[pos] = 0;
            pos += 1;
        }
    }
}

/// Probability of output occupation `outcome`.
///
/// Evaluates the double sum over permutations `σ, ρ` of
/// `Π_j U_{d_j,σ_j} conj(U_{d_j,ρ_j}) S_{ρ_j,σ_j}` divided by `μ(s)`. The
/// `σ` sum is a permanent, leaving `n!` permanents. When the states have
/// internal rank `r` with `r^n < n!`, the equivalent sum of `r^n` squared
/// permanents over a rank factor of `S` is used instead.
pub fn event_probability<T: Real>(inst: &BunchingInstance<T>, outcome: &OutcomeSpec) -> Result<T> {
    let plan = EventPlan::new(inst)?;
    plan.probability(inst, outcome)
}

/// Precomputed choice of evaluation route for repeated event probabilities.
struct EventPlan<T: Real> {
    factor: Option<(Vec<Vec<Complex<T>>>, usize)>,
}

impl<T: Real> EventPlan<T> {
    fn new(inst: &BunchingInstance<T>) -> Result<Self> {
        let n = inst.photon_count();
        if n > EVENT_PHOTON_LIMIT {
            return Err(Error::SizeLimit {
                what: "photon count",
                size: n,
                limit: EVENT_PHOTON_LIMIT,
            });
        }
        let states = states_from_gram(&inst.gram)?;
        let r = states.internal_dim();
        let labels = (r as f64).powi(n as i32);
        let perms = factorial::<f64>(n);
        let factor = if labels < perms {
            Some((states.vectors().to_vec(), r))
        } else {
            None
        };
        Ok(Self { factor })
    }

    fn probability(&self, inst: &BunchingInstance<T>, outcome: &OutcomeSpec) -> Result<T> {
        check_outcome(inst, outcome)?;
        let d = outcome.assignment();
        let u = inst.interferometer.matrix();
        let mu = outcome.multiplicity::<T>();
        let total = match &self.factor {
            Some((f, r)) => Complex::new(event_sum_over_internal_labels(u, f, *r, &d)?, T::zero()),
            None => event_sum_over_permutations(u, inst.gram.matrix(), &d)?,
        };
        real_probability(total / mu)
    }
}

/// Literal double sum over `σ, ρ ∈ S_n`; reference implementation for `n <= 5`.
pub fn event_probability_double_sum<T: Real>(inst: &BunchingInstance<T>, outcome: &OutcomeSpec) -> Result<T> {
    check_outcome(inst, outcome)?;
    let n = inst.photon_count();
    if n > DOUBLE_SUM_PHOTON_LIMIT {
        return Err(Error::SizeLimit {
            what: "photon count",
            size: n,
            limit: DOUBLE_SUM_PHOTON_LIMIT,
        });
    }
    let d = outcome.assignment();
    let u = inst.interferometer.matrix();
    let s = inst.gram.matrix();
    let mut perms = Vec::new();
    for_each_permutation(n, |p| perms.push(p.to_vec()));
    let mut acc = CompensatedSum::new();
    for sigma in &perms {
        for rho in &perms {
            let mut term = Complex::new(T::one(), T::zero());
            for j in 0..n {
                term = term * u[(d[j], sigma[j])] * u[(d[j], rho[j])].conj() * s[(rho[j], sigma[j])];
            }
            acc.add(term);
        }
    }
    real_probability(acc.value() / outcome.multiplicity::<T>())
}

/// Photon-number distribution `(j, n - j)` over a two-mode subset, conditioned on full bunching.
///
/// Entry `j` is the probability of `j` photons in the lower subset mode and
/// `n - j` in the upper one, divided by the bunching probability.
pub fn conditional_bunched_distribution<T: Real>(inst: &BunchingInstance<T>) -> Result<Vec<(usize, T)>> {
    Ok(bunched_distribution(inst)?
        .rows
        .into_iter()
        .map(|(j, cond, _)| (j, cond))
        .collect())
}

/// Absolute and conditional two-mode photon-number distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BunchedDistribution<T> {
    /// Total probability of all photons in the subset.
    pub bunching_probability: T,
    /// `(j, conditional, absolute)` for `j = 0..=n`.
    pub rows: Vec<(usize, T, T)>,
}

pub fn bunched_distribution<T: Real>(inst: &BunchingInstance<T>) -> Result<BunchedDistribution<T>> {
    if inst.subset.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "two-mode distribution needs |K| = 2, got {}",
            inst.subset.len()
        )));
    }
    let n = inst.photon_count();
    let m = inst.interferometer.mode_count();
    let (k0, k1) = (inst.subset.modes()[0], inst.subset.modes()[1]);
    let p_bunch = bunching_probability(inst)?;
    if !(p_bunch > T::epsilon()) {
        return Err(Error::UndefinedConditional(p_bunch.to_f64().unwrap_or(f64::NAN)));
    }
    let plan = EventPlan::new(inst)?;
    let mut rows = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let mut occ = vec![0; m];
        occ[k0] = j;
        occ[k1] = n - j;
        let p = plan.probability(inst, &OutcomeSpec::new(occ))?;
        rows.push((j, p / p_bunch, p));
    }
    Ok(BunchedDistribution {
        bunching_probability: p_bunch,
        rows,
    })
}

/// Full output distribution by explicit expansion of the creation operators
/// over (spatial mode, internal basis index) pairs.
///
/// Independent of the permanent formulas; limited to `n <= 5` photons and
/// `m <= 7` modes.
pub fn fock_oracle_distribution<T: Real>(
    u: &ComplexMatrix<T>,
    states: &InternalStateSet<T>,
) -> Result<HashMap<Vec<usize>, T>> {
    let m = u.square_dim()?;
    let n = states.photon_count();
    let r = states.internal_dim();
    if n > FOCK_PHOTON_LIMIT {
        return Err(Error::SizeLimit {
            what: "photon count",
            size: n,
            limit: FOCK_PHOTON_LIMIT,
        });
    }
    if m > FOCK_MODE_LIMIT {
        return Err(Error::SizeLimit {
            what: "mode count",
            size: m,
            limit: FOCK_MODE_LIMIT,
        });
    }
    if n > m {
        return Err(Error::DimensionMismatch {
            expected: format!("at most {m} photons"),
            found: format!("{n}"),
        });
    }
    // A monomial is the sorted list of (mode * r + internal) labels of its creation operators.
    let mut terms: HashMap<Vec<u16>, Complex<T>> = HashMap::new();
    terms.insert(Vec::new(), Complex::new(T::one(), T::zero()));
    for j in 0..n {
        let mut next: HashMap<Vec<u16>, Complex<T>> = HashMap::with_capacity(terms.len() * m * r);
        for (key, amp) in &terms {
            for k in 0..m {
                let uk = u[(k, j)];
                if uk.norm_sqr() == T::zero() {
                    continue;
                }
                for (b, phi) in states.state(j).iter().enumerate() {
                    let c = uk * phi;
                    if c.norm_sqr() == T::zero() {
                        continue;
                    }
                    let label = (k * r + b) as u16;
                    let mut nk = key.clone();
                    let pos = nk.partition_point(|&x| x <= label);
                    nk.insert(pos, label);
                    *next.entry(nk).or_insert_with(czero) += amp * c;
                }
            }
        }
        terms = next;
    }
    let mut dist: HashMap<Vec<usize>, T> = HashMap::new();
    for (key, amp) in terms {
        // ⟨0| Π a Π a† |0⟩ = Π (occupation of each label)!
        let mut norm = T::one();
        let mut run = 0usize;
        for (i, label) in key.iter().enumerate() {
            run = if i > 0 && key[i - 1] == *label { run + 1 } else { 1 };
            norm *= T::from_count(run);
        }
        let mut occ = vec![0usize; m];
        for &label in &key {
            occ[label as usize / r] += 1;
        }
        *dist.entry(occ).or_insert_with(T::zero) += amp.norm_sqr() * norm;
    }
    Ok(dist)
}

pub fn fock_oracle_event_probability<T: Real>(
    u: &ComplexMatrix<T>,
    states: &InternalStateSet<T>,
    outcome: &OutcomeSpec,
) -> Result<T> {
    let m = u.square_dim()?;
    if outcome.occupation().len() != m {
        return Err(Error::DimensionMismatch {
            expected: format!("occupation vector of length {m}"),
            found: format!("{}", outcome.occupation().len()),
        });
    }
    if outcome.photon_count() != states.photon_count() {
        return Err(Error::PhotonCountMismatch {
            expected: states.photon_count(),
            found: outcome.photon_count(),
        });
    }
    let dist = fock_oracle_distribution(u, states)?;
    Ok(dist.get(outcome.occupation()).copied().unwrap_or(T::zero()))
}

/// `perm(A) + δ Σ_ij Δ_ij perm(A(i,j))`, the first-order expansion of `perm(A + δΔ)`.
pub fn first_order_perturbation_predictor<T: Real>(
    a: &ComplexMatrix<T>,
    delta_dir: &ComplexMatrix<T>,
    delta: T,
) -> Result<Complex<T>> {
    let n = a.square_dim()?;
    if delta_dir.rows() != n || delta_dir.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", delta_dir.rows(), delta_dir.cols()),
        });
    }
    let base = permanent(a)?;
    if delta == T::zero() {
        return Ok(base);
    }
    let mut slope = CompensatedSum::new();
    for i in 0..n {
        for j in 0..n {
            let d = delta_dir[(i, j)];
            if d.norm_sqr() == T::zero() {
                continue;
            }
            slope.add(d * permanent(&a.minor(i, j)?)?);
        }
    }
    Ok(base + slope.value() * delta)
}

/// Direction `δS_ij = -i (x_i - x_j)` from rotating photon `i`'s state by `x_i`
/// out of a common state.
pub fn stability_direction<T: Real>(x: &[T]) -> ComplexMatrix<T> {
    let n = x.len();
    ComplexMatrix::from_fn(n, n, |i, j| Complex::new(T::zero(), -(x[i] - x[j])))
}

fn perturbed_bunching<T: Real>(a: &ComplexMatrix<T>, dir: &ComplexMatrix<T>, delta: T) -> Result<Complex<T>> {
    let n = a.rows();
    let s = ComplexMatrix::ones(n).add(&dir.scale(delta))?;
    permanent(&bunching_kernel(a, &s)?)
}

/// Central-difference slope of `δ ↦ perm(A ⊙ (𝔼 + δ δS(x))ᵀ)` at 0 with step `h`.
pub fn central_difference_slope<T: Real>(a: &ComplexMatrix<T>, x: &[T], h: T) -> Result<T> {
    let n = a.square_dim()?;
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: format!("{n} rotation parameters"),
            found: format!("{}", x.len()),
        });
    }
    let dir = stability_direction(x);
    let plus = perturbed_bunching(a, &dir, h)?;
    let minus = perturbed_bunching(a, &dir, -h)?;
    Ok(((plus - minus) / (h + h)).re)
}

/// First derivative of the bunching permanent along the phase-rotation
/// direction around `S = 𝔼`, by Richardson-extrapolated central differences
/// (steps `1e-4` and `5e-5`).
pub fn stability_direction_check<T: Real>(a: &ComplexMatrix<T>, x: &[T]) -> Result<T> {
    if x.iter().all(|&v| v == T::zero()) {
        a.square_dim()?;
        return Ok(T::zero());
    }
    let h = T::lit(1e-4);
    let coarse = central_difference_slope(a, x, h)?;
    let fine = central_difference_slope(a, x, h * T::lit(0.5))?;
    Ok((fine * T::lit(4.0) - coarse) / T::lit(3.0))
}
