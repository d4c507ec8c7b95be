//! Reproduction drivers over `f64`: ratio scans and bounds, two-mode
//! distributions, perturbation Monte Carlo, counterexample search, the
//! ternary scan and the stability scan.
//!
//! Monte-Carlo samples draw from independent substreams keyed by
//! `(seed, point, sample)`; per-sample results are collected in index order
//! before any reduction, so output is independent of the worker count.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{
    default_eta, drury_matrices, embed_factor_into_unitary, family_circuit, haar_random_unitary, random_rank_r_gram,
    FamilyCircuit,
};
use crate::distinguishability::{gram_from_states, interpolated_gram, perturb_states, violation_family_states, GramMatrix};
use crate::error::{Error, Result};
use crate::interferometry::{bunched_distribution, bunching_kernel, bunching_probability, h_matrix, BunchingInstance, Interferometer, OutputSubset};
use crate::linalg::orthonormalize_columns;
use crate::matrix::ComplexMatrix;
use crate::permanent::permanent;
use crate::rng::{stream_id, substream};
use crate::scalar::factorial;
use crate::{Complex, Matrix};

pub const RATIO_SCAN_MAX_N: usize = 30;
pub const DISTRIBUTION_MAX_N: usize = 9;
pub const SEARCH_MAX_N: usize = 10;
/// Photon number of the perturbation experiments.
pub const PERTURBATION_N: usize = 7;
/// A search sample counts as a violation when its ratio exceeds `1 + VIOLATION_MARGIN`.
pub const VIOLATION_MARGIN: f64 = 1e-10;
/// Stability scans pass when `|dP/dδ| / perm(H)` stays below this.
pub const STABILITY_THRESHOLD: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<u64> for ParamValue {
    fn from(v: u64) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Real(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

/// One row of experiment output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub parameters: BTreeMap<String, ParamValue>,
    pub values: BTreeMap<String, f64>,
}

impl ExperimentRecord {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            parameters: BTreeMap::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Into<ParamValue>) -> Self {
        self.parameters.insert(key.to_string(), value.into());
        self
    }

    pub fn value(mut self, key: &str, value: f64) -> Self {
        self.values.insert(key.to_string(), value);
        self
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }

    /// Checks that every value is finite and every `P_*` value lies in `[0, 1]`.
    pub fn validate(&self) -> Result<()> {
        for (k, &v) in &self.values {
            if !v.is_finite() {
                return Err(Error::CheckFailed(format!("{}: {k} is not finite", self.experiment)));
            }
            if k.starts_with("P_") && !(0.0..=1.0).contains(&v) {
                return Err(Error::CheckFailed(format!("{}: {k} = {v} is not a probability", self.experiment)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioBound {
    pub n: usize,
    pub bound: f64,
}

impl RatioBound {
    pub fn new(n: usize) -> Result<Self> {
        require_family_size(n)?;
        Ok(Self { n, bound: ratio_bound(n) })
    }
}

/// `n/8 + (n-2)²/(32(n-1))`.
pub fn ratio_bound(n: usize) -> f64 {
    let n = n as f64;
    n / 8.0 + (n - 2.0).powi(2) / (32.0 * (n - 1.0))
}

/// `(q+2)/8 + q²/(32(q+1))`: ratio of the star lower bound to the closed-form
/// indistinguishable probability, `q = n - 2`.
pub fn bound_ratio_from_q(q: usize) -> f64 {
    let q = q as f64;
    (q + 2.0) / 8.0 + q * q / (32.0 * (q + 1.0))
}

fn require_family_size(n: usize) -> Result<()> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("family needs n >= 4, got {n}")));
    }
    Ok(())
}

/// `2(q+1)!/q^q · η²(1-η)^q`.
pub fn closed_form_bos_probability(n: usize, eta: f64) -> Result<f64> {
    require_family_size(n)?;
    let q = n - 2;
    Ok(2.0 * factorial::<f64>(q + 1) / (q as f64).powi(q as i32) * eta * eta * (1.0 - eta).powi(q as i32))
}

/// `η²(1-η)^q/(4q^q) · ((q+2)! + q² q!/4)`, a lower bound on the star-pattern bunching probability.
pub fn pd_lower_bound_probability(n: usize, eta: f64) -> Result<f64> {
    require_family_size(n)?;
    let q = n - 2;
    let qf = q as f64;
    let prefactor = eta * eta * (1.0 - eta).powi(q as i32) / (4.0 * qf.powi(q as i32));
    Ok(prefactor * (factorial::<f64>(q + 2) + qf * qf * factorial::<f64>(q) / 4.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationRatio {
    pub n: usize,
    pub eta: f64,
    pub r: f64,
    pub p_star: f64,
    pub p_bos: f64,
}

/// `R_n = P(S★)/P(𝔼)` through the family network.
pub fn violation_ratio(n: usize, eta: Option<f64>) -> Result<ViolationRatio> {
    require_family_size(n)?;
    let eta = eta.unwrap_or_else(|| default_eta(n));
    let fam = family_circuit::<f64>(n, eta)?;
    let p_star = bunching_probability(&fam.instance(gram_from_states(&violation_family_states(n)?))?)?;
    let p_bos = bunching_probability(&fam.instance(GramMatrix::indistinguishable(n))?)?;
    Ok(ViolationRatio {
        n,
        eta,
        r: p_star / p_bos,
        p_star,
        p_bos,
    })
}

/// One record per `n` with `P_bos`, `P_star`, `R` and `bound`; fails if any `R < bound`.
pub fn ratio_scan(n_min: usize, n_max: usize, eta: Option<f64>) -> Result<Vec<ExperimentRecord>> {
    if n_min < 4 || n_min > n_max || n_max > RATIO_SCAN_MAX_N {
        return Err(Error::InvalidParameter(format!(
            "need 4 <= n_min <= n_max <= {RATIO_SCAN_MAX_N}, got {n_min}..{n_max}"
        )));
    }
    let mut out = Vec::with_capacity(n_max - n_min + 1);
    for n in n_min..=n_max {
        let v = violation_ratio(n, eta)?;
        let bound = ratio_bound(n);
        if v.r < bound {
            return Err(Error::BoundViolated(format!("n = {n}: R = {} < bound {bound}", v.r)));
        }
        out.push(
            ExperimentRecord::new("ratio")
                .param("n", n)
                .param("eta", v.eta)
                .value("P_bos", v.p_bos)
                .value("P_star", v.p_star)
                .value("R", v.r)
                .value("bound", bound),
        );
    }
    Ok(out)
}

/// Input Gram matrix choices for the family network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    Star,
    Bos,
    Dist,
}

impl InputKind {
    pub fn name(self) -> &'static str {
        match self {
            InputKind::Star => "star",
            InputKind::Bos => "bos",
            InputKind::Dist => "dist",
        }
    }

    pub fn gram(self, n: usize) -> Result<GramMatrix<f64>> {
        Ok(match self {
            InputKind::Star => gram_from_states(&violation_family_states(n)?),
            InputKind::Bos => GramMatrix::indistinguishable(n),
            InputKind::Dist => GramMatrix::distinguishable(n),
        })
    }
}

impl std::str::FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(InputKind::Star),
            "bos" => Ok(InputKind::Bos),
            "dist" => Ok(InputKind::Dist),
            other => Err(Error::InvalidParameter(format!("unknown input kind {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionRow {
    pub j: usize,
    pub conditional_p: f64,
    pub absolute_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub n: usize,
    pub input: InputKind,
    pub eta: f64,
    pub bunching_probability: f64,
    pub rows: Vec<DistributionRow>,
}

/// Photon-number distribution `(j, n - j)` over `(0', 1')` for the family at `η = 2/n`.
pub fn distribution_experiment(n: usize, input: InputKind) -> Result<DistributionReport> {
    require_family_size(n)?;
    if n > DISTRIBUTION_MAX_N {
        return Err(Error::SizeLimit {
            what: "photon count",
            size: n,
            limit: DISTRIBUTION_MAX_N,
        });
    }
    let eta = default_eta(n);
    let fam = family_circuit::<f64>(n, eta)?;
    let dist = bunched_distribution(&fam.instance(input.gram(n)?)?)?;
    Ok(DistributionReport {
        n,
        input,
        eta,
        bunching_probability: dist.bunching_probability,
        rows: dist
            .rows
            .into_iter()
            .map(|(j, conditional_p, absolute_p)| DistributionRow {
                j,
                conditional_p,
                absolute_p,
            })
            .collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationTarget {
    States,
    Unitary,
}

impl PerturbationTarget {
    pub fn name(self) -> &'static str {
        match self {
            PerturbationTarget::States => "states",
            PerturbationTarget::Unitary => "unitary",
        }
    }
}

impl std::str::FromStr for PerturbationTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "states" => Ok(PerturbationTarget::States),
            "unitary" => Ok(PerturbationTarget::Unitary),
            other => Err(Error::InvalidParameter(format!("unknown perturbation target {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSummary {
    pub epsilon: f64,
    pub samples: usize,
    pub mean_r: f64,
    /// Sample standard deviation; 0 for a single sample.
    pub std_r: f64,
    pub frac_violating: f64,
}

impl PerturbationSummary {
    pub fn record(&self, target: PerturbationTarget, seed: u64) -> ExperimentRecord {
        ExperimentRecord::new("perturb")
            .param("target", target.name())
            .param("epsilon", self.epsilon)
            .param("samples", self.samples)
            .param("seed", seed)
            .value("mean_R", self.mean_r)
            .value("std_R", self.std_r)
            .value("frac_violating", self.frac_violating)
    }
}

/// Adds complex Gaussian noise (std `epsilon` on real and imaginary parts) to
/// every entry, then orthonormalizes the columns in order.
pub fn perturb_unitary<R: Rng + ?Sized>(u: &Interferometer<f64>, epsilon: f64, rng: &mut R) -> Result<Interferometer<f64>> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok(u.clone());
    }
    let base = u.matrix();
    let noisy = ComplexMatrix::from_fn(base.rows(), base.cols(), |_, _| Complex::new(0.0, 0.0));
    let mut noisy = noisy;
    // Column-major draw order: column j is perturbed as a unit.
    for j in 0..base.cols() {
        for i in 0..base.rows() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            noisy[(i, j)] = base[(i, j)] + Complex::new(re, im) * epsilon;
        }
    }
    Interferometer::new(orthonormalize_columns(&noisy)?)
}

fn perturbation_sample(
    fam: &FamilyCircuit<f64>,
    target: PerturbationTarget,
    epsilon: f64,
    p_bos: f64,
    star: &crate::States,
    rng: &mut impl Rng,
) -> Result<f64> {
    match target {
        PerturbationTarget::States => {
            let states = perturb_states(star, epsilon, rng)?;
            Ok(bunching_probability(&fam.instance(gram_from_states(&states))?)? / p_bos)
        }
        PerturbationTarget::Unitary => {
            let u = perturb_unitary(&fam.interferometer, epsilon, rng)?;
            let n = fam.n;
            let star_inst = BunchingInstance::new(u, fam.subset.clone(), gram_from_states(star))?;
            let bos_inst = star_inst.with_gram(GramMatrix::indistinguishable(n))?;
            Ok(bunching_probability(&star_inst)? / bunching_probability(&bos_inst)?)
        }
    }
}

/// Mean and spread of `R_7` under random perturbations of the states or of the network.
pub fn perturbation_sweep(
    target: PerturbationTarget,
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<PerturbationSummary>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("perturbation sweep needs samples >= 1".into()));
    }
    let n = PERTURBATION_N;
    let fam = family_circuit::<f64>(n, default_eta(n))?;
    let star = violation_family_states::<f64>(n)?;
    let p_bos = bunching_probability(&fam.instance(GramMatrix::indistinguishable(n))?)?;
    let mut out = Vec::with_capacity(epsilons.len());
    for (point, &epsilon) in epsilons.iter().enumerate() {
        let ratios: Vec<f64> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let mut rng = substream(seed, stream_id(point, s));
                perturbation_sample(&fam, target, epsilon, p_bos, &star, &mut rng)
            })
            .collect::<Result<_>>()?;
        let count = ratios.len() as f64;
        let mean = ratios.iter().sum::<f64>() / count;
        let std = if ratios.len() > 1 {
            (ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        let violating = ratios.iter().filter(|&&r| r > 1.0).count() as f64 / count;
        out.push(PerturbationSummary {
            epsilon,
            samples,
            mean_r: mean,
            std_r: std,
            frac_violating: violating,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub n: usize,
    pub rank: usize,
    /// Size of the monitored output subset (the first `subset_size` modes); defaults to `rank`.
    pub subset_size: Option<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Append the embedded Drury instance after the random samples (requires `n = 7`).
    pub plant_drury: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub n: usize,
    pub rank: usize,
    pub subset_size: usize,
    pub samples: usize,
    pub seed: u64,
    pub planted: bool,
    pub violations: usize,
    pub violating_indices: Vec<usize>,
    /// Largest `perm(H⊙Sᵀ)/perm(H)` seen; absent when nothing was evaluated.
    pub max_ratio: Option<f64>,
}

fn ratio_of(h: &Matrix, s: &GramMatrix<f64>) -> Result<f64> {
    let num = permanent(&bunching_kernel(h, s.matrix())?)?;
    let den = permanent(h)?;
    Ok(num.re / den.re)
}

/// Random search for `perm(H⊙Sᵀ) > perm(H)` over Haar networks and rank-`r` states.
pub fn counterexample_search(config: &SearchConfig) -> Result<SearchSummary> {
    let SearchConfig {
        n, rank, samples, seed, plant_drury, ..
    } = *config;
    if n == 0 || n > SEARCH_MAX_N {
        return Err(Error::SizeLimit {
            what: "search dimension",
            size: n,
            limit: SEARCH_MAX_N,
        });
    }
    if rank == 0 || rank > n {
        return Err(Error::InvalidParameter(format!("rank must satisfy 1 <= r <= n, got {rank}")));
    }
    let k = config.subset_size.unwrap_or(rank);
    let subset = OutputSubset::first(k, n)?;
    if plant_drury && n != 7 {
        return Err(Error::InvalidParameter("the planted Drury instance needs n = 7".into()));
    }
    let mut ratios: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = substream(seed, stream_id(0, s));
            let u = haar_random_unitary::<f64, _>(n, &mut rng)?;
            let g = random_rank_r_gram::<f64, _>(n, rank, &mut rng)?;
            let inst = BunchingInstance::new(u, subset.clone(), g)?;
            ratio_of(&h_matrix(&inst)?, &inst.gram)
        })
        .collect::<Result<_>>()?;
    if plant_drury {
        let (a, m) = drury_matrices::<f64>();
        let (u, planted_subset, _) = embed_factor_into_unitary(&m)?;
        let inst = BunchingInstance::new(u, planted_subset, a)?;
        ratios.push(ratio_of(&h_matrix(&inst)?, &inst.gram)?);
    }
    let violating_indices: Vec<usize> = ratios
        .iter()
        .enumerate()
        .filter(|(_, &r)| r > 1.0 + VIOLATION_MARGIN)
        .map(|(i, _)| i)
        .collect();
    Ok(SearchSummary {
        n,
        rank,
        subset_size: k,
        samples,
        seed,
        planted: plant_drury,
        violations: violating_indices.len(),
        violating_indices,
        max_ratio: ratios.iter().copied().reduce(f64::max),
    })
}

/// `P_7(S(x, y))/P_7(𝔼)` on a simplex grid with spacing `grid_step`.
///
/// Points are `(i·step, j·step)` with `x + y <= 1`; rows are ordered by `x`, then `y`.
pub fn ternary_scan(grid_step: f64) -> Result<Vec<ExperimentRecord>> {
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(Error::InvalidParameter(format!("grid step must lie in (0, 0.5], got {grid_step}")));
    }
    let n = PERTURBATION_N;
    let fam = family_circuit::<f64>(n, default_eta(n))?;
    let p_bos = bunching_probability(&fam.instance(GramMatrix::indistinguishable(n))?)?;
    let steps = (1.0 / grid_step + 1e-9).floor() as usize;
    let mut points = Vec::new();
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let x = i as f64 * grid_step;
            let y = j as f64 * grid_step;
            if x + y <= 1.0 + 1e-12 {
                points.push((x, y));
            }
        }
    }
    let ratio_at = |x: f64, y: f64| -> Result<f64> {
        Ok(bunching_probability(&fam.instance(interpolated_gram(x, y, n)?)?)? / p_bos)
    };
    let star = ratio_at(0.0, 0.0)?;
    let bos = ratio_at(1.0, 0.0)?;
    if !(star > 1.0) || (bos - 1.0).abs() > 1e-12 {
        return Err(Error::CheckFailed(format!(
            "ternary anchors: ratio(0, 0) = {star}, ratio(1, 0) = {bos}"
        )));
    }
    points
        .into_par_iter()
        .map(|(x, y)| {
            let ratio = ratio_at(x, y)?;
            Ok(ExperimentRecord::new("ternary")
                .param("x", x)
                .param("y", y)
                .value("ratio", ratio)
                .value("log10_ratio", ratio.log10()))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub perm_h: f64,
    /// `|dP/dδ|` per trial.
    pub derivatives: Vec<f64>,
    pub max_relative: f64,
    pub pass: bool,
}

/// First derivative of the family bunching probability along random
/// phase-rotation directions `δS_ij = -i(x_i - x_j)` around `S = 𝔼`.
pub fn stability_scan(n: usize, trials: usize, seed: u64) -> Result<StabilityReport> {
    require_family_size(n)?;
    let fam = family_circuit::<f64>(n, default_eta(n))?;
    let h = h_matrix(&fam.instance(GramMatrix::indistinguishable(n))?)?;
    let perm_h = permanent(&h)?.re;
    let derivatives: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, stream_id(0, t));
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            Ok(crate::interferometry::stability_direction_check(&h, &x)?.abs())
        })
        .collect::<Result<_>>()?;
    let max_relative = derivatives.iter().fold(0.0f64, |m, d| m.max(d / perm_h));
    Ok(StabilityReport {
        n,
        trials,
        seed,
        perm_h,
        derivatives,
        max_relative,
        pass: max_relative <= STABILITY_THRESHOLD,
    })
}

/// `perm(A⊙Aᵀ)`, `perm(A)` and their ratio for Drury's matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DruryReport {
    pub perm_hadamard: f64,
    pub perm_a: f64,
    pub ratio: f64,
}

/// Exact value of the Drury ratio.
pub const DRURY_RATIO: f64 = 1237.0 / 1152.0;

pub fn drury_report(naive: bool) -> Result<DruryReport> {
    let (a, _) = drury_matrices::<f64>();
    let a = a.into_matrix();
    let kernel = a.hadamard(&a.transpose())?;
    let perm = if naive {
        crate::permanent::permanent_naive::<f64>
    } else {
        crate::permanent::permanent_ryser::<f64>
    };
    let perm_hadamard = perm(&kernel)?.re;
    let perm_a = perm(&a)?.re;
    Ok(DruryReport {
        perm_hadamard,
        perm_a,
        ratio: perm_hadamard / perm_a,
    })
}
