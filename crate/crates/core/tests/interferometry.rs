use boson_bunching::circuits::{
    beam_splitter_unitary, default_eta, drury_matrices, embed_factor_into_unitary, family_circuit, haar_random_unitary,
    random_rank_r_gram, BeamSplitterSpec,
};
use boson_bunching::distinguishability::{gram_from_states, random_unit_states, violation_family_states};
use boson_bunching::interferometry::{
    bunched_distribution, bunching_probability, central_difference_slope, conditional_bunched_distribution,
    event_probability, event_probability_double_sum, fermionic_bunching_probability, first_order_perturbation_predictor,
    fock_oracle_distribution, fock_oracle_event_probability, h_matrix, single_mode_bunching, stability_direction_check,
};
use boson_bunching::linalg::determinant;
use boson_bunching::permanent::permanent;
use boson_bunching::rng::substream;
use boson_bunching::{BunchingInstance, Complex, Gram, Instance, Matrix, Network, OutcomeSpec, OutputSubset, C64};
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

fn splitter() -> Network {
    beam_splitter_unitary(2, &BeamSplitterSpec::new(0, 1, 0.5).unwrap()).unwrap()
}

fn random_instance(seed: u64, n: usize, m: usize, k: usize, r: usize) -> (Instance, boson_bunching::States) {
    let mut rng = substream(seed, 0);
    let u = haar_random_unitary::<f64, _>(m, &mut rng).unwrap();
    let states = random_unit_states::<f64, _>(n, r, &mut rng).unwrap();
    let inst = BunchingInstance::from_states(u, OutputSubset::first(k, m).unwrap(), &states).unwrap();
    (inst, states)
}

#[test]
fn h_matrix_examples() {
    let inst = BunchingInstance::new(splitter(), OutputSubset::new(vec![0, 1], 2).unwrap(), Gram::indistinguishable(2)).unwrap();
    assert!(h_matrix(&inst).unwrap().max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-15);

    let inst = inst.with_gram(Gram::indistinguishable(2)).unwrap();
    let single = BunchingInstance::new(inst.interferometer.clone(), OutputSubset::new(vec![0], 2).unwrap(), inst.gram).unwrap();
    assert!(h_matrix(&single).unwrap().max_abs_diff(&Matrix::ones(2).scale(0.5)).unwrap() < 1e-15);

    let (a, m) = drury_matrices::<f64>();
    let (u, k, _) = embed_factor_into_unitary(&m).unwrap();
    let h = h_matrix(&BunchingInstance::new(u, k, a.clone()).unwrap()).unwrap();
    assert!(h.max_abs_diff(&a.matrix().scale(2.0 / 7.0)).unwrap() < 1e-10);
}

#[test]
fn bunching_examples() {
    let hom = BunchingInstance::new(splitter(), OutputSubset::new(vec![0], 2).unwrap(), Gram::indistinguishable(2)).unwrap();
    assert!((bunching_probability(&hom).unwrap() - 0.5).abs() < 1e-15);

    let fam = family_circuit::<f64>(7, default_eta(7)).unwrap();
    let bos = bunching_probability(&fam.instance(Gram::indistinguishable(7)).unwrap()).unwrap();
    let star = bunching_probability(&fam.instance(gram_from_states(&violation_family_states(7).unwrap())).unwrap()).unwrap();
    assert!((bos - 7e-3).abs() < 0.5e-3, "{bos}");
    assert!((star - 7.5e-3).abs() < 0.25e-3, "{star}");
}

#[test]
fn single_mode_examples() {
    let dist = BunchingInstance::new(splitter(), OutputSubset::new(vec![1], 2).unwrap(), Gram::distinguishable(2)).unwrap();
    assert!((single_mode_bunching(&dist).unwrap() - 0.25).abs() < 1e-15);
    let hom = dist.with_gram(Gram::indistinguishable(2)).unwrap();
    assert!((single_mode_bunching(&hom).unwrap() - 0.5).abs() < 1e-15);

    for seed in 0..20 {
        let (inst, _) = random_instance(seed, 4, 5, 1, 2);
        let a = single_mode_bunching(&inst).unwrap();
        let b = bunching_probability(&inst).unwrap();
        assert!((a - b).abs() < 1e-12 * b.max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn fermionic_examples() {
    let (inst, _) = random_instance(3, 4, 6, 3, 2);
    let bos = inst.with_gram(Gram::indistinguishable(4)).unwrap();
    let det_h = determinant(&h_matrix(&inst).unwrap()).unwrap().re;
    assert!((fermionic_bunching_probability(&bos).unwrap() - det_h).abs() < 1e-14);

    let (inst, _) = random_instance(4, 5, 6, 3, 3);
    let det_s = determinant(inst.gram.matrix()).unwrap().re;
    let det_h = determinant(&h_matrix(&inst).unwrap()).unwrap().re;
    assert!(fermionic_bunching_probability(&inst).unwrap() >= det_h * det_s - 1e-10);

    let all = BunchingInstance::new(inst.interferometer.clone(), OutputSubset::first(6, 6).unwrap(), inst.gram.clone()).unwrap();
    assert!((fermionic_bunching_probability(&all).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn events_inside_the_subset_sum_to_bunching() {
    for (seed, n, m, k) in [(1, 3, 5, 2), (2, 4, 5, 3), (3, 5, 6, 2), (4, 6, 7, 3), (5, 7, 7, 2)] {
        let (inst, _) = random_instance(seed, n, m, k, 2);
        let mut total = 0.0;
        for sub in OutcomeSpec::enumerate(n, k) {
            let mut occ = vec![0; m];
            for (i, &s) in sub.occupation().iter().enumerate() {
                occ[inst.subset.modes()[i]] = s;
            }
            total += event_probability(&inst, &OutcomeSpec::new(occ)).unwrap();
        }
        let p = bunching_probability(&inst).unwrap();
        assert!((total - p).abs() < 1e-9, "n = {n}: {total} vs {p}");
    }
}

#[test]
fn hom_events() {
    let hom = BunchingInstance::new(splitter(), OutputSubset::new(vec![0], 2).unwrap(), Gram::indistinguishable(2)).unwrap();
    assert!(event_probability(&hom, &OutcomeSpec::new(vec![1, 1])).unwrap().abs() < 1e-15);
    let dist = hom.with_gram(Gram::distinguishable(2)).unwrap();
    assert!((event_probability(&dist, &OutcomeSpec::new(vec![1, 1])).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn family_distribution_examples() {
    let fam = family_circuit::<f64>(7, default_eta(7)).unwrap();
    let bos = conditional_bunched_distribution(&fam.instance(Gram::indistinguishable(7)).unwrap()).unwrap();
    for &(j, p) in &bos {
        if j == 1 || j == 6 {
            assert!((p - 0.5).abs() < 1e-9);
        } else {
            assert!(p.abs() < 1e-10);
        }
    }
    let grams = [
        Gram::indistinguishable(7),
        Gram::distinguishable(7),
        gram_from_states(&violation_family_states(7).unwrap()),
    ];
    for g in grams {
        let d = bunched_distribution(&fam.instance(g).unwrap()).unwrap();
        let total: f64 = d.rows.iter().map(|r| r.1).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for j in 0..=7 {
            assert!((d.rows[j].1 - d.rows[7 - j].1).abs() < 1e-12);
        }
    }
}

#[test]
fn star_distribution_support_is_one_to_six() {
    let fam = family_circuit::<f64>(7, default_eta(7)).unwrap();
    let star = conditional_bunched_distribution(&fam.instance(gram_from_states(&violation_family_states(7).unwrap())).unwrap()).unwrap();
    for &(j, p) in &star {
        if (1..=6).contains(&j) {
            assert!(p > 1e-3);
        } else {
            assert!(p < 1e-12);
        }
    }
    // Bell shape: increasing up to the middle.
    assert!(star[1].1 < star[2].1 && star[2].1 < star[3].1);
}

#[test]
fn distribution_needs_two_modes_and_positive_bunching() {
    let (inst, _) = random_instance(9, 3, 4, 1, 2);
    assert!(conditional_bunched_distribution(&inst).is_err());
}

#[test]
fn oracle_matches_indistinguishable_formula() {
    let mut rng = substream(77, 0);
    let u = haar_random_unitary::<f64, _>(5, &mut rng).unwrap();
    let same = boson_bunching::States::new(vec![vec![c(1.0, 0.0)]; 3]).unwrap();
    for o in OutcomeSpec::enumerate(3, 5) {
        let d = o.assignment();
        let sub = u.matrix().submatrix(&d, &[0, 1, 2]).unwrap();
        let expected = permanent(&sub).unwrap().norm_sqr() / o.multiplicity::<f64>();
        let got = fock_oracle_event_probability(u.matrix(), &same, &o).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }
}

#[test]
fn oracle_size_limits() {
    let u = Matrix::identity(8);
    let s = boson_bunching::States::new(vec![vec![c(1.0, 0.0)]; 2]).unwrap();
    assert!(fock_oracle_distribution(&u, &s).is_err());
}

#[test]
fn rank_factor_and_permutation_routes_agree() {
    // n = 6 with rank 2 takes the internal-label route, rank 6 the permutation route.
    for r in [2, 6] {
        let (inst, _) = random_instance(10 + r as u64, 6, 6, 2, r);
        let p = event_probability(&inst, &OutcomeSpec::new(vec![2, 1, 0, 1, 1, 1])).unwrap();
        let total: f64 = OutcomeSpec::enumerate(6, 6).iter().map(|o| event_probability(&inst, o).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9, "r = {r}: total {total}");
        assert!(p >= 0.0);
    }
}

#[test]
fn predictor_is_second_order_accurate() {
    let mut rng = substream(5, 0);
    let mut g = || c(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
    let a = Matrix::from_fn(5, 5, |_, _| g());
    let dir = Matrix::from_fn(5, 5, |_, _| g());
    let err = |delta: f64| {
        let exact = permanent(&a.add(&dir.scale(delta)).unwrap()).unwrap();
        (exact - first_order_perturbation_predictor(&a, &dir, delta).unwrap()).norm()
    };
    let ratio = err(1e-3) / err(5e-4);
    assert!((ratio - 4.0).abs() < 0.05, "error ratio {ratio}");
    assert_eq!(first_order_perturbation_predictor(&a, &dir, 0.0).unwrap(), permanent(&a).unwrap());
}

#[test]
fn stability_examples() {
    let fam = family_circuit::<f64>(7, default_eta(7)).unwrap();
    let h = h_matrix(&fam.instance(Gram::indistinguishable(7)).unwrap()).unwrap();
    assert_eq!(stability_direction_check(&h, &[0.0; 7]).unwrap(), 0.0);
    let perm_h = permanent(&h).unwrap().re;
    let mut rng = substream(6, 0);
    for _ in 0..10 {
        let x: Vec<f64> = (0..7).map(|_| rng.sample(StandardNormal)).collect();
        assert!(stability_direction_check(&h, &x).unwrap().abs() / perm_h <= 1e-7);
    }
    // Random unit-diagonal PSD A (n = 5) with raw central differences.
    for seed in 0..10 {
        let mut rng = substream(100 + seed, 0);
        let a = random_rank_r_gram::<f64, _>(5, 3, &mut rng).unwrap().into_matrix();
        let pa = permanent(&a).unwrap().re;
        let x: Vec<f64> = (0..5).map(|_| rng.sample(StandardNormal)).collect();
        for h in [1e-4, 1e-5] {
            assert!(central_difference_slope(&a, &x, h).unwrap().abs() / pa <= 1e-7);
        }
        assert!(stability_direction_check(&a, &x).unwrap().abs() / pa <= 1e-7);
    }
}

#[test]
fn indistinguishable_bunching_is_perm_h() {
    for seed in 0..10 {
        let (inst, _) = random_instance(seed, 5, 7, 3, 1);
        let bos = inst.with_gram(Gram::indistinguishable(5)).unwrap();
        let p = bunching_probability(&bos).unwrap();
        let ph = permanent(&h_matrix(&bos).unwrap()).unwrap().re;
        assert!((p - ph).abs() < 1e-12);
    }
}

#[test]
fn single_precision_bunching() {
    let fam = family_circuit::<f32>(7, 2.0 / 7.0).unwrap();
    let p = bunching_probability(&fam.instance(boson_bunching::GramMatrix::<f32>::indistinguishable(7)).unwrap()).unwrap();
    assert!((p as f64 - 0.0069941703104756).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn event_matches_oracles(seed in any::<u64>(), n in 1usize..=4, extra in 0usize..=1, r in 1usize..=3) {
        let m = n + extra;
        let (inst, states) = random_instance(seed, n, m, 1, r);
        let oracle = fock_oracle_distribution(inst.interferometer.matrix(), &states).unwrap();
        let mut total = 0.0;
        for o in OutcomeSpec::enumerate(n, m) {
            let p = event_probability(&inst, &o).unwrap();
            let q = oracle.get(o.occupation()).copied().unwrap_or(0.0);
            let d = event_probability_double_sum(&inst, &o).unwrap();
            prop_assert!((p - q).abs() < 1e-9 && (p - d).abs() < 1e-9);
            total += p;
        }
        prop_assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn probabilities_in_unit_interval(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=3, r in 1usize..=6) {
        let (inst, _) = random_instance(seed, n, 7, k, r);
        let p = bunching_probability(&inst).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn fermionic_inequality(seed in any::<u64>(), n in 1usize..=6, k in 1usize..=6, r in 1usize..=6) {
        let (inst, _) = random_instance(seed, n, 7, k, r.min(n));
        let bos = inst.with_gram(Gram::indistinguishable(n)).unwrap();
        prop_assert!(fermionic_bunching_probability(&inst).unwrap() >= fermionic_bunching_probability(&bos).unwrap() - 1e-10);
    }

    #[test]
    fn gauge_invariance(seed in any::<u64>(), n in 2usize..=4, phases in proptest::collection::vec(-3.2f64..3.2, 4)) {
        let (inst, _) = random_instance(seed, n, 5, 2, 2);
        let gauged = inst.with_gram(inst.gram.gauge_transform(&phases[..n]).unwrap()).unwrap();
        prop_assert!((bunching_probability(&inst).unwrap() - bunching_probability(&gauged).unwrap()).abs() < 1e-10);
        for o in OutcomeSpec::enumerate(n, 5) {
            let a = event_probability(&inst, &o).unwrap();
            let b = event_probability(&gauged, &o).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn conditional_distribution_is_normalized(seed in any::<u64>(), n in 2usize..=5, r in 1usize..=3) {
        let (inst, _) = random_instance(seed, n, 6, 2, r);
        if bunching_probability(&inst).unwrap() > 1e-12 {
            let total: f64 = conditional_bunched_distribution(&inst).unwrap().iter().map(|p| p.1).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_rotated_states_keep_probabilities(seed in any::<u64>(), n in 1usize..=4) {
        let (inst, states) = random_instance(seed, n, 5, 2, 2);
        let phases: Vec<f64> = (0..n).map(|j| 0.7 * j as f64 + 0.1).collect();
        let rotated = BunchingInstance::from_states(inst.interferometer.clone(), inst.subset.clone(), &states.with_phases(&phases).unwrap()).unwrap();
        prop_assert!((bunching_probability(&inst).unwrap() - bunching_probability(&rotated).unwrap()).abs() < 1e-10);
    }
}
