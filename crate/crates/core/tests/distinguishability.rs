use boson_bunching::circuits::drury_matrices;
use boson_bunching::distinguishability::{
    gram_from_states, interpolated_gram, perturb_states, random_unit_states, star_states, states_from_gram,
    symmetric_component, violation_family_states,
};
use boson_bunching::permanent::permanent;
use boson_bunching::scalar::{factorial, root_of_unity};
use boson_bunching::{Complex, Gram, Matrix, States, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

#[test]
fn gram_of_identical_and_orthogonal_states() {
    let v = vec![c(0.6, 0.0), c(0.0, 0.8)];
    let same = States::new(vec![v.clone(); 4]).unwrap();
    assert!(gram_from_states(&same).matrix().max_abs_diff(&Matrix::ones(4)).unwrap() < 1e-15);
    let basis = States::new((0..3).map(|i| (0..3).map(|j| c((i == j) as u8 as f64, 0.0)).collect()).collect()).unwrap();
    assert_eq!(gram_from_states(&basis).matrix(), &Matrix::identity(3));
}

#[test]
fn drury_factor_columns_give_45_over_7_factorial() {
    let (_, m) = drury_matrices::<f64>();
    let states = States::from_columns(&m).unwrap();
    let d = symmetric_component(&gram_from_states(&states)).unwrap();
    assert!((d - 45.0 / factorial::<f64>(7)).abs() < 1e-12 * d);
}

#[test]
fn states_from_gram_examples() {
    let basis = states_from_gram(&Gram::distinguishable(3)).unwrap();
    assert_eq!(basis.photon_count(), 3);
    assert!(gram_from_states(&basis).matrix().max_abs_diff(&Matrix::identity(3)).unwrap() < 1e-12);

    let ones = states_from_gram(&Gram::indistinguishable(4)).unwrap();
    assert_eq!(ones.internal_dim(), 1);
    for j in 1..4 {
        assert!((ones.state(j)[0] - ones.state(0)[0]).norm() < 1e-12);
    }

    let (a, _) = drury_matrices::<f64>();
    let f = states_from_gram(&a).unwrap();
    assert_eq!(f.internal_dim(), 2);
    assert!(gram_from_states(&f).matrix().max_abs_diff(a.matrix()).unwrap() < 1e-10);
}

#[test]
fn star_examples() {
    let one = star_states::<f64>(1).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((one.state(0)[0] - c(h, 0.0)).norm() < 1e-15 && (one.state(0)[1] - c(h, 0.0)).norm() < 1e-15);

    for q in [2, 5, 8] {
        let s = gram_from_states(&star_states::<f64>(q).unwrap());
        for i in 0..q {
            for j in 0..q {
                let expected = (c(1.0, 0.0) + root_of_unity::<f64>(q, j as i64 - i as i64)) * 0.5;
                assert!((s.matrix()[(i, j)] - expected).norm() < 1e-14);
            }
        }
    }
    // Five states equally spaced on the equator: consecutive overlaps all equal.
    let five = gram_from_states(&star_states::<f64>(5).unwrap());
    let first = five.matrix()[(0, 1)].norm();
    for i in 0..5 {
        assert!((five.matrix()[(i, (i + 1) % 5)].norm() - first).abs() < 1e-14);
    }
}

#[test]
fn family_of_four() {
    let s = violation_family_states::<f64>(4).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let expected = [[h, h], [h, -h], [0.0, 1.0], [1.0, 0.0]];
    for (j, e) in expected.iter().enumerate() {
        assert!((s.state(j)[0] - c(e[0], 0.0)).norm() < 1e-15);
        assert!((s.state(j)[1] - c(e[1], 0.0)).norm() < 1e-15);
    }
}

/// Drury's A and the family Gram matrix differ only by the order of the photons.
#[test]
fn family_gram_is_drury_matrix_reordered() {
    let (a, _) = drury_matrices::<f64>();
    let s = gram_from_states(&violation_family_states::<f64>(7).unwrap());
    // Family order [star_0..star_4, V, H]; Drury order [H, V, star_0..star_4].
    let reordered = s.matrix().permute_symmetric(&[6, 5, 0, 1, 2, 3, 4]).unwrap();
    assert!(reordered.max_abs_diff(a.matrix()).unwrap() < 1e-14);
    // A gauge transform changes entries but not the permanent.
    let g = Gram::new(reordered).unwrap().gauge_transform(&[0.3, -1.2, 2.0, 0.1, 0.0, 0.7, -0.4]).unwrap();
    assert!(g.matrix().max_abs_diff(a.matrix()).unwrap() > 0.1);
    assert!((permanent(g.matrix()).unwrap() - permanent(a.matrix()).unwrap()).norm() < 1e-10);
}

#[test]
fn interpolation_corners() {
    assert!(interpolated_gram::<f64>(1.0, 0.0, 7).unwrap().matrix().max_abs_diff(&Matrix::ones(7)).unwrap() < 1e-15);
    assert!(interpolated_gram::<f64>(0.0, 1.0, 7).unwrap().matrix().max_abs_diff(&Matrix::identity(7)).unwrap() < 1e-15);
    let star = gram_from_states(&violation_family_states::<f64>(7).unwrap());
    assert!(interpolated_gram::<f64>(0.0, 0.0, 7).unwrap().matrix().max_abs_diff(star.matrix()).unwrap() < 1e-15);
    assert!(interpolated_gram::<f64>(0.7, 0.5, 7).is_err());
    assert!(interpolated_gram::<f64>(-0.1, 0.5, 7).is_err());
}

#[test]
fn interpolation_grid_is_valid() {
    for i in 0..=20 {
        for j in 0..=(20 - i) {
            let (x, y) = (i as f64 * 0.05, j as f64 * 0.05);
            interpolated_gram::<f64>(x, y, 7).unwrap_or_else(|e| panic!("({x}, {y}): {e}"));
        }
    }
}

#[test]
fn zero_noise_leaves_states_unchanged() {
    let s = violation_family_states::<f64>(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(perturb_states(&s, 0.0, &mut rng).unwrap(), s);
    assert!(perturb_states(&s, -0.1, &mut rng).is_err());
}

/// With std `ε/√2` on each real part, the complex noise amplitude has std `ε`;
/// at `ε = 0.135` the RMS component orthogonal to the original state is then
/// close to `ε/(1+ε²) ≈ 13.3%`.
#[test]
fn perturbation_magnitude() {
    let eps: f64 = 0.135;
    let s = violation_family_states::<f64>(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut acc = 0.0;
    let mut count = 0.0;
    for _ in 0..4000 {
        let p = perturb_states(&s, eps / 2f64.sqrt(), &mut rng).unwrap();
        for j in 0..7 {
            let overlap: C64 = s.state(j).iter().zip(p.state(j)).map(|(a, b)| a.conj() * b).sum();
            acc += 1.0 - overlap.norm_sqr();
            count += 1.0;
        }
        for v in p.vectors() {
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
    let rms = (acc / count).sqrt();
    let target = eps / (1.0 + eps * eps);
    assert!((rms - target).abs() < 0.05 * target, "rms = {rms}, target = {target}");
}

#[test]
fn symmetric_component_examples() {
    let f7 = factorial::<f64>(7);
    assert!((symmetric_component(&Gram::distinguishable(7)).unwrap() - 1.0 / f7).abs() < 1e-16);
    assert!((symmetric_component(&Gram::indistinguishable(7)).unwrap() - 1.0).abs() < 1e-12);
    let star = gram_from_states(&violation_family_states::<f64>(7).unwrap());
    assert!((symmetric_component(&star).unwrap() * f7 - 45.0).abs() < 1e-9);
}

#[test]
fn gram_validation() {
    assert!(Gram::new(Matrix::from_real_fn(2, 2, |i, j| if i == j { 1.0 } else { 2.0 })).is_err());
    assert!(Gram::new(Matrix::from_real_fn(2, 2, |i, _| 1.0 + i as f64)).is_err());
    assert!(Gram::new(Matrix::from_fn(2, 2, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.5) })).is_err());
    assert!(States::new(vec![vec![c(1.0, 1.0)]]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gram_round_trip(n in 1usize..=8, r in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = gram_from_states(&random_unit_states::<f64, _>(n, r, &mut rng).unwrap());
        let back = gram_from_states(&states_from_gram(&s).unwrap());
        prop_assert!(back.matrix().max_abs_diff(s.matrix()).unwrap() < 1e-8);
    }

    #[test]
    fn permanent_of_gram_is_between_one_and_factorial(n in 1usize..=8, r in 1usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = gram_from_states(&random_unit_states::<f64, _>(n, r, &mut rng).unwrap());
        let p = permanent(s.matrix()).unwrap();
        prop_assert!(p.im.abs() < 1e-9);
        prop_assert!(p.re >= 1.0 - 1e-9 && p.re <= factorial::<f64>(n) + 1e-9);
    }
}
