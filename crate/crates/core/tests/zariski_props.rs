mod common;

use common::{check_brute_force, check_contract, check_sweep, models, random_class, random_effective};
use kstab_core::exact::{q, Rational};
use kstab_core::zariski::{decompose, sweep, volume};
use kstab_core::{build_blowup_plane, build_blowup_quadric, DivisorClass, SurfaceModel};
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

#[test]
fn zariski_contract_and_idempotence() {
    let mut rng = StdRng::seed_from_u64(7);
    for m in models() {
        for _ in 0..25 {
            let d = random_effective(&m, &mut rng);
            check_contract(&m, &d).unwrap();
        }
    }
}

#[test]
fn nef_volume_is_self_intersection() {
    for m in models() {
        let k = m.anticanonical();
        assert_eq!(volume(&m, &k), Rational::from_integer(m.degree()));
        assert_eq!(volume(&m, &DivisorClass::zero(m.basis())), Rational::ZERO);
    }
    let m = build_blowup_quadric(4).unwrap();
    assert_eq!(volume(&m, &m.anticanonical()), q(4, 1));
}

#[test]
fn non_pseudoeffective_has_zero_volume() {
    for m in models() {
        let d = m.anticanonical().neg();
        assert_eq!(volume(&m, &d), Rational::ZERO);
        assert_eq!(decompose(&m, &d).unwrap_err().code(), "not-pseudoeffective");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn volume_is_quadratically_homogeneous(
        which in 0usize..13,
        seed in any::<u64>(),
        t in (1i64..9, 1i64..5).prop_map(|(a, b)| q(a, b)),
    ) {
        let m = &models()[which];
        let d = random_effective(m, &mut StdRng::seed_from_u64(seed));
        prop_assert_eq!(volume(m, &d.scale(&t)), &(&t * &t) * &volume(m, &d));
    }
}

#[test]
fn sweeps_are_continuous_at_walls() {
    let mut rng = StdRng::seed_from_u64(11);
    for m in models() {
        for _ in 0..10 {
            let d = random_effective(&m, &mut rng).add(&m.anticanonical()).unwrap();
            let z = m.generator(rng.gen_range(0..m.generator_count())).clone();
            check_sweep(&m, &d, &z).unwrap();
        }
    }
}

#[test]
fn larger_curve_gives_smaller_sweep_integral() {
    // Z = Z' + C with C effective, so vol(D - vZ) <= vol(D - vZ') for every v
    let mut rng = StdRng::seed_from_u64(5);
    for m in models().into_iter().filter(|m| !m.negative_curves().is_empty()) {
        for _ in 0..10 {
            let d = random_effective(&m, &mut rng).add(&m.anticanonical()).unwrap();
            let n = m.negative_curves().len();
            let small = m.negative_curves()[rng.gen_range(0..n)].clone();
            let large = small.add(&m.negative_curves()[rng.gen_range(0..n)]).unwrap();
            let s_small = sweep(&m, &d, &small).unwrap().integral();
            let s_large = sweep(&m, &d, &large).unwrap().integral();
            assert!(s_large <= s_small, "{large} vs {small}");
        }
    }
}

#[test]
fn volume_matches_brute_force() {
    let mut rng = StdRng::seed_from_u64(2024);
    let small: Vec<SurfaceModel> = models().into_iter().filter(|m| m.negative_curves().len() <= 16).collect();
    assert!(small.len() >= 8);
    for m in &small {
        for _ in 0..50 {
            check_brute_force(m, &random_class(m, &mut rng)).unwrap();
        }
    }
}

#[test]
fn cubic_surface_case_two_point() {
    // u = 0, v = 1 on the cubic surface with Z = l - e1 - e2: middle chamber polynomial gives 6
    let m = build_blowup_plane(6).unwrap();
    let d = DivisorClass::from_ints(m.basis(), &[4, -1, -1, -1, -1, -1, 0]).unwrap();
    let z = DivisorClass::from_ints(m.basis(), &[1, -1, -1, 0, 0, 0, 0]).unwrap();
    let v = q(1, 1);
    let closed_form = |u: f64, v: f64| v * v - 8.0 * v + 6.0 * u * v + 117.0 * u * u / 16.0 - 39.0 * u / 2.0 + 13.0;
    assert_eq!(volume(&m, &d.sub(&z.scale(&v)).unwrap()).to_f64(), closed_form(0.0, 1.0));
}
