mod common;

use common::*;
use einstein_core::linalg;
use einstein_core::{validate_symmetries, CurvatureTensor, Plane, UpperMetric};
use nalgebra::DMatrix;
use proptest::prelude::*;

#[test]
fn projection_matches_constraint_kernel_projector() {
    for (n, expected_rank) in [(3, 6), (4, 20)] {
        let (p, rank) = constraint_projector(n);
        assert_eq!(rank, expected_rank, "dimension of the curvature space for n = {n}");
        for seed in 0..5 {
            let raw = gaussian_tensor(n, seed);
            let x = nalgebra::DVector::from_column_slice(raw.as_slice());
            let oracle = &p * x;
            let ours = CurvatureTensor::project(&raw).unwrap();
            for (a, b) in ours.as_raw().as_slice().iter().zip(oracle.iter()) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn projection_removes_totally_antisymmetric_part() {
    let n = 4;
    for seed in 10..14 {
        let t = CurvatureTensor::project(&gaussian_tensor(n, seed)).unwrap();
        let alt = alternate(t.as_raw().as_slice(), n);
        assert!(alt.iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn scalar_and_ricci_agree_with_direct_sums() {
    for seed in 0..10 {
        let n = 3 + (seed as usize % 3);
        let t = positive_fixture(n, seed);
        let (m, _) = random_det1(n, 0.5, seed + 100);
        let g = UpperMetric::new(linalg::symmetrize(&m)).unwrap();
        let direct = scalar_by_loops(&t, g.upper());
        let ours = t.scalar_curvature(&g).unwrap();
        assert!((direct - ours).abs() < 1e-10 * direct.abs().max(1.0));
        let ric = t.ricci(&g).unwrap();
        let trace = linalg::contract(&ric, g.upper());
        assert!((trace - ours).abs() < 1e-10 * ours.abs().max(1.0));
    }
}

fn small_tensor() -> impl Strategy<Value = (usize, u64)> {
    (3usize..=5, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_is_idempotent_and_valid((n, seed) in small_tensor()) {
        let p = CurvatureTensor::project(&gaussian_tensor(n, seed)).unwrap();
        let report = validate_symmetries(p.as_raw(), 1e-12).unwrap();
        let worst = report.max_antisym_violation.max(report.max_pair_violation).max(report.max_bianchi_violation);
        prop_assert!(worst <= 1e-12 * p.scale().max(1.0));
        let pp = CurvatureTensor::project(p.as_raw()).unwrap();
        for (a, b) in p.as_raw().as_slice().iter().zip(pp.as_raw().as_slice()) {
            prop_assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn ricci_is_symmetric((n, seed) in small_tensor()) {
        let t = CurvatureTensor::project(&gaussian_tensor(n, seed)).unwrap();
        let (m, _) = random_det1(n, 0.7, seed ^ 0x55);
        let g = UpperMetric::new(linalg::symmetrize(&m)).unwrap();
        let ric = t.ricci(&g).unwrap();
        prop_assert!(linalg::max_asymmetry(&ric) < 1e-11 * ric.abs().max().max(1.0));
    }

    #[test]
    fn pullback_composes((n, seed) in small_tensor()) {
        let t = CurvatureTensor::project(&gaussian_tensor(n, seed)).unwrap();
        let mut r = rng(seed.wrapping_add(1));
        let a = einstein_core::oracle::random_transform(n, &mut r);
        let b = einstein_core::oracle::random_transform(n, &mut r);
        let lhs = t.pullback(&a).unwrap().pullback(&b).unwrap();
        let rhs = t.pullback(&(&a * &b)).unwrap();
        let scale = rhs.scale().max(1.0);
        for (x, y) in lhs.as_raw().as_slice().iter().zip(rhs.as_raw().as_slice()) {
            prop_assert!((x - y).abs() < 1e-10 * scale);
        }
    }

    #[test]
    fn sectional_curvature_is_basis_invariant((n, seed) in small_tensor(), c in -3.0f64..3.0, s in 0.2f64..3.0) {
        let t = CurvatureTensor::project(&gaussian_tensor(n, seed)).unwrap();
        let (m, _) = random_det1(n, 0.5, seed ^ 0xabc);
        let g = UpperMetric::new(linalg::symmetrize(&m)).unwrap();
        let mut r = rng(seed ^ 0x77);
        let v = nalgebra::DVector::from_fn(n, |_, _| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut r));
        let q = nalgebra::DVector::from_fn(n, |_, _| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut r));
        let k1 = t.sectional_curvature(&g, &Plane::new(v.clone(), q.clone()).unwrap()).unwrap();
        // Same plane, different spanning pair.
        let v2 = &v * s + &q * c;
        let q2 = &q * (1.0 / s);
        let k2 = t.sectional_curvature(&g, &Plane::new(v2, q2).unwrap()).unwrap();
        prop_assert!((k1 - k2).abs() < 1e-8 * k1.abs().max(1.0), "{} vs {}", k1, k2);
    }

    #[test]
    fn sectional_sign_is_metric_independent((n, seed) in small_tensor()) {
        let t = CurvatureTensor::project(&gaussian_tensor(n, seed)).unwrap();
        let mut r = rng(seed ^ 0x99);
        let v = nalgebra::DVector::from_fn(n, |_, _| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut r));
        let q = nalgebra::DVector::from_fn(n, |_, _| rand_distr::Distribution::<f64>::sample(&rand_distr::StandardNormal, &mut r));
        let plane = Plane::new(v, q).unwrap();
        let num = t.sectional_numerator(&plane).unwrap();
        prop_assume!(num.abs() > 1e-9);
        for k in 0..5 {
            let (m, _) = random_det1(n, 1.0, seed.wrapping_add(k));
            let g = UpperMetric::new(linalg::symmetrize(&m)).unwrap();
            let kg = t.sectional_curvature(&g, &plane).unwrap();
            prop_assert_eq!(kg.signum(), num.signum());
        }
    }
}

#[test]
fn identity_metric_scalar_of_space_form() {
    for n in 3..=6 {
        let t = CurvatureTensor::constant_curvature(n, 1.5).unwrap();
        let r = t.scalar_curvature_of(&DMatrix::identity(n, n)).unwrap();
        assert!((r - 1.5 * (n * (n - 1)) as f64).abs() < 1e-12);
    }
}
