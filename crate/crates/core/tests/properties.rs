//! Cross-module properties: the functional calculus is a homomorphism on
//! commuting tuples, spectral mapping, serialization round-trips, and the
//! determinism of generated instances.

use std::sync::Arc;

use proptest::prelude::*;

use trace_jensen::calculus::{FunctionFlags, ScalarFunction};
use trace_jensen::factory::{random_abelian_tuple, random_hermitian};
use trace_jensen::matrix::{HermitianMatrix, Interval, MatrixJson};
use trace_jensen::spectral::{eigenvalues, joint_diagonalize, DecompositionJson};
use trace_jensen::{apply_multivariate, AbelianTuple};

fn cube2() -> [Interval; 2] {
    [Interval::new(-1.0, 1.0), Interval::new(0.0, 2.0)]
}

fn poly_fn(name: &str, coeffs: [f64; 3]) -> ScalarFunction {
    ScalarFunction::new(
        name,
        cube2().to_vec(),
        Arc::new(move |p: &[f64]| coeffs[0] + coeffs[1] * p[0] + coeffs[2] * p[0] * p[1]),
        None,
        FunctionFlags::default(),
    )
}

#[test]
fn calculus_is_multiplicative_on_tuples() {
    for seed in 0..10u64 {
        let t = random_abelian_tuple(seed, 5, 2, &cube2());
        let f = poly_fn("f", [0.3, 1.0, -0.5]);
        let g = poly_fn("g", [-1.0, 0.25, 2.0]);
        let fg = f.pointwise_mul(&g).unwrap();
        let left = apply_multivariate(&fg, &t).unwrap();
        let fa = apply_multivariate(&f, &t).unwrap();
        let ga = apply_multivariate(&g, &t).unwrap();
        let right = HermitianMatrix::new(fa.as_matrix() * ga.as_matrix()).unwrap();
        let scale = 1.0 + fa.frobenius() * ga.frobenius();
        let resid = left.sub(&right).unwrap().frobenius();
        assert!(resid <= 1e-8 * scale, "seed {seed}: residual {resid}");
    }
}

#[test]
fn unit_function_lifts_to_identity() {
    let t = random_abelian_tuple(3, 6, 2, &cube2());
    let one = ScalarFunction::new(
        "one",
        cube2().to_vec(),
        Arc::new(|_: &[f64]| 1.0),
        None,
        FunctionFlags::default(),
    );
    let lifted = apply_multivariate(&one, &t).unwrap();
    let resid = lifted
        .sub(&HermitianMatrix::identity(6))
        .unwrap()
        .frobenius();
    assert!(resid <= 1e-12);
}

#[test]
fn spectral_mapping_of_lifted_function() {
    // eigenvalues of f(x) are exactly {f(row) : row of the joint table}
    let t = random_abelian_tuple(5, 6, 2, &cube2());
    let f = poly_fn("f", [0.1, -2.0, 0.7]);
    let lifted = apply_multivariate(&f, &t).unwrap();
    let mut got = eigenvalues(&lifted);
    let decomp = joint_diagonalize(&t).unwrap();
    let mut want: Vec<f64> = decomp.table.iter().map(|row| f.eval(row)).collect();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    want.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for (g, w) in got.iter().zip(&want) {
        assert!((g - w).abs() <= 1e-9 * (1.0 + w.abs()), "{g} vs {w}");
    }
}

#[test]
fn monomials_match_explicit_matrix_products() {
    for seed in 0..10u64 {
        let t = random_abelian_tuple(
            100 + seed,
            5,
            3,
            &[
                Interval::new(-1.0, 1.0),
                Interval::new(0.0, 1.0),
                Interval::new(-0.5, 0.5),
            ],
        );
        // f = l1 * l2^2 * l3
        let f = ScalarFunction::new(
            "monomial",
            t.cube().to_vec(),
            Arc::new(|p: &[f64]| p[0] * p[1] * p[1] * p[2]),
            None,
            FunctionFlags::default(),
        );
        let lifted = apply_multivariate(&f, &t).unwrap();
        let m = t.member(0).as_matrix()
            * t.member(1).as_matrix()
            * t.member(1).as_matrix()
            * t.member(2).as_matrix();
        let explicit = HermitianMatrix::new(m).unwrap();
        let scale = 1.0 + explicit.frobenius();
        let resid = lifted.sub(&explicit).unwrap().frobenius();
        assert!(resid <= 1e-8 * scale, "seed {seed}: residual {resid}");
    }
}

#[test]
fn decomposition_serialization_round_trips() {
    let t = random_abelian_tuple(7, 4, 2, &cube2());
    let d = joint_diagonalize(&t).unwrap();
    let json = serde_json::to_string(&d.to_json()).unwrap();
    let back: DecompositionJson = serde_json::from_str(&json).unwrap();
    let d2 = back.to_decomposition().unwrap();
    assert_eq!(d.basis, d2.basis);
    assert_eq!(d.table, d2.table);
    // the deserialized decomposition still reconstructs the tuple
    assert!(d2.reconstruction_residual(t.members()) <= 1e-9);
}

#[test]
fn generators_are_deterministic_across_calls() {
    let a = random_abelian_tuple(
        42,
        6,
        3,
        &[
            Interval::new(-1.0, 1.0),
            Interval::new(0.0, 1.0),
            Interval::new(-2.0, 0.0),
        ],
    );
    let b = random_abelian_tuple(
        42,
        6,
        3,
        &[
            Interval::new(-1.0, 1.0),
            Interval::new(0.0, 1.0),
            Interval::new(-2.0, 0.0),
        ],
    );
    for i in 0..3 {
        assert_eq!(a.member(i).as_matrix(), b.member(i).as_matrix());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Matrix JSON exchange round-trips arbitrary finite doubles bit-exactly.
    #[test]
    fn matrix_json_round_trip_bits(values in proptest::collection::vec(
        proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
        9,
    )) {
        let json = MatrixJson {
            dim: 3,
            re: values[..9].to_vec(),
            im: values[..9].iter().map(|v| -v).collect(),
        };
        let text = serde_json::to_string(&json).unwrap();
        let back: MatrixJson = serde_json::from_str(&text).unwrap();
        for (a, b) in json.re.iter().zip(&back.re) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        for (a, b) in json.im.iter().zip(&back.im) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    /// Random Hermitian draws keep their spectra inside the requested interval.
    #[test]
    fn hermitian_spectrum_stays_in_interval(seed in 0u64..500, dim in 2usize..7) {
        let h = random_hermitian(seed, dim, Interval::new(-0.5, 1.5));
        for v in eigenvalues(&h) {
            prop_assert!((-0.5 - 1e-10..=1.5 + 1e-10).contains(&v));
        }
    }

    /// Lifting commutes with spectral shifts: f(x + c) = (f shifted)(x).
    #[test]
    fn univariate_shift_covariance(seed in 0u64..200, c in -0.5f64..0.5) {
        let x = random_hermitian(seed, 4, Interval::new(-0.5, 0.5));
        let f = ScalarFunction::new(
            "q",
            vec![Interval::new(-2.0, 2.0)],
            Arc::new(|p: &[f64]| p[0] * p[0] + p[0]),
            None,
            FunctionFlags::default(),
        );
        let g = ScalarFunction::new(
            "q-shifted",
            vec![Interval::new(-2.0, 2.0)],
            Arc::new(move |p: &[f64]| (p[0] + c) * (p[0] + c) + (p[0] + c)),
            None,
            FunctionFlags::default(),
        );
        let lhs = trace_jensen::apply_univariate(&f, &x.shift(c)).unwrap();
        let rhs = trace_jensen::apply_univariate(&g, &x).unwrap();
        let resid = lhs.sub(&rhs).unwrap().frobenius();
        prop_assert!(resid <= 1e-9 * (1.0 + lhs.frobenius()));
    }
}

#[test]
fn abelian_tuple_serialization_round_trips() {
    let t = random_abelian_tuple(11, 4, 2, &cube2());
    let text = serde_json::to_string(&t).unwrap();
    let back: AbelianTuple = serde_json::from_str(&text).unwrap();
    assert_eq!(back.n(), 2);
    for i in 0..2 {
        assert_eq!(t.member(i).as_matrix(), back.member(i).as_matrix());
    }
}
