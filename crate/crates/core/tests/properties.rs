use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

use sphsum::biorth::{build_biorth, smoothing_l, transform_p};
use sphsum::detkit::{determinant, vandermonde};
use sphsum::ensembles::transform_of;
use sphsum::mc::Histogram;
use sphsum::spherical::spherical_phi;
use sphsum::transform::{evaluate, multiply, Density};
use sphsum::{DensityKind, EnsembleSpec, FrequencyVector, MonicPolynomial, SpectralVector};

fn distinct(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n).prop_filter("distinct entries", |v| {
        v.iter().enumerate().all(|(i, a)| v[i + 1..].iter().all(|b| (a - b).abs() > 0.05))
    })
}

fn phi(s: &[f64], x: &[f64]) -> Complex64 {
    spherical_phi(&FrequencyVector::new(s.to_vec()).unwrap(), &SpectralVector::new(x.to_vec()).unwrap()).unwrap()
}

fn ensembles(n: usize) -> Vec<EnsembleSpec> {
    vec![
        EnsembleSpec::gue(n).unwrap(),
        EnsembleSpec::lue(n, 0.0).unwrap(),
        EnsembleSpec::lue(n, 1.5).unwrap(),
        EnsembleSpec::lue_as_pe(n, 0.5).unwrap(),
        EnsembleSpec::gue_as_dpe(n).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phi_is_bounded_and_symmetric(s in distinct(3), x in distinct(3)) {
        let v = phi(&s, &x);
        prop_assert!(v.norm() <= 1.0 + 1e-9);
        prop_assert!((v - phi(&x, &s)).norm() < 1e-9);
        let (mut sr, mut xr) = (s.clone(), x.clone());
        sr.rotate_left(1);
        xr.swap(0, 2);
        prop_assert!((v - phi(&sr, &xr)).norm() < 1e-9);
    }

    #[test]
    fn phi_shift_covariance(s in distinct(2), x in distinct(2), c in -3.0..3.0f64) {
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let phase = Complex64::new(0.0, c * s.iter().sum::<f64>()).exp();
        prop_assert!((phi(&s, &shifted) - phase * phi(&s, &x)).norm() < 1e-9);
    }

    #[test]
    fn phi_conjugation(s in distinct(3), x in distinct(3)) {
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((phi(&neg, &x) - phi(&s, &x).conj()).norm() < 1e-9);
    }

    #[test]
    fn transforms_are_characteristic_functions(s in prop::collection::vec(-3.0..3.0f64, 2), k in 0usize..5) {
        let e = &ensembles(2)[k];
        let rep = transform_of(e).unwrap();
        prop_assert!((evaluate(&rep, &[0.0, 0.0]).unwrap() - 1.0).norm() < 1e-9);
        prop_assert!(evaluate(&rep, &s).unwrap().norm() <= 1.0 + 1e-9);
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert!((evaluate(&rep, &neg).unwrap() - evaluate(&rep, &s).unwrap().conj()).norm() < 1e-9);
    }

    #[test]
    fn multiply_commutes(s in distinct(2), i in 0usize..5, j in 0usize..5) {
        let es = ensembles(2);
        let (a, b) = (transform_of(&es[i]).unwrap(), transform_of(&es[j]).unwrap());
        let ab = evaluate(&multiply(&a, &b).unwrap(), &s).unwrap();
        let ba = evaluate(&multiply(&b, &a).unwrap(), &s).unwrap();
        prop_assert!((ab - ba).norm() < 1e-10);
        prop_assert!((ab - evaluate(&a, &s).unwrap() * evaluate(&b, &s).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn density_kind_round_trip(x in distinct(3), v in 0.0..10.0f64) {
        let d = Density { value: v, kind: DensityKind::Matrix, residue: 0.0 };
        let back = d.to_kind(DensityKind::Joint, &x).to_kind(DensityKind::Matrix, &x);
        prop_assert!((back.value - v).abs() <= 1e-12 * v.max(1.0));
    }

    #[test]
    fn determinant_row_swap_and_vandermonde(x in distinct(4)) {
        let rows: Vec<Vec<f64>> = (0..4).map(|j| x.iter().map(|v| v.powi(j)).collect()).collect();
        let d = determinant(rows.clone());
        prop_assert!((d - vandermonde(&x)).abs() < 1e-9 * d.abs().max(1.0));
        let mut swapped = rows;
        swapped.swap(1, 3);
        prop_assert!((determinant(swapped) + d).abs() < 1e-9 * d.abs().max(1.0));
    }

    #[test]
    fn histogram_merge_is_order_independent(
        values in prop::collection::vec(-5.0..5.0f64, 0..200),
        cut_a in 0usize..200,
        cut_b in 0usize..200,
    ) {
        let template = Histogram::new(-4.0, 0.5, 16).unwrap();
        let (i, j) = (cut_a.min(cut_b).min(values.len()), cut_a.max(cut_b).min(values.len()));
        let fill = |vs: &[f64]| {
            let mut h = template.clone();
            vs.iter().for_each(|v| h.add(*v));
            h
        };
        let (a, b, c) = (fill(&values[..i]), fill(&values[i..j]), fill(&values[j..]));
        let mut left = a.clone();
        left.merge(&b).unwrap();
        left.merge(&c).unwrap();
        let mut right = c.clone();
        right.merge(&a).unwrap();
        right.merge(&b).unwrap();
        prop_assert_eq!(left.rows(), right.rows());
        prop_assert_eq!(left.total(), values.len() as u64);
        prop_assert_eq!(left.rows(), fill(&values).rows());
    }

    #[test]
    fn smoothing_and_transform_are_inverse(
        coeffs in prop::collection::vec(-50i64..50, 0..8),
        num in 0i64..12,
        den in 1i64..4,
        n in 1usize..5,
    ) {
        let q = |a: i64, b: i64| BigRational::new(BigInt::from(a), BigInt::from(b));
        let mut c: Vec<BigRational> = coeffs.iter().map(|v| q(*v, 7)).collect();
        c.push(q(1, 1));
        let p = MonicPolynomial::new(c).unwrap();
        let alpha = q(num, den);
        prop_assert_eq!(smoothing_l(&transform_p(&p, &alpha, n), &alpha, n), p.clone());
        prop_assert_eq!(transform_p(&smoothing_l(&p, &alpha, n), &alpha, n), p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn kernel_reproduces(x in 0.1..6.0f64, y in 0.1..6.0f64, n in 2usize..4) {
        let k = build_biorth(&EnsembleSpec::lue_as_pe(n, 0.5).unwrap()).unwrap().kernel();
        let kk = k.square(x, y).unwrap();
        prop_assert!((kk - k.eval(x, y)).abs() < 1e-8 * k.eval(x, y).abs().max(1.0));
    }
}
