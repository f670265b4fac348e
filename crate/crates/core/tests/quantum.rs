use exptype_core::algebra::*;
use exptype_core::quantum::*;
use exptype_core::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn cp2_data<F: Field>(f: &F) -> RingData<F> {
    let mut products = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let (q_power, target) = if i + j <= 2 { (0, i + j) } else { (3, i + j - 3) };
            products.push(ProductTerm { left: i, right: j, q_power, target, coeff: f.one() });
        }
    }
    RingData {
        names: vec!["1".into(), "h".into(), "h^2".into()],
        degrees: Some(vec![0, 2, 4]),
        parities: vec![0; 3],
        dim: 2,
        unit: 0,
        c1: vec![f.zero(), f.from_i64(3), f.zero()],
        products,
    }
}

fn set_product<F: Field>(data: &mut RingData<F>, l: usize, r: usize, coeff: F::Elem) {
    for t in data.products.iter_mut() {
        if t.left == l && t.right == r {
            t.coeff = coeff.clone();
        }
    }
}

#[test]
fn cp_n_examples() {
    let qq = QField::rationals();
    let cp1 = cp_n_ring(1, qq.clone()).unwrap();
    assert_eq!(cp1.c1_matrix_q1(), Matrix::from_i64(&qq, &[&[0, 2], &[2, 0]]));
    let cp2 = cp_n_ring(2, qq.clone()).unwrap();
    let chi = cp2.c1_matrix_q1().char_poly(&qq).unwrap();
    let expect = UPoly::new(&qq, vec![qq.from_i64(-27), qq.zero(), qq.zero(), qq.one()]);
    assert_eq!(chi, expect);
    assert_eq!(cp2, QHRing::new(qq.clone(), cp2_data(&qq)).unwrap());
    for n in 1..=5 {
        let r = cp_n_ring(n, qq.clone()).unwrap();
        let u = r.mult_matrix_q(&r.unit_vec());
        assert_eq!(u, vec![Matrix::identity(&qq, n + 1)]);
        // q appears with exponent n + 1 only
        assert_eq!(r.max_q_power(), n + 1);
    }
    assert!(cp_n_ring(0, qq).is_err());
}

#[test]
fn ring_validation_witnesses() {
    let qq = QField::rationals();
    // h * h = q 1 violates |q| = 2 in CP^1.
    let bad = RingData {
        names: vec!["1".into(), "h".into()],
        degrees: Some(vec![0, 2]),
        parities: vec![0, 0],
        dim: 1,
        unit: 0,
        c1: vec![qq.zero(), qq.from_i64(2)],
        products: vec![ProductTerm { left: 1, right: 1, q_power: 1, target: 0, coeff: qq.one() }],
    };
    match QHRing::new(qq.clone(), bad) {
        Err(Error::GradingFailure { left, right, .. }) => assert_eq!((left.as_str(), right.as_str()), ("h", "h")),
        other => panic!("{other:?}"),
    }

    let mut data = cp2_data(&qq);
    set_product(&mut data, 1, 2, qq.from_i64(2));
    set_product(&mut data, 2, 1, qq.from_i64(2));
    match QHRing::new(qq.clone(), data) {
        Err(Error::AssociativityFailure(a, b, c)) => assert_eq!((a.as_str(), b.as_str(), c.as_str()), ("h", "h", "h^2")),
        other => panic!("{other:?}"),
    }

    let mut data = cp2_data(&qq);
    set_product(&mut data, 1, 2, qq.from_i64(2));
    assert!(matches!(QHRing::new(qq.clone(), data), Err(Error::CommutativityFailure(_, _))));

    let mut data = cp2_data(&qq);
    set_product(&mut data, 0, 1, qq.from_i64(2));
    assert!(matches!(QHRing::new(qq.clone(), data), Err(Error::UnitFailure(_))));
}

#[test]
fn connections_from_rings() {
    let qq = QField::rationals();
    let cp1 = cp_n_ring(1, qq.clone()).unwrap();
    let c = cp1.build_t_connection(6).unwrap();
    assert_eq!(c.coeff(0), &Matrix::from_i64(&qq, &[&[0, -2], &[-2, 0]]));
    assert_eq!(c.coeff(1), &Matrix::diagonal(&qq, &[qq.from_rational(q(-1, 2)), qq.from_rational(q(1, 2))]));
    assert!(c.coeff(2).is_zero(&qq));

    // c1 * h = 2 q^2 1 in the q-connection.
    let m = cp1.bigraded_module().unwrap();
    let conn = m.q_connection_matrix(4, 2);
    assert_eq!(conn.at(2, 0).get(0, 1), &qq.from_i64(2));
    assert_eq!(conn.at(0, 0).get(1, 0), &qq.from_i64(2));
    assert!(conn.at(1, 0).is_zero(&qq));

    assert_eq!(m.deg_eigenvalue(0, 0, 0), -1);
    assert_eq!(m.deg_eigenvalue(1, 0, 1), 3);
    assert_eq!(m.deg_eigenvalue(0, 1, 0), 1);

    // c1 = 0 toy: pure simple pole mu / t
    let toy = QHRing::new(
        qq.clone(),
        RingData {
            names: vec!["1".into(), "a".into()],
            degrees: Some(vec![0, 2]),
            parities: vec![0, 0],
            dim: 1,
            unit: 0,
            c1: vec![qq.zero(), qq.zero()],
            products: vec![],
        },
    )
    .unwrap();
    let c = toy.build_t_connection(4).unwrap();
    assert!(c.coeff(0).is_zero(&qq));
    assert_eq!(c.coeff(1), &toy.mu().unwrap());
    let e = eigendata_c1(&toy, &[]).unwrap();
    assert_eq!(e.lambdas, vec![qq.zero()]);
    assert_eq!(e.idempotents, vec![toy.unit_vec()]);
}

#[test]
fn z2_graded_rings_have_no_bigraded_module() {
    let qq = QField::rationals();
    let r = QHRing::new(
        qq.clone(),
        RingData {
            names: vec!["1".into(), "x".into()],
            degrees: None,
            parities: vec![0, 0],
            dim: 1,
            unit: 0,
            c1: vec![qq.zero(), qq.one()],
            products: vec![ProductTerm { left: 1, right: 1, q_power: 0, target: 0, coeff: qq.one() }],
        },
    )
    .unwrap();
    assert!(matches!(r.bigraded_module(), Err(Error::MissingDegree)));
    assert!(matches!(r.build_t_connection(4), Err(Error::MissingDegree)));
    assert_eq!(eigendata_c1(&r, &[]).unwrap().lambdas.len(), 2);
}

#[test]
fn eigendata_examples() {
    let qq = QField::rationals();
    let cp1 = cp_n_ring(1, qq.clone()).unwrap();
    let e = eigendata_c1(&cp1, &[]).unwrap();
    let h = |x: i64, y: i64| vec![qq.from_rational(q(x, 2)), qq.from_rational(q(y, 2))];
    assert_eq!(e.lambdas, vec![qq.from_i64(-2), qq.from_i64(2)]);
    assert_eq!(e.idempotents, vec![h(1, -1), h(1, 1)]);
    assert_eq!(e.nilpotency_indices, vec![1, 1]);

    let f3 = FqField::prime(3).unwrap();
    let cp1 = cp_n_ring(1, f3.clone()).unwrap();
    let e = eigendata_c1(&cp1, &[]).unwrap();
    assert_eq!(e.idempotents[e.index_of(&2).unwrap()], vec![2, 2]);
    assert_eq!(e.idempotents[e.index_of(&1).unwrap()], vec![2, 1]);

    let f7 = FqField::prime(7).unwrap();
    let cp2 = cp_n_ring(2, f7.clone()).unwrap();
    let e = eigendata_c1(&cp2, &[]).unwrap();
    assert_eq!(e.lambdas, vec![3, 5, 6]);
    let mut sum = vec![0u64; 3];
    for v in &e.idempotents {
        sum = sum.iter().zip(v).map(|(a, b)| f7.add(a, b)).collect();
    }
    assert_eq!(sum, cp2.unit_vec());

    // over Q the eigenvalues 3, 3 zeta, 3 zeta^2 need the extension
    assert!(matches!(eigendata_c1(&cp_n_ring(2, qq).unwrap(), &[]), Err(Error::CharPolyDoesNotSplit { .. })));
    let z = QField::extension(vec![q(1, 1), q(1, 1), q(1, 1)]).unwrap();
    let a = z.generator();
    let hints = vec![z.from_i64(3), z.mul(&z.from_i64(3), &a), z.sub(&z.from_i64(-3), &z.mul(&z.from_i64(3), &a))];
    let e = eigendata_c1(&cp_n_ring(2, z.clone()).unwrap(), &hints).unwrap();
    assert_eq!(e.lambdas.len(), 3);
}

#[test]
fn reduction_of_rings() {
    let qq = QField::rationals();
    let red = QReduction::to_prime(&qq, 7).unwrap();
    let r = cp_n_ring(2, qq).unwrap().reduce(&red).unwrap();
    assert_eq!(r, cp_n_ring(2, FqField::prime(7).unwrap()).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn collapse_agrees_with_direct_build(n in 1usize..=4, pi in 0usize..3) {
        let f = FqField::prime([5, 7, 11][pi]).unwrap();
        let r = cp_n_ring(n, f).unwrap();
        prop_assert_eq!(r.build_t_connection(6).unwrap(), r.build_t_connection_collapsed(6).unwrap());
        let qq = QField::rationals();
        let r = cp_n_ring(n, qq).unwrap();
        prop_assert_eq!(r.build_t_connection(5).unwrap(), r.build_t_connection_collapsed(5).unwrap());
    }

    #[test]
    fn idempotents_decompose_the_unit(n in 1usize..=4) {
        // primes splitting x^{n+1} - (n+1)^{n+1}: p = 1 mod (n+1) so that the roots of unity exist
        let p = [7u64, 7, 13, 11][n - 1];
        let k = FqField::prime(p).unwrap();
        let r = cp_n_ring(n, k.clone()).unwrap();
        let e = eigendata_c1(&r, &[]).unwrap();
        prop_assert_eq!(e.lambdas.len(), n + 1);
        for (i, u) in e.nilpotent_parts.iter().enumerate() {
            prop_assert!(e.nilpotency_indices[i] <= e.multiplicities[i]);
            prop_assert!(u.iter().all(|x| *x == 0));
        }
    }
}
