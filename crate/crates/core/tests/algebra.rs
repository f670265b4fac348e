use exptype_core::algebra::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn zeta3() -> QField {
    QField::extension(vec![q(1, 1), q(1, 1), q(1, 1)]).unwrap()
}

/// det(xI - m) by the Leibniz formula over polynomials: an independent oracle.
fn leibniz_char_poly<F: Field>(f: &F, m: &Matrix<F>) -> UPoly<F> {
    let n = m.rows;
    let entry = |i: usize, j: usize| {
        let c = UPoly::constant(f, f.neg(m.get(i, j)));
        if i == j {
            c.add(f, &UPoly::x(f))
        } else {
            c
        }
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = UPoly::zero();
    fn permute<F: Field>(
        f: &F,
        k: usize,
        perm: &mut Vec<usize>,
        sign: bool,
        entry: &dyn Fn(usize, usize) -> UPoly<F>,
        total: &mut UPoly<F>,
    ) {
        let n = perm.len();
        if k == n {
            let mut prod = UPoly::one(f);
            for (i, &j) in perm.iter().enumerate() {
                prod = prod.mul(f, &entry(i, j));
            }
            *total = if sign { total.sub(f, &prod) } else { total.add(f, &prod) };
            return;
        }
        for i in k..n {
            perm.swap(k, i);
            permute(f, k + 1, perm, sign ^ (i != k), entry, total);
            perm.swap(k, i);
        }
    }
    permute(f, 0, &mut perm, false, &entry, &mut total);
    total
}

#[test]
fn char_poly_examples() {
    let qq = QField::rationals();
    let m = Matrix::from_i64(&qq, &[&[0, 2], &[2, 0]]);
    let chi = m.char_poly(&qq).unwrap();
    assert_eq!(chi, UPoly::new(&qq, vec![qq.from_i64(-4), qq.zero(), qq.one()]));

    let id = Matrix::identity(&qq, 3);
    let lin = UPoly::new(&qq, vec![qq.from_i64(-1), qq.one()]);
    assert_eq!(id.char_poly(&qq).unwrap(), lin.pow(&qq, 3));

    // multiplication by 3h on 1, h, h^2 with h^3 = 1 (q = 1)
    let c1 = Matrix::from_i64(&qq, &[&[0, 0, 3], &[3, 0, 0], &[0, 3, 0]]);
    let chi = c1.char_poly(&qq).unwrap();
    assert_eq!(chi, UPoly::new(&qq, vec![qq.from_i64(-27), qq.zero(), qq.zero(), qq.one()]));

    let bad = Matrix::<QField>::zeros(&qq, 2, 3);
    assert!(matches!(bad.char_poly(&qq), Err(exptype_core::Error::NonSquare { .. })));
}

#[test]
fn char_poly_matches_leibniz_oracle_and_cayley_hamilton() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [3u64, 5, 7] {
        let k = FqField::prime(p).unwrap();
        for n in 1..=5 {
            let m = Matrix::from_fn(n, n, |_, _| k.random(&mut rng));
            let chi = m.char_poly(&k).unwrap();
            assert_eq!(chi, leibniz_char_poly(&k, &m));
            assert!(m.eval_poly(&k, &chi).is_zero(&k));
        }
    }
    let z = zeta3();
    for n in 1..=4 {
        let m = Matrix::from_fn(n, n, |_, _| z.random(&mut rng));
        assert_eq!(m.char_poly(&z).unwrap(), leibniz_char_poly(&z, &m));
    }
}

fn brute_roots(k: &FqField, f: &UPoly<FqField>) -> Vec<u64> {
    (0..k.order()).filter(|x| k.is_zero(&f.eval(k, x))).collect()
}

#[test]
fn factor_examples() {
    let f3 = FqField::prime(3).unwrap();
    let x2m4 = UPoly::new(&f3, vec![f3.from_i64(-4), 0, 1]);
    let fac = factor_over_finite_field(&f3, &x2m4, 1);
    assert_eq!(fac, vec![(UPoly::new(&f3, vec![1, 1]), 1), (UPoly::new(&f3, vec![2, 1]), 1)]);

    let f5 = FqField::prime(5).unwrap();
    let x = UPoly::x(&f5);
    assert_eq!(factor_over_finite_field(&f5, &x, 1), vec![(x.clone(), 1)]);

    // x^3 - 27 over F_5: 3 is a root, the quadratic cofactor has no roots
    let c = UPoly::new(&f5, vec![f5.from_i64(-27), 0, 0, 1]);
    assert_eq!(brute_roots(&f5, &c), vec![3]);
    let fac = factor_over_finite_field(&f5, &c, 9);
    assert_eq!(fac.len(), 2);
    assert_eq!(fac[0].0, UPoly::linear(&f5, &3));
    assert_eq!(fac[1].0.degree(), Some(2));
}

#[test]
fn splitting_field_examples() {
    let f3 = FqField::prime(3).unwrap();
    let a = UPoly::new(&f3, vec![f3.from_i64(-4), 0, 1]);
    assert_eq!(splitting_field(&f3, &a).unwrap().spec(), FieldSpec::PrimeField { p: 3 });
    let b = UPoly::new(&f3, vec![1, 0, 1]);
    let f9 = splitting_field(&f3, &b).unwrap();
    assert_eq!(f9.order(), 9);
    let bb = UPoly::new(&f9, b.coeffs.clone());
    assert_eq!(roots_in_fq(&f9, &bb).len(), 2);
    let lin = UPoly::new(&f3, vec![2, 1]);
    assert_eq!(splitting_field(&f3, &lin).unwrap().order(), 3);
}

#[test]
fn extension_fields_reject_reducible_moduli() {
    assert!(FqField::extension(3, &[2, 0, 1]).is_err()); // x^2 - 1
    assert!(FqField::extension(3, &[1, 0, 1]).is_ok());
    assert!(FqField::prime(2).is_err());
    assert!(FqField::prime(9).is_err());
    assert!(QField::extension(vec![q(-4, 1), q(0, 1), q(1, 1)]).is_err());
    assert!(QField::extension(vec![q(-2, 1), q(0, 1), q(1, 1)]).is_ok());
    // x^4 + 1 is irreducible but reducible modulo every prime
    assert!(matches!(
        QField::extension(vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 1)]),
        Err(exptype_core::Error::IrreducibilityUnproven(_))
    ));
    // x^4 - 2 is irreducible modulo 5
    assert!(QField::extension(vec![q(-2, 1), q(0, 1), q(0, 1), q(0, 1), q(1, 1)]).is_ok());
}

#[test]
fn eigenspace_examples() {
    let qq = QField::rationals();
    let m = Matrix::from_i64(&qq, &[&[0, 2], &[2, 0]]);
    let es = generalized_eigenspaces(&qq, &m, &[]).unwrap();
    assert_eq!(es.len(), 2);
    assert_eq!(es[0].eigenvalue, qq.from_i64(-2));
    assert_eq!(es[1].eigenvalue, qq.from_i64(2));
    let v = &es[1].basis[0];
    assert_eq!(v[0], v[1]);
    let v = &es[0].basis[0];
    assert_eq!(v[0], qq.neg(&v[1]));

    let j = Matrix::from_i64(&qq, &[&[0, 1], &[0, 0]]);
    let es = generalized_eigenspaces(&qq, &j, &[]).unwrap();
    assert_eq!(es.len(), 1);
    assert_eq!(es[0].multiplicity, 2);

    let f7 = FqField::prime(7).unwrap();
    let c1 = Matrix::from_i64(&f7, &[&[0, 0, 3], &[3, 0, 0], &[0, 3, 0]]);
    let es = generalized_eigenspaces(&f7, &c1, &[]).unwrap();
    let evs: Vec<u64> = es.iter().map(|e| e.eigenvalue).collect();
    assert_eq!(evs, vec![3, 5, 6]);

    // over Q the same matrix needs Q(zeta_3) and hints
    assert!(matches!(generalized_eigenspaces(&qq, &c1.map::<QField>(|x| qq.from_i64(*x as i64)), &[]),
        Err(exptype_core::Error::CharPolyDoesNotSplit { .. })));
    let z = zeta3();
    let c1z = Matrix::from_i64(&z, &[&[0, 0, 3], &[3, 0, 0], &[0, 3, 0]]);
    let a = z.generator();
    let hints = vec![z.from_i64(3), z.mul(&z.from_i64(3), &a), z.sub(&z.from_i64(-3), &z.mul(&z.from_i64(3), &a))];
    let es = generalized_eigenspaces(&z, &c1z, &hints).unwrap();
    assert_eq!(es.len(), 3);
}

fn suggested<F: Field>(f: &F, m: &Matrix<F>) -> Option<String> {
    match generalized_eigenspaces(f, m, &[]) {
        Err(exptype_core::Error::CharPolyDoesNotSplit { suggestion, .. }) => suggestion,
        other => panic!("expected a non-split characteristic polynomial, got {other:?}"),
    }
}

#[test]
fn non_split_characteristic_polynomials_suggest_a_field() {
    // x^3 - 27 over F_5: one root, the quadratic rest needs F_25
    let f5 = FqField::prime(5).unwrap();
    let c1 = Matrix::from_i64(&f5, &[&[0, 0, 3], &[3, 0, 0], &[0, 3, 0]]);
    assert_eq!(suggested(&f5, &c1).as_deref(), Some("F_{5^2}"));
    // (x^2 + 1)(x^3 - 2) over F_7 splits first over the degree lcm(2, 3) extension
    let f7 = FqField::prime(7).unwrap();
    let m = Matrix::from_i64(&f7, &[&[0, -1, 0, 0, 0], &[1, 0, 0, 0, 0], &[0, 0, 0, 0, 2], &[0, 0, 1, 0, 0], &[0, 0, 0, 1, 0]]);
    assert_eq!(suggested(&f7, &m).as_deref(), Some("F_{7^6}"));
    // repeated factors do not change the answer
    let m = Matrix::from_i64(&f7, &[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]]);
    assert_eq!(suggested(&f7, &m).as_deref(), Some("F_{7^2}"));
    let qq = QField::rationals();
    let m = Matrix::from_i64(&qq, &[&[0, 0, 2], &[1, 0, 0], &[0, 1, 0]]);
    assert_eq!(suggested(&qq, &m).as_deref(), Some("Q[a]/(a^3 - 2)"));
    // a quartic without rational roots may still factor over Q, so no guess
    let m = Matrix::from_i64(&qq, &[&[0, -1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, 1, 0]]);
    assert_eq!(suggested(&qq, &m), None);
}

#[test]
fn reduce_examples() {
    assert_eq!(reduce_mod_p(&q(3, 2), 5).unwrap(), 4);
    assert!(matches!(reduce_mod_p(&q(1, 5), 5), Err(exptype_core::Error::DenominatorDivisibleByP { .. })));
    let qq = QField::rationals();
    let red = QReduction::to_prime(&qq, 7).unwrap();
    let m = Matrix::from_i64(&qq, &[&[0, 2], &[2, 0]]);
    let f7 = FqField::prime(7).unwrap();
    assert_eq!(red.matrix(&m).unwrap(), Matrix::from_i64(&f7, &[&[0, 2], &[2, 0]]));
    // zeta_3 reduces into F_7 (7 = 1 mod 3) and into F_25 for p = 5
    let z = zeta3();
    assert_eq!(QReduction::to_prime(&z, 7).unwrap().target.order(), 7);
    assert_eq!(QReduction::to_prime(&z, 5).unwrap().target.order(), 25);
}

#[test]
fn solve_examples() {
    let qq = QField::rationals();
    let id = Matrix::identity(&qq, 3);
    let b = Matrix::from_i64(&qq, &[&[1], &[2], &[3]]);
    let s = id.solve(&qq, &b).unwrap();
    assert_eq!(s.particular, b);
    assert!(s.kernel.is_empty());

    let a = Matrix::from_i64(&qq, &[&[1, 2], &[2, 4]]);
    let b = Matrix::from_i64(&qq, &[&[3], &[6]]);
    let s = a.solve(&qq, &b).unwrap();
    assert_eq!(a.mul(&qq, &s.particular), b);
    assert_eq!(s.kernel.len(), 1);
    let bad = Matrix::from_i64(&qq, &[&[3], &[7]]);
    assert_eq!(a.solve(&qq, &bad), Err(exptype_core::Error::NoSolution));
}

#[test]
fn laurent_inverse_and_precision() {
    let qq = QField::rationals();
    // (t^-1 + 1 + O(t^3))^-1 = t - t^2 + t^3 - ... known mod t^5
    let a = Laurent::new(-1, vec![qq.one(), qq.one(), qq.zero(), qq.zero()]);
    let inv = a.inv(&qq).unwrap();
    assert_eq!(inv.offset, 1);
    assert_eq!(inv.prec(), 5);
    let prod = a.mul(&qq, &inv);
    assert_eq!(prod.valuation(&qq), Some(0));
    assert_eq!(prod.coeff(&qq, 0).unwrap(), qq.one());
    for e in 1..prod.prec() {
        assert!(qq.is_zero(&prod.coeff(&qq, e).unwrap()));
    }
}

fn field_axioms<F: Field>(f: &F, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let (a, b, c) = (f.random(&mut rng), f.random(&mut rng), f.random(&mut rng));
        assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
        assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
        assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
        assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
        assert!(f.is_zero(&f.add(&a, &f.neg(&a))));
        assert_eq!(f.sub(&a, &b), f.add(&a, &f.neg(&b)));
        if !f.is_zero(&a) {
            assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
        } else {
            assert!(f.inv(&a).is_none());
        }
    }
}

proptest! {
    #[test]
    fn field_axioms_every_kind(seed in any::<u64>()) {
        field_axioms(&QField::rationals(), seed);
        field_axioms(&zeta3(), seed);
        field_axioms(&FqField::prime(7).unwrap(), seed);
        field_axioms(&FqField::extension(3, &[1, 0, 1]).unwrap(), seed);
        field_axioms(&FqField::with_degree(5, 3).unwrap(), seed);
    }

    #[test]
    fn factorization_multiplies_back(seed in any::<u64>(), pi in 0usize..4, deg in 1usize..=8) {
        let p = [3u64, 5, 7, 11][pi];
        let k = FqField::prime(p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c: Vec<u64> = (0..deg).map(|_| k.random(&mut rng)).collect();
        c.push(1);
        let f = UPoly::new(&k, c);
        let fac = factor_over_finite_field(&k, &f, seed);
        let mut prod = UPoly::one(&k);
        for (g, m) in &fac {
            prop_assert!(is_irreducible(&k, g));
            prod = prod.mul(&k, &g.pow(&k, *m as u32));
        }
        prop_assert_eq!(prod, f);
    }

    #[test]
    fn factorization_over_extension(seed in any::<u64>(), deg in 1usize..=5) {
        let k = FqField::extension(3, &[1, 0, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c: Vec<u64> = (0..deg).map(|_| k.random(&mut rng)).collect();
        c.push(1);
        let f = UPoly::new(&k, c);
        let mut prod = UPoly::one(&k);
        for (g, m) in factor_over_finite_field(&k, &f, seed) {
            prop_assert!(is_irreducible(&k, &g));
            prod = prod.mul(&k, &g.pow(&k, m as u32));
        }
        prop_assert_eq!(prod, f.clone());
        prop_assert_eq!(roots_in_fq(&k, &f), brute_roots(&k, &f));
    }

    #[test]
    fn eigenspaces_form_a_direct_sum(seed in any::<u64>(), n in 1usize..=4) {
        let k = FqField::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // conjugate of an upper-triangular matrix splits by construction
        let t = Matrix::from_fn(n, n, |i, j| if i <= j { k.random(&mut rng) } else { 0 });
        let s = loop {
            let s = Matrix::from_fn(n, n, |_, _| k.random(&mut rng));
            if s.inverse(&k).is_some() { break s; }
        };
        let m = s.mul(&k, &t).mul(&k, &s.inverse(&k).unwrap());
        let es = generalized_eigenspaces(&k, &m, &[]).unwrap();
        let cols: Vec<Vec<u64>> = es.iter().flat_map(|e| e.basis.clone()).collect();
        let basis = Matrix::from_columns(n, &cols);
        prop_assert!(basis.inverse(&k).is_some());
        for e in &es {
            let sh = m.sub(&k, &Matrix::scalar(&k, n, e.eigenvalue)).pow(&k, e.multiplicity as u32);
            for v in &e.basis {
                prop_assert!(sh.mul_vec(&k, v).iter().all(|x| *x == 0));
            }
        }
    }

    #[test]
    fn reduction_is_a_ring_homomorphism(seed in any::<u64>()) {
        let z = zeta3();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in [7u64, 13, 5] {
            let red = QReduction::to_prime(&z, p).unwrap();
            let k = &red.target;
            let a = z.random(&mut rng);
            let b = z.random(&mut rng);
            prop_assert_eq!(red.elem(&z.add(&a, &b)).unwrap(), k.add(&red.elem(&a).unwrap(), &red.elem(&b).unwrap()));
            prop_assert_eq!(red.elem(&z.mul(&a, &b)).unwrap(), k.mul(&red.elem(&a).unwrap(), &red.elem(&b).unwrap()));
            let ma = Matrix::from_fn(3, 3, |_, _| z.random(&mut rng));
            let mb = Matrix::from_fn(3, 3, |_, _| z.random(&mut rng));
            prop_assert_eq!(red.matrix(&ma.mul(&z, &mb)).unwrap(), red.matrix(&ma).unwrap().mul(k, &red.matrix(&mb).unwrap()));
        }
    }

    #[test]
    fn series_associative_and_invertible(seed in any::<u64>()) {
        let k = FqField::prime(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rand_series = |order: usize| MatSeries::from_coeffs(&k, 2, 2,
            (0..order).map(|_| Matrix::from_fn(2, 2, |_, _| k.random(&mut rng))).collect(), order);
        let (a, b, c) = (rand_series(6), rand_series(8), rand_series(7));
        let lhs = a.mul(&k, &b).mul(&k, &c);
        let rhs = a.mul(&k, &b.mul(&k, &c));
        prop_assert_eq!(lhs.order(), 6);
        prop_assert_eq!(lhs, rhs);
        let mut u = rand_series(9);
        u.coeffs[0] = Matrix::identity(&k, 2);
        let ui = u.inverse(&k).unwrap();
        prop_assert_eq!(u.mul(&k, &ui), MatSeries::identity(&k, 2, 9));
    }
}
