use exptype_core::algebra::*;
use exptype_core::connection::*;
use exptype_core::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn qe(f: &QField, n: i64, d: i64) -> Vec<BigRational> {
    f.from_rational(q(n, d))
}

/// The quantum t-connection of CP^1 at q = 1: A_0 = -c1*, A_1 = mu.
fn cp1<F: Field>(f: &F, order: usize) -> FormalConnection<F> {
    let a0 = Matrix::from_i64(f, &[&[0, -2], &[-2, 0]]);
    let half = f.inv(&f.from_i64(2)).unwrap();
    let a1 = Matrix::diagonal(f, &[f.neg(&half), half]);
    FormalConnection::new(f.clone(), vec![a0, a1], order).unwrap()
}

fn random_matrix<F: Field>(f: &F, n: usize, rng: &mut ChaCha8Rng) -> Matrix<F> {
    Matrix::from_fn(n, n, |_, _| f.random(rng))
}

fn random_invertible<F: Field>(f: &F, n: usize, rng: &mut ChaCha8Rng) -> Matrix<F> {
    loop {
        let m = random_matrix(f, n, rng);
        if m.inverse(f).is_some() {
            return m;
        }
    }
}

/// A random connection whose leading term is conjugate to a block upper
/// triangular matrix with prescribed diagonal, so its characteristic polynomial splits.
fn random_split_connection(f: &FqField, n: usize, order: usize, rng: &mut ChaCha8Rng) -> FormalConnection<FqField> {
    let distinct = rng.gen_range(1..=n);
    let mut diag = Vec::new();
    for i in 0..n {
        diag.push(f.from_i64((i % distinct) as i64 * 3 + 1));
    }
    let mut upper = Matrix::diagonal(f, &diag);
    for i in 0..n {
        for j in i + 1..n {
            upper.set(i, j, f.random(rng));
        }
    }
    let s = random_invertible(f, n, rng);
    let a0 = s.mul(f, &upper).mul(f, &s.inverse(f).unwrap());
    let mut coeffs = vec![a0];
    for _ in 1..4 {
        coeffs.push(random_matrix(f, n, rng));
    }
    FormalConnection::new(f.clone(), coeffs, order).unwrap()
}

fn random_gauge<F: Field>(f: &F, n: usize, order: usize, rng: &mut ChaCha8Rng) -> GaugeTransform<F> {
    let mut coeffs = vec![random_invertible(f, n, rng)];
    for _ in 1..order {
        coeffs.push(random_matrix(f, n, rng));
    }
    GaugeTransform::new(f, MatSeries::from_coeffs(f, n, n, coeffs, order)).unwrap()
}

#[test]
fn gauge_examples() {
    let qq = QField::rationals();
    let c = FormalConnection::new(qq.clone(), vec![Matrix::zeros(&qq, 2, 2)], 6).unwrap();
    let id = GaugeTransform::identity(&qq, 2, 6);
    assert_eq!(gauge_apply(&c, &id).unwrap(), c);

    // P = I + t E12 on the trivial connection: A' = P^{-1} t^2 P' = t^2 E12.
    let mut p = MatSeries::identity(&qq, 2, 6);
    p.coeffs[1].set(0, 1, qq.one());
    let g = GaugeTransform::new(&qq, p).unwrap();
    let out = gauge_apply(&c, &g).unwrap();
    for i in 0..6 {
        let expect = if i == 2 { Matrix::from_i64(&qq, &[&[0, 1], &[0, 0]]) } else { Matrix::zeros(&qq, 2, 2) };
        assert_eq!(out.coeff(i), &expect, "order {i}");
    }
}

#[test]
fn gauge_agrees_with_operator_conjugation() {
    // t^2 nabla (P w) = P (t^2 nabla' w) for the transformed connection nabla'.
    let f = FqField::prime(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let c = random_split_connection(&f, 3, 10, &mut rng);
        let g = random_gauge(&f, 3, 10, &mut rng);
        let c2 = gauge_apply(&c, &g).unwrap();
        let w = MatSeries::from_coeffs(&f, 3, 1, (0..10).map(|_| Matrix::from_fn(3, 1, |_, _| f.random(&mut rng))).collect(), 10);
        let lhs = c.apply_t2(&g.p.mul(&f, &w));
        let rhs = g.p.mul(&f, &c2.apply_t2(&w));
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn sylvester_examples() {
    let qq = QField::rationals();
    let a0 = Matrix::from_i64(&qq, &[&[2, 0], &[0, -2]]);
    let blocks = vec![
        BlockInfo { start: 0, len: 1, eigenvalue: qe(&qq, 2, 1) },
        BlockInfo { start: 1, len: 1, eigenvalue: qe(&qq, -2, 1) },
    ];
    let r = Matrix::from_i64(&qq, &[&[0, 1], &[0, 0]]);
    let t = solve_block_sylvester(&qq, &a0, &r, &blocks).unwrap();
    let mut expect = Matrix::zeros(&qq, 2, 2);
    expect.set(0, 1, qe(&qq, -1, 4));
    assert_eq!(t, expect);

    let diag = Matrix::from_i64(&qq, &[&[5, 0], &[0, 7]]);
    assert!(solve_block_sylvester(&qq, &a0, &diag, &blocks).unwrap().is_zero(&qq));

    let same = vec![
        BlockInfo { start: 0, len: 1, eigenvalue: qe(&qq, 1, 1) },
        BlockInfo { start: 1, len: 1, eigenvalue: qe(&qq, 1, 1) },
    ];
    assert!(matches!(solve_block_sylvester(&qq, &a0, &r, &same), Err(Error::EigenvalueDifferenceNotInvertible(_))));
}

#[test]
fn sylvester_with_nilpotent_block_matches_linear_solve() {
    // A_0 = J_2(1) + (-3): the oracle solves for the off-block entries of T as a linear system.
    let qq = QField::rationals();
    let a0 = Matrix::from_i64(&qq, &[&[1, 1, 0], &[0, 1, 0], &[0, 0, -3]]);
    let blocks = vec![
        BlockInfo { start: 0, len: 2, eigenvalue: qe(&qq, 1, 1) },
        BlockInfo { start: 2, len: 1, eigenvalue: qe(&qq, -3, 1) },
    ];
    let r = Matrix::from_i64(&qq, &[&[9, 2, 3], &[8, 9, 5], &[7, 11, 9]]);
    let t = solve_block_sylvester(&qq, &a0, &r, &blocks).unwrap();
    let off = [(0, 2), (1, 2), (2, 0), (2, 1)];
    // unknowns x_k = T at off[k]; equations: (R + A0 T - T A0) at off positions = 0
    let mut sys = Matrix::zeros(&qq, 4, 4);
    let mut rhs = Matrix::zeros(&qq, 4, 1);
    for (row, &(i, j)) in off.iter().enumerate() {
        rhs.set(row, 0, qq.neg(r.get(i, j)));
        for (col, &(k, l)) in off.iter().enumerate() {
            let mut v = qq.zero();
            if l == j {
                v = qq.add(&v, a0.get(i, k));
            }
            if k == i {
                v = qq.sub(&v, a0.get(l, j));
            }
            sys.set(row, col, v);
        }
    }
    let sol = sys.solve(&qq, &rhs).unwrap();
    assert!(sol.kernel.is_empty());
    for (row, &(i, j)) in off.iter().enumerate() {
        assert_eq!(t.get(i, j), sol.particular.get(row, 0));
    }
    assert!(t.get(0, 0) == &qq.zero() && t.get(2, 2) == &qq.zero());
}

#[test]
fn cp1_split_over_rationals() {
    let qq = QField::rationals();
    let c = cp1(&qq, 16);
    let s = elementary_split(&c, 16, &SplitOptions::default()).unwrap();
    let lambdas: Vec<_> = s.sorted_blocks().iter().map(|b| b.lambda.clone()).collect();
    assert_eq!(lambdas, vec![qe(&qq, -2, 1), qe(&qq, 2, 1)]);
    // Multiplication by (1 +- h)/2 in the basis (1, h), using h*h = 1 at q = 1.
    let half = qe(&qq, 1, 2);
    let mhalf = qe(&qq, -1, 2);
    let plus = Matrix::from_rows(vec![vec![half.clone(), half.clone()], vec![half.clone(), half.clone()]]).unwrap();
    let minus = Matrix::from_rows(vec![vec![half.clone(), mhalf.clone()], vec![mhalf, half]]).unwrap();
    assert_eq!(s.block_for(&qe(&qq, 2, 1)).unwrap().projector.coeffs[0], plus);
    assert_eq!(s.block_for(&qe(&qq, -2, 1)).unwrap().projector.coeffs[0], minus);
    for b in &s.blocks {
        assert_eq!(b.multiplicity, 1);
        assert_eq!(b.connection.coeff(0).get(0, 0), &qq.neg(&b.lambda));
    }
    let verdict = verify_projector_family(&c, &s.blocks.iter().map(|b| (b.lambda.clone(), b.projector.clone())).collect::<Vec<_>>(), &s).unwrap();
    assert!(verdict.accepted(), "{verdict:?}");
}

#[test]
fn cp1_split_over_f7_matches_reduction() {
    let qq = QField::rationals();
    let f = FqField::prime(7).unwrap();
    let red = QReduction::to_prime(&qq, 7).unwrap();
    let sq = elementary_split(&cp1(&qq, 20), 20, &SplitOptions::default()).unwrap();
    let sp = elementary_split(&cp1(&f, 20), 20, &SplitOptions::default()).unwrap();
    let lambdas: Vec<u64> = sp.sorted_blocks().iter().map(|b| b.lambda).collect();
    assert_eq!(lambdas, vec![2, 5]);
    for b in &sq.blocks {
        let l = red.elem(&b.lambda).unwrap();
        let bp = sp.block_for(&l).unwrap();
        assert_eq!(red.series(&b.projector).unwrap(), bp.projector);
    }
}

#[test]
fn split_rejects_bad_orders_and_unsplit_leading_terms() {
    let qq = QField::rationals();
    let c = cp1(&qq, 8);
    assert!(matches!(elementary_split(&c, 1, &SplitOptions::default()), Err(Error::TruncationTooSmall { .. })));
    assert!(matches!(elementary_split(&c, 9, &SplitOptions::default()), Err(Error::TruncationTooSmall { .. })));
    assert!(FormalConnection::new(qq.clone(), vec![Matrix::zeros(&qq, 1, 1)], 1).is_err());
    let rot = FormalConnection::new(qq.clone(), vec![Matrix::from_i64(&qq, &[&[0, -1], &[1, 0]])], 4).unwrap();
    assert!(matches!(elementary_split(&rot, 4, &SplitOptions::default()), Err(Error::CharPolyDoesNotSplit { .. })));
}

#[test]
fn single_eigenvalue_split_is_trivial() {
    let qq = QField::rationals();
    let a0 = Matrix::from_i64(&qq, &[&[3, 1], &[0, 3]]);
    let a1 = Matrix::from_i64(&qq, &[&[1, 2], &[3, 4]]);
    let c = FormalConnection::new(qq.clone(), vec![a0, a1], 6).unwrap();
    let s = elementary_split(&c, 6, &SplitOptions::default()).unwrap();
    assert_eq!(s.blocks.len(), 1);
    assert_eq!(s.blocks[0].lambda, qe(&qq, -3, 1));
    assert_eq!(s.blocks[0].projector, MatSeries::identity(&qq, 2, 6));
    let id = vec![(qe(&qq, -3, 1), MatSeries::identity(&qq, 2, 6))];
    assert!(verify_projector_family(&c, &id, &s).unwrap().accepted());
    let res = residual_connection(&s.blocks[0].connection, &s.blocks[0].lambda).unwrap();
    assert_eq!(res.connection.coeff(0).pow(&qq, 2), Matrix::zeros(&qq, 2, 2));
    assert!(!res.connection.coeff(0).is_zero(&qq));
}

#[test]
fn projector_family_negative_controls() {
    let f = FqField::prime(7).unwrap();
    let c = cp1(&f, 12);
    let s = elementary_split(&c, 12, &SplitOptions::default()).unwrap();
    let good: Vec<_> = s.blocks.iter().map(|b| (b.lambda, b.projector.clone())).collect();

    let mut bad = good.clone();
    let bumped = f.add(bad[0].1.coeffs[3].get(0, 0), &1);
    bad[0].1.coeffs[3].set(0, 0, bumped);
    let v = verify_projector_family(&c, &bad, &s).unwrap();
    let failure = v.failure.unwrap();
    assert_eq!(failure.condition, ProjectorCondition::CovariantConstancy);
    assert!(failure.order <= 4);

    // Constant spectral projectors are idempotent but not flat.
    let consts: Vec<_> = good.iter().map(|(l, m)| (*l, MatSeries::constant(&f, m.coeffs[0].clone(), 12))).collect();
    let v = verify_projector_family(&c, &consts, &s).unwrap();
    assert_eq!(v.failure.unwrap().condition, ProjectorCondition::CovariantConstancy);

    let swapped = vec![(good[0].0, good[1].1.clone()), (good[1].0, good[0].1.clone())];
    let v = verify_projector_family(&c, &swapped, &s).unwrap();
    assert_eq!(v.failure.unwrap().condition, ProjectorCondition::LeadingTerm);

    let wrong = vec![(3u64, good[0].1.clone()), (good[1].0, good[1].1.clone())];
    assert!(matches!(verify_projector_family(&c, &wrong, &s), Err(Error::LabelMismatch(_))));
}

#[test]
fn residual_connection_examples() {
    let qq = QField::rationals();
    let lambda = qe(&qq, 5, 3);
    let e = FormalConnection::euler(qq.clone(), &lambda, 5).unwrap();
    let r = residual_connection(&e, &lambda).unwrap();
    assert!(r.connection.a.is_zero(&qq));

    let c = cp1(&qq, 12);
    let s = elementary_split(&c, 12, &SplitOptions::default()).unwrap();
    let b = s.block_for(&qe(&qq, 2, 1)).unwrap();
    let r = residual_connection(&b.connection, &b.lambda).unwrap();
    assert!(r.connection.coeff(0).is_zero(&qq));
    // The residue of the rank-one block is the mu-component along e_2: (-1/2 + 1/2)/2 = 0.
    assert_eq!(r.connection.coeff(1).get(0, 0), &qq.zero());

    let jordan = FormalConnection::new(qq.clone(), vec![Matrix::from_i64(&qq, &[&[-4, 1], &[0, -4]])], 4).unwrap();
    let r = residual_connection(&jordan, &qe(&qq, 4, 1)).unwrap();
    assert_eq!(r.connection.coeff(0), &Matrix::from_i64(&qq, &[&[0, 1], &[0, 0]]));
    assert!(matches!(residual_connection(&jordan, &qe(&qq, 3, 1)), Err(Error::LeadingNotSingleEigenvalue(_))));
}

#[test]
fn rigidity_examples() {
    let f = FqField::prime(7).unwrap();
    let a = FormalConnection::euler(f.clone(), &2, 20).unwrap();
    let b = FormalConnection::euler(f.clone(), &5, 20).unwrap();
    let rep = verify_morphism_rigidity(&a, &b, 10, 20, 1).unwrap();
    assert!(rep.only_zero(), "{rep:?}");
    assert_eq!(rep.kernel_dim, Some(0));
    assert!(matches!(verify_morphism_rigidity(&a, &a, 1, 20, 1), Err(Error::SameEigenvalue(_))));

    let qq = QField::rationals();
    let s = elementary_split(&cp1(&qq, 20), 20, &SplitOptions::default()).unwrap();
    let rep = verify_morphism_rigidity(&s.blocks[0].connection, &s.blocks[1].connection, 5, 20, 2).unwrap();
    assert!(rep.only_zero());

    // A nonzero start is already inconsistent at order zero.
    let run = intertwiner_recursion(&a, &b, &Matrix::identity(&f, 1), 6).unwrap();
    assert_eq!(run.inconsistent_at, Some(0));
}

#[test]
fn split_reassembles_and_is_functorial() {
    let f = FqField::prime(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let c1 = random_split_connection(&f, 2, 12, &mut rng);
        let c = c1.direct_sum(&c1);
        let s = elementary_split(&c, 12, &SplitOptions::default()).unwrap();
        let inv = GaugeTransform { p: s.gauge.inv.clone(), inv: s.gauge.p.clone() };
        assert_eq!(gauge_apply(&s.split, &inv).unwrap(), c);
        // K (x) I commutes with I (x) A and is horizontal.
        let k = random_matrix(&f, 2, &mut rng);
        let mut endo = Matrix::zeros(&f, 4, 4);
        for i in 0..2 {
            for j in 0..2 {
                endo.set_block(2 * i, 2 * j, &Matrix::scalar(&f, 2, *k.get(i, j)));
            }
        }
        let e = MatSeries::constant(&f, endo, 12);
        assert!(e.t2_derivative(&f).add(&f, &c.a.commutator(&f, &e)).is_zero(&f));
        let conj = s.gauge.inv.mul(&f, &e).mul(&f, &s.gauge.p);
        for b1 in &s.blocks {
            for b2 in &s.blocks {
                if b1.start != b2.start {
                    assert!(conj.block(b1.start, b2.start, b1.multiplicity, b2.multiplicity).is_zero(&f));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn projectors_do_not_depend_on_normalization(seed in any::<u64>(), n in 1usize..=4) {
        let f = FqField::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_split_connection(&f, n, 12, &mut rng);
        let a = elementary_split(&c, 12, &SplitOptions::default()).unwrap();
        let b = elementary_split(&c, 12, &SplitOptions { hints: vec![], seed: Some(seed), reverse: true }).unwrap();
        prop_assert_eq!(a.blocks.len(), b.blocks.len());
        for x in &a.blocks {
            let y = b.block_for(&x.lambda).unwrap();
            prop_assert_eq!(&x.projector, &y.projector);
        }
        let fam: Vec<_> = b.blocks.iter().map(|x| (x.lambda, x.projector.clone())).collect();
        prop_assert!(verify_projector_family(&c, &fam, &a).unwrap().accepted());
    }

    #[test]
    fn gauge_action_is_a_group_action(seed in any::<u64>()) {
        let f = FqField::prime(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = FormalConnection::new(f.clone(), (0..10).map(|_| random_matrix(&f, 3, &mut rng)).collect(), 10).unwrap();
        let g = random_gauge(&f, 3, 10, &mut rng);
        let h = random_gauge(&f, 3, 10, &mut rng);
        let lhs = gauge_apply(&c, &g.compose(&f, &h)).unwrap();
        let rhs = gauge_apply(&gauge_apply(&c, &g).unwrap(), &h).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(gauge_apply(&c, &GaugeTransform::identity(&f, 3, 10)).unwrap(), c);
    }

    #[test]
    fn perturbed_euler_blocks_are_rigid(seed in any::<u64>()) {
        let f = FqField::prime(7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mk = |lambda: u64, rng: &mut ChaCha8Rng| {
            let mut a0 = Matrix::scalar(&f, 2, f.neg(&lambda));
            a0.set(0, 1, f.random(rng));
            let mut coeffs = vec![a0];
            for _ in 1..3 {
                coeffs.push(random_matrix(&f, 2, rng));
            }
            FormalConnection::new(f.clone(), coeffs, 20).unwrap()
        };
        let l1 = rng.gen_range(0..7u64);
        let l2 = (l1 + rng.gen_range(1..7u64)) % 7;
        let a = mk(l1, &mut rng);
        let b = mk(l2, &mut rng);
        let rep = verify_morphism_rigidity(&a, &b, 3, 20, seed).unwrap();
        prop_assert!(rep.only_zero());
    }
}
