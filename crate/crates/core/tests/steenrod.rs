use exptype_core::algebra::*;
use exptype_core::connection::*;
use exptype_core::pcurvature::BiMat;
use exptype_core::quantum::*;
use exptype_core::steenrod::*;
use exptype_core::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(ring: &QHRing<FqField>, p: u64) -> (FrobeniusAction<FqField>, SplittingResult<FqField>) {
    let m = default_q_order(ring, p).unwrap();
    let t = 2 * p as usize + 4;
    let a = canonical_action(ring, m, t).unwrap();
    let conn = ring.build_t_connection(t).unwrap();
    let split = elementary_split(&conn, t, &SplitOptions::default()).unwrap();
    (a, split)
}

fn canonical_cp(n: usize, p: u64) -> (FrobeniusAction<FqField>, SplittingResult<FqField>) {
    setup(&cp_n_ring(n, FqField::prime(p).unwrap()).unwrap(), p)
}

/// `1, h, h^2` with `h` nilpotent and no quantum corrections; `c1 = h`.
fn nilpotent_ring(f: &FqField) -> QHRing<FqField> {
    QHRing::new(
        f.clone(),
        RingData {
            names: vec!["1".into(), "h".into(), "h2".into()],
            degrees: Some(vec![0, 2, 4]),
            parities: vec![0, 0, 0],
            dim: 2,
            unit: 0,
            c1: vec![f.zero(), f.one(), f.zero()],
            products: vec![ProductTerm { left: 1, right: 1, q_power: 0, target: 2, coeff: f.one() }],
        },
    )
    .unwrap()
}

fn assert_all_pass(a: &FrobeniusAction<FqField>, split: &SplittingResult<FqField>) {
    let ax = verify_axioms(a).unwrap();
    assert!(ax.passed(), "{ax:?}");
    let cc = verify_covariant_constancy(a).unwrap();
    assert!(cc.q_connection.passed() && cc.t_connection.passed(), "{cc:?}");
    let pr = verify_prop33(a).unwrap();
    assert!(pr.passed(), "{pr:?}");
    let proj = verify_idempotent_projection(a, split).unwrap();
    assert!(proj.projector.accepted(), "{proj:?}");
    let van = verify_orthogonal_vanishing(a, split).unwrap();
    assert!(van.outcome.passed(), "{van:?}");
    for v in verify_eigenblock_nilpotency(a, split).unwrap() {
        assert!(v.operator_route.nilpotent && v.algebra_route && v.routes_agree, "{v:?}");
    }
}

#[test]
fn cartan_signs() {
    // p(p-1)/2 is odd for p = 3, 7 and even for p = 5, 13
    assert!(cartan_sign_negative(3, 1, 1));
    assert!(cartan_sign_negative(7, 3, 5));
    assert!(!cartan_sign_negative(5, 1, 1));
    assert!(!cartan_sign_negative(13, 1, 3));
    for p in [3u64, 5, 7, 11] {
        assert!(!cartan_sign_negative(p, 2, 3));
        assert!(!cartan_sign_negative(p, 0, 1));
    }
}

#[test]
fn classical_action_on_cp1() {
    let f = FqField::prime(3).unwrap();
    let ring = cp_n_ring(1, f.clone()).unwrap();
    let a = classical_steenrod_action(&ring, 6).unwrap();
    assert_eq!(a.q_order, 1);
    // St(h) 1 = h^3 - t^2 h = -t^2 h
    let st = &a.ops[1];
    for b in 0..6 {
        let m = st.at(0, b);
        let want = if b == 2 { f.neg(&f.one()) } else { f.zero() };
        assert_eq!(m.get(1, 0), &want, "t^{b}");
        assert!(f.is_zero(m.get(0, 0)) && f.is_zero(m.get(0, 1)));
    }
    let ax = verify_axioms(&a).unwrap();
    assert!(ax.passed(), "{ax:?}");
    assert_eq!(ax.get("cartan"), Some(&Outcome::Pass));
    assert_eq!(ax.get("classical_limit"), Some(&Outcome::Pass));
}

#[test]
fn classical_action_on_cp2_squares() {
    // St(h)^2 = St(h^2) on the classical ring
    let p = 5;
    let f = FqField::prime(p).unwrap();
    let ring = cp_n_ring(2, f.clone()).unwrap();
    let a = classical_steenrod_action(&ring, 12).unwrap();
    assert_eq!(a.ops[1].mul(&f, &a.ops[1]), a.ops[2]);
    // St(h) 1 = -t^4 h, St(h) h = -t^4 h^2
    let st = &a.ops[1];
    assert_eq!(st.at(0, 4).get(1, 0), &f.neg(&f.one()));
    assert_eq!(st.at(0, 4).get(2, 1), &f.neg(&f.one()));
    assert!(verify_axioms(&a).unwrap().passed());
}

#[test]
fn canonical_datum_on_projective_spaces() {
    for p in [3u64, 5] {
        let (a, split) = canonical_cp(1, p);
        assert_eq!(a.source, ActionSource::Canonical);
        assert_all_pass(&a, &split);
        // Sigma_{c1} + F_{t^2 d/dt} vanishes identically here
        assert_eq!(verify_prop33(&a).unwrap().nilpotency.index, Some(1));
    }
    for p in [7u64, 13] {
        let (a, split) = canonical_cp(2, p);
        assert_all_pass(&a, &split);
    }
    let f9 = FqField::with_degree(3, 2).unwrap();
    let (a, split) = setup(&cp_n_ring(1, f9).unwrap(), 3);
    assert_all_pass(&a, &split);
}

#[test]
fn canonical_datum_needs_c1_generation() {
    // c1 = 3h vanishes mod 3
    let ring = cp_n_ring(2, FqField::prime(3).unwrap()).unwrap();
    assert!(matches!(canonical_action(&ring, 8, 8), Err(Error::NotC1Generated(_))));
    // a degree-4 generator: neither c1-generated nor degree-2 generated
    let f = FqField::prime(5).unwrap();
    let ring = QHRing::new(
        f.clone(),
        RingData {
            names: vec!["1".into(), "x".into()],
            degrees: Some(vec![0, 4]),
            parities: vec![0, 0],
            dim: 2,
            unit: 0,
            c1: vec![f.zero(), f.zero()],
            products: vec![],
        },
    )
    .unwrap();
    assert!(matches!(canonical_action(&ring, 4, 4), Err(Error::NotC1Generated(_))));
    assert!(matches!(classical_steenrod_action(&ring, 4), Err(Error::NotDegreeTwoGenerated(_))));
    let id = BiMat::identity(&f, 2, 4, 4);
    let a = action_from_table(&ring, 4, 4, vec![id.clone(), id], vec![], vec![]).unwrap();
    assert!(matches!(verify_axioms(&a).unwrap().get("classical_limit"), Some(Outcome::Skipped(_))));
}

#[test]
fn preconditions() {
    let qq = QField::rationals();
    let ring = cp_n_ring(1, qq).unwrap();
    assert!(matches!(canonical_action(&ring, 4, 4), Err(Error::CharacteristicZero)));
    let f = FqField::prime(5).unwrap();
    let z2 = QHRing::new(
        f.clone(),
        RingData {
            names: vec!["1".into(), "x".into()],
            degrees: None,
            parities: vec![0, 0],
            dim: 1,
            unit: 0,
            c1: vec![f.zero(), f.one()],
            products: vec![ProductTerm { left: 1, right: 1, q_power: 0, target: 0, coeff: f.one() }],
        },
    )
    .unwrap();
    assert!(matches!(default_q_order(&z2, 5), Err(Error::MissingDegree)));
    assert!(matches!(canonical_action(&z2, 4, 4), Err(Error::MissingDegree)));
    let cp1 = cp_n_ring(1, f.clone()).unwrap();
    let short = BiMat::identity(&f, 2, 2, 2);
    assert!(matches!(action_from_table(&cp1, 4, 4, vec![short.clone(), short], vec![], vec![]), Err(Error::DimensionMismatch(_))));
}

#[test]
fn nilpotent_block() {
    for p in [3u64, 5, 7] {
        let f = FqField::prime(p).unwrap();
        let ring = nilpotent_ring(&f);
        let (a, split) = setup(&ring, p);
        assert_eq!(split.blocks.len(), 1);
        assert_all_pass(&a, &split);
        let v = &verify_eigenblock_nilpotency(&a, &split).unwrap()[0];
        assert_eq!(v.algebra_index, 3);
        // Sigma_{c1} at q = 1 is -t^{p-1} (h *), of index 3
        assert_eq!(v.operator_route.index, Some(3));
    }
}

#[test]
fn rank_one_ring_with_zero_c1() {
    let f = FqField::prime(5).unwrap();
    let ring = QHRing::new(
        f.clone(),
        RingData { names: vec!["1".into()], degrees: Some(vec![0]), parities: vec![0], dim: 0, unit: 0, c1: vec![f.zero()], products: vec![] },
    )
    .unwrap();
    let (a, split) = setup(&ring, 5);
    assert_all_pass(&a, &split);
    assert!(verify_prop33(&a).unwrap().nilpotency.nilpotent);
}

#[test]
fn broken_covariance_is_witnessed() {
    let (mut a, _) = canonical_cp(1, 3);
    let f = a.field().clone();
    let bump = a.ops[1].at(0, 1).add(&f, &Matrix::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { f.one() } else { f.zero() }));
    *a.ops[1].at_mut(0, 1) = bump;
    let cc = verify_covariant_constancy(&a).unwrap();
    assert!(cc.q_connection.failed(), "{cc:?}");
    assert!(matches!(cc.t_connection, Outcome::Skipped(_)));
    let ax = verify_axioms(&a).unwrap();
    assert!(ax.get("covariant_constancy").unwrap().failed());
    assert!(ax.get("degree").unwrap().failed());
}

#[test]
fn wrong_actions_fail_projection() {
    let (canon, split) = canonical_cp(1, 3);
    let f = canon.field().clone();
    let (m, n) = (canon.q_order, canon.t_order);
    // the identity action is not homogeneous, so q = 1 is meaningless
    let id = canon.identity();
    let a = action_from_table(&canon.ring, m, n, vec![id.clone(), id], vec![], vec![]).unwrap();
    assert!(matches!(verify_idempotent_projection(&a, &split), Err(Error::DegreeMismatch(_))));
    let ax = verify_axioms(&a).unwrap();
    assert!(ax.get("degree").unwrap().failed());
    assert!(ax.get("cartan").unwrap().failed());
    assert!(ax.get("non_equivariant_limit").unwrap().failed());
    // the classical operations, extended by zero in q, are homogeneous but wrong
    let classical = classical_steenrod_action(&canon.ring, n).unwrap();
    let ops = classical
        .ops
        .iter()
        .map(|o| {
            let mut b = BiMat::zero(&f, 2, 2, m, n);
            for t in 0..n {
                *b.at_mut(0, t) = o.at(0, t).clone();
            }
            b
        })
        .collect();
    let a = action_from_table(&canon.ring, m, n, ops, vec![], vec![]).unwrap();
    assert_eq!(verify_axioms(&a).unwrap().get("degree"), Some(&Outcome::Pass));
    assert!(verify_covariant_constancy(&a).unwrap().q_connection.failed());
    let proj = verify_idempotent_projection(&a, &split).unwrap();
    assert!(!proj.projector.accepted(), "{proj:?}");
    assert!(verify_orthogonal_vanishing(&a, &split).unwrap().outcome.failed());
}

#[test]
fn frobenius_constant_matters() {
    let f = FqField::with_degree(3, 2).unwrap();
    let ring = cp_n_ring(1, f.clone()).unwrap();
    let (canon, _) = setup(&ring, 3);
    let g = f.generator();
    assert_ne!(f.pow(&g, 3), g);
    let class = vec![f.zero(), g];
    let good = canon.ops[1].scale(&f, &f.pow(&g, 3));
    let bad = canon.ops[1].scale(&f, &g);
    let mk = |op: BiMat<FqField>| action_from_table(&ring, canon.q_order, canon.t_order, canon.ops.clone(), vec![], vec![(class.clone(), op)]).unwrap();
    assert_eq!(verify_axioms(&mk(good)).unwrap().get("frobenius_linearity"), Some(&Outcome::Pass));
    assert!(verify_axioms(&mk(bad)).unwrap().get("frobenius_linearity").unwrap().failed());
}

#[test]
fn perturbed_datum_breaks_nilpotency() {
    let (mut a, split) = canonical_cp(1, 5);
    let f = a.field().clone();
    // a degree-consistent perturbation: eps t^p on the diagonal
    let eps = f.from_i64(1);
    let bump = a.ops[1].at(0, 5).add(&f, &Matrix::scalar(&f, 2, eps));
    *a.ops[1].at_mut(0, 5) = bump;
    assert_eq!(verify_axioms(&a).unwrap().get("degree"), Some(&Outcome::Pass));
    let pr = verify_prop33(&a).unwrap();
    assert!(!pr.nilpotency.nilpotent);
    assert!(pr.divisible_by_q_p.failed());
    for v in verify_eigenblock_nilpotency(&a, &split).unwrap() {
        assert!(!v.operator_route.nilpotent);
        assert!(!v.routes_agree);
    }
}

#[test]
fn labels_come_from_the_splitting() {
    let (a, split) = canonical_cp(1, 3);
    let f = a.field();
    let mut lambdas: Vec<u64> = split.blocks.iter().map(|b| b.lambda).collect();
    lambdas.sort();
    // eigenvalues of c1 = 2h with h^2 = q^2 at q = 1
    assert_eq!(lambdas, vec![f.from_i64(1), f.from_i64(2)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closure_is_frobenius_linear(seed in any::<u64>()) {
        let f = FqField::with_degree(3, 2).unwrap();
        let ring = cp_n_ring(1, f.clone()).unwrap();
        let (a, _) = setup(&ring, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u: Vec<u64> = (0..2).map(|_| f.random(&mut rng)).collect();
        let v: Vec<u64> = (0..2).map(|_| f.random(&mut rng)).collect();
        let c = f.random(&mut rng);
        let sum: Vec<u64> = u.iter().zip(&v).map(|(x, y)| f.add(x, y)).collect();
        prop_assert_eq!(a.closure(&sum), a.closure(&u).add(&f, &a.closure(&v)));
        let cu: Vec<u64> = u.iter().map(|x| f.mul(&c, x)).collect();
        prop_assert_eq!(a.closure(&cu), a.closure(&u).scale(&f, &f.pow(&c, 3)));
    }

    #[test]
    fn closure_is_basis_independent(seed in any::<u64>()) {
        // express v in a random basis b'_i = sum_k B_ki b_k and close there
        let f = FqField::prime(5).unwrap();
        let ring = cp_n_ring(2, f.clone()).unwrap();
        let a = canonical_action(&ring, 6, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = loop {
            let m = Matrix::from_fn(3, 3, |_, _| f.random(&mut rng));
            if m.inverse(&f).is_some() { break m; }
        };
        let coords: Vec<u64> = (0..3).map(|_| f.random(&mut rng)).collect();
        let mut via_new = BiMat::zero(&f, 3, 3, 6, 6);
        let mut v = vec![f.zero(); 3];
        for (i, c) in coords.iter().enumerate() {
            let col: Vec<u64> = (0..3).map(|k| *b.get(k, i)).collect();
            via_new = via_new.add(&f, &a.closure(&col).scale(&f, &f.pow(c, 5)));
            for k in 0..3 {
                v[k] = f.add(&v[k], &f.mul(c, &col[k]));
            }
        }
        prop_assert_eq!(via_new, a.closure(&v));
    }
}
