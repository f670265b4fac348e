//! Frobenius p-linear algebra actions `b -> Sigma_b` on `H[[q, t]]` and the
//! checks built on them: axioms, covariant constancy, nilpotency, and the
//! relation with the elementary splitting.
//!
//! Operators are stored for basis classes only; every other class acts
//! through `Sigma_{sum c_i b_i} = sum c_i^p Sigma_{b_i}`, with `q^a` sent to `q^{pa}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::algebra::{Field, MatSeries, Matrix};
use crate::connection::{verify_projector_family, ProjectorVerdict, SplittingResult};
use crate::pcurvature::{nilpotency_test_series, p_curvature, BiMat, BigradedModule, Frame, NilpotencyVerdict};
use crate::quantum::{eigendata_c1, EigenData, QHRing, QVec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionSource {
    /// `Sigma_{c1}` is the p-curvature of the q-connection along `t q d/dq`.
    Canonical,
    /// The classical (`q = 0`) operations generated from degree-2 classes.
    Classical,
    /// Supplied operators.
    Table,
}

impl ActionSource {
    pub fn name(&self) -> &'static str {
        match self {
            ActionSource::Canonical => "canonical",
            ActionSource::Classical => "classical",
            ActionSource::Table => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrobeniusAction<F: Field> {
    pub ring: QHRing<F>,
    pub module: BigradedModule<F>,
    pub p: u64,
    pub q_order: usize,
    pub t_order: usize,
    pub source: ActionSource,
    /// `Sigma_{e_i}` for each basis class.
    pub ops: Vec<BiMat<F>>,
    /// Optional `theta`-components; only their shape is checked.
    pub theta: Vec<Option<BiMat<F>>>,
    /// Operators declared for further classes, checked against the closure.
    pub declared: Vec<(Vec<F::Elem>, BiMat<F>)>,
}

/// `(-1)^{p(p-1)/2 |b| |b'|}` is `-1`.
pub fn cartan_sign_negative(p: u64, deg_a: i64, deg_b: i64) -> bool {
    let e = (p * (p - 1) / 2) as i128 * deg_a as i128 * deg_b as i128;
    e.rem_euclid(2) == 1
}

/// `q`-order needed to set `q = 1` in every basis operator.
pub fn default_q_order<F: Field>(ring: &QHRing<F>, p: u64) -> Result<usize> {
    let deg = ring.degrees.as_ref().ok_or(Error::MissingDegree)?;
    let lo = *deg.iter().min().unwrap();
    let hi = *deg.iter().max().unwrap();
    Ok(((hi + p as i64 * hi - lo).max(0) / 2 + 1) as usize)
}

fn characteristic<F: Field>(ring: &QHRing<F>) -> Result<u64> {
    match ring.field.characteristic() {
        0 => Err(Error::CharacteristicZero),
        p => Ok(p),
    }
}

impl<F: Field> FrobeniusAction<F> {
    pub fn field(&self) -> &F {
        &self.ring.field
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.module.degrees[i]
    }

    fn frob(&self, c: &F::Elem) -> F::Elem {
        self.field().pow(c, self.p)
    }

    pub fn identity(&self) -> BiMat<F> {
        BiMat::identity(self.field(), self.ring.rank(), self.q_order, self.t_order)
    }

    /// `Sigma_v` for `v in H`.
    pub fn closure(&self, v: &[F::Elem]) -> BiMat<F> {
        self.closure_q(&alloc::vec![v.to_vec()])
    }

    /// `Sigma_v` for `v in H[q]`.
    pub fn closure_q(&self, v: &QVec<F>) -> BiMat<F> {
        let f = self.field();
        let d = self.ring.rank();
        let mut out = BiMat::zero(f, d, d, self.q_order, self.t_order);
        for (a, c) in v.iter().enumerate() {
            let shift = a * self.p as usize;
            if shift >= self.q_order {
                break;
            }
            for (i, x) in c.iter().enumerate() {
                if f.is_zero(x) {
                    continue;
                }
                let op = self.ops[i].scale(f, &self.frob(x));
                for qa in 0..self.q_order - shift {
                    for tb in 0..self.t_order {
                        let m = out.at(qa + shift, tb).add(f, op.at(qa, tb));
                        *out.at_mut(qa + shift, tb) = m;
                    }
                }
            }
        }
        out
    }

    /// Each basis operator at `q = 1`, using its degree `p |b|`.
    pub fn collapsed_basis(&self) -> Result<Vec<MatSeries<F>>> {
        (0..self.ring.rank()).map(|i| self.module.collapse(&self.ops[i], self.p as i64 * self.degree(i))).collect()
    }

    /// `Sigma_v` at `q = 1` for `v in H`, from collapsed basis operators.
    pub fn closure_q1(&self, collapsed: &[MatSeries<F>], v: &[F::Elem]) -> MatSeries<F> {
        let f = self.field();
        let d = self.ring.rank();
        let mut out = MatSeries::zero(f, d, d, self.t_order);
        for (i, x) in v.iter().enumerate() {
            if !f.is_zero(x) {
                out = out.add(f, &collapsed[i].scale(f, &self.frob(x)));
            }
        }
        out
    }

    pub fn c1_operator(&self) -> BiMat<F> {
        self.closure(&self.ring.c1)
    }
}

fn new_action<F: Field>(ring: &QHRing<F>, q_order: usize, t_order: usize, source: ActionSource, ops: Vec<BiMat<F>>) -> Result<FrobeniusAction<F>> {
    let p = characteristic(ring)?;
    let module = ring.bigraded_module()?;
    let d = ring.rank();
    if ops.len() != d {
        return Err(Error::DimensionMismatch(format!("{} operators for a basis of {d}", ops.len())));
    }
    for (i, op) in ops.iter().enumerate() {
        if op.rows != d || op.cols != d || op.q_order < q_order || op.t_order < t_order {
            return Err(Error::DimensionMismatch(format!(
                "operator for {} is {}x{} to order (q^{}, t^{}), need {d}x{d} to (q^{q_order}, t^{t_order})",
                ring.names[i], op.rows, op.cols, op.q_order, op.t_order
            )));
        }
    }
    let ops = ops.into_iter().map(|o| o.truncate(q_order, t_order)).collect();
    Ok(FrobeniusAction { ring: ring.clone(), module, p, q_order, t_order, source, ops, theta: alloc::vec![None; d], declared: Vec::new() })
}

/// An action from supplied basis operators.
pub fn action_from_table<F: Field>(
    ring: &QHRing<F>,
    q_order: usize,
    t_order: usize,
    ops: Vec<BiMat<F>>,
    theta: Vec<Option<BiMat<F>>>,
    declared: Vec<(Vec<F::Elem>, BiMat<F>)>,
) -> Result<FrobeniusAction<F>> {
    let mut a = new_action(ring, q_order, t_order, ActionSource::Table, ops)?;
    if !theta.is_empty() {
        if theta.len() != ring.rank() {
            return Err(Error::DimensionMismatch(format!("{} theta operators for a basis of {}", theta.len(), ring.rank())));
        }
        a.theta = theta;
    }
    a.declared = declared.into_iter().map(|(v, o)| (v, o.truncate(q_order, t_order))).collect();
    Ok(a)
}

/// The canonical datum: `Sigma_{c1} := F_{t q d/dq}`, extended to the basis
/// through the q-free powers of `c1` by Cartan and Frobenius linearity.
pub fn canonical_action<F: Field>(ring: &QHRing<F>, q_order: usize, t_order: usize) -> Result<FrobeniusAction<F>> {
    let f = &ring.field;
    let p = characteristic(ring)?;
    let d = ring.rank();
    let module = ring.bigraded_module()?;
    let sigma_c1 = module.p_curvature(Frame::TQDq, q_order, t_order)?;
    // powers of c1 at q^0
    let mut powers: Vec<Vec<F::Elem>> = alloc::vec![ring.unit_vec()];
    let mut cur: QVec<F> = alloc::vec![ring.unit_vec()];
    for k in 1..d {
        cur = ring.mul_q(&cur, &alloc::vec![ring.c1.clone()]);
        if cur.len() > 1 {
            return Err(Error::NotC1Generated(format!("c1^{k} involves q")));
        }
        powers.push(cur.first().cloned().unwrap_or_else(|| alloc::vec![f.zero(); d]));
    }
    let pmat = Matrix::from_columns(d, &powers);
    let beta = pmat.inverse(f).ok_or_else(|| Error::NotC1Generated(format!("powers of c1 span a space of rank {} < {d}", pmat.rank(f))))?;
    let mut pows = alloc::vec![BiMat::identity(f, d, q_order, t_order)];
    for k in 1..d {
        pows.push(pows[k - 1].mul(f, &sigma_c1));
    }
    let ops = (0..d)
        .map(|i| {
            let mut op = BiMat::zero(f, d, d, q_order, t_order);
            for (k, pk) in pows.iter().enumerate() {
                let c = f.pow(beta.get(k, i), p);
                if !f.is_zero(&c) {
                    op = op.add(f, &pk.scale(f, &c));
                }
            }
            op
        })
        .collect();
    let mut a = new_action(ring, q_order, t_order, ActionSource::Canonical, ops)?;
    a.declared.push((ring.c1.clone(), sigma_c1));
    Ok(a)
}

/// Classical operations: `St(g) = g^p - t^{p-1} g` (cup products) for
/// degree-2 classes `g`, extended multiplicatively. Only the `q^0` part.
pub fn classical_steenrod_action<F: Field>(ring: &QHRing<F>, t_order: usize) -> Result<FrobeniusAction<F>> {
    let f = &ring.field;
    let p = characteristic(ring)?;
    let d = ring.rank();
    let deg = ring.degrees.clone().ok_or(Error::MissingDegree)?;
    let cup = |x: &[F::Elem], y: &[F::Elem]| -> Vec<F::Elem> {
        ring.mul_q(&alloc::vec![x.to_vec()], &alloc::vec![y.to_vec()]).into_iter().next().unwrap_or_else(|| alloc::vec![f.zero(); d])
    };
    let cup_matrix = |x: &[F::Elem]| -> Matrix<F> {
        let cols: Vec<Vec<F::Elem>> = (0..d).map(|j| cup(x, &ring.basis_vec(j))).collect();
        Matrix::from_columns(d, &cols)
    };
    let gens: Vec<usize> = (0..d).filter(|&i| deg[i] == 2).collect();
    let st_gen: Vec<MatSeries<F>> = gens
        .iter()
        .map(|&g| {
            let gv = ring.basis_vec(g);
            let mut gp = ring.unit_vec();
            for _ in 0..p {
                gp = cup(&gp, &gv);
            }
            let mut s = MatSeries::constant(f, cup_matrix(&gp), t_order);
            if (p as usize - 1) < t_order {
                s.coeffs[p as usize - 1] = s.coeffs[p as usize - 1].sub(f, &cup_matrix(&gv));
            }
            s
        })
        .collect();
    // monomials in the generators, breadth first by degree
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut monos: Vec<(Vec<F::Elem>, MatSeries<F>)> = alloc::vec![(ring.unit_vec(), MatSeries::identity(f, d, t_order))];
    let mut frontier = monos.clone();
    for _ in 0..(max_deg / 2).max(0) {
        let mut next = Vec::new();
        for (v, s) in &frontier {
            for (gi, &g) in gens.iter().enumerate() {
                next.push((cup(v, &ring.basis_vec(g)), s.mul(f, &st_gen[gi])));
            }
        }
        monos.extend(next.iter().cloned());
        frontier = next;
    }
    let cols: Vec<Vec<F::Elem>> = monos.iter().map(|(v, _)| v.clone()).collect();
    let span = Matrix::from_columns(d, &cols);
    let mut ops = Vec::with_capacity(d);
    for i in 0..d {
        let sol = span
            .solve(f, &Matrix::from_columns(d, &[ring.basis_vec(i)]))
            .map_err(|_| Error::NotDegreeTwoGenerated(format!("{} is not a polynomial in degree-2 classes", ring.names[i])))?;
        let mut op = MatSeries::zero(f, d, d, t_order);
        for (k, (_, s)) in monos.iter().enumerate() {
            let c = f.pow(sol.particular.get(k, 0), p);
            if !f.is_zero(&c) {
                op = op.add(f, &s.scale(f, &c));
            }
        }
        let mut b = BiMat::zero(f, d, d, 1, t_order);
        for (tb, m) in op.coeffs.into_iter().enumerate() {
            *b.at_mut(0, tb) = m;
        }
        ops.push(b);
    }
    new_action(ring, 1, t_order, ActionSource::Classical, ops)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
    Skipped(String),
}

impl Outcome {
    pub fn passed(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    pub fn failed(&self) -> bool {
        matches!(self, Outcome::Fail(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomCheck {
    pub name: &'static str,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub q_order: usize,
    pub t_order: usize,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| !c.outcome.failed())
    }

    pub fn get(&self, name: &str) -> Option<&Outcome> {
        self.checks.iter().find(|c| c.name == name).map(|c| &c.outcome)
    }
}

fn describe(w: Option<(usize, usize, usize, usize)>) -> Option<String> {
    w.map(|(a, b, i, j)| format!("coefficient of q^{a} t^{b} at ({i}, {j})"))
}

/// Check the action's axioms to its truncation orders.
pub fn verify_axioms<F: Field>(a: &FrobeniusAction<F>) -> Result<AxiomReport> {
    let f = a.field();
    let d = a.ring.rank();
    let names = &a.ring.names;
    let mut checks = Vec::new();

    let mut degree = Outcome::Pass;
    for i in 0..d {
        let s = a.p as i64 * a.degree(i);
        if let Some(w) = a.module.homogeneity_witness(&a.ops[i], s) {
            degree = Outcome::Fail(format!("Sigma_{} is not of degree {s}: {}", names[i], describe(Some(w)).unwrap()));
            break;
        }
    }
    checks.push(AxiomCheck { name: "degree", outcome: degree });

    let unit = match describe(a.ops[a.ring.unit].sub(f, &a.identity()).first_nonzero(f)) {
        None => Outcome::Pass,
        Some(w) => Outcome::Fail(format!("Sigma_{} - id: {w}", names[a.ring.unit])),
    };
    checks.push(AxiomCheck { name: "unitality", outcome: unit });

    let mut lin = Outcome::Pass;
    if a.declared.is_empty() {
        lin = Outcome::Skipped("no operators declared beyond the basis".into());
    }
    for (v, op) in &a.declared {
        if let Some(w) = describe(a.closure(v).sub(f, op).first_nonzero(f)) {
            let class: Vec<String> = v.iter().map(|x| f.format(x)).collect();
            lin = Outcome::Fail(format!("declared operator for ({}) differs from sum c_i^p Sigma_i: {w}", class.join(", ")));
            break;
        }
    }
    checks.push(AxiomCheck { name: "frobenius_linearity", outcome: lin });

    let mut cartan = Outcome::Pass;
    'outer: for i in 0..d {
        for j in 0..d {
            let lhs = a.closure_q(a.ring.basis_product(i, j));
            let mut rhs = a.ops[i].mul(f, &a.ops[j]);
            if cartan_sign_negative(a.p, a.degree(i), a.degree(j)) {
                rhs = rhs.neg(f);
            }
            if let Some(w) = describe(lhs.sub(f, &rhs).first_nonzero(f)) {
                cartan = Outcome::Fail(format!("({}, {}): {w}", names[i], names[j]));
                break 'outer;
            }
        }
    }
    checks.push(AxiomCheck { name: "cartan", outcome: cartan });

    let classical = match classical_steenrod_action(&a.ring, a.t_order) {
        Err(Error::NotDegreeTwoGenerated(m)) => Outcome::Skipped(m),
        Err(e) => return Err(e),
        Ok(c) => {
            let mut out = Outcome::Pass;
            for i in 0..d {
                let diff = a.ops[i].truncate(1, a.t_order).sub(f, &c.ops[i]);
                if let Some(w) = describe(diff.first_nonzero(f)) {
                    out = Outcome::Fail(format!("Sigma_{} at q = 0: {w}", names[i]));
                    break;
                }
            }
            out
        }
    };
    checks.push(AxiomCheck { name: "classical_limit", outcome: classical });

    let mut noneq = Outcome::Pass;
    for i in 0..d {
        let mut pw: QVec<F> = alloc::vec![a.ring.unit_vec()];
        for _ in 0..a.p {
            pw = a.ring.mul_q(&pw, &alloc::vec![a.ring.basis_vec(i)]);
        }
        let mut expect = BiMat::zero(f, d, d, a.q_order, 1);
        // multiplication by an element of H[q]: shift each q-component
        for (s, comp) in pw.iter().enumerate() {
            let ms = a.ring.mult_matrix_q(comp);
            for (e, me) in ms.iter().enumerate() {
                if s + e < a.q_order {
                    *expect.at_mut(s + e, 0) = expect.at(s + e, 0).add(f, me);
                }
            }
        }
        if let Some(w) = describe(a.ops[i].truncate(a.q_order, 1).sub(f, &expect).first_nonzero(f)) {
            noneq = Outcome::Fail(format!("Sigma_{} at t = 0 is not multiplication by {}^p: {w}", names[i], names[i]));
            break;
        }
    }
    checks.push(AxiomCheck { name: "non_equivariant_limit", outcome: noneq });

    let cc = verify_covariant_constancy(a)?;
    let cov = match (&cc.q_connection, &cc.t_connection) {
        (Outcome::Fail(w), _) | (_, Outcome::Fail(w)) => Outcome::Fail(w.clone()),
        _ => Outcome::Pass,
    };
    checks.push(AxiomCheck { name: "covariant_constancy", outcome: cov });

    let mut theta = Outcome::Skipped("no theta components supplied".into());
    if a.theta.iter().any(|t| t.is_some()) {
        theta = Outcome::Pass;
        for (i, t) in a.theta.iter().enumerate() {
            if let Some(t) = t {
                if t.rows != d || t.cols != d {
                    theta = Outcome::Fail(format!("theta component of {} is {}x{}", names[i], t.rows, t.cols));
                }
            }
        }
    }
    checks.push(AxiomCheck { name: "theta_shape", outcome: theta });

    Ok(AxiomReport { q_order: a.q_order, t_order: a.t_order, checks })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CovariantVerdict {
    /// `[Sigma_b, nabla_{t q d/dq}] = 0` for every basis class.
    pub q_connection: Outcome,
    /// `[Sigma_b, nabla_{t^2 d/dt}] = 0` after setting `q = 1`.
    pub t_connection: Outcome,
}

impl CovariantVerdict {
    pub fn passed(&self) -> bool {
        !self.q_connection.failed() && !self.t_connection.failed()
    }
}

pub fn verify_covariant_constancy<F: Field>(a: &FrobeniusAction<F>) -> Result<CovariantVerdict> {
    let f = a.field();
    let d = a.ring.rank();
    let c = a.module.c1_matrix(a.q_order, a.t_order);
    let mut qv = Outcome::Pass;
    for i in 0..d {
        let s = &a.ops[i];
        // [S, tq d/dq + C] = -tq dS/dq + S C - C S
        let comm = s.mul(f, &c).sub(f, &c.mul(f, s)).sub(f, &s.derive(f, true, 1, 1));
        if let Some(w) = describe(comm.first_nonzero(f)) {
            qv = Outcome::Fail(format!("[Sigma_{}, nabla_(t q d/dq)]: {w}", a.ring.names[i]));
            break;
        }
    }
    let tv = match a.collapsed_basis() {
        Err(Error::CollapseNotFinite(m)) | Err(Error::DegreeMismatch(m)) => Outcome::Skipped(m),
        Err(e) => return Err(e),
        Ok(col) => {
            let conn = a.ring.build_t_connection(a.t_order)?;
            let mut out = Outcome::Pass;
            for (i, s) in col.iter().enumerate() {
                let comm = s.commutator(f, &conn.a).sub(f, &s.t2_derivative(f));
                if let Some((k, r, cc)) = comm.first_nonzero(f) {
                    out = Outcome::Fail(format!("[Sigma_{} at q = 1, nabla_(t^2 d/dt)]: coefficient of t^{k} at ({r}, {cc})", a.ring.names[i]));
                    break;
                }
            }
            out
        }
    };
    Ok(CovariantVerdict { q_connection: qv, t_connection: tv })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop33Verdict {
    /// Nilpotency of `Sigma_{c1} + F_{t^2 d/dt}` at `q = 1`.
    pub nilpotency: NilpotencyVerdict,
    /// `Sigma_{c1} - F_{t q d/dq}` has no terms below `q^p`.
    pub divisible_by_q_p: Outcome,
    /// The `t^0` part of that difference vanishes.
    pub t0_part_vanishes: Outcome,
}

impl Prop33Verdict {
    pub fn passed(&self) -> bool {
        self.nilpotency.nilpotent && !self.divisible_by_q_p.failed() && !self.t0_part_vanishes.failed()
    }
}

pub fn verify_prop33<F: Field>(a: &FrobeniusAction<F>) -> Result<Prop33Verdict> {
    let f = a.field();
    let col = a.collapsed_basis()?;
    let sigma = a.closure_q1(&col, &a.ring.c1);
    let conn = a.ring.build_t_connection(a.t_order)?;
    let ft = p_curvature(&conn, Frame::T2Dt)?.series(f).ok_or(Error::InvalidInput("p-curvature along t^2 d/dt has a pole".into()))?;
    let k = sigma.order().min(ft.order());
    let s = sigma.truncate(k).add(f, &ft.truncate(k));
    let nilpotency = nilpotency_test_series(f, &s);

    let fq = a.module.p_curvature(Frame::TQDq, a.q_order, a.t_order)?;
    let diff = a.c1_operator().sub(f, &fq);
    let mut below = Outcome::Pass;
    let mut t0 = Outcome::Pass;
    for qa in 0..a.q_order {
        for tb in 0..a.t_order {
            if let Some((i, j)) = diff.at(qa, tb).first_nonzero(f) {
                if qa < a.p as usize && below.passed() {
                    below = Outcome::Fail(describe(Some((qa, tb, i, j))).unwrap());
                }
                if tb == 0 && t0.passed() {
                    t0 = Outcome::Fail(describe(Some((qa, tb, i, j))).unwrap());
                }
            }
        }
    }
    Ok(Prop33Verdict { nilpotency, divisible_by_q_p: below, t0_part_vanishes: t0 })
}

fn eigendata_for<F: Field>(a: &FrobeniusAction<F>, split: &SplittingResult<F>) -> Result<EigenData<F>> {
    let hints: Vec<F::Elem> = split.blocks.iter().map(|b| b.lambda.clone()).collect();
    eigendata_c1(&a.ring, &hints)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionVerdict {
    pub projector: ProjectorVerdict,
}

/// Feed `{Sigma_{e_lambda}}` at `q = 1` to the projector characterization.
pub fn verify_idempotent_projection<F: Field>(a: &FrobeniusAction<F>, split: &SplittingResult<F>) -> Result<ProjectionVerdict> {
    let eig = eigendata_for(a, split)?;
    let col = a.collapsed_basis()?;
    let family: Vec<(F::Elem, MatSeries<F>)> =
        eig.lambdas.iter().zip(&eig.idempotents).map(|(l, e)| (l.clone(), a.closure_q1(&col, e))).collect();
    let conn = a.ring.build_t_connection(split.order.min(a.t_order))?;
    Ok(ProjectionVerdict { projector: verify_projector_family(&conn, &family, split)? })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VanishingVerdict {
    pub outcome: Outcome,
    /// Number of `(lambda, b, lambda')` triples checked.
    pub checked: usize,
}

/// `Sigma_{b * e_lambda}` kills the block `lambda' != lambda` of the splitting.
pub fn verify_orthogonal_vanishing<F: Field>(a: &FrobeniusAction<F>, split: &SplittingResult<F>) -> Result<VanishingVerdict> {
    let f = a.field();
    let d = a.ring.rank();
    let eig = eigendata_for(a, split)?;
    let col = a.collapsed_basis()?;
    let mut checked = 0;
    for (l, e) in eig.lambdas.iter().zip(&eig.idempotents) {
        for b in 0..d {
            let bl = a.ring.mul_q1(&a.ring.basis_vec(b), e);
            let s = a.closure_q1(&col, &bl);
            for blk in &split.blocks {
                if blk.lambda == *l {
                    continue;
                }
                checked += 1;
                let cols = split.gauge.p.block(0, blk.start, d, blk.multiplicity);
                let k = s.order().min(cols.order());
                if let Some((ord, i, j)) = s.truncate(k).mul(f, &cols.truncate(k)).first_nonzero(f) {
                    return Ok(VanishingVerdict {
                        outcome: Outcome::Fail(format!(
                            "Sigma_({} * e_{}) on block {}: coefficient of t^{ord} at ({i}, {j})",
                            a.ring.names[b],
                            f.format(l),
                            f.format(&blk.lambda)
                        )),
                        checked,
                    });
                }
            }
        }
    }
    Ok(VanishingVerdict { outcome: Outcome::Pass, checked })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenblockVerdict<F: Field> {
    pub lambda: F::Elem,
    /// `Sigma_{c1} - lambda^p` restricted to the block.
    pub operator_route: NilpotencyVerdict,
    /// `u = c1 * e_lambda - lambda e_lambda`: `u^k = 0` in the ring and `Sigma_u^k = 0`.
    pub algebra_index: usize,
    pub algebra_route: bool,
    pub routes_agree: bool,
}

pub fn verify_eigenblock_nilpotency<F: Field>(a: &FrobeniusAction<F>, split: &SplittingResult<F>) -> Result<Vec<EigenblockVerdict<F>>> {
    let f = a.field();
    let eig = eigendata_for(a, split)?;
    let col = a.collapsed_basis()?;
    let sigma = a.closure_q1(&col, &a.ring.c1);
    let k = sigma.order().min(split.gauge.p.order());
    let conj = split.gauge.inv.truncate(k).mul(f, &sigma.truncate(k)).mul(f, &split.gauge.p.truncate(k));
    let mut out = Vec::new();
    for blk in split.sorted_blocks() {
        let x = eig.index_of(&blk.lambda).ok_or_else(|| Error::LabelMismatch(f.format(&blk.lambda)))?;
        let lp = f.pow(&blk.lambda, a.p);
        let m = blk.multiplicity;
        let restricted = conj.block(blk.start, blk.start, m, m).sub(f, &MatSeries::constant(f, Matrix::scalar(f, m, lp), k));
        let operator_route = nilpotency_test_series(f, &restricted);
        let u = &eig.nilpotent_parts[x];
        let idx = eig.nilpotency_indices[x];
        let su = a.closure_q1(&col, u);
        let algebra_route = su.pow(f, idx as u32).is_zero(f) && {
            let mut pw = u.clone();
            for _ in 1..idx {
                pw = a.ring.mul_q1(&pw, u);
            }
            pw.iter().all(|c| f.is_zero(c))
        };
        out.push(EigenblockVerdict {
            lambda: blk.lambda.clone(),
            routes_agree: operator_route.nilpotent == algebra_route,
            operator_route,
            algebra_index: idx,
            algebra_route,
        });
    }
    Ok(out)
}
