use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{gauge_apply, FormalConnection, GaugeTransform};
use crate::algebra::{generalized_eigenspaces, Field, MatSeries, Matrix};
use crate::{Error, Result};

/// A diagonal block `[start, start + len)` on which `A_0` has the single eigenvalue `eigenvalue`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockInfo<F: Field> {
    pub start: usize,
    pub len: usize,
    pub eigenvalue: F::Elem,
}

/// Solve for an off-block-diagonal `T` such that the off-block part of
/// `R + [A_0, T]` vanishes.
///
/// On the `(i, j)` block this is `(d + L) T = -R` with `d = mu_i - mu_j` and
/// `L(X) = N_i X - X N_j` nilpotent; the inverse is a finite Neumann series.
pub fn solve_block_sylvester<F: Field>(f: &F, a0: &Matrix<F>, r: &Matrix<F>, blocks: &[BlockInfo<F>]) -> Result<Matrix<F>> {
    let d = a0.rows;
    if !a0.is_square() || r.rows != d || r.cols != d {
        return Err(Error::DimensionMismatch(format!("A0 {}x{}, R {}x{}", a0.rows, a0.cols, r.rows, r.cols)));
    }
    let mut t = Matrix::zeros(f, d, d);
    for bi in blocks {
        let ni = a0.block(bi.start, bi.start, bi.len, bi.len).sub(f, &Matrix::scalar(f, bi.len, bi.eigenvalue.clone()));
        for bj in blocks {
            if bi.start == bj.start {
                continue;
            }
            let rij = r.block(bi.start, bj.start, bi.len, bj.len);
            if rij.is_zero(f) {
                continue;
            }
            let delta = f.sub(&bi.eigenvalue, &bj.eigenvalue);
            let dinv = f.inv(&delta).ok_or_else(|| Error::EigenvalueDifferenceNotInvertible(f.format(&delta)))?;
            let nj = a0.block(bj.start, bj.start, bj.len, bj.len).sub(f, &Matrix::scalar(f, bj.len, bj.eigenvalue.clone()));
            // T = sum_k (-1)^k d^{-k-1} L^k(-R)
            let mut term = rij.neg(f).scale(f, &dinv);
            let mut acc = term.clone();
            for _ in 0..(bi.len + bj.len) {
                term = ni.mul(f, &term).sub(f, &term.mul(f, &nj)).scale(f, &f.neg(&dinv));
                if term.is_zero(f) {
                    break;
                }
                acc = acc.add(f, &term);
            }
            t.set_block(bi.start, bj.start, &acc);
        }
    }
    Ok(t)
}

/// Choices that do not change the mathematical result of a splitting.
#[derive(Debug, Clone)]
pub struct SplitOptions<F: Field> {
    /// Candidate exponents (eigenvalues of `-A_0`) for fields where roots
    /// cannot be found automatically. Each one is verified.
    pub hints: Vec<F::Elem>,
    /// Randomize the basis inside each generalized eigenspace and the block order.
    pub seed: Option<u64>,
    /// Process blocks in reverse canonical order.
    pub reverse: bool,
}

impl<F: Field> Default for SplitOptions<F> {
    fn default() -> Self {
        SplitOptions { hints: Vec::new(), seed: None, reverse: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitBlock<F: Field> {
    /// The exponent: this block is `E^{-lambda/t^2}` twisted by a connection
    /// whose leading matrix is nilpotent.
    pub lambda: F::Elem,
    pub multiplicity: usize,
    /// Position of the block in the split basis.
    pub start: usize,
    pub connection: FormalConnection<F>,
    /// Spectral projector onto this block, in the original basis.
    pub projector: MatSeries<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingResult<F: Field> {
    pub field: F,
    pub order: usize,
    /// Columns of `gauge.p` span the blocks, in the order of `blocks`.
    pub gauge: GaugeTransform<F>,
    /// The block-diagonal connection in the split basis.
    pub split: FormalConnection<F>,
    pub blocks: Vec<SplitBlock<F>>,
}

impl<F: Field> SplittingResult<F> {
    /// Blocks sorted by exponent in the field's canonical order.
    pub fn sorted_blocks(&self) -> Vec<&SplitBlock<F>> {
        let mut v: Vec<&SplitBlock<F>> = self.blocks.iter().collect();
        v.sort_by(|a, b| self.field.cmp_elem(&a.lambda, &b.lambda));
        v
    }

    pub fn block_for(&self, lambda: &F::Elem) -> Option<&SplitBlock<F>> {
        self.blocks.iter().find(|b| b.lambda == *lambda)
    }
}

fn random_invertible<F: Field>(f: &F, n: usize, rng: &mut ChaCha8Rng) -> Matrix<F> {
    loop {
        let m = Matrix::from_fn(n, n, |_, _| f.random(rng));
        if m.inverse(f).is_some() {
            return m;
        }
    }
}

fn off_block<F: Field>(f: &F, m: &Matrix<F>, blocks: &[BlockInfo<F>]) -> Matrix<F> {
    let mut out = m.clone();
    for b in blocks {
        out.set_block(b.start, b.start, &Matrix::zeros(f, b.len, b.len));
    }
    out
}

/// Split a connection along the generalized eigenspaces of `A_0`, to order `order`.
///
/// After a constant change of basis to generalized eigenvectors, each order
/// `r >= 1` is made block diagonal by the gauge `I + t^r T_r` with `T_r` from
/// [`solve_block_sylvester`]. The projectors are `G E_lambda G^{-1}` for the
/// total gauge `G`; they do not depend on the choices made along the way.
pub fn elementary_split<F: Field>(c: &FormalConnection<F>, order: usize, opts: &SplitOptions<F>) -> Result<SplittingResult<F>> {
    let f = &c.field;
    if order < 2 {
        return Err(Error::TruncationTooSmall { needed: 2, have: order as i64 });
    }
    if order > c.order() {
        return Err(Error::TruncationTooSmall { needed: order as i64, have: c.order() as i64 });
    }
    let c = c.truncate(order);
    let d = c.rank;
    let a0_hints: Vec<F::Elem> = opts.hints.iter().map(|h| f.neg(h)).collect();
    let mut spaces = generalized_eigenspaces(f, c.coeff(0), &a0_hints)?;
    // canonical order by exponent
    spaces.sort_by(|a, b| f.cmp_elem(&f.neg(&a.eigenvalue), &f.neg(&b.eigenvalue)));
    if opts.reverse {
        spaces.reverse();
    }
    let mut cols: Vec<Vec<F::Elem>> = Vec::with_capacity(d);
    if let Some(seed) = opts.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        spaces.shuffle(&mut rng);
        for s in &spaces {
            let k = s.basis.len();
            let b = Matrix::from_columns(d, &s.basis).mul(f, &random_invertible(f, k, &mut rng));
            cols.extend((0..k).map(|j| b.column(j)));
        }
    } else {
        for s in &spaces {
            cols.extend(s.basis.iter().cloned());
        }
    }
    let mut blocks: Vec<BlockInfo<F>> = Vec::new();
    let mut start = 0;
    for s in &spaces {
        blocks.push(BlockInfo { start, len: s.multiplicity, eigenvalue: s.eigenvalue.clone() });
        start += s.multiplicity;
    }
    let s_mat = Matrix::from_columns(d, &cols);
    let mut gauge = GaugeTransform::new(f, MatSeries::constant(f, s_mat, order))?;
    let mut cur = gauge_apply(&c, &gauge)?;
    for r in 1..order {
        let obstruction = off_block(f, cur.coeff(r), &blocks);
        if obstruction.is_zero(f) {
            continue;
        }
        let t = solve_block_sylvester(f, cur.coeff(0), &obstruction, &blocks)?;
        let mut p = MatSeries::identity(f, d, order);
        p.coeffs[r] = t;
        let step = GaugeTransform::new(f, p)?;
        cur = gauge_apply(&cur, &step)?;
        gauge = gauge.compose(f, &step);
        debug_assert!(off_block(f, cur.coeff(r), &blocks).is_zero(f));
    }
    for r in 0..order {
        if !off_block(f, cur.coeff(r), &blocks).is_zero(f) {
            return Err(Error::InvalidInput(format!("splitting left an off-block term at order {r}")));
        }
    }
    let mut out_blocks = Vec::new();
    for b in &blocks {
        let mut e = Matrix::zeros(f, d, d);
        for i in b.start..b.start + b.len {
            e.set(i, i, f.one());
        }
        let projector = gauge.p.mul(f, &MatSeries::constant(f, e, order)).mul(f, &gauge.inv);
        let conn = FormalConnection { field: f.clone(), rank: b.len, a: cur.a.block(b.start, b.start, b.len, b.len) };
        out_blocks.push(SplitBlock {
            lambda: f.neg(&b.eigenvalue),
            multiplicity: b.len,
            start: b.start,
            connection: conn,
            projector,
        });
    }
    Ok(SplittingResult { field: f.clone(), order, gauge, split: cur, blocks: out_blocks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorCondition {
    CovariantConstancy,
    Idempotent,
    Orthogonal,
    SumToIdentity,
    LeadingTerm,
    MatchesSplitting,
}

impl ProjectorCondition {
    pub fn name(&self) -> &'static str {
        match self {
            ProjectorCondition::CovariantConstancy => "covariant_constancy",
            ProjectorCondition::Idempotent => "idempotent",
            ProjectorCondition::Orthogonal => "orthogonal",
            ProjectorCondition::SumToIdentity => "sum_to_identity",
            ProjectorCondition::LeadingTerm => "leading_term",
            ProjectorCondition::MatchesSplitting => "matches_splitting",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorFailure {
    pub condition: ProjectorCondition,
    /// Labels involved, formatted.
    pub lambdas: Vec<String>,
    /// Power of `t` of the first offending coefficient.
    pub order: usize,
    pub entry: (usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorVerdict {
    pub order: usize,
    pub failure: Option<ProjectorFailure>,
}

impl ProjectorVerdict {
    pub fn accepted(&self) -> bool {
        self.failure.is_none()
    }
}

/// Check that a family `{F_lambda}` indexed by the exponents is the family of
/// splitting projectors: covariantly constant, idempotent, orthogonal,
/// summing to the identity, with the spectral projectors at `t = 0`. On
/// success the family is compared entrywise with the splitting's own projectors.
pub fn verify_projector_family<F: Field>(
    c: &FormalConnection<F>,
    family: &[(F::Elem, MatSeries<F>)],
    split: &SplittingResult<F>,
) -> Result<ProjectorVerdict> {
    let f = &c.field;
    let d = c.rank;
    let mut labels: Vec<F::Elem> = family.iter().map(|(l, _)| l.clone()).collect();
    let mut spec: Vec<F::Elem> = split.blocks.iter().map(|b| b.lambda.clone()).collect();
    labels.sort_by(|a, b| f.cmp_elem(a, b));
    spec.sort_by(|a, b| f.cmp_elem(a, b));
    if labels != spec {
        let show = |v: &[F::Elem]| v.iter().map(|x| f.format(x)).collect::<Vec<_>>().join(", ");
        return Err(Error::LabelMismatch(format!("family [{}] vs spectrum [{}]", show(&labels), show(&spec))));
    }
    let order = family.iter().map(|(_, m)| m.order()).min().unwrap_or(0).min(split.order).min(c.order());
    let a = c.a.truncate(order);
    let fam: Vec<(F::Elem, MatSeries<F>)> = family.iter().map(|(l, m)| (l.clone(), m.truncate(order))).collect();
    let fail = |cond, lambdas: Vec<String>, hit: Option<(usize, usize, usize)>| {
        hit.map(|(k, i, j)| ProjectorVerdict {
            order,
            failure: Some(ProjectorFailure { condition: cond, lambdas, order: k, entry: (i, j) }),
        })
    };
    for (l, m) in &fam {
        let cc = m.t2_derivative(f).add(f, &a.commutator(f, m));
        if let Some(v) = fail(ProjectorCondition::CovariantConstancy, alloc::vec![f.format(l)], cc.first_nonzero(f)) {
            return Ok(v);
        }
    }
    for (l, m) in &fam {
        let e = m.mul(f, m).sub(f, m);
        if let Some(v) = fail(ProjectorCondition::Idempotent, alloc::vec![f.format(l)], e.first_nonzero(f)) {
            return Ok(v);
        }
    }
    for (x, (l1, m1)) in fam.iter().enumerate() {
        for (y, (l2, m2)) in fam.iter().enumerate() {
            if x == y {
                continue;
            }
            let e = m1.mul(f, m2);
            if let Some(v) = fail(ProjectorCondition::Orthogonal, alloc::vec![f.format(l1), f.format(l2)], e.first_nonzero(f)) {
                return Ok(v);
            }
        }
    }
    let mut sum = MatSeries::zero(f, d, d, order);
    for (_, m) in &fam {
        sum = sum.add(f, m);
    }
    let e = sum.sub(f, &MatSeries::identity(f, d, order));
    if let Some(v) = fail(ProjectorCondition::SumToIdentity, Vec::new(), e.first_nonzero(f)) {
        return Ok(v);
    }
    for (l, m) in &fam {
        let b = split.block_for(l).unwrap();
        let spectral = &b.projector.coeffs[0];
        let e = m.coeffs[0].sub(f, spectral);
        if let Some((i, j)) = e.first_nonzero(f) {
            return Ok(fail(ProjectorCondition::LeadingTerm, alloc::vec![f.format(l)], Some((0, i, j))).unwrap());
        }
    }
    for (l, m) in &fam {
        let b = split.block_for(l).unwrap();
        let e = m.sub(f, &b.projector.truncate(order));
        if let Some(v) = fail(ProjectorCondition::MatchesSplitting, alloc::vec![f.format(l)], e.first_nonzero(f)) {
            return Ok(v);
        }
    }
    Ok(ProjectorVerdict { order, failure: None })
}

/// A split block with its exponential factor removed: leading matrix `-N` nilpotent.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualConnection<F: Field> {
    pub lambda: F::Elem,
    pub connection: FormalConnection<F>,
}

/// Twist a single-exponent block by `E^{lambda/t^2}`, i.e. replace `A_0` by `A_0 + lambda`.
pub fn residual_connection<F: Field>(block: &FormalConnection<F>, lambda: &F::Elem) -> Result<ResidualConnection<F>> {
    let f = &block.field;
    let d = block.rank;
    let n = block.coeff(0).add(f, &Matrix::scalar(f, d, lambda.clone()));
    if !n.pow(f, d as u32).is_zero(f) {
        return Err(Error::LeadingNotSingleEigenvalue(f.format(lambda)));
    }
    let mut conn = block.clone();
    conn.a.coeffs[0] = n;
    Ok(ResidualConnection { lambda: lambda.clone(), connection: conn })
}
