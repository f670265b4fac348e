//! Characteristic-zero side: cyclic vectors in the `t d/dt` frame, Newton
//! polygons, indicial roots, and the exponential-type certificate that puts
//! them next to the per-prime p-curvature evidence.
//!
//! A connection `t^2 d/dt + A(t)` is written as `t d/dt + M(t)` with
//! `M = sum A_i t^{i-1}`. For a cyclic vector `v` with
//! `nabla^d v + sum_{i<d} a_i nabla^i v = 0` the scalar operator is
//! `sum a_i (t d/dt)^i` with `a_d = 1`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Field, FieldSpec, FqField, Laurent, QField, QReduction, UPoly};
use crate::connection::{elementary_split, residual_connection, FormalConnection, SplitOptions};
use crate::pcurvature::shifted_block_pcurvature;
use crate::{Error, Result};

/// A scalar differential operator `sum a_i(t) (t d/dt)^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarOperator<F: Field> {
    /// `a_0, ..., a_d` with `a_d = 1`.
    pub coeffs: Vec<Laurent<F>>,
    /// The cyclic vector, entry `i` given by its polynomial coefficients.
    pub cyclic_vector: Vec<Vec<F::Elem>>,
    /// Valuation of `det(v, nabla v, ..., nabla^{d-1} v)`.
    pub det_valuation: i64,
}

impl<F: Field> ScalarOperator<F> {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CyclicOptions {
    pub seed: u64,
    pub tries: usize,
    /// Entries of candidate vectors are polynomials of at most this degree;
    /// `None` means the rank.
    pub max_degree: Option<usize>,
}

impl Default for CyclicOptions {
    fn default() -> Self {
        CyclicOptions { seed: 0, tries: 8, max_degree: None }
    }
}

/// `M(t) = sum A_i t^{i-1}` as a matrix of Laurent series, known mod `t^{N-1}`.
pub fn theta_matrix<F: Field>(c: &FormalConnection<F>) -> Vec<Vec<Laurent<F>>> {
    let d = c.rank;
    (0..d)
        .map(|i| (0..d).map(|j| Laurent::new(-1, c.a.coeffs.iter().map(|m| m.get(i, j).clone()).collect())).collect())
        .collect()
}

/// Base change `t = s^a` in the `t d/dt` frame: `t d/dt = (1/a) s d/ds`,
/// so the new matrix is `a M(s^a)`.
pub fn base_change<F: Field>(f: &F, m: &[Vec<Laurent<F>>], a: usize) -> Result<Vec<Vec<Laurent<F>>>> {
    if a == 0 {
        return Err(Error::InvalidInput("base change exponent must be positive".into()));
    }
    let scale = f.from_i64(a as i64);
    if f.is_zero(&scale) {
        return Err(Error::InvalidInput(format!("exponent {a} vanishes in the field")));
    }
    Ok(m.iter()
        .map(|row| {
            row.iter()
                .map(|x| {
                    let mut coeffs = vec![f.zero(); (x.coeffs.len().max(1) - 1) * a + 1];
                    for (k, c) in x.coeffs.iter().enumerate() {
                        coeffs[k * a] = f.mul(c, &scale);
                    }
                    // known mod s^{a * prec}
                    coeffs.resize(x.coeffs.len() * a, f.zero());
                    Laurent::new(x.offset * a as i64, coeffs)
                })
                .collect()
        })
        .collect())
}

fn apply_nabla<F: Field>(f: &F, m: &[Vec<Laurent<F>>], v: &[Laurent<F>]) -> Vec<Laurent<F>> {
    (0..v.len())
        .map(|i| {
            let mut acc = v[i].theta(f);
            for (j, x) in v.iter().enumerate() {
                acc = acc.add(f, &m[i][j].mul(f, x));
            }
            acc
        })
        .collect()
}

/// Solve `B x = rhs` over Laurent series by elimination with minimal-valuation
/// pivots. `Err` carries the precision at which a column had no known nonzero entry.
fn laurent_solve<F: Field>(f: &F, cols: &[Vec<Laurent<F>>], rhs: &[Laurent<F>]) -> core::result::Result<(Vec<Laurent<F>>, i64), i64> {
    let d = rhs.len();
    let mut rows: Vec<Vec<Laurent<F>>> = (0..d).map(|i| {
        let mut r: Vec<Laurent<F>> = cols.iter().map(|c| c[i].clone()).collect();
        r.push(rhs[i].clone());
        r
    }).collect();
    let mut det_val = 0i64;
    for k in 0..d {
        let pivot = (k..d).filter_map(|r| rows[r][k].valuation(f).map(|v| (v, r))).min();
        let Some((v, r)) = pivot else {
            return Err((k..d).map(|r| rows[r][k].prec()).min().unwrap_or(0));
        };
        det_val += v;
        rows.swap(k, r);
        let inv = rows[k][k].inv(f).unwrap();
        for j in k..=d {
            rows[k][j] = rows[k][j].mul(f, &inv);
        }
        for r in 0..d {
            if r == k {
                continue;
            }
            let factor = rows[r][k].clone();
            if factor.valuation(f).is_none() {
                continue;
            }
            for j in k..=d {
                let s = factor.mul(f, &rows[k][j]);
                rows[r][j] = rows[r][j].sub(f, &s);
            }
        }
    }
    Ok((rows.into_iter().map(|r| r[d].clone()).collect(), det_val))
}

/// The scalar operator of a given vector, whose entries are polynomials.
/// `Err` carries the precision below which the determinant is known to vanish.
fn operator_for<F: Field>(c: &FormalConnection<F>, m: &[Vec<Laurent<F>>], poly: &[Vec<F::Elem>]) -> core::result::Result<ScalarOperator<F>, i64> {
    let f = &c.field;
    let d = c.rank;
    let prec = c.order() as i64 - 1;
    let v0: Vec<Laurent<F>> = poly.iter().map(|p| Laurent::from_poly(f, p, prec)).collect();
    let mut vs = vec![v0];
    for k in 0..d {
        let next = apply_nabla(f, m, &vs[k]);
        vs.push(next);
    }
    let rhs: Vec<Laurent<F>> = vs[d].iter().map(|x| x.neg(f)).collect();
    let (mut coeffs, det_valuation) = laurent_solve(f, &vs[..d], &rhs)?;
    coeffs.push(Laurent::from_poly(f, &[f.one()], coeffs.iter().map(|x| x.prec()).min().unwrap_or(prec)));
    Ok(ScalarOperator { coeffs, cyclic_vector: poly.to_vec(), det_valuation })
}

/// The scalar operator of the given vector.
pub fn operator_from_vector<F: Field>(c: &FormalConnection<F>, poly: &[Vec<F::Elem>]) -> Result<ScalarOperator<F>> {
    if poly.len() != c.rank {
        return Err(Error::DimensionMismatch(format!("vector of length {} for rank {}", poly.len(), c.rank)));
    }
    operator_for(c, &theta_matrix(c), poly)
        .map_err(|p| Error::CyclicSearchFailed { tries: 1, obstruction: format!("determinant valuation >= {p}") })
}

/// Search for a cyclic vector. The first half of the tries uses constant
/// vectors, the rest polynomials up to the degree cap; among the successful
/// candidates the one with the smallest determinant valuation is kept, so that
/// a lattice basis is preferred when one is found.
pub fn find_cyclic_vector<F: Field>(c: &FormalConnection<F>, opts: &CyclicOptions) -> Result<ScalarOperator<F>> {
    let f = &c.field;
    let d = c.rank;
    if c.order() < d + 2 {
        return Err(Error::TruncationTooSmall { needed: d as i64 + 2, have: c.order() as i64 });
    }
    let m = theta_matrix(c);
    let cap = opts.max_degree.unwrap_or(d);
    let tries = opts.tries.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut obstruction = i64::MIN;
    let mut best: Option<ScalarOperator<F>> = None;
    for k in 0..tries {
        let deg = if 2 * k < tries { 0 } else { cap };
        let poly: Vec<Vec<F::Elem>> = (0..d).map(|_| (0..=deg).map(|_| f.random(&mut rng)).collect()).collect();
        match operator_for(c, &m, &poly) {
            Ok(op) => {
                if best.as_ref().map_or(true, |b| op.det_valuation < b.det_valuation) {
                    best = Some(op);
                }
            }
            Err(p) => obstruction = obstruction.max(p),
        }
    }
    best.ok_or_else(|| Error::CyclicSearchFailed { tries, obstruction: format!("determinant valuation >= {obstruction}") })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FuchsVerdict {
    RegularSingular,
    /// The largest slope of the Newton polygon.
    Irregular { slope: BigRational },
    /// A coefficient is unknown below the exponent that decides the verdict.
    Inconclusive { needed: i64, have: i64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuchsResult {
    pub verdict: FuchsVerdict,
    /// Points `(i, v(a_i))`; `None` where no coefficient is known to be nonzero.
    pub points: Vec<(usize, Option<i64>)>,
    /// Slopes of the Newton polygon, from the lowest point to `(d, 0)`.
    pub slopes: Vec<BigRational>,
}

/// Newton polygon of a scalar operator in the `t d/dt` frame.
pub fn fuchs_test<F: Field>(f: &F, op: &ScalarOperator<F>) -> FuchsResult {
    let d = op.order();
    let points: Vec<(usize, Option<i64>)> = op.coeffs.iter().enumerate().map(|(i, a)| (i, a.valuation(f))).collect();
    let known: Vec<(usize, i64)> = points.iter().filter_map(|&(i, v)| v.map(|v| (i, v))).collect();
    // lowest point, rightmost among ties, then the lower hull to the right of it
    let vmin = known.iter().map(|p| p.1).min().unwrap_or(0);
    let start = known.iter().filter(|p| p.1 == vmin).map(|p| p.0).max().unwrap_or(d);
    let mut slopes = Vec::new();
    let mut cur = (start, vmin);
    while cur.0 < d {
        let mut best: Option<(BigRational, usize, i64)> = None;
        for &(i, v) in known.iter().filter(|p| p.0 > cur.0) {
            let s = BigRational::new(BigInt::from(v - cur.1), BigInt::from((i - cur.0) as i64));
            let better = match &best {
                None => true,
                Some((bs, bi, _)) => s < *bs || (s == *bs && i > *bi),
            };
            if better {
                best = Some((s, i, v));
            }
        }
        let (s, i, v) = best.unwrap();
        slopes.push(s);
        cur = (i, v);
    }
    let verdict = if vmin < 0 {
        FuchsVerdict::Irregular { slope: slopes.iter().max().cloned().unwrap_or_else(BigRational::zero) }
    } else if let Some(a) = op.coeffs.iter().find(|a| a.valuation(f).is_none() && a.prec() < 0) {
        FuchsVerdict::Inconclusive { needed: 0, have: a.prec() }
    } else {
        FuchsVerdict::RegularSingular
    };
    FuchsResult { verdict, points, slopes }
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuasiUnipotence<F: Field> {
    /// All roots rational; the lcm of their denominators.
    Yes { denominator: u64 },
    /// A root in the field that is not rational.
    No { witness: F::Elem },
    Inconclusive { reason: String, bound: u64 },
}

impl<F: Field> QuasiUnipotence<F> {
    pub fn is_yes(&self) -> bool {
        matches!(self, QuasiUnipotence::Yes { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndicialResult<F: Field> {
    pub polynomial: UPoly<F>,
    /// Roots with multiplicity, in the field's canonical order.
    pub roots: Vec<(F::Elem, usize)>,
    pub quasi_unipotent: QuasiUnipotence<F>,
}

/// Indicial polynomial `sum a_i(0) x^i` and its roots. Rational roots with
/// denominator at most `bound` certify quasi-unipotence; a non-rational root
/// found in the field refutes it.
pub fn indicial_roots<F: Field>(f: &F, op: &ScalarOperator<F>, bound: u64, hints: &[F::Elem]) -> Result<IndicialResult<F>> {
    let fu = fuchs_test(f, op);
    if fu.verdict != FuchsVerdict::RegularSingular {
        return Err(Error::InvalidInput("indicial roots need a regular singular operator".into()));
    }
    let mut coeffs = Vec::with_capacity(op.coeffs.len());
    for a in &op.coeffs {
        coeffs.push(a.coeff(f, 0).ok_or(Error::TruncationTooSmall { needed: 1, have: a.prec() })?);
    }
    let polynomial = UPoly::new(f, coeffs);
    let mut rest = polynomial.monic(f);
    let mut cands: Vec<F::Elem> = hints.to_vec();
    let mut roots: Vec<(F::Elem, usize)> = Vec::new();
    loop {
        let deg = rest.degree().unwrap_or(0);
        if deg == 0 {
            break;
        }
        let mut found = f.roots(&rest, &cands);
        if found.is_empty() && deg == 1 {
            found.push(f.neg(&rest.coeff(f, 0)));
        }
        if found.is_empty() {
            break;
        }
        for r in found {
            let lin = UPoly::linear(f, &r);
            let mut mult = 0;
            loop {
                let (q, rem) = rest.divrem(f, &lin);
                if !rem.is_zero() {
                    break;
                }
                rest = q;
                mult += 1;
            }
            if mult > 0 {
                roots.push((r, mult));
            }
        }
        cands.clear();
    }
    roots.sort_by(|a, b| f.cmp_elem(&a.0, &b.0));
    let quasi_unipotent = classify_roots(f, &roots, &rest, bound);
    Ok(IndicialResult { polynomial, roots, quasi_unipotent })
}

fn classify_roots<F: Field>(f: &F, roots: &[(F::Elem, usize)], rest: &UPoly<F>, bound: u64) -> QuasiUnipotence<F> {
    if f.characteristic() != 0 {
        return QuasiUnipotence::Inconclusive { reason: "positive characteristic".into(), bound };
    }
    let mut den = BigInt::one();
    let mut too_big = None;
    for (r, _) in roots {
        match f.as_rational(r) {
            None => return QuasiUnipotence::No { witness: r.clone() },
            Some(q) => {
                if q.denom() > &BigInt::from(bound) {
                    too_big = Some(q.to_string());
                }
                den = den.lcm(q.denom());
            }
        }
    }
    if rest.degree().unwrap_or(0) > 0 {
        return QuasiUnipotence::Inconclusive { reason: format!("factor {} has no roots in the field", rest.format(f)), bound };
    }
    if let Some(q) = too_big {
        return QuasiUnipotence::Inconclusive { reason: format!("root {q} has denominator above the bound"), bound };
    }
    match u64::try_from(den.abs()) {
        Ok(d) => QuasiUnipotence::Yes { denominator: d },
        Err(_) => QuasiUnipotence::Inconclusive { reason: "denominator overflow".into(), bound },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityCertificate<F: Field> {
    pub operator: ScalarOperator<F>,
    pub fuchs: FuchsResult,
    /// Present only for regular singular operators.
    pub indicial: Option<IndicialResult<F>>,
}

impl<F: Field> RegularityCertificate<F> {
    pub fn regular(&self) -> bool {
        self.fuchs.verdict == FuchsVerdict::RegularSingular
    }

    pub fn quasi_unipotent(&self) -> bool {
        self.indicial.as_ref().is_some_and(|i| i.quasi_unipotent.is_yes())
    }
}

/// Cyclic vector, Newton polygon and, when regular, indicial roots.
pub fn regularity_certificate<F: Field>(c: &FormalConnection<F>, opts: &CyclicOptions, bound: u64, hints: &[F::Elem]) -> Result<RegularityCertificate<F>> {
    let operator = find_cyclic_vector(c, opts)?;
    let fuchs = fuchs_test(&c.field, &operator);
    let indicial = if fuchs.verdict == FuchsVerdict::RegularSingular { Some(indicial_roots(&c.field, &operator, bound, hints)?) } else { None };
    Ok(RegularityCertificate { operator, fuchs, indicial })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<F: Field> {
    pub lambda: F::Elem,
    pub multiplicity: usize,
    pub outcome: core::result::Result<RegularityCertificate<F>, Error>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimeBlock {
    /// Index into the certificate's eigenvalue list, when the block was matched.
    pub lambda_index: Option<usize>,
    pub lambda_mod_p: u64,
    pub rank: usize,
    pub nilpotent: bool,
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimeEvidence {
    pub p: u64,
    pub field: Option<FieldSpec>,
    pub outcome: core::result::Result<Vec<PrimeBlock>, Error>,
}

impl PrimeEvidence {
    pub fn passed(&self) -> bool {
        matches!(&self.outcome, Ok(b) if b.iter().all(|x| x.nilpotent))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub order: usize,
    pub seed: u64,
    pub root_bound: u64,
    /// Candidate eigenvalues for fields where roots are not found automatically.
    pub hints: Vec<<QField as Field>::Elem>,
    pub cyclic_tries: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { order: 24, seed: 0, root_bound: 64, hints: Vec::new(), cyclic_tries: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialTypeCertificate {
    pub field: FieldSpec,
    pub order: usize,
    pub seed: u64,
    pub root_bound: u64,
    /// `(lambda, multiplicity)` in the splitting's order, or the error that stopped the split.
    pub lambdas: core::result::Result<Vec<(<QField as Field>::Elem, usize)>, Error>,
    pub residuals: Vec<ResidualReport<QField>>,
    /// Sorted by `p`.
    pub primes: Vec<PrimeEvidence>,
}

impl ExponentialTypeCertificate {
    pub fn passed(&self) -> bool {
        self.lambdas.is_ok()
            && self.residuals.iter().all(|r| matches!(&r.outcome, Ok(c) if c.regular() && c.quasi_unipotent()))
            && self.primes.iter().all(|p| p.passed())
    }
}

/// Split over the characteristic-zero field and certify each residual connection.
pub fn certify_char0(c: &FormalConnection<QField>, opts: &CertifyOptions) -> (core::result::Result<Vec<(<QField as Field>::Elem, usize)>, Error>, Vec<ResidualReport<QField>>) {
    let split = match elementary_split(c, opts.order.min(c.order()), &SplitOptions { hints: opts.hints.clone(), ..SplitOptions::default() }) {
        Ok(s) => s,
        Err(e) => return (Err(e), Vec::new()),
    };
    let mut lambdas = Vec::new();
    let mut residuals = Vec::new();
    for (k, b) in split.sorted_blocks().into_iter().enumerate() {
        lambdas.push((b.lambda.clone(), b.multiplicity));
        let cy = CyclicOptions { seed: opts.seed.wrapping_add(k as u64), tries: opts.cyclic_tries, max_degree: None };
        let outcome = residual_connection(&b.connection, &b.lambda).and_then(|r| regularity_certificate(&r.connection, &cy, opts.root_bound, &[]));
        residuals.push(ResidualReport { lambda: b.lambda.clone(), multiplicity: b.multiplicity, outcome });
    }
    (Ok(lambdas), residuals)
}

/// Reduce mod `p`, split with the reduced eigenvalues, and test the shifted
/// p-curvature of every block.
pub fn prime_evidence(c: &FormalConnection<QField>, lambdas: &[<QField as Field>::Elem], p: u64, order: usize) -> PrimeEvidence {
    let mut field = None;
    let outcome = (|| -> Result<Vec<PrimeBlock>> {
        if order < p as usize + 2 {
            return Err(Error::TruncationTooSmall { needed: p as i64 + 2, have: order as i64 });
        }
        let red = QReduction::to_prime(&c.field, p)?;
        field = Some(red.target.spec());
        let cp: FormalConnection<FqField> = c.truncate(order).try_map_field(red.target.clone(), |s| red.series(s))?;
        let reduced: Vec<u64> = lambdas.iter().map(|l| red.elem(l)).collect::<Result<_>>()?;
        for i in 0..reduced.len() {
            for j in 0..i {
                if reduced[i] == reduced[j] {
                    return Err(Error::EigenvalueDifferenceNotInvertible(format!(
                        "{} - {} vanishes mod {p}",
                        c.field.format(&lambdas[i]),
                        c.field.format(&lambdas[j])
                    )));
                }
            }
        }
        let split = elementary_split(&cp, order, &SplitOptions { hints: reduced.clone(), ..SplitOptions::default() })?;
        Ok(shifted_block_pcurvature(&split)?
            .into_iter()
            .map(|b| PrimeBlock {
                lambda_index: reduced.iter().position(|r| *r == b.lambda),
                lambda_mod_p: b.lambda,
                rank: b.rank,
                nilpotent: b.shifted.nilpotent,
                index: b.shifted.index,
            })
            .collect())
    })();
    PrimeEvidence { p, field, outcome }
}

/// Both sides of the certificate, sequentially. Errors are recorded per stage.
pub fn assemble_certificate(c: &FormalConnection<QField>, primes: &[u64], opts: &CertifyOptions) -> ExponentialTypeCertificate {
    let (lambdas, residuals) = certify_char0(c, opts);
    let ls: Vec<_> = lambdas.as_ref().map(|v| v.iter().map(|x| x.0.clone()).collect()).unwrap_or_default();
    let mut ps: Vec<u64> = primes.to_vec();
    ps.sort_unstable();
    ps.dedup();
    let primes = ps.iter().map(|&p| prime_evidence(c, &ls, p, opts.order)).collect();
    ExponentialTypeCertificate { field: c.field.spec(), order: opts.order, seed: opts.seed, root_bound: opts.root_bound, lambdas, residuals, primes }
}
