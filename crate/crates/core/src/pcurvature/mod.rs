//! p-th powers of derivations and p-curvature `F_D = nabla_D^p - nabla_{D^p}`.

mod bigraded;

pub use bigraded::{check_q_t_identity, BiMat, BigradedModule, QtIdentityVerdict};

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Field, LaurentMat, MPoly, MatSeries, Matrix, Monomial};
use crate::connection::{FormalConnection, SplittingResult};
use crate::{Error, Result};

/// Derivations of `k[[q, t]]` used as frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Frame {
    Dt,
    TDt,
    T2Dt,
    QDq,
    TQDq,
}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Frame::Dt => "d/dt",
            Frame::TDt => "t d/dt",
            Frame::T2Dt => "t^2 d/dt",
            Frame::QDq => "q d/dq",
            Frame::TQDq => "t q d/dq",
        }
    }

    /// `(D(t), D(q))` as polynomials in `(q, t)`.
    fn on_coordinates<F: Field>(&self, f: &F) -> (MPoly<F>, MPoly<F>) {
        let mono = |q: u32, t: u32| MPoly::term(f, f.one(), Monomial(alloc::vec![q, t]));
        match self {
            Frame::Dt => (mono(0, 0), MPoly::zero(2)),
            Frame::TDt => (mono(0, 1), MPoly::zero(2)),
            Frame::T2Dt => (mono(0, 2), MPoly::zero(2)),
            Frame::QDq => (MPoly::zero(2), mono(1, 0)),
            Frame::TQDq => (MPoly::zero(2), mono(1, 1)),
        }
    }

    /// Power `m` with `D = t^m d/dt`, for the frames in `t` alone.
    fn t_power(&self) -> Option<i64> {
        match self {
            Frame::Dt => Some(0),
            Frame::TDt => Some(1),
            Frame::T2Dt => Some(2),
            _ => None,
        }
    }
}

/// `D^p = dt * d/dt + dq * d/dq`, with polynomial coefficients in `(q, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PthPower<F: Field> {
    pub frame: Frame,
    pub p: u64,
    pub dt: MPoly<F>,
    pub dq: MPoly<F>,
}

impl<F: Field> PthPower<F> {
    /// `g` with `D^p = g * D`, when it exists.
    pub fn multiple_of_frame(&self, f: &F) -> Option<MPoly<F>> {
        let (a, b) = self.frame.on_coordinates(f);
        let (num, den) = if !a.is_zero() { (&self.dt, &a) } else { (&self.dq, &b) };
        let (dm, dc) = den.leading()?;
        let dinv = f.inv(dc)?;
        let mut g = MPoly::zero(2);
        for (m, c) in &num.terms {
            if !dm.divides(m) {
                return None;
            }
            g.add_term(f, f.mul(c, &dinv), dm.quotient_of(m));
        }
        (g.mul(f, &a) == self.dt && g.mul(f, &b) == self.dq).then_some(g)
    }

    pub fn is_zero(&self) -> bool {
        self.dt.is_zero() && self.dq.is_zero()
    }
}

fn apply_derivation<F: Field>(f: &F, a: &MPoly<F>, b: &MPoly<F>, g: &MPoly<F>) -> MPoly<F> {
    a.mul(f, &g.derivative(f, 1)).add(f, &b.mul(f, &g.derivative(f, 0)))
}

fn characteristic<F: Field>(f: &F) -> Result<u64> {
    match f.characteristic() {
        0 => Err(Error::CharacteristicZero),
        p => Ok(p),
    }
}

/// `D^p` for a frame, found by applying `D` to the coordinates `p` times.
pub fn derivation_pth_power<F: Field>(f: &F, frame: Frame) -> Result<PthPower<F>> {
    let p = characteristic(f)?;
    let (a, b) = frame.on_coordinates(f);
    let mut dt = MPoly::var(f, 2, 1);
    let mut dq = MPoly::var(f, 2, 0);
    for _ in 0..p {
        dt = apply_derivation(f, &a, &b, &dt);
        dq = apply_derivation(f, &a, &b, &dq);
    }
    Ok(PthPower { frame, p, dt, dq })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotencyVerdict {
    /// `F^rank` vanishes to `order`.
    pub nilpotent: bool,
    /// Least `e` with `F^e` vanishing to the available order.
    pub index: Option<usize>,
    pub rank: usize,
    /// `t`-adic order to which the power `F^rank` is known.
    pub order: i64,
}

/// Nilpotency of a function-linear endomorphism known modulo a power of `t`.
/// By Cayley-Hamilton over `k((t))` it suffices to look at `F^rank`.
pub fn nilpotency_test<F: Field>(f: &F, m: &LaurentMat<F>) -> NilpotencyVerdict {
    let d = m.rows;
    let mut pow = m.clone();
    let mut index = None;
    for e in 1..=d {
        if e > 1 {
            pow = pow.mul(f, m);
        }
        if index.is_none() && pow.is_zero(f) {
            index = Some(e);
            break;
        }
    }
    NilpotencyVerdict { nilpotent: index.is_some(), index, rank: d, order: pow.prec() }
}

pub fn nilpotency_test_series<F: Field>(f: &F, m: &MatSeries<F>) -> NilpotencyVerdict {
    nilpotency_test(f, &LaurentMat::from_series(m, 0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PCurvatureResult<F: Field> {
    pub frame: Frame,
    pub p: u64,
    /// The p-curvature as a Laurent matrix, with its own precision.
    pub matrix: LaurentMat<F>,
    /// Number of random `g(t) v` on which `F(g v) = g F(v)` was confirmed.
    pub linearity_samples: usize,
    pub nilpotency: NilpotencyVerdict,
}

impl<F: Field> PCurvatureResult<F> {
    /// The matrix as a power series, when it has no pole.
    pub fn series(&self, f: &F) -> Option<MatSeries<F>> {
        let m = &self.matrix;
        if m.valuation_lb(f) < 0 {
            return None;
        }
        let n = m.prec().max(0) as usize;
        Some(MatSeries::from_coeffs(f, m.rows, m.cols, (0..n).map(|e| m.coeff(e as i64).cloned().unwrap_or_else(|| Matrix::zeros(f, m.rows, m.cols))).collect(), n))
    }
}

fn poly_laurent<F: Field>(f: &F, coeffs: &[F::Elem], n: usize, prec: i64) -> LaurentMat<F> {
    let len = prec.max(0) as usize;
    let mut out = LaurentMat::zero(f, n, n, 0, prec);
    for (e, c) in coeffs.iter().enumerate().take(len) {
        out.coeffs[e] = Matrix::scalar(f, n, c.clone());
    }
    out
}

/// `D^p = h(t) d/dt` for a frame in `t` alone.
fn t_only_power<F: Field>(f: &F, frame: Frame) -> Result<Vec<F::Elem>> {
    let pw = derivation_pth_power(f, frame)?;
    let mut h = Vec::new();
    for (m, c) in &pw.dt.terms {
        let e = m.0[1] as usize;
        if m.0[0] != 0 {
            return Err(Error::InvalidInput(format!("{} has a q-dependent p-th power", frame.name())));
        }
        if h.len() <= e {
            h.resize(e + 1, f.zero());
        }
        h[e] = c.clone();
    }
    Ok(h)
}

/// The p-curvature of a connection along `D = t^m d/dt` (`m` = 0, 1, 2).
///
/// Computed as `M_p - h(t) t^{-2} A(t)` where `M_0 = I`,
/// `M_{k+1} = D(M_k) + t^{m-2} A M_k` and `D^p = h(t) d/dt`.
/// The precision of the result is tracked by the Laurent arithmetic: the
/// `d/dt` frame loses one order per application, `t^2 d/dt` none.
pub fn p_curvature<F: Field>(c: &FormalConnection<F>, frame: Frame) -> Result<PCurvatureResult<F>> {
    let f = &c.field;
    let p = characteristic(f)?;
    let m = frame.t_power().ok_or_else(|| Error::InvalidInput(format!("frame {} needs the bigraded module", frame.name())))?;
    if (c.order() as u64) < p + 2 {
        return Err(Error::TruncationTooSmall { needed: p as i64 + 2, have: c.order() as i64 });
    }
    let d = c.rank;
    let n = c.order() as i64;
    let ad = LaurentMat::from_series(&c.a, m - 2);
    let step = |x: &LaurentMat<F>| x.derive(f, m).add(f, &ad.mul(f, x));
    let mut mk = LaurentMat::identity(f, d, n);
    for _ in 0..p {
        mk = step(&mk);
    }
    let h = t_only_power(f, frame)?;
    let a_over_t2 = LaurentMat::from_series(&c.a, -2);
    let hp = poly_laurent(f, &h, d, n + h.len() as i64 + 1);
    let correction = hp.mul(f, &a_over_t2);
    let fmat = mk.sub(f, &correction);

    // spot-check function linearity on g(t) v
    let mut rng = ChaCha8Rng::seed_from_u64(p ^ 0x5eed);
    let samples = 3;
    for _ in 0..samples {
        let g: Vec<F::Elem> = (0..4).map(|_| f.random(&mut rng)).collect();
        let v = Matrix::from_fn(d, 1, |_, _| f.random(&mut rng));
        let gl = poly_laurent(f, &g, 1, n + 8);
        let gv = LaurentMat { rows: d, cols: 1, offset: 0, coeffs: gl.coeffs.iter().map(|s| v.scale(f, s.get(0, 0))).collect() };
        let mut w = gv.clone();
        for _ in 0..p {
            w = step(&w);
        }
        let hl = poly_laurent(f, &h, 1, n + h.len() as i64 + 1);
        // nabla_{D^p}(g v) = h g' v + g h t^{-2} A v
        let dg = gv.derive(f, 0);
        let lhs = w.sub(f, &scalar_times(f, &hl, &dg)).sub(f, &scalar_times(f, &hl, &a_over_t2.mul(f, &gv)));
        let rhs = scalar_times(f, &gl, &fmat.mul(f, &LaurentMat::from_series(&MatSeries::constant(f, v.clone(), n as usize), 0)));
        if !lhs.sub(f, &rhs).is_zero(f) {
            return Err(Error::InvalidInput(format!("p-curvature along {} failed the linearity check", frame.name())));
        }
    }
    let nilpotency = nilpotency_test(f, &fmat);
    Ok(PCurvatureResult { frame, p, matrix: fmat, linearity_samples: samples, nilpotency })
}

/// Multiply a matrix by a scalar series stored as a `1 x 1` Laurent matrix.
fn scalar_times<F: Field>(f: &F, s: &LaurentMat<F>, x: &LaurentMat<F>) -> LaurentMat<F> {
    let n = x.rows;
    let diag = LaurentMat { rows: n, cols: n, offset: s.offset, coeffs: s.coeffs.iter().map(|c| Matrix::scalar(f, n, c.get(0, 0).clone())).collect() };
    diag.mul(f, x)
}

/// Nilpotency of the shifted p-curvature on one split block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPCurvature<F: Field> {
    pub lambda: F::Elem,
    /// `lambda^p`.
    pub lambda_p: F::Elem,
    pub rank: usize,
    pub shifted: NilpotencyVerdict,
}

/// For each block of a splitting, the p-curvature `F^lambda` along `t^2 d/dt`
/// of the block, and nilpotency of `F^lambda + lambda^p`.
pub fn shifted_block_pcurvature<F: Field>(split: &SplittingResult<F>) -> Result<Vec<BlockPCurvature<F>>> {
    let f = &split.field;
    let p = characteristic(f)?;
    let mut out = Vec::new();
    for b in split.sorted_blocks() {
        let res = p_curvature(&b.connection, Frame::T2Dt)?;
        let lambda_p = f.pow(&b.lambda, p);
        let shift = LaurentMat::from_series(&MatSeries::constant(f, Matrix::scalar(f, b.multiplicity, lambda_p.clone()), res.matrix.prec().max(0) as usize), 0);
        let shifted = res.matrix.add(f, &shift);
        out.push(BlockPCurvature { lambda: b.lambda.clone(), lambda_p, rank: b.multiplicity, shifted: nilpotency_test(f, &shifted) });
    }
    Ok(out)
}
