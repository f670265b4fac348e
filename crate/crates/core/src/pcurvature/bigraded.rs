//! Matrices over `k[[q, t]]` and the quantum `t`- and `q`-connections on a
//! graded module, with the total degree operator `Deg = 2(q d/dq + t d/dt + mu)`.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derivation_pth_power, Frame};
use crate::algebra::{Field, MPoly, MatSeries, Matrix};
use crate::{Error, Result};

/// A matrix with entries in `k[[q, t]]`, known modulo `(q^m, t^n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiMat<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub q_order: usize,
    pub t_order: usize,
    /// Coefficient of `q^a t^b` at index `a * t_order + b`.
    pub coeffs: Vec<Matrix<F>>,
}

impl<F: Field> BiMat<F> {
    pub fn zero(f: &F, rows: usize, cols: usize, q_order: usize, t_order: usize) -> Self {
        BiMat { rows, cols, q_order, t_order, coeffs: (0..q_order * t_order).map(|_| Matrix::zeros(f, rows, cols)).collect() }
    }

    pub fn identity(f: &F, n: usize, q_order: usize, t_order: usize) -> Self {
        Self::constant(f, Matrix::identity(f, n), q_order, t_order)
    }

    pub fn constant(f: &F, m: Matrix<F>, q_order: usize, t_order: usize) -> Self {
        let mut out = Self::zero(f, m.rows, m.cols, q_order, t_order);
        if q_order > 0 && t_order > 0 {
            out.coeffs[0] = m;
        }
        out
    }

    /// `sum_a C_a q^a`, constant in `t`.
    pub fn from_q_poly(f: &F, rows: usize, cols: usize, c: &[Matrix<F>], q_order: usize, t_order: usize) -> Self {
        let mut out = Self::zero(f, rows, cols, q_order, t_order);
        if t_order > 0 {
            for (a, m) in c.iter().enumerate().take(q_order) {
                *out.at_mut(a, 0) = m.clone();
            }
        }
        out
    }

    /// A scalar polynomial in `(q, t)` (variables in that order) times the identity.
    pub fn from_scalar_poly(f: &F, n: usize, g: &MPoly<F>, q_order: usize, t_order: usize) -> Self {
        let mut out = Self::zero(f, n, n, q_order, t_order);
        for (m, c) in &g.terms {
            let (a, b) = (m.0[0] as usize, m.0[1] as usize);
            if a < q_order && b < t_order {
                *out.at_mut(a, b) = Matrix::scalar(f, n, c.clone());
            }
        }
        out
    }

    pub fn at(&self, a: usize, b: usize) -> &Matrix<F> {
        &self.coeffs[a * self.t_order + b]
    }

    pub fn at_mut(&mut self, a: usize, b: usize) -> &mut Matrix<F> {
        &mut self.coeffs[a * self.t_order + b]
    }

    pub fn truncate(&self, q_order: usize, t_order: usize) -> Self {
        let (m, n) = (q_order.min(self.q_order), t_order.min(self.t_order));
        let mut coeffs = Vec::with_capacity(m * n);
        for a in 0..m {
            for b in 0..n {
                coeffs.push(self.at(a, b).clone());
            }
        }
        BiMat { rows: self.rows, cols: self.cols, q_order: m, t_order: n, coeffs }
    }

    fn zip(&self, o: &Self, g: impl Fn(&Matrix<F>, &Matrix<F>) -> Matrix<F>) -> Self {
        let (m, n) = (self.q_order.min(o.q_order), self.t_order.min(o.t_order));
        let mut coeffs = Vec::with_capacity(m * n);
        for a in 0..m {
            for b in 0..n {
                coeffs.push(g(self.at(a, b), o.at(a, b)));
            }
        }
        BiMat { rows: self.rows, cols: self.cols, q_order: m, t_order: n, coeffs }
    }

    pub fn add(&self, f: &F, o: &Self) -> Self {
        self.zip(o, |x, y| x.add(f, y))
    }

    pub fn sub(&self, f: &F, o: &Self) -> Self {
        self.zip(o, |x, y| x.sub(f, y))
    }

    pub fn neg(&self, f: &F) -> Self {
        self.map_coeffs(|m| m.neg(f))
    }

    pub fn scale(&self, f: &F, c: &F::Elem) -> Self {
        self.map_coeffs(|m| m.scale(f, c))
    }

    fn map_coeffs(&self, g: impl Fn(&Matrix<F>) -> Matrix<F>) -> Self {
        BiMat { coeffs: self.coeffs.iter().map(g).collect(), ..self.clone() }
    }

    /// Entrywise map of scalars into another field.
    pub fn map<G: Field>(&self, h: impl Fn(&F::Elem) -> G::Elem) -> BiMat<G> {
        BiMat {
            rows: self.rows,
            cols: self.cols,
            q_order: self.q_order,
            t_order: self.t_order,
            coeffs: self.coeffs.iter().map(|m| m.map::<G>(&h)).collect(),
        }
    }

    pub fn mul(&self, f: &F, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "bigraded mul shape");
        let (m, n) = (self.q_order.min(o.q_order), self.t_order.min(o.t_order));
        let mut out = Self::zero(f, self.rows, o.cols, m, n);
        let nz: Vec<(usize, usize)> =
            (0..m).flat_map(|a| (0..n).map(move |b| (a, b))).filter(|&(a, b)| !o.at(a, b).is_zero(f)).collect();
        for a1 in 0..m {
            for b1 in 0..n {
                let x = self.at(a1, b1);
                if x.is_zero(f) {
                    continue;
                }
                for &(a2, b2) in &nz {
                    if a1 + a2 < m && b1 + b2 < n {
                        out.at_mut(a1 + a2, b1 + b2).add_mul_assign(f, x, o.at(a2, b2));
                    }
                }
            }
        }
        out
    }

    /// Multiply by `t^k`.
    pub fn t_shift(&self, f: &F, k: usize) -> Self {
        let mut out = Self::zero(f, self.rows, self.cols, self.q_order, self.t_order);
        for a in 0..self.q_order {
            for b in 0..self.t_order.saturating_sub(k) {
                *out.at_mut(a, b + k) = self.at(a, b).clone();
            }
        }
        out
    }

    /// Apply `q^i t^j d/dt` (`dq = false`) or `q^i t^j d/dq` (`dq = true`) entrywise.
    pub fn derive(&self, f: &F, dq: bool, i: usize, j: usize) -> Self {
        let mut out = Self::zero(f, self.rows, self.cols, self.q_order, self.t_order);
        for a in 0..self.q_order {
            for b in 0..self.t_order {
                let (e, na, nb) = if dq { (a, (a + i).checked_sub(1), Some(b + j)) } else { (b, Some(a + i), (b + j).checked_sub(1)) };
                if e == 0 {
                    continue;
                }
                if let (Some(na), Some(nb)) = (na, nb) {
                    if na < self.q_order && nb < self.t_order {
                        *out.at_mut(na, nb) = out.at(na, nb).add(f, &self.at(a, b).scale(f, &f.from_i64(e as i64)));
                    }
                }
            }
        }
        out
    }

    pub fn is_zero(&self, f: &F) -> bool {
        self.coeffs.iter().all(|m| m.is_zero(f))
    }

    /// First nonzero coefficient as `(q exponent, t exponent, row, col)`.
    pub fn first_nonzero(&self, f: &F) -> Option<(usize, usize, usize, usize)> {
        for a in 0..self.q_order {
            for b in 0..self.t_order {
                if let Some((i, j)) = self.at(a, b).first_nonzero(f) {
                    return Some((a, b, i, j));
                }
            }
        }
        None
    }

    /// The `q^0` part, as a series in `t`.
    pub fn at_q0(&self, f: &F) -> MatSeries<F> {
        let coeffs = (0..self.t_order).map(|b| self.at(0, b).clone()).collect();
        MatSeries::from_coeffs(f, self.rows, self.cols, coeffs, self.t_order)
    }

    /// The `t^0` part, as coefficients of `q^a`.
    pub fn at_t0(&self) -> Vec<Matrix<F>> {
        (0..self.q_order).map(|a| self.at(a, 0).clone()).collect()
    }

    pub fn random(f: &F, rows: usize, cols: usize, q_order: usize, t_order: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut out = Self::zero(f, rows, cols, q_order, t_order);
        for m in out.coeffs.iter_mut() {
            *m = Matrix::from_fn(rows, cols, |_, _| f.random(rng));
        }
        out
    }
}

/// A free module with integer degrees, `mu = (deg - dim)/2`, and the
/// multiplication-by-`c_1` matrix `C(q) = sum_a C_a q^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct BigradedModule<F: Field> {
    pub field: F,
    /// Cohomological degree of each basis element.
    pub degrees: Vec<i64>,
    /// Complex dimension `n`.
    pub dim: i64,
    /// `C_a`: coefficient of `q^a` in the matrix of `c_1 *_q`.
    pub c1: Vec<Matrix<F>>,
}

impl<F: Field> BigradedModule<F> {
    pub fn new(field: F, degrees: Vec<i64>, dim: i64, c1: Vec<Matrix<F>>) -> Result<Self> {
        let d = degrees.len();
        if d == 0 {
            return Err(Error::InvalidInput("empty basis".into()));
        }
        for (a, m) in c1.iter().enumerate() {
            if m.rows != d || m.cols != d {
                return Err(Error::DimensionMismatch(format!("c1 coefficient of q^{a} is {}x{}, expected {d}x{d}", m.rows, m.cols)));
            }
            for i in 0..d {
                for j in 0..d {
                    if !field.is_zero(m.get(i, j)) && degrees[i] + 2 * a as i64 != degrees[j] + 2 {
                        return Err(Error::GradingFailure {
                            left: format!("c1 * e{j}"),
                            right: format!("q^{a} e{i}"),
                            detail: format!("degree {} + 2 != {} + 2*{a}", degrees[j], degrees[i]),
                        });
                    }
                }
            }
        }
        if field.characteristic() == 2 {
            return Err(Error::NotOddPrime(2));
        }
        Ok(BigradedModule { field, degrees, dim, c1 })
    }

    pub fn rank(&self) -> usize {
        self.degrees.len()
    }

    pub fn mu(&self) -> Matrix<F> {
        let f = &self.field;
        let diag: Vec<F::Elem> = self.degrees.iter().map(|&k| f.from_ratio(k - self.dim, 2).unwrap()).collect();
        Matrix::diagonal(f, &diag)
    }

    /// `Deg` on `q^a t^b e_i`.
    pub fn deg_eigenvalue(&self, i: usize, a: usize, b: usize) -> i64 {
        2 * (a + b) as i64 + self.degrees[i] - self.dim
    }

    /// `Deg` applied to each column of `x`.
    pub fn deg(&self, x: &BiMat<F>) -> BiMat<F> {
        let f = &self.field;
        let mut out = x.clone();
        for a in 0..x.q_order {
            for b in 0..x.t_order {
                let m = out.at_mut(a, b);
                for i in 0..x.rows {
                    for j in 0..x.cols {
                        let v = f.mul(m.get(i, j), &f.from_i64(self.deg_eigenvalue(i, a, b)));
                        m.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn c1_matrix(&self, q_order: usize, t_order: usize) -> BiMat<F> {
        let d = self.rank();
        BiMat::from_q_poly(&self.field, d, d, &self.c1, q_order, t_order)
    }

    /// Connection matrix of `nabla_{t^2 d/dt} = t^2 d/dt + t mu - C(q)`.
    pub fn t_connection_matrix(&self, q_order: usize, t_order: usize) -> BiMat<F> {
        let f = &self.field;
        BiMat::constant(f, self.mu(), q_order, t_order).t_shift(f, 1).sub(f, &self.c1_matrix(q_order, t_order))
    }

    /// Connection matrix of `nabla_{t q d/dq} = t q d/dq + C(q)`.
    pub fn q_connection_matrix(&self, q_order: usize, t_order: usize) -> BiMat<F> {
        self.c1_matrix(q_order, t_order)
    }

    fn conn(&self, frame: Frame, q_order: usize, t_order: usize) -> Result<BiMat<F>> {
        match frame {
            Frame::T2Dt => Ok(self.t_connection_matrix(q_order, t_order)),
            Frame::TQDq => Ok(self.q_connection_matrix(q_order, t_order)),
            _ => Err(Error::InvalidInput(format!("no bigraded connection along {}", frame.name()))),
        }
    }

    fn derive_frame(&self, frame: Frame, x: &BiMat<F>) -> BiMat<F> {
        let f = &self.field;
        match frame {
            Frame::T2Dt => x.derive(f, false, 0, 2),
            Frame::TQDq => x.derive(f, true, 1, 1),
            Frame::Dt => x.derive(f, false, 0, 0),
            Frame::TDt => x.derive(f, false, 0, 1),
            Frame::QDq => x.derive(f, true, 1, 0),
        }
    }

    /// `nabla_frame` applied to the columns of `x`.
    pub fn apply(&self, frame: Frame, x: &BiMat<F>) -> Result<BiMat<F>> {
        let f = &self.field;
        let c = self.conn(frame, x.q_order, x.t_order)?;
        Ok(self.derive_frame(frame, x).add(f, &c.mul(f, x)))
    }

    /// `nabla_{D^p}` applied to `x`, with `D^p = g D` found by iterating `D` on coordinates.
    fn apply_pth_frame(&self, frame: Frame, x: &BiMat<F>) -> Result<BiMat<F>> {
        let f = &self.field;
        let pw = derivation_pth_power(f, frame)?;
        if pw.is_zero() {
            return Ok(BiMat::zero(f, x.rows, x.cols, x.q_order, x.t_order));
        }
        let g = pw.multiple_of_frame(f).ok_or_else(|| Error::InvalidInput(format!("p-th power of {} is not a multiple of it", frame.name())))?;
        let gm = BiMat::from_scalar_poly(f, x.rows, &g, x.q_order, x.t_order);
        Ok(gm.mul(f, &self.apply(frame, x)?))
    }

    /// p-curvature along `t^2 d/dt` or `t q d/dq`, by `p`-fold composition.
    pub fn p_curvature(&self, frame: Frame, q_order: usize, t_order: usize) -> Result<BiMat<F>> {
        let f = &self.field;
        let p = f.characteristic();
        if p == 0 {
            return Err(Error::CharacteristicZero);
        }
        let id = BiMat::identity(f, self.rank(), q_order, t_order);
        let mut x = id.clone();
        for _ in 0..p {
            x = self.apply(frame, &x)?;
        }
        Ok(x.sub(f, &self.apply_pth_frame(frame, &id)?))
    }

    /// `F(x) = nabla^p(x) - nabla_{D^p}(x)` on arbitrary `x`, for checking linearity.
    pub fn p_curvature_on(&self, frame: Frame, x: &BiMat<F>) -> Result<BiMat<F>> {
        let f = &self.field;
        let mut y = x.clone();
        for _ in 0..f.characteristic() {
            y = self.apply(frame, &y)?;
        }
        Ok(y.sub(f, &self.apply_pth_frame(frame, x)?))
    }

    /// First coefficient of `x` that is not of degree `s`, i.e. `q^a t^b` at
    /// `(i, j)` with `deg_i + 2a + 2b != deg_j + s`.
    pub fn homogeneity_witness(&self, x: &BiMat<F>, s: i64) -> Option<(usize, usize, usize, usize)> {
        let f = &self.field;
        for a in 0..x.q_order {
            for b in 0..x.t_order {
                let m = x.at(a, b);
                for i in 0..x.rows {
                    for j in 0..x.cols {
                        if !f.is_zero(m.get(i, j)) && self.degrees[i] + 2 * (a + b) as i64 != self.degrees[j] + s {
                            return Some((a, b, i, j));
                        }
                    }
                }
            }
        }
        None
    }

    /// Set `q = 1` in an operator of degree `s`. Each coefficient of `t^b` at
    /// `(i, j)` comes from the single power `q^a` allowed by the degree; the
    /// result is refused if that power lies beyond the `q`-truncation.
    pub fn collapse(&self, x: &BiMat<F>, s: i64) -> Result<MatSeries<F>> {
        let f = &self.field;
        if let Some((a, b, i, j)) = self.homogeneity_witness(x, s) {
            return Err(Error::DegreeMismatch(format!("coefficient of q^{a} t^{b} at ({i}, {j}) is not of degree {s}")));
        }
        let mut out = MatSeries::zero(f, x.rows, x.cols, x.t_order);
        for b in 0..x.t_order {
            for i in 0..x.rows {
                for j in 0..x.cols {
                    let twice = self.degrees[j] + s - self.degrees[i] - 2 * b as i64;
                    if twice < 0 || twice % 2 != 0 {
                        continue;
                    }
                    let a = (twice / 2) as usize;
                    if a >= x.q_order {
                        return Err(Error::CollapseNotFinite(format!("t^{b} at ({i}, {j}) needs q^{a}, known below q^{}", x.q_order)));
                    }
                    out.coeffs[b].set(i, j, x.at(a, b).get(i, j).clone());
                }
            }
        }
        Ok(out)
    }

    /// Smallest `q`-order at which an operator of degree `s` can be collapsed.
    pub fn collapse_q_order(&self, s: i64) -> usize {
        let lo = self.degrees.iter().min().copied().unwrap_or(0);
        let hi = self.degrees.iter().max().copied().unwrap_or(0);
        ((hi + s - lo).max(0) / 2 + 1) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QtIdentityVerdict {
    pub p: u64,
    pub q_order: usize,
    pub t_order: usize,
    /// `F_{t^2 d/dt} + F_{t q d/dq}` vanishes to `(q_order, t_order)`.
    pub identity_holds: bool,
    /// First nonzero coefficient `(a, b, i, j)` of the sum otherwise.
    pub witness: Option<(usize, usize, usize, usize)>,
    /// `nabla_{t^2 d/dt} = t Deg / 2 - nabla_{t q d/dq}` on the identity and a random element.
    pub frame_identity_holds: bool,
    /// `[Deg, nabla_{t q d/dq}] = 2 nabla_{t q d/dq}`.
    pub deg_commutation_holds: bool,
    /// Both p-curvatures are `k[[q, t]]`-linear on a random element.
    pub linearity_holds: bool,
}

impl QtIdentityVerdict {
    pub fn passed(&self) -> bool {
        self.identity_holds && self.frame_identity_holds && self.deg_commutation_holds && self.linearity_holds
    }
}

/// Compute the p-curvatures along `t^2 d/dt` and `t q d/dq` independently and
/// check that they sum to zero, together with the frame identity they rest on.
pub fn check_q_t_identity<F: Field>(m: &BigradedModule<F>, q_order: usize, t_order: usize, seed: u64) -> Result<QtIdentityVerdict> {
    let f = &m.field;
    let p = f.characteristic();
    if p == 0 {
        return Err(Error::CharacteristicZero);
    }
    let d = m.rank();
    let ft = m.p_curvature(Frame::T2Dt, q_order, t_order)?;
    let fq = m.p_curvature(Frame::TQDq, q_order, t_order)?;
    let sum = ft.add(f, &fq);
    let witness = sum.first_nonzero(f);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = BiMat::random(f, d, 2, q_order, t_order, &mut rng);
    let half = f.from_ratio(1, 2).unwrap();
    let mut frame_ok = true;
    let mut deg_ok = true;
    for y in [BiMat::identity(f, d, q_order, t_order), x.clone()] {
        let lhs = m.apply(Frame::T2Dt, &y)?;
        let rhs = m.deg(&y).t_shift(f, 1).scale(f, &half).sub(f, &m.apply(Frame::TQDq, &y)?);
        frame_ok &= lhs == rhs;
        let nq = m.apply(Frame::TQDq, &y)?;
        let comm = m.deg(&nq).sub(f, &m.apply(Frame::TQDq, &m.deg(&y))?);
        deg_ok &= comm == nq.scale(f, &f.from_i64(2));
    }
    let linear = m.p_curvature_on(Frame::T2Dt, &x)? == ft.mul(f, &x) && m.p_curvature_on(Frame::TQDq, &x)? == fq.mul(f, &x);
    Ok(QtIdentityVerdict {
        p,
        q_order,
        t_order,
        identity_holds: witness.is_none(),
        witness,
        frame_identity_holds: frame_ok,
        deg_commutation_holds: deg_ok,
        linearity_holds: linear,
    })
}
