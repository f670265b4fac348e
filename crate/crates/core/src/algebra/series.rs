use alloc::vec::Vec;

use super::field::Field;
use super::matrix::Matrix;

/// Matrix-valued power series `sum_i C_i t^i` known modulo `t^order`.
///
/// Binary operations return the smaller of the two orders.
#[derive(Debug, Clone, PartialEq)]
pub struct MatSeries<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub coeffs: Vec<Matrix<F>>,
}

impl<F: Field> MatSeries<F> {
    pub fn zero(f: &F, rows: usize, cols: usize, order: usize) -> Self {
        MatSeries { rows, cols, coeffs: (0..order).map(|_| Matrix::zeros(f, rows, cols)).collect() }
    }

    pub fn identity(f: &F, n: usize, order: usize) -> Self {
        Self::constant(f, Matrix::identity(f, n), order)
    }

    pub fn constant(f: &F, m: Matrix<F>, order: usize) -> Self {
        let mut s = Self::zero(f, m.rows, m.cols, order);
        if order > 0 {
            s.coeffs[0] = m;
        }
        s
    }

    /// Series from leading coefficients, padded with zeros up to `order`.
    pub fn from_coeffs(f: &F, rows: usize, cols: usize, mut coeffs: Vec<Matrix<F>>, order: usize) -> Self {
        coeffs.truncate(order);
        while coeffs.len() < order {
            coeffs.push(Matrix::zeros(f, rows, cols));
        }
        MatSeries { rows, cols, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut s = self.clone();
        s.coeffs.truncate(order);
        s
    }

    pub fn add(&self, f: &F, o: &Self) -> Self {
        let n = self.order().min(o.order());
        MatSeries { rows: self.rows, cols: self.cols, coeffs: (0..n).map(|i| self.coeffs[i].add(f, &o.coeffs[i])).collect() }
    }

    pub fn sub(&self, f: &F, o: &Self) -> Self {
        let n = self.order().min(o.order());
        MatSeries { rows: self.rows, cols: self.cols, coeffs: (0..n).map(|i| self.coeffs[i].sub(f, &o.coeffs[i])).collect() }
    }

    pub fn neg(&self, f: &F) -> Self {
        MatSeries { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|c| c.neg(f)).collect() }
    }

    pub fn scale(&self, f: &F, c: &F::Elem) -> Self {
        MatSeries { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|m| m.scale(f, c)).collect() }
    }

    pub fn mul(&self, f: &F, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "series mul shape");
        let n = self.order().min(o.order());
        let mut out = Self::zero(f, self.rows, o.cols, n);
        let nz_a: Vec<usize> = (0..n).filter(|&i| !self.coeffs[i].is_zero(f)).collect();
        let nz_b: Vec<usize> = (0..n).filter(|&j| !o.coeffs[j].is_zero(f)).collect();
        for &i in &nz_a {
            for &j in &nz_b {
                if i + j >= n {
                    break;
                }
                out.coeffs[i + j].add_mul_assign(f, &self.coeffs[i], &o.coeffs[j]);
            }
        }
        out
    }

    /// Left multiplication by a constant matrix.
    pub fn lmul_const(&self, f: &F, m: &Matrix<F>) -> Self {
        MatSeries { rows: m.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|c| m.mul(f, c)).collect() }
    }

    /// `t^2 d/dt`, exact modulo `t^order`.
    pub fn t2_derivative(&self, f: &F) -> Self {
        let n = self.order();
        let mut out = Self::zero(f, self.rows, self.cols, n);
        for j in 1..n.saturating_sub(1) {
            out.coeffs[j + 1] = self.coeffs[j].scale(f, &f.from_i64(j as i64));
        }
        out
    }

    /// Multiply by `t^r` (order is kept; the top `r` coefficients fall off).
    pub fn shift(&self, f: &F, r: usize) -> Self {
        let n = self.order();
        let mut out = Self::zero(f, self.rows, self.cols, n);
        for i in 0..n.saturating_sub(r) {
            out.coeffs[i + r] = self.coeffs[i].clone();
        }
        out
    }

    /// Inverse to the same order; `None` unless the constant term is invertible.
    pub fn inverse(&self, f: &F) -> Option<Self> {
        let n = self.order();
        if n == 0 {
            return Some(self.clone());
        }
        let c0inv = self.coeffs[0].inverse(f)?;
        let mut out: Vec<Matrix<F>> = Vec::with_capacity(n);
        out.push(c0inv.clone());
        for k in 1..n {
            let mut acc = Matrix::zeros(f, self.rows, self.cols);
            for j in 1..=k {
                if self.coeffs[j].is_zero(f) {
                    continue;
                }
                acc.add_mul_assign(f, &self.coeffs[j], &out[k - j]);
            }
            out.push(c0inv.mul(f, &acc).neg(f));
        }
        Some(MatSeries { rows: self.rows, cols: self.cols, coeffs: out })
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        MatSeries { rows, cols, coeffs: self.coeffs.iter().map(|m| m.block(r0, c0, rows, cols)).collect() }
    }

    pub fn commutator(&self, f: &F, o: &Self) -> Self {
        self.mul(f, o).sub(f, &o.mul(f, self))
    }

    /// First nonzero coefficient as `(power of t, row, col)`.
    pub fn first_nonzero(&self, f: &F) -> Option<(usize, usize, usize)> {
        self.coeffs.iter().enumerate().find_map(|(k, m)| m.first_nonzero(f).map(|(i, j)| (k, i, j)))
    }

    pub fn is_zero(&self, f: &F) -> bool {
        self.first_nonzero(f).is_none()
    }

    pub fn pow(&self, f: &F, e: u32) -> Self {
        let mut acc = Self::identity(f, self.rows, self.order());
        for _ in 0..e {
            acc = acc.mul(f, self);
        }
        acc
    }

    pub fn map<G: Field>(&self, g: impl Fn(&F::Elem) -> G::Elem) -> MatSeries<G> {
        MatSeries { rows: self.rows, cols: self.cols, coeffs: self.coeffs.iter().map(|m| m.map(&g)).collect() }
    }
}
