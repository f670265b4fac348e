use alloc::vec;
use alloc::vec::Vec;

use super::field::Field;
use super::matrix::Matrix;
use super::series::MatSeries;

/// Scalar Laurent series `sum_i c_i t^{offset+i} + O(t^prec)`.
///
/// The stored coefficients are exactly those with exponent below `prec`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent<F: Field> {
    pub offset: i64,
    pub coeffs: Vec<F::Elem>,
}

impl<F: Field> Laurent<F> {
    pub fn new(offset: i64, coeffs: Vec<F::Elem>) -> Self {
        Laurent { offset, coeffs }
    }

    /// Zero known modulo `t^prec`.
    pub fn zero(f: &F, prec: i64) -> Self {
        Laurent { offset: prec.min(0), coeffs: vec![f.zero(); (prec - prec.min(0)) as usize] }
    }

    /// A polynomial `sum c_i t^i`, stated modulo `t^prec`.
    pub fn from_poly(f: &F, coeffs: &[F::Elem], prec: i64) -> Self {
        let n = prec.max(0) as usize;
        let c = (0..n).map(|i| coeffs.get(i).cloned().unwrap_or_else(|| f.zero())).collect();
        Laurent { offset: 0, coeffs: c }
    }

    pub fn prec(&self) -> i64 {
        self.offset + self.coeffs.len() as i64
    }

    /// Exponent of the first known nonzero coefficient.
    pub fn valuation(&self, f: &F) -> Option<i64> {
        self.coeffs.iter().position(|c| !f.is_zero(c)).map(|i| self.offset + i as i64)
    }

    /// A lower bound for the true valuation.
    pub fn valuation_lb(&self, f: &F) -> i64 {
        self.valuation(f).unwrap_or_else(|| self.prec())
    }

    /// Coefficient of `t^e`; `None` if beyond the precision.
    pub fn coeff(&self, f: &F, e: i64) -> Option<F::Elem> {
        if e >= self.prec() {
            None
        } else if e < self.offset {
            Some(f.zero())
        } else {
            Some(self.coeffs[(e - self.offset) as usize].clone())
        }
    }

    fn with_range(f: &F, lo: i64, prec: i64, g: impl Fn(i64) -> F::Elem) -> Self {
        let lo = lo.min(prec);
        let _ = f;
        Laurent { offset: lo, coeffs: (lo..prec).map(g).collect() }
    }

    pub fn add(&self, f: &F, o: &Self) -> Self {
        let prec = self.prec().min(o.prec());
        Self::with_range(f, self.offset.min(o.offset), prec, |e| f.add(&self.coeff(f, e).unwrap(), &o.coeff(f, e).unwrap()))
    }

    pub fn sub(&self, f: &F, o: &Self) -> Self {
        let prec = self.prec().min(o.prec());
        Self::with_range(f, self.offset.min(o.offset), prec, |e| f.sub(&self.coeff(f, e).unwrap(), &o.coeff(f, e).unwrap()))
    }

    pub fn neg(&self, f: &F) -> Self {
        Laurent { offset: self.offset, coeffs: self.coeffs.iter().map(|c| f.neg(c)).collect() }
    }

    pub fn scale(&self, f: &F, c: &F::Elem) -> Self {
        Laurent { offset: self.offset, coeffs: self.coeffs.iter().map(|x| f.mul(x, c)).collect() }
    }

    /// Multiply by `t^s`.
    pub fn shift(&self, s: i64) -> Self {
        Laurent { offset: self.offset + s, coeffs: self.coeffs.clone() }
    }

    pub fn mul(&self, f: &F, o: &Self) -> Self {
        let va = self.valuation_lb(f);
        let vb = o.valuation_lb(f);
        let prec = (va + o.prec()).min(vb + self.prec());
        let lo = (va + vb).min(prec);
        let mut out = vec![f.zero(); (prec - lo).max(0) as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            let ea = self.offset + i as i64;
            for (j, b) in o.coeffs.iter().enumerate() {
                let e = ea + o.offset + j as i64;
                if e >= prec {
                    break;
                }
                if e < lo || f.is_zero(b) {
                    continue;
                }
                let k = (e - lo) as usize;
                out[k] = f.add(&out[k], &f.mul(a, b));
            }
        }
        Laurent { offset: lo, coeffs: out }
    }

    /// Multiplicative inverse, or `None` when no coefficient is known to be nonzero.
    pub fn inv(&self, f: &F) -> Option<Self> {
        let v = self.valuation(f)?;
        let start = (v - self.offset) as usize;
        let u = &self.coeffs[start..];
        let r = u.len();
        let u0inv = f.inv(&u[0]).unwrap();
        let mut b: Vec<F::Elem> = Vec::with_capacity(r);
        b.push(u0inv.clone());
        for k in 1..r {
            let mut acc = f.zero();
            for j in 1..=k {
                acc = f.add(&acc, &f.mul(&u[j], &b[k - j]));
            }
            b.push(f.neg(&f.mul(&u0inv, &acc)));
        }
        Some(Laurent { offset: -v, coeffs: b })
    }

    /// `t d/dt`.
    pub fn theta(&self, f: &F) -> Self {
        Laurent {
            offset: self.offset,
            coeffs: self.coeffs.iter().enumerate().map(|(i, c)| f.mul(c, &f.from_i64(self.offset + i as i64))).collect(),
        }
    }
}

/// Matrix-valued Laurent series `sum_i C_i t^{offset+i} + O(t^prec)`,
/// with one precision for all entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentMat<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub offset: i64,
    pub coeffs: Vec<Matrix<F>>,
}

impl<F: Field> LaurentMat<F> {
    /// `t^shift * s`.
    pub fn from_series(s: &MatSeries<F>, shift: i64) -> Self {
        LaurentMat { rows: s.rows, cols: s.cols, offset: shift, coeffs: s.coeffs.clone() }
    }

    pub fn identity(f: &F, n: usize, prec: i64) -> Self {
        let mut coeffs: Vec<Matrix<F>> = (0..prec.max(0)).map(|_| Matrix::zeros(f, n, n)).collect();
        if !coeffs.is_empty() {
            coeffs[0] = Matrix::identity(f, n);
        }
        LaurentMat { rows: n, cols: n, offset: 0, coeffs }
    }

    pub fn zero(f: &F, rows: usize, cols: usize, offset: i64, prec: i64) -> Self {
        LaurentMat { rows, cols, offset, coeffs: (offset..prec).map(|_| Matrix::zeros(f, rows, cols)).collect() }
    }

    pub fn prec(&self) -> i64 {
        self.offset + self.coeffs.len() as i64
    }

    pub fn valuation(&self, f: &F) -> Option<i64> {
        self.coeffs.iter().position(|m| !m.is_zero(f)).map(|i| self.offset + i as i64)
    }

    pub fn valuation_lb(&self, f: &F) -> i64 {
        self.valuation(f).unwrap_or_else(|| self.prec())
    }

    pub fn coeff(&self, e: i64) -> Option<&Matrix<F>> {
        if e < self.offset || e >= self.prec() {
            None
        } else {
            Some(&self.coeffs[(e - self.offset) as usize])
        }
    }

    /// Every known coefficient vanishes.
    pub fn is_zero(&self, f: &F) -> bool {
        self.valuation(f).is_none()
    }

    /// First nonzero coefficient as `(exponent, row, col)`.
    pub fn first_nonzero(&self, f: &F) -> Option<(i64, usize, usize)> {
        self.coeffs
            .iter()
            .enumerate()
            .find_map(|(k, m)| m.first_nonzero(f).map(|(i, j)| (self.offset + k as i64, i, j)))
    }

    fn combine(&self, f: &F, o: &Self, g: impl Fn(&Matrix<F>, &Matrix<F>) -> Matrix<F>) -> Self {
        let prec = self.prec().min(o.prec());
        let lo = self.offset.min(o.offset).min(prec);
        let za = Matrix::zeros(f, self.rows, self.cols);
        let coeffs = (lo..prec)
            .map(|e| {
                let a = self.coeff(e).unwrap_or(&za);
                let b = o.coeff(e).unwrap_or(&za);
                g(a, b)
            })
            .collect();
        LaurentMat { rows: self.rows, cols: self.cols, offset: lo, coeffs }
    }

    pub fn add(&self, f: &F, o: &Self) -> Self {
        self.combine(f, o, |a, b| a.add(f, b))
    }

    pub fn sub(&self, f: &F, o: &Self) -> Self {
        self.combine(f, o, |a, b| a.sub(f, b))
    }

    pub fn scale(&self, f: &F, c: &F::Elem) -> Self {
        LaurentMat { rows: self.rows, cols: self.cols, offset: self.offset, coeffs: self.coeffs.iter().map(|m| m.scale(f, c)).collect() }
    }

    /// Multiply by `t^s`.
    pub fn shift(&self, s: i64) -> Self {
        LaurentMat { offset: self.offset + s, ..self.clone() }
    }

    pub fn mul(&self, f: &F, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "laurent mul shape");
        let va = self.valuation_lb(f);
        let vb = o.valuation_lb(f);
        let prec = (va + o.prec()).min(vb + self.prec());
        let lo = (va + vb).min(prec);
        let mut out: Vec<Matrix<F>> = (lo..prec).map(|_| Matrix::zeros(f, self.rows, o.cols)).collect();
        let nz_b: Vec<usize> = (0..o.coeffs.len()).filter(|&j| !o.coeffs[j].is_zero(f)).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero(f) {
                continue;
            }
            let ea = self.offset + i as i64;
            for &j in &nz_b {
                let e = ea + o.offset + j as i64;
                if e >= prec {
                    break;
                }
                if e < lo {
                    continue;
                }
                out[(e - lo) as usize].add_mul_assign(f, a, &o.coeffs[j]);
            }
        }
        LaurentMat { rows: self.rows, cols: o.cols, offset: lo, coeffs: out }
    }

    /// Apply the derivation `t^m d/dt` entrywise.
    pub fn derive(&self, f: &F, m: i64) -> Self {
        LaurentMat {
            rows: self.rows,
            cols: self.cols,
            offset: self.offset + m - 1,
            coeffs: self.coeffs.iter().enumerate().map(|(i, c)| c.scale(f, &f.from_i64(self.offset + i as i64))).collect(),
        }
    }

    /// Drop everything at or above `t^prec`.
    pub fn truncate(&self, prec: i64) -> Self {
        let mut s = self.clone();
        let keep = (prec - self.offset).clamp(0, self.coeffs.len() as i64) as usize;
        s.coeffs.truncate(keep);
        s
    }

    /// Entry `(i, j)` as a scalar Laurent series.
    pub fn entry(&self, i: usize, j: usize) -> Laurent<F> {
        Laurent { offset: self.offset, coeffs: self.coeffs.iter().map(|m| m.get(i, j).clone()).collect() }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        LaurentMat { rows, cols, offset: self.offset, coeffs: self.coeffs.iter().map(|m| m.block(r0, c0, rows, cols)).collect() }
    }
}
