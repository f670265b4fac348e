use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::field::Field;
use super::upoly::UPoly;
use crate::{Error, Result};

/// Dense row-major matrix over a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F: Field> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<F::Elem>,
}

/// A particular solution of `A X = B` and a basis of `ker A`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolution<F: Field> {
    pub particular: Matrix<F>,
    pub kernel: Vec<Vec<F::Elem>>,
}

/// A generalized eigenspace `ker (m - lambda)^k` with `k` the algebraic multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace<F: Field> {
    pub eigenvalue: F::Elem,
    pub multiplicity: usize,
    pub basis: Vec<Vec<F::Elem>>,
}

impl<F: Field> Matrix<F> {
    pub fn zeros(f: &F, rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![f.zero(); rows * cols] }
    }

    pub fn identity(f: &F, n: usize) -> Self {
        Self::scalar(f, n, f.one())
    }

    pub fn scalar(f: &F, n: usize, c: F::Elem) -> Self {
        let mut m = Self::zeros(f, n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut g: impl FnMut(usize, usize) -> F::Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(g(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<F::Elem>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_columns(rows: usize, cols: &[Vec<F::Elem>]) -> Self {
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn from_i64(f: &F, rows: &[&[i64]]) -> Self {
        Self::from_fn(rows.len(), rows.first().map_or(0, |r| r.len()), |i, j| f.from_i64(rows[i][j]))
    }

    pub fn diagonal(f: &F, d: &[F::Elem]) -> Self {
        let mut m = Self::zeros(f, d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &F::Elem {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: F::Elem) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self, f: &F) -> bool {
        self.data.iter().all(|x| f.is_zero(x))
    }

    /// First nonzero entry in row-major order.
    pub fn first_nonzero(&self, f: &F) -> Option<(usize, usize)> {
        self.data.iter().position(|x| !f.is_zero(x)).map(|k| (k / self.cols, k % self.cols))
    }

    fn check_same(&self, o: &Self, what: &str) {
        assert!(self.rows == o.rows && self.cols == o.cols, "{what}: {}x{} vs {}x{}", self.rows, self.cols, o.rows, o.cols);
    }

    pub fn add(&self, f: &F, o: &Self) -> Self {
        self.check_same(o, "add");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| f.add(a, b)).collect() }
    }

    pub fn sub(&self, f: &F, o: &Self) -> Self {
        self.check_same(o, "sub");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| f.sub(a, b)).collect() }
    }

    pub fn neg(&self, f: &F) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| f.neg(a)).collect() }
    }

    pub fn scale(&self, f: &F, c: &F::Elem) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| f.mul(a, c)).collect() }
    }

    pub fn mul(&self, f: &F, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "mul: {}x{} by {}x{}", self.rows, self.cols, o.rows, o.cols);
        let mut out = Self::zeros(f, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if f.is_zero(b) {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.data[idx] = f.add(&out.data[idx], &f.mul(a, b));
                }
            }
        }
        out
    }

    /// Checked product.
    pub fn try_mul(&self, f: &F, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!("{}x{} by {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        Ok(self.mul(f, o))
    }

    /// `self += a * b` without allocating the product.
    pub fn add_mul_assign(&mut self, f: &F, a: &Self, b: &Self) {
        assert!(a.cols == b.rows && self.rows == a.rows && self.cols == b.cols, "add_mul_assign shape");
        for i in 0..a.rows {
            for k in 0..a.cols {
                let x = a.get(i, k);
                if f.is_zero(x) {
                    continue;
                }
                for j in 0..b.cols {
                    let y = b.get(k, j);
                    if f.is_zero(y) {
                        continue;
                    }
                    let idx = i * self.cols + j;
                    self.data[idx] = f.add(&self.data[idx], &f.mul(x, y));
                }
            }
        }
    }

    pub fn mul_vec(&self, f: &F, v: &[F::Elem]) -> Vec<F::Elem> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = f.zero();
                for j in 0..self.cols {
                    acc = f.add(&acc, &f.mul(self.get(i, j), &v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn column(&self, j: usize) -> Vec<F::Elem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn map<G: Field>(&self, g: impl Fn(&F::Elem) -> G::Elem) -> Matrix<G> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(g).collect() }
    }

    pub fn try_map<G: Field>(&self, g: impl Fn(&F::Elem) -> Result<G::Elem>) -> Result<Matrix<G>> {
        Ok(Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(g).collect::<Result<_>>()? })
    }

    pub fn trace(&self, f: &F) -> F::Elem {
        (0..self.rows.min(self.cols)).fold(f.zero(), |acc, i| f.add(&acc, self.get(i, i)))
    }

    pub fn pow(&self, f: &F, e: u32) -> Self {
        let mut acc = Self::identity(f, self.rows);
        for _ in 0..e {
            acc = acc.mul(f, self);
        }
        acc
    }

    pub fn commutator(&self, f: &F, o: &Self) -> Self {
        self.mul(f, o).sub(f, &o.mul(f, self))
    }

    /// Evaluate a polynomial at this square matrix.
    pub fn eval_poly(&self, f: &F, p: &UPoly<F>) -> Self {
        let n = self.rows;
        let mut acc = Self::zeros(f, n, n);
        for c in p.coeffs.iter().rev() {
            acc = acc.mul(f, self).add(f, &Self::scalar(f, n, c.clone()));
        }
        acc
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self, f: &F) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !f.is_zero(m.get(i, c))) else { continue };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = f.inv(m.get(r, c)).unwrap();
            for j in c..m.cols {
                let v = f.mul(m.get(r, j), &inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if f.is_zero(&factor) {
                    continue;
                }
                for j in c..m.cols {
                    let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self, f: &F) -> usize {
        self.rref(f).1.len()
    }

    /// Basis of the right kernel.
    pub fn kernel(&self, f: &F) -> Vec<Vec<F::Elem>> {
        let (r, pivots) = self.rref(f);
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![f.zero(); self.cols];
            v[free] = f.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = f.neg(r.get(row, free));
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `self * X = b`.
    pub fn solve(&self, f: &F, b: &Self) -> Result<LinearSolution<F>> {
        if self.rows != b.rows {
            return Err(Error::DimensionMismatch(format!("solve: {} rows vs {}", self.rows, b.rows)));
        }
        let n = self.cols;
        let mut aug = Self::zeros(f, self.rows, n + b.cols);
        aug.set_block(0, 0, self);
        aug.set_block(0, n, b);
        let (r, pivots) = aug.rref(f);
        if pivots.iter().any(|&c| c >= n) {
            return Err(Error::NoSolution);
        }
        let mut x = Self::zeros(f, n, b.cols);
        for (row, &pc) in pivots.iter().enumerate() {
            for j in 0..b.cols {
                x.set(pc, j, r.get(row, n + j).clone());
            }
        }
        Ok(LinearSolution { particular: x, kernel: self.kernel(f) })
    }

    pub fn inverse(&self, f: &F) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let sol = self.solve(f, &Self::identity(f, self.rows)).ok()?;
        if sol.kernel.is_empty() {
            Some(sol.particular)
        } else {
            None
        }
    }

    pub fn det(&self, f: &F) -> Result<F::Elem> {
        if !self.is_square() {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let mut m = self.clone();
        let n = m.rows;
        let mut det = f.one();
        for c in 0..n {
            let Some(pr) = (c..n).find(|&i| !f.is_zero(m.get(i, c))) else { return Ok(f.zero()) };
            if pr != c {
                for j in 0..n {
                    m.data.swap(pr * n + j, c * n + j);
                }
                det = f.neg(&det);
            }
            let piv = m.get(c, c).clone();
            det = f.mul(&det, &piv);
            let inv = f.inv(&piv).unwrap();
            for i in c + 1..n {
                let factor = f.mul(m.get(i, c), &inv);
                if f.is_zero(&factor) {
                    continue;
                }
                for j in c..n {
                    let v = f.sub(m.get(i, j), &f.mul(&factor, m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Characteristic polynomial `det(x I - m)` via reduction to Hessenberg
    /// form; valid in every characteristic.
    pub fn char_poly(&self, f: &F) -> Result<UPoly<F>> {
        if !self.is_square() {
            return Err(Error::NonSquare { rows: self.rows, cols: self.cols });
        }
        let n = self.rows;
        let mut h = self.clone();
        for j in 0..n.saturating_sub(2) {
            let Some(i) = (j + 1..n).find(|&i| !f.is_zero(h.get(i, j))) else { continue };
            if i != j + 1 {
                for c in 0..n {
                    h.data.swap(i * n + c, (j + 1) * n + c);
                }
                for r in 0..n {
                    h.data.swap(r * n + i, r * n + j + 1);
                }
            }
            let inv = f.inv(h.get(j + 1, j)).unwrap();
            for k in j + 2..n {
                let u = f.mul(h.get(k, j), &inv);
                if f.is_zero(&u) {
                    continue;
                }
                for c in 0..n {
                    let v = f.sub(h.get(k, c), &f.mul(&u, h.get(j + 1, c)));
                    h.set(k, c, v);
                }
                for r in 0..n {
                    let v = f.add(h.get(r, j + 1), &f.mul(&u, h.get(r, k)));
                    h.set(r, j + 1, v);
                }
            }
        }
        let mut ps: Vec<UPoly<F>> = vec![UPoly::one(f)];
        for m in 1..=n {
            let lin = UPoly::linear(f, h.get(m - 1, m - 1));
            let mut pm = lin.mul(f, &ps[m - 1]);
            let mut t = f.one();
            for i in 1..m {
                t = f.mul(&t, h.get(m - i, m - i - 1));
                let c = f.mul(&t, h.get(m - i - 1, m - 1));
                pm = pm.sub(f, &ps[m - i - 1].scale(f, &c));
            }
            ps.push(pm);
        }
        Ok(ps.pop().unwrap())
    }

    pub fn format_rows(&self, f: &F) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| f.format(self.get(i, j))).collect()).collect()
    }
}

/// A field over which `g` (with no roots in `f`) splits, when one is cheap to name.
///
/// Over `F_q` this is `F_{q^L}` with `L` the least power such that
/// `x^(q^L) = x` modulo the squarefree part of `g`. Over `Q` a root-free
/// quadratic or cubic is irreducible and names its own extension.
fn splitting_field<F: Field>(f: &F, g: &UPoly<F>) -> Option<String> {
    let d = g.degree()?;
    let p = f.characteristic();
    if p == 0 {
        return (f.degree() == 1 && (d == 2 || d == 3)).then(|| format!("Q[a]/({})", g.monic(f).format_var(f, "a")));
    }
    let dg = g.derivative(f);
    let sq = if dg.is_zero() { g.monic(f) } else { g.divrem(f, &g.gcd(f, &dg)).0.monic(f) };
    let q = p.checked_pow(f.degree() as u32)?;
    let x = UPoly::x(f).rem(f, &sq);
    let mut h = x.clone();
    // L is the lcm of the factor degrees, which can exceed the degree of `g`
    for l in 1..=4096 {
        h = h.pow_mod(f, q, &sq);
        if h == x {
            let k = f.degree() * l;
            return Some(format!("F_{{{p}^{k}}}"));
        }
    }
    None
}

/// Generalized eigenspaces of a square matrix, sorted by eigenvalue in the
/// field's canonical order.
///
/// Roots of the characteristic polynomial come from [`Field::roots`]; `hints`
/// offers extra candidates (needed for extensions of `Q`). Every hint is
/// checked exactly. Fails with `CharPolyDoesNotSplit` when the found roots do
/// not account for the full degree.
pub fn generalized_eigenspaces<F: Field>(f: &F, m: &Matrix<F>, hints: &[F::Elem]) -> Result<Vec<Eigenspace<F>>> {
    let chi = m.char_poly(f)?;
    let n = m.rows;
    let mut roots = f.roots(&chi, hints);
    roots.sort_by(|a, b| f.cmp_elem(a, b));
    roots.dedup();
    let mut rest = chi.clone();
    let mut found = Vec::new();
    for r in roots {
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
            found.push((r, mult));
        }
    }
    if rest.degree().unwrap_or(0) > 0 {
        return Err(Error::CharPolyDoesNotSplit { factor: rest.format(f), suggestion: splitting_field(f, &rest) });
    }
    let mut out = Vec::new();
    for (r, mult) in found {
        let shifted = m.sub(f, &Matrix::scalar(f, n, r.clone()));
        let basis = shifted.pow(f, mult as u32).kernel(f);
        debug_assert_eq!(basis.len(), mult);
        out.push(Eigenspace { eigenvalue: r, multiplicity: mult, basis });
    }
    Ok(out)
}
