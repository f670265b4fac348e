//! Quantum cohomology rings given by structure constants over `k[q]`, the
//! grading operator, and the quantum `t`- and `q`-connections.
//!
//! Grading: `|q| = 2`, so a structure constant `q^a e_k` in `e_i * e_j`
//! requires `deg e_i + deg e_j = deg e_k + 2a`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::algebra::{generalized_eigenspaces, Field, FqField, Matrix, QField, QReduction};
use crate::connection::FormalConnection;
use crate::pcurvature::BigradedModule;
use crate::{Error, Result};

/// An element of `H[q]`: `coeffs[a][k]` is the coefficient of `q^a e_k`.
pub type QVec<F> = Vec<Vec<<F as Field>::Elem>>;

/// One entry of a product table: `e_left * e_right` contains `coeff q^q_power e_target`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm<F: Field> {
    pub left: usize,
    pub right: usize,
    pub q_power: usize,
    pub target: usize,
    pub coeff: F::Elem,
}

/// Input data for [`QHRing::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct RingData<F: Field> {
    pub names: Vec<String>,
    /// Cohomological degrees; `None` for a ring that is only `Z/2`-graded,
    /// in which case the parities are given by `parities`.
    pub degrees: Option<Vec<i64>>,
    pub parities: Vec<u8>,
    /// Complex dimension.
    pub dim: i64,
    pub unit: usize,
    pub c1: Vec<F::Elem>,
    /// Products not listed are filled in from graded commutativity and the
    /// unit; anything still missing is zero.
    pub products: Vec<ProductTerm<F>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QHRing<F: Field> {
    pub field: F,
    pub names: Vec<String>,
    pub degrees: Option<Vec<i64>>,
    pub parities: Vec<u8>,
    pub dim: i64,
    pub unit: usize,
    pub c1: Vec<F::Elem>,
    /// `table[i * d + j]` is `e_i * e_j` as a [`QVec`].
    pub table: Vec<QVec<F>>,
}

fn qvec_trim<F: Field>(f: &F, v: &mut QVec<F>) {
    while v.last().is_some_and(|c| c.iter().all(|x| f.is_zero(x))) {
        v.pop();
    }
}

impl<F: Field> QHRing<F> {
    pub fn new(field: F, data: RingData<F>) -> Result<Self> {
        let f = &field;
        let d = data.names.len();
        if d == 0 || data.parities.len() != d || data.c1.len() != d || data.unit >= d {
            return Err(Error::InvalidInput(format!("ring of rank {d}: parities, c1 and unit must match the basis")));
        }
        if let Some(deg) = &data.degrees {
            if deg.len() != d {
                return Err(Error::InvalidInput(format!("{} degrees for {d} basis elements", deg.len())));
            }
            if deg.iter().zip(&data.parities).any(|(k, &par)| (k.rem_euclid(2)) as u8 != par) {
                return Err(Error::InvalidInput("degrees and parities disagree".into()));
            }
        }
        if f.characteristic() == 2 {
            return Err(Error::NotOddPrime(2));
        }
        let mut given = alloc::vec![false; d * d];
        let mut table: Vec<QVec<F>> = (0..d * d).map(|_| Vec::new()).collect();
        for t in &data.products {
            if t.left >= d || t.right >= d || t.target >= d {
                return Err(Error::InvalidInput(format!("product index out of range in e{} * e{}", t.left, t.right)));
            }
            let idx = t.left * d + t.right;
            given[idx] = true;
            let v = &mut table[idx];
            while v.len() <= t.q_power {
                v.push(alloc::vec![f.zero(); d]);
            }
            v[t.q_power][t.target] = f.add(&v[t.q_power][t.target], &t.coeff);
        }
        for v in table.iter_mut() {
            qvec_trim(f, v);
        }
        for i in 0..d {
            for j in 0..d {
                if !given[i * d + j] && given[j * d + i] {
                    let sign = data.parities[i] & data.parities[j] == 1;
                    table[i * d + j] = table[j * d + i].iter().map(|c| c.iter().map(|x| if sign { f.neg(x) } else { x.clone() }).collect()).collect();
                    given[i * d + j] = true;
                }
            }
        }
        let u = data.unit;
        for j in 0..d {
            let mut ej = alloc::vec![f.zero(); d];
            ej[j] = f.one();
            for idx in [u * d + j, j * d + u] {
                if !given[idx] {
                    table[idx] = alloc::vec![ej.clone()];
                    given[idx] = true;
                }
            }
        }
        let ring = QHRing { field, names: data.names, degrees: data.degrees, parities: data.parities, dim: data.dim, unit: u, c1: data.c1, table };
        ring.validate()?;
        Ok(ring)
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn basis_vec(&self, i: usize) -> Vec<F::Elem> {
        let f = &self.field;
        let mut v = alloc::vec![f.zero(); self.rank()];
        v[i] = f.one();
        v
    }

    pub fn unit_vec(&self) -> Vec<F::Elem> {
        self.basis_vec(self.unit)
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &QVec<F> {
        &self.table[i * self.rank() + j]
    }

    /// Product of two elements of `H[q]`.
    pub fn mul_q(&self, x: &QVec<F>, y: &QVec<F>) -> QVec<F> {
        let f = &self.field;
        let d = self.rank();
        let mut out: QVec<F> = Vec::new();
        for (a, xa) in x.iter().enumerate() {
            for (b, yb) in y.iter().enumerate() {
                for i in 0..d {
                    if f.is_zero(&xa[i]) {
                        continue;
                    }
                    for j in 0..d {
                        if f.is_zero(&yb[j]) {
                            continue;
                        }
                        let c = f.mul(&xa[i], &yb[j]);
                        for (e, v) in self.basis_product(i, j).iter().enumerate() {
                            while out.len() <= a + b + e {
                                out.push(alloc::vec![f.zero(); d]);
                            }
                            for k in 0..d {
                                out[a + b + e][k] = f.add(&out[a + b + e][k], &f.mul(&c, &v[k]));
                            }
                        }
                    }
                }
            }
        }
        qvec_trim(f, &mut out);
        out
    }

    /// Product at `q = 1` of two elements of `H`.
    pub fn mul_q1(&self, x: &[F::Elem], y: &[F::Elem]) -> Vec<F::Elem> {
        self.at_q1(&self.mul_q(&alloc::vec![x.to_vec()], &alloc::vec![y.to_vec()]))
    }

    pub fn at_q1(&self, v: &QVec<F>) -> Vec<F::Elem> {
        let f = &self.field;
        let mut out = alloc::vec![f.zero(); self.rank()];
        for c in v {
            for k in 0..out.len() {
                out[k] = f.add(&out[k], &c[k]);
            }
        }
        out
    }

    /// Coefficients `M_a` of the matrix of `x *_q -`.
    pub fn mult_matrix_q(&self, x: &[F::Elem]) -> Vec<Matrix<F>> {
        let f = &self.field;
        let d = self.rank();
        let mut out: Vec<Matrix<F>> = Vec::new();
        for j in 0..d {
            let col = self.mul_q(&alloc::vec![x.to_vec()], &alloc::vec![self.basis_vec(j)]);
            for (a, c) in col.iter().enumerate() {
                while out.len() <= a {
                    out.push(Matrix::zeros(f, d, d));
                }
                for i in 0..d {
                    out[a].set(i, j, c[i].clone());
                }
            }
        }
        if out.is_empty() {
            out.push(Matrix::zeros(f, d, d));
        }
        out
    }

    pub fn mult_matrix_q1(&self, x: &[F::Elem]) -> Matrix<F> {
        let f = &self.field;
        let mut acc = Matrix::zeros(f, self.rank(), self.rank());
        for m in self.mult_matrix_q(x) {
            acc = acc.add(f, &m);
        }
        acc
    }

    pub fn c1_matrix_q(&self) -> Vec<Matrix<F>> {
        self.mult_matrix_q(&self.c1)
    }

    pub fn c1_matrix_q1(&self) -> Matrix<F> {
        self.mult_matrix_q1(&self.c1)
    }

    /// Largest power of `q` in the table.
    pub fn max_q_power(&self) -> usize {
        self.table.iter().map(|v| v.len().saturating_sub(1)).max().unwrap_or(0)
    }

    fn check_grading(&self) -> Result<()> {
        let f = &self.field;
        let d = self.rank();
        let Some(deg) = &self.degrees else { return Ok(()) };
        for i in 0..d {
            for j in 0..d {
                for (a, v) in self.basis_product(i, j).iter().enumerate() {
                    for k in 0..d {
                        if !f.is_zero(&v[k]) && deg[i] + deg[j] != deg[k] + 2 * a as i64 {
                            return Err(Error::GradingFailure {
                                left: self.names[i].clone(),
                                right: self.names[j].clone(),
                                detail: format!(
                                    "term q^{a} {} has degree {} but {} + {} = {}",
                                    self.names[k],
                                    deg[k] + 2 * a as i64,
                                    deg[i],
                                    deg[j],
                                    deg[i] + deg[j]
                                ),
                            });
                        }
                    }
                }
            }
        }
        for k in 0..d {
            if !f.is_zero(&self.c1[k]) && deg[k] != 2 {
                return Err(Error::GradingFailure {
                    left: "c1".into(),
                    right: String::new(),
                    detail: format!("c1 has a component along {} of degree {}", self.names[k], deg[k]),
                });
            }
        }
        Ok(())
    }

    /// Unit law, graded commutativity, associativity and grading, each with a witness.
    pub fn validate(&self) -> Result<()> {
        let f = &self.field;
        let d = self.rank();
        for j in 0..d {
            let ej = alloc::vec![self.basis_vec(j)];
            if *self.basis_product(self.unit, j) != ej || *self.basis_product(j, self.unit) != ej {
                return Err(Error::UnitFailure(self.names[j].clone()));
            }
        }
        for i in 0..d {
            for j in 0..d {
                let sign = self.parities[i] & self.parities[j] == 1;
                let flipped: QVec<F> =
                    self.basis_product(j, i).iter().map(|c| c.iter().map(|x| if sign { f.neg(x) } else { x.clone() }).collect()).collect();
                if *self.basis_product(i, j) != flipped {
                    return Err(Error::CommutativityFailure(self.names[i].clone(), self.names[j].clone()));
                }
            }
        }
        self.check_grading()?;
        for i in 0..d {
            for j in 0..d {
                let ij = self.basis_product(i, j).clone();
                for k in 0..d {
                    let ek = alloc::vec![self.basis_vec(k)];
                    let left = self.mul_q(&ij, &ek);
                    let right = self.mul_q(&alloc::vec![self.basis_vec(i)], self.basis_product(j, k));
                    if left != right {
                        return Err(Error::AssociativityFailure(self.names[i].clone(), self.names[j].clone(), self.names[k].clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// The grading operator `mu = (deg - n)/2`.
    pub fn mu(&self) -> Result<Matrix<F>> {
        let f = &self.field;
        let deg = self.degrees.as_ref().ok_or(Error::MissingDegree)?;
        let diag: Vec<F::Elem> = deg.iter().map(|&k| f.from_ratio(k - self.dim, 2).unwrap()).collect();
        Ok(Matrix::diagonal(f, &diag))
    }

    /// The module on which the quantum `t`- and `q`-connections act, with `q` formal.
    pub fn bigraded_module(&self) -> Result<BigradedModule<F>> {
        let deg = self.degrees.clone().ok_or(Error::MissingDegree)?;
        BigradedModule::new(self.field.clone(), deg, self.dim, self.c1_matrix_q())
    }

    /// `d/dt + mu/t - (c1 *)/t^2` at `q = 1`: `A_0 = -(c1 *)`, `A_1 = mu`.
    pub fn build_t_connection(&self, order: usize) -> Result<FormalConnection<F>> {
        let f = &self.field;
        FormalConnection::new(f.clone(), alloc::vec![self.c1_matrix_q1().neg(f), self.mu()?], order)
    }

    /// The same connection obtained by collapsing the `q`-formal `t^2 d/dt`
    /// connection matrix (an operator of degree 2) at `q = 1`.
    pub fn build_t_connection_collapsed(&self, order: usize) -> Result<FormalConnection<F>> {
        let f = &self.field;
        let m = self.bigraded_module()?;
        let q_order = m.collapse_q_order(2);
        let conn = m.t_connection_matrix(q_order, order + 1);
        let s = m.collapse(&conn, 2)?;
        // t^2 nabla = t^2 d/dt + A(t) with A_0 = -C(1) and A_1 = mu
        FormalConnection::new(f.clone(), s.coeffs[..order].to_vec(), order)
    }

    pub fn map_field<G: Field>(&self, g: G, h: impl Fn(&F::Elem) -> Result<G::Elem>) -> Result<QHRing<G>> {
        let table = self
            .table
            .iter()
            .map(|v| {
                let mut w: QVec<G> = v.iter().map(|c| c.iter().map(&h).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
                qvec_trim(&g, &mut w);
                Ok(w)
            })
            .collect::<Result<Vec<_>>>()?;
        let ring = QHRing {
            names: self.names.clone(),
            degrees: self.degrees.clone(),
            parities: self.parities.clone(),
            dim: self.dim,
            unit: self.unit,
            c1: self.c1.iter().map(&h).collect::<Result<_>>()?,
            table,
            field: g,
        };
        ring.validate()?;
        Ok(ring)
    }
}

impl QHRing<QField> {
    pub fn reduce(&self, red: &QReduction) -> Result<QHRing<FqField>> {
        self.map_field(red.target.clone(), |x| red.elem(x))
    }
}

/// `H^*(CP^n)` with basis `1, h, ..., h^n`, `h^i * h^j = h^{i+j}` for
/// `i + j <= n` and `q^{n+1} h^{i+j-n-1}` otherwise, `c1 = (n+1) h`.
pub fn cp_n_ring<F: Field>(n: usize, field: F) -> Result<QHRing<F>> {
    if n == 0 {
        return Err(Error::InvalidInput("CP^n needs n >= 1".into()));
    }
    let f = &field;
    let d = n + 1;
    let names = (0..d).map(|i| match i {
        0 => String::from("1"),
        1 => String::from("h"),
        _ => format!("h^{i}"),
    });
    let mut products = Vec::new();
    for i in 0..d {
        for j in 0..d {
            let (q_power, target) = if i + j <= n { (0, i + j) } else { (n + 1, i + j - n - 1) };
            products.push(ProductTerm { left: i, right: j, q_power, target, coeff: f.one() });
        }
    }
    let mut c1 = alloc::vec![f.zero(); d];
    c1[1] = f.from_i64(d as i64);
    let data = RingData {
        names: names.collect(),
        degrees: Some((0..d).map(|i| 2 * i as i64).collect()),
        parities: alloc::vec![0; d],
        dim: n as i64,
        unit: 0,
        c1,
        products,
    };
    QHRing::new(field, data)
}

/// Eigenvalues of `c1 *` at `q = 1` and the corresponding idempotents.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenData<F: Field> {
    pub lambdas: Vec<F::Elem>,
    pub multiplicities: Vec<usize>,
    /// `e_lambda`: the component of the unit in the generalized eigenspace.
    pub idempotents: Vec<Vec<F::Elem>>,
    /// `c1 * e_lambda - lambda e_lambda`.
    pub nilpotent_parts: Vec<Vec<F::Elem>>,
    /// Least `k` with `(c1 * e_lambda - lambda e_lambda)^k = 0`.
    pub nilpotency_indices: Vec<usize>,
}

impl<F: Field> EigenData<F> {
    pub fn index_of(&self, lambda: &F::Elem) -> Option<usize> {
        self.lambdas.iter().position(|l| l == lambda)
    }
}

pub fn eigendata_c1<F: Field>(ring: &QHRing<F>, hints: &[F::Elem]) -> Result<EigenData<F>> {
    let f = &ring.field;
    let d = ring.rank();
    let c = ring.c1_matrix_q1();
    let spaces = generalized_eigenspaces(f, &c, hints)?;
    let cols: Vec<Vec<F::Elem>> = spaces.iter().flat_map(|s| s.basis.iter().cloned()).collect();
    let basis = Matrix::from_columns(d, &cols);
    let coords = basis.inverse(f).ok_or(Error::NotInvertible)?.mul_vec(f, &ring.unit_vec());
    let mut out = EigenData { lambdas: Vec::new(), multiplicities: Vec::new(), idempotents: Vec::new(), nilpotent_parts: Vec::new(), nilpotency_indices: Vec::new() };
    let mut start = 0;
    for s in &spaces {
        let mut e = alloc::vec![f.zero(); d];
        for (k, v) in s.basis.iter().enumerate() {
            for i in 0..d {
                e[i] = f.add(&e[i], &f.mul(&coords[start + k], &v[i]));
            }
        }
        start += s.multiplicity;
        let ce = ring.mul_q1(&ring.c1, &e);
        let u: Vec<F::Elem> = ce.iter().zip(&e).map(|(x, y)| f.sub(x, &f.mul(&s.eigenvalue, y))).collect();
        let mut pw = u.clone();
        let mut index = None;
        for k in 1..=d + 1 {
            if pw.iter().all(|x| f.is_zero(x)) {
                index = Some(k);
                break;
            }
            pw = ring.mul_q1(&pw, &u);
        }
        let index = match index {
            Some(k) if k <= s.multiplicity.max(1) => k,
            _ => return Err(Error::InvalidInput(format!("c1 * e_lambda - lambda e_lambda is not nilpotent for lambda = {}", f.format(&s.eigenvalue)))),
        };
        out.lambdas.push(s.eigenvalue.clone());
        out.multiplicities.push(s.multiplicity);
        out.idempotents.push(e);
        out.nilpotent_parts.push(u);
        out.nilpotency_indices.push(index);
    }
    // idempotence and orthogonality
    for (x, ex) in out.idempotents.iter().enumerate() {
        for (y, ey) in out.idempotents.iter().enumerate() {
            let prod = ring.mul_q1(ex, ey);
            let expect = if x == y { ex.clone() } else { alloc::vec![f.zero(); d] };
            if prod != expect {
                return Err(Error::InvalidInput(format!("idempotents {x} and {y} are not orthogonal idempotents")));
            }
        }
    }
    Ok(out)
}
