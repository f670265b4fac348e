//! Potentials with an isolated critical point: Jacobian ideals, Milnor rings,
//! Nullstellensatz certificates, and the twisted de Rham cohomology
//! `H(Omega[[t]], -dW + t d)` with its connection and Frobenius action.
//!
//! Top forms are written `g dz` with `dz = dz_1 ... dz_n`. A reduction step
//! uses `(d_i W) c dz = t (d_i c) dz` modulo the image of `-dW + t d`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{Field, MPoly, MatSeries, Matrix, Monomial};
use crate::connection::FormalConnection;
use crate::pcurvature::{nilpotency_test_series, p_curvature, Frame, NilpotencyVerdict};
use crate::{Error, Result};

/// Limits that keep the symbolic work at desk scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest total degree of any intermediate polynomial.
    pub max_degree: u32,
    /// Largest Gröbner basis.
    pub max_basis: usize,
    /// Largest `N` tried for `W^N` in the Jacobian ideal.
    pub max_power: usize,
    /// Degree step used to probe rank stability.
    pub probe_step: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_degree: 64, max_basis: 64, max_power: 8, probe_step: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential<F: Field> {
    pub field: F,
    pub names: Vec<String>,
    pub w: MPoly<F>,
    pub partials: Vec<MPoly<F>>,
}

impl<F: Field> Potential<F> {
    pub fn new(field: F, names: Vec<String>, w: MPoly<F>) -> Result<Self> {
        if names.len() != w.nvars {
            return Err(Error::DimensionMismatch(format!("{} names for {} variables", names.len(), w.nvars)));
        }
        if w.nvars == 0 {
            return Err(Error::InvalidInput("a potential needs at least one variable".into()));
        }
        if w.is_zero() {
            return Err(Error::NotIsolated("W = 0 is critical everywhere".into()));
        }
        let partials = (0..w.nvars).map(|i| w.derivative(&field, i)).collect();
        Ok(Potential { field, names, w, partials })
    }

    pub fn nvars(&self) -> usize {
        self.w.nvars
    }

    /// `W(0) = 0` and `dW(0) = 0`.
    pub fn normalized(&self) -> bool {
        let one = Monomial::one(self.nvars());
        self.w.terms.keys().all(|m| m.degree() >= 2) || (!self.w.terms.contains_key(&one) && self.partials.iter().all(|d| !d.terms.contains_key(&one)))
    }

    pub fn format(&self) -> String {
        self.w.format(&self.field, &self.names)
    }

    /// Weights `w_i` with `sum w_i a_i = 1` on every monomial of `W`, if they exist.
    pub fn quasi_homogeneous_weights(&self) -> Option<Vec<F::Elem>> {
        let f = &self.field;
        let n = self.nvars();
        let rows: Vec<Vec<F::Elem>> = self.w.terms.keys().map(|m| m.0.iter().map(|&e| f.from_i64(e as i64)).collect()).collect();
        let a = Matrix::from_rows(rows).ok()?;
        let b = Matrix::from_fn(a.rows, 1, |_, _| f.one());
        let sol = a.solve(f, &b).ok()?;
        let w: Vec<F::Elem> = (0..n).map(|i| sol.particular.get(i, 0).clone()).collect();
        if w.iter().any(|x| f.is_zero(x)) {
            return None;
        }
        Some(w)
    }
}

fn check_degree<F: Field>(p: &MPoly<F>, caps: &Caps) -> Result<()> {
    match p.total_degree() {
        Some(d) if d > caps.max_degree => Err(Error::ScaleExceeded(format!("degree {d} above the cap {}", caps.max_degree))),
        _ => Ok(()),
    }
}

/// A graded-lex Gröbner basis, with each element written in the generators.
#[derive(Debug, Clone, PartialEq)]
pub struct GroebnerBasis<F: Field> {
    pub field: F,
    pub gens: Vec<MPoly<F>>,
    /// Reduced and monic.
    pub basis: Vec<MPoly<F>>,
    /// `basis[j] = sum_i cofactors[j][i] gens[i]`.
    pub cofactors: Vec<Vec<MPoly<F>>>,
}

fn monic_term<F: Field>(_f: &F, p: &MPoly<F>) -> (Monomial, F::Elem) {
    let (m, c) = p.leading().unwrap();
    (m.clone(), c.clone())
}

fn lincomb<F: Field>(f: &F, acc: &mut [MPoly<F>], c: &F::Elem, m: &Monomial, rows: &[MPoly<F>]) {
    for (a, r) in acc.iter_mut().zip(rows) {
        *a = a.add(f, &r.mul_term(f, c, m));
    }
}

/// Buchberger's algorithm for the grlex order.
pub fn groebner_basis<F: Field>(f: &F, gens: &[MPoly<F>], caps: &Caps) -> Result<GroebnerBasis<F>> {
    let k = gens.len();
    let nvars = gens.first().map_or(0, |g| g.nvars);
    let unit_row = |i: usize| -> Vec<MPoly<F>> { (0..k).map(|j| if i == j { MPoly::one(f, nvars) } else { MPoly::zero(nvars) }).collect() };
    let mut basis: Vec<MPoly<F>> = Vec::new();
    let mut cof: Vec<Vec<MPoly<F>>> = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        if !g.is_zero() {
            basis.push(g.clone());
            cof.push(unit_row(i));
        }
    }
    let mut pairs: Vec<(usize, usize)> = (0..basis.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    while let Some((i, j)) = pairs.pop() {
        let (mi, ci) = monic_term(f, &basis[i]);
        let (mj, cj) = monic_term(f, &basis[j]);
        let l = mi.lcm(&mj);
        // Buchberger's first criterion
        if l == mi.mul(&mj) {
            continue;
        }
        let ai = f.inv(&ci).unwrap();
        let aj = f.inv(&cj).unwrap();
        let ui = mi.quotient_of(&l);
        let uj = mj.quotient_of(&l);
        let s = basis[i].mul_term(f, &ai, &ui).sub(f, &basis[j].mul_term(f, &aj, &uj));
        let mut sc: Vec<MPoly<F>> = (0..k).map(|_| MPoly::zero(nvars)).collect();
        lincomb(f, &mut sc, &ai, &ui, &cof[i]);
        lincomb(f, &mut sc, &f.neg(&aj), &uj, &cof[j]);
        check_degree(&s, caps)?;
        let (q, r) = divide(f, &basis, &s);
        if r.is_zero() {
            continue;
        }
        for (jj, qj) in q.iter().enumerate() {
            for (a, row) in sc.iter_mut().zip(&cof[jj]) {
                *a = a.sub(f, &qj.mul(f, row));
            }
        }
        if basis.len() >= caps.max_basis {
            return Err(Error::ScaleExceeded(format!("Gröbner basis larger than {}", caps.max_basis)));
        }
        let n = basis.len();
        basis.push(r);
        cof.push(sc);
        pairs.extend((0..n).map(|i| (i, n)));
    }
    // minimal: drop elements whose leading monomial is divisible by another's
    let mut keep: Vec<usize> = Vec::new();
    for i in 0..basis.len() {
        let mi = basis[i].leading().unwrap().0;
        let redundant = (0..basis.len()).any(|j| {
            let mj = basis[j].leading().unwrap().0;
            j != i && mj.divides(mi) && (mj != mi || j < i)
        });
        if !redundant {
            keep.push(i);
        }
    }
    let mut gb: Vec<MPoly<F>> = keep.iter().map(|&i| basis[i].clone()).collect();
    let mut gc: Vec<Vec<MPoly<F>>> = keep.iter().map(|&i| cof[i].clone()).collect();
    // reduced and monic
    for i in 0..gb.len() {
        let others: Vec<MPoly<F>> = gb.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
        let idx: Vec<usize> = (0..gb.len()).filter(|&j| j != i).collect();
        let (lead_m, lead_c) = monic_term(f, &gb[i]);
        let tail = gb[i].sub(f, &MPoly::term(f, lead_c.clone(), lead_m.clone()));
        let (q, r) = divide(f, &others, &tail);
        let mut row = gc[i].clone();
        for (qi, &j) in q.iter().zip(&idx) {
            for (a, b) in row.iter_mut().zip(&gc[j]) {
                *a = a.sub(f, &qi.mul(f, b));
            }
        }
        let inv = f.inv(&lead_c).unwrap();
        gb[i] = MPoly::term(f, lead_c, lead_m).add(f, &r).scale(f, &inv);
        gc[i] = row.iter().map(|x| x.scale(f, &inv)).collect();
    }
    let mut order: Vec<usize> = (0..gb.len()).collect();
    order.sort_by(|&a, &b| gb[a].leading().unwrap().0.cmp(gb[b].leading().unwrap().0));
    Ok(GroebnerBasis {
        field: f.clone(),
        gens: gens.to_vec(),
        basis: order.iter().map(|&i| gb[i].clone()).collect(),
        cofactors: order.iter().map(|&i| gc[i].clone()).collect(),
    })
}

/// Full division: `p = sum q_j g_j + r` with no term of `r` divisible by a leading monomial.
fn divide<F: Field>(f: &F, gs: &[MPoly<F>], p: &MPoly<F>) -> (Vec<MPoly<F>>, MPoly<F>) {
    let nvars = p.nvars;
    let mut q: Vec<MPoly<F>> = gs.iter().map(|_| MPoly::zero(nvars)).collect();
    let mut r = MPoly::zero(nvars);
    let mut rest = p.clone();
    let leads: Vec<(Monomial, F::Elem)> = gs.iter().map(|g| monic_term(f, g)).collect();
    while let Some((m, c)) = rest.leading().map(|(m, c)| (m.clone(), c.clone())) {
        match leads.iter().position(|(lm, _)| lm.divides(&m)) {
            Some(j) => {
                let u = leads[j].0.quotient_of(&m);
                let a = f.div(&c, &leads[j].1).unwrap();
                q[j].add_term(f, a.clone(), u.clone());
                rest = rest.sub(f, &gs[j].mul_term(f, &a, &u));
            }
            None => {
                r.add_term(f, c.clone(), m.clone());
                rest.add_term(f, f.neg(&c), m);
            }
        }
    }
    (q, r)
}

impl<F: Field> GroebnerBasis<F> {
    pub fn normal_form(&self, p: &MPoly<F>) -> MPoly<F> {
        divide(&self.field, &self.basis, p).1
    }

    pub fn contains(&self, p: &MPoly<F>) -> bool {
        self.normal_form(p).is_zero()
    }

    /// `p = NF(p) + sum_i c_i gens[i]`; returns `(c, NF(p))`.
    pub fn express(&self, p: &MPoly<F>) -> (Vec<MPoly<F>>, MPoly<F>) {
        let f = &self.field;
        let (q, r) = divide(f, &self.basis, p);
        let nvars = p.nvars;
        let mut c: Vec<MPoly<F>> = self.gens.iter().map(|_| MPoly::zero(nvars)).collect();
        for (qj, row) in q.iter().zip(&self.cofactors) {
            if qj.is_zero() {
                continue;
            }
            for (a, b) in c.iter_mut().zip(row) {
                *a = a.add(f, &qj.mul(f, b));
            }
        }
        (c, r)
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.basis.iter().map(|g| g.leading().unwrap().0.clone()).collect()
    }
}

/// `k[z] / (dW)` with its standard monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MilnorRing<F: Field> {
    pub gb: GroebnerBasis<F>,
    /// Standard monomials, in increasing grlex order.
    pub basis: Vec<Monomial>,
}

impl<F: Field> MilnorRing<F> {
    pub fn mu(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of the normal form in the monomial basis.
    pub fn coords(&self, p: &MPoly<F>) -> Vec<F::Elem> {
        let f = &self.gb.field;
        let r = self.gb.normal_form(p);
        self.basis.iter().map(|m| r.coeff(f, m)).collect()
    }

    pub fn element(&self, coords: &[F::Elem]) -> MPoly<F> {
        let f = &self.gb.field;
        let nvars = self.basis[0].0.len();
        let mut p = MPoly::zero(nvars);
        for (m, c) in self.basis.iter().zip(coords) {
            p.add_term(f, c.clone(), m.clone());
        }
        p
    }

    /// Matrix of multiplication by `g`.
    pub fn mult_matrix(&self, g: &MPoly<F>) -> Matrix<F> {
        let f = &self.gb.field;
        let cols: Vec<Vec<F::Elem>> = self.basis.iter().map(|m| self.coords(&g.mul_term(f, &f.one(), m))).collect();
        Matrix::from_columns(self.mu(), &cols)
    }
}

/// Gröbner basis of the Jacobian ideal and the standard monomials. The
/// quotient is finite exactly when every variable has a pure power among the
/// leading monomials.
pub fn milnor_ring<F: Field>(w: &Potential<F>, caps: &Caps) -> Result<MilnorRing<F>> {
    let f = &w.field;
    let n = w.nvars();
    let gb = groebner_basis(f, &w.partials, caps)?;
    let leads = gb.leading_monomials();
    if leads.iter().any(|m| m.degree() == 0) {
        // the critical locus is empty
        return Ok(MilnorRing { gb, basis: Vec::new() });
    }
    let mut bound = vec![0u32; n];
    for i in 0..n {
        let pure = leads.iter().filter(|m| m.0.iter().enumerate().all(|(j, &e)| (j == i) == (e > 0))).map(|m| m.0[i]).min();
        match pure {
            Some(e) => bound[i] = e,
            None => return Err(Error::NotIsolated(format!("no power of {} is a leading monomial of the Jacobian ideal", w.names[i]))),
        }
    }
    let mut basis = Vec::new();
    let mut e = vec![0u32; n];
    loop {
        let m = Monomial(e.clone());
        if !leads.iter().any(|l| l.divides(&m)) {
            basis.push(m);
        }
        let mut i = 0;
        loop {
            if i == n {
                basis.sort();
                return Ok(MilnorRing { gb, basis });
            }
            e[i] += 1;
            if e[i] < bound[i] {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

/// `W^N = sum g_i d_i W`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullstellensatzCertificate<F: Field> {
    pub n: usize,
    pub cofactors: Vec<MPoly<F>>,
}

impl<F: Field> NullstellensatzCertificate<F> {
    /// Re-expand and compare.
    pub fn verify(&self, w: &Potential<F>) -> bool {
        let f = &w.field;
        let mut rhs = MPoly::zero(w.nvars());
        for (g, d) in self.cofactors.iter().zip(&w.partials) {
            rhs = rhs.add(f, &g.mul(f, d));
        }
        rhs == w.w.pow(f, self.n as u32)
    }
}

/// Least `N` with `W^N` in the Jacobian ideal, and its cofactors.
pub fn nullstellensatz_certificate<F: Field>(w: &Potential<F>, m: &MilnorRing<F>, caps: &Caps) -> Result<NullstellensatzCertificate<F>> {
    let f = &w.field;
    let mut pw = MPoly::one(f, w.nvars());
    for n in 1..=caps.max_power {
        pw = pw.mul(f, &w.w);
        check_degree(&pw, caps)?;
        let (c, r) = m.gb.express(&pw);
        if r.is_zero() {
            let cert = NullstellensatzCertificate { n, cofactors: c };
            if !cert.verify(w) {
                return Err(Error::InvalidInput("certificate failed to re-expand".into()));
            }
            return Ok(cert);
        }
    }
    Err(Error::NoCertificateWithinCap(caps.max_power))
}

/// A differential form with coefficients in `k[z][t]`: `(t-power, subset mask) -> coefficient`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedForm<F: Field> {
    pub nvars: usize,
    pub terms: BTreeMap<(usize, u32), MPoly<F>>,
}

impl<F: Field> TwistedForm<F> {
    pub fn zero(nvars: usize) -> Self {
        TwistedForm { nvars, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, f: &F, t_power: usize, mask: u32, p: &MPoly<F>) {
        let e = self.terms.entry((t_power, mask)).or_insert_with(|| MPoly::zero(p.nvars));
        *e = e.add(f, p);
        if e.is_zero() {
            self.terms.remove(&(t_power, mask));
        }
    }

    pub fn add(&self, f: &F, o: &Self) -> Self {
        let mut r = self.clone();
        for ((k, m), p) in &o.terms {
            r.add_term(f, *k, *m, p);
        }
        r
    }

    pub fn sub(&self, f: &F, o: &Self) -> Self {
        let mut r = self.clone();
        for ((k, m), p) in &o.terms {
            r.add_term(f, *k, *m, &p.neg(f));
        }
        r
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drop terms with `t^k`, `k >= order`.
    pub fn truncate(&self, order: usize) -> Self {
        TwistedForm { nvars: self.nvars, terms: self.terms.iter().filter(|((k, _), _)| *k < order).map(|(a, b)| (*a, b.clone())).collect() }
    }

    /// The top form `sum_k t^k g_k dz`.
    pub fn top(nvars: usize, coeffs: &[MPoly<F>]) -> Self {
        let full = (1u32 << nvars) - 1;
        TwistedForm { nvars, terms: coeffs.iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(k, p)| ((k, full), p.clone())).collect() }
    }
}

/// `(-dW + t d)` on forms: `g dz_S -> sum_i (-d_i W g + t d_i g) dz_i dz_S`.
pub fn twisted_differential<F: Field>(w: &Potential<F>, form: &TwistedForm<F>) -> TwistedForm<F> {
    let f = &w.field;
    let n = w.nvars();
    let mut out = TwistedForm::zero(n);
    for ((k, mask), g) in &form.terms {
        for i in 0..n {
            if mask & (1 << i) != 0 {
                continue;
            }
            let below = (mask & ((1u32 << i) - 1)).count_ones();
            let sign_neg = below % 2 == 1;
            let new_mask = mask | (1 << i);
            let mut a = w.partials[i].mul(f, g).neg(f);
            let mut b = g.derivative(f, i);
            if sign_neg {
                a = a.neg(f);
                b = b.neg(f);
            }
            out.add_term(f, *k, new_mask, &a);
            out.add_term(f, k + 1, new_mask, &b);
        }
    }
    out
}

/// Top-degree twisted cohomology over `k[[t]]`, with basis `{m dz}` for the
/// standard monomials `m` of the Milnor ring, truncated at `t^order`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedCohomology<F: Field> {
    pub potential: Potential<F>,
    pub milnor: MilnorRing<F>,
    pub order: usize,
    pub caps: Caps,
    /// Rank of `k[z]_{<=D} / (dW)_{<=D}` at the two probe degrees.
    pub rank_probe: [(u32, usize); 2],
    pub weights: Option<Vec<F::Elem>>,
}

/// `g dz = sum_k t^k r_k dz + (-dW + t d) beta + O(t^order)`, `r_k` in the Milnor basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FormReduction<F: Field> {
    /// `coeffs[k]` are the coordinates of `r_k`.
    pub coeffs: Vec<Vec<F::Elem>>,
    pub beta: TwistedForm<F>,
    /// No term was dropped at the truncation.
    pub exact: bool,
}

impl<F: Field> FormReduction<F> {
    pub fn is_zero(&self, f: &F) -> bool {
        self.coeffs.iter().all(|c| c.iter().all(|x| f.is_zero(x)))
    }
}

impl<F: Field> TwistedCohomology<F> {
    pub fn rank(&self) -> usize {
        self.milnor.mu()
    }

    pub fn field(&self) -> &F {
        &self.potential.field
    }

    pub fn morse(&self) -> bool {
        self.rank() == 1
    }

    /// Reduce `sum_k t^k g_k dz` to the basis.
    pub fn reduce(&self, g: &[MPoly<F>]) -> Result<FormReduction<F>> {
        let f = self.field();
        let n = self.potential.nvars();
        let mu = self.rank();
        let mut level: Vec<MPoly<F>> = (0..self.order).map(|k| g.get(k).cloned().unwrap_or_else(|| MPoly::zero(n))).collect();
        let mut coeffs = vec![vec![f.zero(); mu]; self.order];
        let mut beta = TwistedForm::zero(n);
        let full = (1u32 << n) - 1;
        let mut exact = g.iter().skip(self.order).all(|p| p.is_zero());
        for k in 0..self.order {
            let p = core::mem::replace(&mut level[k], MPoly::zero(n));
            if p.is_zero() {
                continue;
            }
            check_degree(&p, &self.caps)?;
            let (c, r) = self.milnor.gb.express(&p);
            for (j, m) in self.milnor.basis.iter().enumerate() {
                coeffs[k][j] = r.coeff(f, m);
            }
            let mut next = MPoly::zero(n);
            for (i, ci) in c.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                next = next.add(f, &ci.derivative(f, i));
                // beta_i = (-1)^i c_i dz without dz_i (0-based), so that dW beta_i = d_i W c_i dz
                let coef = if i % 2 == 1 { ci.neg(f) } else { ci.clone() };
                beta.add_term(f, k, full & !(1 << i), &coef);
            }
            if k + 1 < self.order {
                level[k + 1] = level[k + 1].add(f, &next);
            } else if !next.is_zero() {
                exact = false;
            }
        }
        // c dW dz = -D(beta) + t d(beta): the accumulated beta enters with a minus sign
        let beta = TwistedForm { nvars: n, terms: beta.terms.into_iter().map(|(key, p)| (key, p.neg(f))).collect() };
        Ok(FormReduction { coeffs, beta, exact })
    }

    /// Reduction of a `t`-free top form `g dz`.
    pub fn reduce_poly(&self, g: &MPoly<F>) -> Result<FormReduction<F>> {
        self.reduce(core::slice::from_ref(g))
    }

    /// Matrix series of `[b dz] -> [g b dz]` on the basis.
    pub fn mult_series(&self, g: &MPoly<F>) -> Result<MatSeries<F>> {
        let f = self.field();
        let mu = self.rank();
        let mut coeffs: Vec<Matrix<F>> = (0..self.order).map(|_| Matrix::zeros(f, mu, mu)).collect();
        for (j, m) in self.milnor.basis.iter().enumerate() {
            let red = self.reduce_poly(&g.mul_term(f, &f.one(), m))?;
            for (k, c) in red.coeffs.iter().enumerate() {
                for (i, x) in c.iter().enumerate() {
                    coeffs[k].set(i, j, x.clone());
                }
            }
        }
        Ok(MatSeries::from_coeffs(f, mu, mu, coeffs, self.order))
    }
}

fn monomials_up_to(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut e = vec![0u32; n];
    loop {
        if e.iter().sum::<u32>() <= d {
            out.push(Monomial(e.clone()));
        }
        let mut i = 0;
        loop {
            if i == n {
                out.sort();
                return out;
            }
            e[i] += 1;
            if e[i] <= d {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

/// Dimension of `k[z]_{<=d} / span{m d_i W : deg <= d}` by linear algebra.
fn truncated_rank<F: Field>(w: &Potential<F>, d: u32) -> Result<usize> {
    let f = &w.field;
    let n = w.nvars();
    let monos = monomials_up_to(n, d);
    if monos.len() > 2000 {
        return Err(Error::ScaleExceeded(format!("{} monomials of degree <= {d}", monos.len())));
    }
    let index: BTreeMap<&Monomial, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut cols: Vec<Vec<F::Elem>> = Vec::new();
    for dw in &w.partials {
        let Some(dd) = dw.total_degree() else { continue };
        for m in &monos {
            if m.degree() + dd > d {
                continue;
            }
            let prod = dw.mul_term(f, &f.one(), m);
            let mut col = vec![f.zero(); monos.len()];
            for (mm, c) in &prod.terms {
                col[index[mm]] = c.clone();
            }
            cols.push(col);
        }
    }
    if cols.is_empty() {
        return Ok(monos.len());
    }
    let a = Matrix::from_columns(monos.len(), &cols);
    Ok(monos.len() - a.rank(f))
}

/// Twisted cohomology to `t^order`, with the rank cross-checked against
/// truncated linear algebra at two probe degrees.
pub fn twisted_cohomology<F: Field>(w: &Potential<F>, order: usize, caps: &Caps) -> Result<TwistedCohomology<F>> {
    let p = w.field.characteristic();
    if p == 2 {
        return Err(Error::NotOddPrime(2));
    }
    let milnor = milnor_ring(w, caps)?;
    let top = milnor.basis.iter().map(|m| m.degree()).max().unwrap_or(0);
    let dd = w.partials.iter().filter_map(|d| d.total_degree()).max().unwrap_or(0);
    let d1 = top + dd + 1;
    let d2 = d1 + caps.probe_step;
    let r1 = truncated_rank(w, d1)?;
    let r2 = truncated_rank(w, d2)?;
    if r1 != r2 || r1 != milnor.mu() {
        return Err(Error::RankUnstable(format!("rank {r1} at degree {d1}, {r2} at degree {d2}, Milnor number {}", milnor.mu())));
    }
    Ok(TwistedCohomology { potential: w.clone(), weights: w.quasi_homogeneous_weights(), milnor, order, caps: *caps, rank_probe: [(d1, r1), (d2, r2)] })
}

/// The connection `t^2 d/dt + W + t Gamma'` on the basis, `Gamma' = -n/2`.
pub fn build_w_connection<F: Field>(h: &TwistedCohomology<F>) -> Result<FormalConnection<F>> {
    let f = h.field();
    let mu = h.rank();
    if mu == 0 {
        return Err(Error::InvalidInput("W has no critical point".into()));
    }
    let half = f.from_ratio(h.potential.nvars() as i64, 2).ok_or(Error::NotOddPrime(2))?;
    let mut a = h.mult_series(&h.potential.w)?;
    if a.coeffs.len() > 1 {
        a.coeffs[1] = a.coeffs[1].sub(f, &Matrix::scalar(f, mu, half));
    }
    FormalConnection::new(f.clone(), a.coeffs.clone(), h.order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MfPCurvature<F: Field> {
    pub p: u64,
    /// `nabla^p` along `t^2 d/dt`.
    pub operator: MatSeries<F>,
    /// `[b dz] -> [W^p b dz]`.
    pub w_power: MatSeries<F>,
    /// First differing coefficient `(t-power, row, col)`.
    pub mismatch: Option<(usize, usize, usize)>,
    pub operator_nilpotency: NilpotencyVerdict,
    pub w_power_nilpotency: NilpotencyVerdict,
}

impl<F: Field> MfPCurvature<F> {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none() && self.operator_nilpotency.nilpotent && self.w_power_nilpotency.nilpotent
    }
}

/// Compare the p-curvature of the connection with multiplication by `W^p`.
pub fn mf_p_curvature<F: Field>(h: &TwistedCohomology<F>) -> Result<MfPCurvature<F>> {
    let f = h.field();
    let p = match f.characteristic() {
        0 => return Err(Error::CharacteristicZero),
        p => p,
    };
    let c = build_w_connection(h)?;
    let op = p_curvature(&c, Frame::T2Dt)?.series(f).ok_or_else(|| Error::InvalidInput("p-curvature has a pole".into()))?;
    let wp = act_matrix(h, &h.potential.w)?;
    let k = op.order().min(wp.order());
    let (a, b) = (op.truncate(k), wp.truncate(k));
    let mismatch = a.sub(f, &b).first_nonzero(f);
    Ok(MfPCurvature { p, operator_nilpotency: nilpotency_test_series(f, &a), w_power_nilpotency: nilpotency_test_series(f, &b), operator: a, w_power: b, mismatch })
}

/// `Act_f = [f^p .]` on the basis.
pub fn act_matrix<F: Field>(h: &TwistedCohomology<F>, g: &MPoly<F>) -> Result<MatSeries<F>> {
    let p = h.field().characteristic();
    if p == 0 {
        return Err(Error::CharacteristicZero);
    }
    h.mult_series(&g.pow(h.field(), p as u32))
}

/// `[f^p alpha]` for a `t`-free representative `alpha dz`.
pub fn act_frobenius<F: Field>(h: &TwistedCohomology<F>, g: &MPoly<F>, alpha: &MPoly<F>) -> Result<Vec<Vec<F::Elem>>> {
    let f = h.field();
    let p = f.characteristic();
    if p == 0 {
        return Err(Error::CharacteristicZero);
    }
    Ok(h.reduce_poly(&g.pow(f, p as u32).mul(f, alpha))?.coeffs)
}

/// A primitive `beta` with `(-dW + t d) beta = f^p alpha dz`, checked by expansion.
pub fn coboundary_witness<F: Field>(h: &TwistedCohomology<F>, g: &MPoly<F>, alpha: &MPoly<F>) -> Result<TwistedForm<F>> {
    let f = h.field();
    let p = f.characteristic();
    if p == 0 {
        return Err(Error::CharacteristicZero);
    }
    let target = g.pow(f, p as u32).mul(f, alpha);
    let red = h.reduce_poly(&target)?;
    if let Some((k, row)) = red.coeffs.iter().enumerate().find_map(|(k, c)| c.iter().position(|x| !f.is_zero(x)).map(|j| (k, j))) {
        return Err(Error::NotACoboundary(format!(
            "class has coefficient {} on t^{k} {}",
            f.format(&red.coeffs[k][row]),
            h.milnor.basis[row].format(&h.potential.names)
        )));
    }
    let lhs = twisted_differential(&h.potential, &red.beta).truncate(h.order);
    let rhs = TwistedForm::top(h.potential.nvars(), &[target]).truncate(h.order);
    if lhs != rhs {
        return Err(Error::NotACoboundary("primitive does not re-expand".into()));
    }
    Ok(red.beta)
}
