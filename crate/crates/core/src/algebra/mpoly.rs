use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::field::Field;

/// Exponent vector, ordered graded-lexicographically (`z_1 > z_2 > ...`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Monomial(v)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, o: &Self) -> bool {
        self.0.iter().zip(&o.0).all(|(a, b)| a <= b)
    }

    /// `o / self`, assuming divisibility.
    pub fn quotient_of(&self, o: &Self) -> Self {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| b - a).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn lcm(&self, o: &Self) -> Self {
        Monomial(self.0.iter().zip(&o.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn format(&self, vars: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(i, e)| if *e == 1 { vars[i].clone() } else { format!("{}^{}", vars[i], e) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| self.0.cmp(&o.0))
    }
}

/// Sparse multivariate polynomial; no zero coefficients are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MPoly<F: Field> {
    pub nvars: usize,
    pub terms: BTreeMap<Monomial, F::Elem>,
}

impl<F: Field> MPoly<F> {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(f: &F, nvars: usize, c: F::Elem) -> Self {
        Self::term(f, c, Monomial::one(nvars))
    }

    pub fn one(f: &F, nvars: usize) -> Self {
        Self::constant(f, nvars, f.one())
    }

    pub fn term(f: &F, c: F::Elem, m: Monomial) -> Self {
        let mut p = Self::zero(m.0.len());
        if !f.is_zero(&c) {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn var(f: &F, nvars: usize, i: usize) -> Self {
        Self::term(f, f.one(), Monomial::var(nvars, i))
    }

    /// From `(coefficient, exponents)` pairs; repeated monomials are summed.
    pub fn from_terms(f: &F, nvars: usize, terms: impl IntoIterator<Item = (F::Elem, Vec<u32>)>) -> Self {
        let mut p = Self::zero(nvars);
        for (c, e) in terms {
            p.add_term(f, c, Monomial(e));
        }
        p
    }

    pub fn add_term(&mut self, f: &F, c: F::Elem, m: Monomial) {
        if f.is_zero(&c) {
            return;
        }
        let v = match self.terms.get(&m) {
            Some(old) => f.add(old, &c),
            None => c,
        };
        if f.is_zero(&v) {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, v);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&Monomial, &F::Elem)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn coeff(&self, f: &F, m: &Monomial) -> F::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| f.zero())
    }

    pub fn add(&self, f: &F, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(f, c.clone(), m.clone());
        }
        r
    }

    pub fn sub(&self, f: &F, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(f, f.neg(c), m.clone());
        }
        r
    }

    pub fn neg(&self, f: &F) -> Self {
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, c)| (m.clone(), f.neg(c))).collect() }
    }

    pub fn scale(&self, f: &F, c: &F::Elem) -> Self {
        if f.is_zero(c) {
            return Self::zero(self.nvars);
        }
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(m, x)| (m.clone(), f.mul(x, c))).collect() }
    }

    /// Multiply by `c * m`.
    pub fn mul_term(&self, f: &F, c: &F::Elem, m: &Monomial) -> Self {
        if f.is_zero(c) {
            return Self::zero(self.nvars);
        }
        MPoly { nvars: self.nvars, terms: self.terms.iter().map(|(k, x)| (k.mul(m), f.mul(x, c))).collect() }
    }

    pub fn mul(&self, f: &F, o: &Self) -> Self {
        let mut r = Self::zero(self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(f, f.mul(c1, c2), m1.mul(m2));
            }
        }
        r
    }

    pub fn pow(&self, f: &F, e: u32) -> Self {
        let mut acc = Self::one(f, self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(f, &base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(f, &base);
            }
        }
        acc
    }

    /// Partial derivative in variable `i`.
    pub fn derivative(&self, f: &F, i: usize) -> Self {
        let mut r = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            r.add_term(f, f.mul(c, &f.from_i64(e as i64)), m2);
        }
        r
    }

    pub fn map<G: Field>(&self, g: &G, h: impl Fn(&F::Elem) -> G::Elem) -> MPoly<G> {
        let mut r = MPoly::zero(self.nvars);
        for (m, c) in &self.terms {
            r.add_term(g, h(c), m.clone());
        }
        r
    }

    /// Highest term first, e.g. `3*z^2 + 2*z*w + 1`.
    pub fn format(&self, f: &F, vars: &[String]) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let cs = f.format(c);
                let cs = if cs.contains(' ') { format!("({cs})") } else { cs };
                if m.degree() == 0 {
                    cs
                } else if f.is_one(c) {
                    m.format(vars)
                } else {
                    format!("{}*{}", cs, m.format(vars))
                }
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Parse a sum of terms like `3*z^4 - z*w^2/2 + 1` over the named variables.
///
/// Coefficients are integers or fractions; a denominator must be invertible in `f`.
pub fn parse_mpoly<F: Field>(f: &F, names: &[String], s: &str) -> Result<MPoly<F>, String> {
    let n = names.len();
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err("empty polynomial".into());
    }
    let mut out = MPoly::zero(n);
    let mut terms: Vec<(bool, &str)> = Vec::new();
    let mut start = 0;
    let mut neg = false;
    let bytes = compact.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        if (b == b'+' || b == b'-') && (i == 0 || bytes[i - 1] != b'^') {
            if i > start {
                terms.push((neg, &compact[start..i]));
            } else if i > 0 {
                return Err(format!("empty term before position {i}"));
            }
            neg = b == b'-';
            start = i + 1;
        }
    }
    if start >= compact.len() {
        return Err("trailing sign".into());
    }
    terms.push((neg, &compact[start..]));
    for (neg, t) in terms {
        let mut num: i64 = 1;
        let mut den: i64 = 1;
        let mut e = alloc::vec![0u32; n];
        for factor in t.split('*') {
            let factor = match factor.split_once('/') {
                Some((a, d)) => {
                    let d = d.parse::<i64>().map_err(|_| format!("bad denominator in {t}"))?;
                    den = den.checked_mul(d).ok_or_else(|| format!("denominator overflow in {t}"))?;
                    a
                }
                None => factor,
            };
            if factor.is_empty() {
                return Err(format!("empty factor in {t}"));
            }
            if let Ok(c) = factor.parse::<i64>() {
                num = num.checked_mul(c).ok_or_else(|| format!("coefficient overflow in {t}"))?;
                continue;
            }
            let (name, pow) = match factor.split_once('^') {
                Some((a, b)) => (a, b.parse::<u32>().map_err(|_| format!("bad exponent in {factor}"))?),
                None => (factor, 1),
            };
            let i = names.iter().position(|v| v == name).ok_or_else(|| format!("unknown variable {name}"))?;
            e[i] += pow;
        }
        if neg {
            num = -num;
        }
        let c = f.from_ratio(num, den).ok_or_else(|| format!("denominator {den} is not invertible"))?;
        out.add_term(f, c, Monomial(e));
    }
    Ok(out)
}
