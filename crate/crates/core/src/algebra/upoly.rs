use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::field::Field;

/// Dense univariate polynomial, constant term first, no trailing zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct UPoly<F: Field> {
    pub coeffs: Vec<F::Elem>,
}

impl<F: Field> UPoly<F> {
    pub fn new(f: &F, mut coeffs: Vec<F::Elem>) -> Self {
        while coeffs.last().is_some_and(|c| f.is_zero(c)) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn constant(f: &F, c: F::Elem) -> Self {
        Self::new(f, vec![c])
    }

    pub fn one(f: &F) -> Self {
        Self::constant(f, f.one())
    }

    /// `c x^d`.
    pub fn monomial(f: &F, c: F::Elem, d: usize) -> Self {
        let mut v = vec![f.zero(); d + 1];
        v[d] = c;
        Self::new(f, v)
    }

    pub fn x(f: &F) -> Self {
        Self::monomial(f, f.one(), 1)
    }

    /// `x - r`.
    pub fn linear(f: &F, r: &F::Elem) -> Self {
        Self::new(f, vec![f.neg(r), f.one()])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&F::Elem> {
        self.coeffs.last()
    }

    pub fn coeff(&self, f: &F, i: usize) -> F::Elem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| f.zero())
    }

    pub fn add(&self, f: &F, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|i| f.add(&self.coeff(f, i), &o.coeff(f, i))).collect();
        Self::new(f, v)
    }

    pub fn sub(&self, f: &F, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n).map(|i| f.sub(&self.coeff(f, i), &o.coeff(f, i))).collect();
        Self::new(f, v)
    }

    pub fn neg(&self, f: &F) -> Self {
        UPoly { coeffs: self.coeffs.iter().map(|c| f.neg(c)).collect() }
    }

    pub fn scale(&self, f: &F, c: &F::Elem) -> Self {
        Self::new(f, self.coeffs.iter().map(|x| f.mul(x, c)).collect())
    }

    pub fn mul(&self, f: &F, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut v = vec![f.zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if f.is_zero(a) {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = f.add(&v[i + j], &f.mul(a, b));
            }
        }
        Self::new(f, v)
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn divrem(&self, f: &F, b: &Self) -> (Self, Self) {
        let db = b.degree().expect("division by the zero polynomial");
        let inv = f.inv(b.lead().unwrap()).unwrap();
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![f.zero(); r.len() - db];
        for top in (db..r.len()).rev() {
            let c = f.mul(&r[top], &inv);
            if f.is_zero(&c) {
                continue;
            }
            for (i, bi) in b.coeffs.iter().enumerate() {
                let idx = top - db + i;
                r[idx] = f.sub(&r[idx], &f.mul(&c, bi));
            }
            q[top - db] = c;
        }
        r.truncate(db);
        (Self::new(f, q), Self::new(f, r))
    }

    pub fn rem(&self, f: &F, b: &Self) -> Self {
        self.divrem(f, b).1
    }

    pub fn monic(&self, f: &F) -> Self {
        match self.lead() {
            None => Self::zero(),
            Some(l) => {
                let inv = f.inv(l).unwrap();
                self.scale(f, &inv)
            }
        }
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, f: &F, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(f, &b);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    pub fn derivative(&self, f: &F) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let v = self.coeffs.iter().enumerate().skip(1).map(|(i, c)| f.mul(c, &f.from_i64(i as i64))).collect();
        Self::new(f, v)
    }

    pub fn eval(&self, f: &F, x: &F::Elem) -> F::Elem {
        let mut acc = f.zero();
        for c in self.coeffs.iter().rev() {
            acc = f.add(&f.mul(&acc, x), c);
        }
        acc
    }

    pub fn mul_mod(&self, f: &F, o: &Self, m: &Self) -> Self {
        self.mul(f, o).rem(f, m)
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, f: &F, mut e: u64, m: &Self) -> Self {
        let mut base = self.rem(f, m);
        let mut acc = Self::one(f).rem(f, m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_mod(f, &base, m);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_mod(f, &base, m);
            }
        }
        acc
    }

    pub fn pow(&self, f: &F, e: u32) -> Self {
        let mut acc = Self::one(f);
        for _ in 0..e {
            acc = acc.mul(f, self);
        }
        acc
    }

    /// Human-readable form in the variable `var`, highest degree first.
    pub fn format_var(&self, f: &F, var: &str) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if f.is_zero(c) {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => String::from(var),
                _ => format!("{var}^{i}"),
            };
            let cs = f.format(c);
            parts.push(if i == 0 {
                cs
            } else if f.is_one(c) {
                mono
            } else if cs == "-1" {
                format!("-{mono}")
            } else if cs.contains(' ') {
                format!("({cs})*{mono}")
            } else {
                format!("{cs}*{mono}")
            });
        }
        let mut out = String::new();
        for (k, part) in parts.iter().enumerate() {
            match (k, part.strip_prefix('-')) {
                (0, _) => out.push_str(part),
                (_, Some(rest)) => {
                    out.push_str(" - ");
                    out.push_str(rest);
                }
                (_, None) => {
                    out.push_str(" + ");
                    out.push_str(part);
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn format(&self, f: &F) -> String {
        self.format_var(f, "x")
    }
}
