use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore};

use super::factor::factor_over_finite_field;
use super::field::{Field, FieldSpec};
use super::finite::FqField;
use super::upoly::UPoly;
use crate::{Error, Result};

/// `Q` or a simple extension `Q[a]/(f)`.
///
/// Elements are coordinate vectors in the power basis `1, a, ..., a^{m-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QField {
    /// Monic minimal polynomial, constant term first; empty for `Q`.
    minpoly: Vec<BigRational>,
    m: usize,
}

/// Parse `"3"`, `"-7/4"` or `" 5 / 10 "` into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

fn trim(v: &mut Vec<BigRational>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

/// Remainder of `a` modulo the monic `m`.
fn rem_monic(mut a: Vec<BigRational>, m: &[BigRational]) -> Vec<BigRational> {
    let dm = m.len() - 1;
    trim(&mut a);
    while a.len() > dm {
        let top = a.len() - 1;
        let c = a[top].clone();
        for (i, mi) in m.iter().enumerate() {
            a[top - dm + i] -= &c * mi;
        }
        trim(&mut a);
    }
    a
}

fn poly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len().saturating_sub(db).max(1)];
    while r.len() > db && !r.is_empty() {
        let top = r.len() - 1;
        let c = &r[top] / &lead;
        for (i, bi) in b.iter().enumerate() {
            r[top - db + i] -= &c * bi;
        }
        q[top - db] = c;
        trim(&mut r);
    }
    (q, r)
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let n = a.len().max(b.len());
    let mut out = vec![BigRational::zero(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > 1_000_000_000_000 {
        return None;
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    Some(small.into_iter().map(BigInt::from).collect())
}

/// Rational roots of a polynomial with rational coefficients (rational root theorem).
/// Returns `None` when the coefficients are too large to enumerate divisors.
pub(crate) fn rational_roots(coeffs: &[BigRational]) -> Option<Vec<BigRational>> {
    let mut c = coeffs.to_vec();
    trim(&mut c);
    if c.len() <= 1 {
        return Some(Vec::new());
    }
    let mut den = BigInt::one();
    for x in &c {
        den = den.lcm(x.denom());
    }
    let ints: Vec<BigInt> = c.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    let mut roots = Vec::new();
    let shift = ints.iter().position(|x| !x.is_zero()).unwrap_or(0);
    if shift > 0 {
        roots.push(BigRational::zero());
    }
    let ints = &ints[shift..];
    if ints.len() <= 1 {
        return Some(roots);
    }
    let a0 = &ints[0];
    let an = &ints[ints.len() - 1];
    let nums = divisors(a0)?;
    let dens = divisors(an)?;
    let eval = |r: &BigRational| {
        let mut acc = BigRational::zero();
        for x in ints.iter().rev() {
            acc = acc * r + BigRational::from_integer(x.clone());
        }
        acc
    };
    let mut found: Vec<BigRational> = Vec::new();
    for n in &nums {
        for d in &dens {
            for s in [1i32, -1] {
                let r = BigRational::new(n * BigInt::from(s), d.clone());
                if !found.contains(&r) && eval(&r).is_zero() {
                    found.push(r);
                }
            }
        }
    }
    found.sort();
    roots.extend(found);
    Some(roots)
}

impl QField {
    pub fn rationals() -> Self {
        QField { minpoly: Vec::new(), m: 1 }
    }

    /// `Q[a]/(f)` for monic irreducible `f` (constant term first).
    ///
    /// Irreducibility is certified by comparing factor degree patterns modulo
    /// small primes, plus a rational root search in degree at most 3.
    pub fn extension(minpoly: Vec<BigRational>) -> Result<Self> {
        let mut f = minpoly;
        trim(&mut f);
        let desc = format_rpoly(&f);
        if f.len() < 2 || !f.last().unwrap().is_one() {
            return Err(Error::NotIrreducible(format!("{desc} is not monic of positive degree")));
        }
        let m = f.len() - 1;
        if m == 1 {
            return Ok(Self::rationals());
        }
        certify_irreducible(&f)?;
        Ok(QField { minpoly: f, m })
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        match spec {
            FieldSpec::Rationals => Ok(Self::rationals()),
            FieldSpec::RationalExtension { minpoly } => Self::extension(minpoly.clone()),
            _ => Err(Error::InvalidInput("not a characteristic-zero field".into())),
        }
    }

    /// Monic minimal polynomial of the generator, constant term first (`[0, 1]` for `Q`).
    pub fn minpoly(&self) -> Vec<BigRational> {
        if self.minpoly.is_empty() {
            vec![BigRational::zero(), BigRational::one()]
        } else {
            self.minpoly.clone()
        }
    }

    pub fn generator(&self) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.m];
        if self.m > 1 {
            v[1] = BigRational::one();
        }
        v
    }

    pub fn from_rational(&self, r: BigRational) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); self.m];
        v[0] = r;
        v
    }

    /// Element from power-basis coordinates; extra coordinates are reduced.
    pub fn from_coords(&self, coords: Vec<BigRational>) -> Vec<BigRational> {
        let mut v = if self.m == 1 {
            let mut c = coords;
            c.truncate(1);
            c
        } else {
            rem_monic(coords, &self.minpoly)
        };
        v.resize(self.m, BigRational::zero());
        v
    }
}

fn format_rpoly(f: &[BigRational]) -> String {
    let mut parts = Vec::new();
    for (i, c) in f.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        parts.push(match i {
            0 => format!("{c}"),
            1 => format!("({c})*x"),
            _ => format!("({c})*x^{i}"),
        });
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn certify_irreducible(f: &[BigRational]) -> Result<()> {
    let m = f.len() - 1;
    let desc = format_rpoly(f);
    // g(x) = D^m f(x/D) is monic with integer coefficients.
    let mut den = BigInt::one();
    for c in f {
        den = den.lcm(c.denom());
    }
    let mut g: Vec<BigInt> = Vec::with_capacity(m + 1);
    for (i, c) in f.iter().enumerate() {
        let scale = num_traits::pow(den.clone(), m - i);
        g.push((c * BigRational::from_integer(scale)).to_integer());
    }
    if let Some(roots) = rational_roots(f) {
        if !roots.is_empty() {
            return Err(Error::NotIrreducible(format!("{desc} has the rational root {}", roots[0])));
        }
        if m <= 3 {
            return Ok(());
        }
    }
    // subset sums of factor degrees that survive every prime
    let mut possible: Vec<bool> = vec![true; m + 1];
    let mut p = 3u64;
    while p < 400 {
        if super::is_prime(p) {
            let fp = FqField::prime(p)?;
            let coeffs: Vec<u64> = g
                .iter()
                .map(|c| {
                    let r = c.mod_floor(&BigInt::from(p));
                    r.to_u64().unwrap()
                })
                .collect();
            let poly = UPoly::new(&fp, coeffs);
            let factors = factor_over_finite_field(&fp, &poly, 0x5eed);
            let mut sums = vec![false; m + 1];
            sums[0] = true;
            for (fac, mult) in &factors {
                let d = fac.degree().unwrap_or(0);
                for _ in 0..*mult {
                    for s in (d..=m).rev() {
                        if sums[s - d] {
                            sums[s] = true;
                        }
                    }
                }
            }
            for s in 0..=m {
                possible[s] &= sums[s];
            }
            if (1..m).all(|s| !possible[s]) {
                return Ok(());
            }
        }
        p += 2;
    }
    Err(Error::IrreducibilityUnproven(desc))
}

impl Field for QField {
    type Elem = Vec<BigRational>;

    fn spec(&self) -> FieldSpec {
        if self.m == 1 {
            FieldSpec::Rationals
        } else {
            FieldSpec::RationalExtension { minpoly: self.minpoly.clone() }
        }
    }

    fn characteristic(&self) -> u64 {
        0
    }

    fn degree(&self) -> usize {
        self.m
    }

    fn zero(&self) -> Self::Elem {
        vec![BigRational::zero(); self.m]
    }

    fn one(&self) -> Self::Elem {
        self.from_rational(BigRational::one())
    }

    fn from_i64(&self, n: i64) -> Self::Elem {
        self.from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.iter().map(|x| -x).collect()
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.m == 1 {
            return vec![&a[0] * &b[0]];
        }
        let prod = poly_mul(a, b);
        let mut r = rem_monic(prod, &self.minpoly);
        r.resize(self.m, BigRational::zero());
        r
    }

    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if self.is_zero(a) {
            return None;
        }
        if self.m == 1 {
            return Some(vec![a[0].recip()]);
        }
        let mut r0 = self.minpoly.clone();
        let mut r1 = a.clone();
        trim(&mut r1);
        let mut s0: Vec<BigRational> = Vec::new();
        let mut s1: Vec<BigRational> = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1);
            let s = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = core::mem::replace(&mut r1, r);
            s0 = core::mem::replace(&mut s1, s);
        }
        // r0 is a nonzero constant because the modulus is irreducible
        let c = r0[0].clone();
        let mut out = rem_monic(s0.into_iter().map(|x| x / &c).collect(), &self.minpoly);
        out.resize(self.m, BigRational::zero());
        Some(out)
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.iter().all(|x| x.is_zero())
    }

    fn random(&self, rng: &mut dyn RngCore) -> Self::Elem {
        (0..self.m).map(|_| BigRational::from_integer(BigInt::from(rng.gen_range(-9i64..=9)))).collect()
    }

    fn format(&self, a: &Self::Elem) -> String {
        if self.m == 1 {
            return a[0].to_string();
        }
        let mut out = String::new();
        for (i, c) in a.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => "a".into(),
                _ => format!("a^{i}"),
            };
            if i == 0 {
                out.push_str(&abs.to_string());
            } else if abs.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{abs}*{mono}"));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    fn cmp_elem(&self, a: &Self::Elem, b: &Self::Elem) -> Ordering {
        for (x, y) in a.iter().zip(b).rev() {
            match x.cmp(y) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    fn as_rational(&self, a: &Self::Elem) -> Option<BigRational> {
        if a[1..].iter().all(|x| x.is_zero()) {
            Some(a[0].clone())
        } else {
            None
        }
    }

    fn roots(&self, f: &UPoly<Self>, hints: &[Self::Elem]) -> Vec<Self::Elem> {
        let mut out: Vec<Self::Elem> = Vec::new();
        let rational: Option<Vec<BigRational>> = f.coeffs.iter().map(|c| self.as_rational(c)).collect();
        if let Some(rc) = rational {
            if let Some(rs) = rational_roots(&rc) {
                out.extend(rs.into_iter().map(|r| self.from_rational(r)));
            }
        }
        for h in hints {
            if !out.contains(h) && self.is_zero(&f.eval(self, h)) {
                out.push(h.clone());
            }
        }
        out
    }
}
