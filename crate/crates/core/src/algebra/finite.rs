use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, RngCore};

use super::factor::{find_irreducible, is_irreducible, roots_in_fq};
use super::field::{Field, FieldSpec};
use super::upoly::UPoly;
use super::is_prime;
use crate::{Error, Result};

const MAX_DEGREE: usize = 16;

/// `F_p` or `F_{p^k} = F_p[a]/(f)`.
///
/// Elements are packed base-`p` integers: `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`
/// stands for `c_0 + c_1 a + ... + c_{k-1} a^{k-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqField {
    p: u64,
    k: usize,
    q: u64,
    /// Monic modulus, constant term first; empty when `k == 1`.
    modulus: Vec<u64>,
}

impl FqField {
    /// The prime field `F_p` for an odd prime `p < 2^31`.
    pub fn prime(p: u64) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        if p >= 1 << 31 {
            return Err(Error::FieldTooLarge(format!("p = {p}")));
        }
        Ok(FqField { p, k: 1, q: p, modulus: Vec::new() })
    }

    /// `F_p[a]/(minpoly)`; the polynomial must be monic and irreducible.
    pub fn extension(p: u64, minpoly: &[u64]) -> Result<Self> {
        let base = Self::prime(p)?;
        let coeffs: Vec<u64> = minpoly.iter().map(|c| c % p).collect();
        let f = UPoly::new(&base, coeffs.clone());
        let k = f.degree().ok_or_else(|| Error::NotIrreducible("0".into()))?;
        if coeffs.last() != Some(&1) {
            return Err(Error::NotIrreducible(format!("{} is not monic", f.format(&base))));
        }
        if k == 1 {
            return Ok(base);
        }
        if k > MAX_DEGREE {
            return Err(Error::FieldTooLarge(format!("degree {k}")));
        }
        let mut q: u64 = 1;
        for _ in 0..k {
            q = q.checked_mul(p).filter(|q| *q < 1 << 62).ok_or_else(|| Error::FieldTooLarge(format!("{p}^{k}")))?;
        }
        if !is_irreducible(&base, &f) {
            return Err(Error::NotIrreducible(f.format(&base)));
        }
        Ok(FqField { p, k, q, modulus: coeffs })
    }

    /// `F_{p^k}` built on the first irreducible polynomial of degree `k` in a
    /// fixed enumeration order, so the same `(p, k)` always yields the same field.
    pub fn with_degree(p: u64, k: usize) -> Result<Self> {
        let base = Self::prime(p)?;
        if k <= 1 {
            return Ok(base);
        }
        let f = find_irreducible(&base, k);
        Self::extension(p, &f.coeffs)
    }

    pub fn from_spec(spec: &FieldSpec) -> Result<Self> {
        match spec {
            FieldSpec::PrimeField { p } => Self::prime(*p),
            FieldSpec::PrimeFieldExtension { p, minpoly } => Self::extension(*p, minpoly),
            _ => Err(Error::InvalidInput("not a finite field".into())),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn order(&self) -> u64 {
        self.q
    }

    pub fn prime_field(&self) -> FqField {
        FqField { p: self.p, k: 1, q: self.p, modulus: Vec::new() }
    }

    /// The modulus, constant term first (`[0, 1]` for the prime field).
    pub fn modulus(&self) -> Vec<u64> {
        if self.k == 1 {
            alloc::vec![0, 1]
        } else {
            self.modulus.clone()
        }
    }

    /// The class of `a` (for `k == 1` this is 0, the root of the modulus `x`).
    pub fn generator(&self) -> u64 {
        if self.k == 1 {
            0
        } else {
            self.p
        }
    }

    pub fn digits(&self, a: u64) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.k);
        let mut a = a;
        for _ in 0..self.k {
            out.push(a % self.p);
            a /= self.p;
        }
        out
    }

    pub fn from_digits(&self, digits: &[u64]) -> u64 {
        let mut acc = [0u64; 2 * MAX_DEGREE];
        for (i, d) in digits.iter().enumerate() {
            acc[i] = d % self.p;
        }
        self.reduce_pack(&mut acc[..digits.len().max(1)])
    }

    fn unpack(&self, a: u64, out: &mut [u64]) {
        let mut a = a;
        for slot in out.iter_mut().take(self.k) {
            *slot = a % self.p;
            a /= self.p;
        }
    }

    /// Reduce a digit vector modulo the modulus and pack it.
    fn reduce_pack(&self, acc: &mut [u64]) -> u64 {
        let p = self.p;
        if self.k == 1 {
            // digits are powers of the root 0 of x
            return acc[0] % p;
        }
        let k = self.k;
        let mut top = acc.len();
        while top > k {
            top -= 1;
            let c = acc[top] % p;
            if c != 0 {
                // a^top = a^(top-k) * a^k, with a^k = -sum m_i a^i
                for i in 0..k {
                    let m = self.modulus[i];
                    if m != 0 {
                        let idx = top - k + i;
                        acc[idx] = (acc[idx] + (p - c) * m) % p;
                    }
                }
            }
            acc[top] = 0;
        }
        let mut out = 0u64;
        for i in (0..k.min(acc.len())).rev() {
            out = out * p + acc[i] % p;
        }
        out
    }

    pub fn frobenius(&self, a: u64) -> u64 {
        self.pow(&a, self.p)
    }
}

impl Field for FqField {
    type Elem = u64;

    fn spec(&self) -> FieldSpec {
        if self.k == 1 {
            FieldSpec::PrimeField { p: self.p }
        } else {
            FieldSpec::PrimeFieldExtension { p: self.p, minpoly: self.modulus.clone() }
        }
    }

    fn characteristic(&self) -> u64 {
        self.p
    }

    fn degree(&self) -> usize {
        self.k
    }

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1
    }

    fn from_i64(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }

    fn add(&self, a: &u64, b: &u64) -> u64 {
        let p = self.p;
        if self.k == 1 {
            return (a + b) % p;
        }
        let (mut a, mut b) = (*a, *b);
        let mut out = 0u64;
        let mut w = 1u64;
        for i in 0..self.k {
            let d = (a % p + b % p) % p;
            out += d * w;
            a /= p;
            b /= p;
            if i + 1 < self.k {
                w *= p;
            }
        }
        out
    }

    fn neg(&self, a: &u64) -> u64 {
        let p = self.p;
        if self.k == 1 {
            return (p - a % p) % p;
        }
        let mut a = *a;
        let mut out = 0u64;
        let mut w = 1u64;
        for i in 0..self.k {
            let d = (p - a % p) % p;
            out += d * w;
            a /= p;
            if i + 1 < self.k {
                w *= p;
            }
        }
        out
    }

    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if self.k == 1 {
            return (a + self.p - b) % self.p;
        }
        self.add(a, &self.neg(b))
    }

    fn mul(&self, a: &u64, b: &u64) -> u64 {
        let p = self.p;
        if self.k == 1 {
            return (a * b) % p;
        }
        if *a == 0 || *b == 0 {
            return 0;
        }
        let k = self.k;
        let mut da = [0u64; MAX_DEGREE];
        let mut db = [0u64; MAX_DEGREE];
        self.unpack(*a, &mut da);
        self.unpack(*b, &mut db);
        let mut acc = [0u64; 2 * MAX_DEGREE];
        for i in 0..k {
            if da[i] == 0 {
                continue;
            }
            for j in 0..k {
                acc[i + j] = (acc[i + j] + da[i] * db[j]) % p;
            }
        }
        self.reduce_pack(&mut acc[..2 * k - 1])
    }

    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        if self.k == 1 {
            // extended Euclid on small integers
            let (mut r0, mut r1) = (self.p as i64, *a as i64);
            let (mut s0, mut s1) = (0i64, 1i64);
            while r1 != 0 {
                let q = r0 / r1;
                (r0, r1) = (r1, r0 - q * r1);
                (s0, s1) = (s1, s0 - q * s1);
            }
            return Some(s0.rem_euclid(self.p as i64) as u64);
        }
        Some(self.pow(a, self.q - 2))
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    fn random(&self, rng: &mut dyn RngCore) -> u64 {
        rng.gen_range(0..self.q)
    }

    fn format(&self, a: &u64) -> String {
        if self.k == 1 {
            return format!("{a}");
        }
        let d = self.digits(*a);
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in d.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => "a".into(),
                _ => format!("a^{i}"),
            };
            parts.push(match (i, *c) {
                (0, c) => format!("{c}"),
                (_, 1) => mono,
                (_, c) => format!("{c}*{mono}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }

    fn cmp_elem(&self, a: &u64, b: &u64) -> Ordering {
        a.cmp(b)
    }

    fn roots(&self, f: &UPoly<Self>, _hints: &[u64]) -> Vec<u64> {
        roots_in_fq(self, f)
    }
}
