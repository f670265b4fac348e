use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_rational::BigRational;
use rand::RngCore;

use super::upoly::UPoly;

/// Description of a coefficient field. Towers have depth one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldSpec {
    Rationals,
    /// `Q[a]/(f)` with `f` monic, coefficients listed from the constant term up.
    RationalExtension { minpoly: Vec<BigRational> },
    PrimeField { p: u64 },
    /// `F_p[a]/(f)` with `f` monic, coefficients listed from the constant term up.
    PrimeFieldExtension { p: u64, minpoly: Vec<u64> },
}

impl FieldSpec {
    pub fn characteristic(&self) -> u64 {
        match self {
            FieldSpec::Rationals | FieldSpec::RationalExtension { .. } => 0,
            FieldSpec::PrimeField { p } | FieldSpec::PrimeFieldExtension { p, .. } => *p,
        }
    }
}

fn fmt_poly_terms<T: fmt::Display>(f: &mut fmt::Formatter<'_>, coeffs: &[T], is_zero: impl Fn(&T) -> bool, is_one: impl Fn(&T) -> bool) -> fmt::Result {
    let mut first = true;
    for (i, c) in coeffs.iter().enumerate().rev() {
        if is_zero(c) {
            continue;
        }
        if !first {
            f.write_str(" + ")?;
        }
        first = false;
        match i {
            0 => write!(f, "{c}")?,
            _ => {
                if !is_one(c) {
                    write!(f, "{c}*")?;
                }
                if i == 1 {
                    f.write_str("a")?;
                } else {
                    write!(f, "a^{i}")?;
                }
            }
        }
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use num_traits::{One, Zero};
        match self {
            FieldSpec::Rationals => f.write_str("Q"),
            FieldSpec::RationalExtension { minpoly } => {
                f.write_str("Q[a]/(")?;
                fmt_poly_terms(f, minpoly, |c| c.is_zero(), |c| c.is_one())?;
                f.write_str(")")
            }
            FieldSpec::PrimeField { p } => write!(f, "F_{p}"),
            FieldSpec::PrimeFieldExtension { p, minpoly } => {
                write!(f, "F_{p}[a]/(")?;
                fmt_poly_terms(f, minpoly, |c| *c == 0, |c| *c == 1)?;
                f.write_str(")")
            }
        }
    }
}

/// A field with exact arithmetic on a separate element type.
///
/// Operations take the field as context so that elements stay small
/// (`u64` for finite fields) and the modulus lives in one place.
pub trait Field: Clone + fmt::Debug + PartialEq + Send + Sync {
    type Elem: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn spec(&self) -> FieldSpec;
    /// 0 for fields of characteristic zero.
    fn characteristic(&self) -> u64;
    /// Degree over the prime field (or over Q).
    fn degree(&self) -> usize;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, n: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `None` exactly for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// A random element. Finite fields sample uniformly; characteristic
    /// zero samples small integer coordinates.
    fn random(&self, rng: &mut dyn RngCore) -> Self::Elem;
    fn format(&self, a: &Self::Elem) -> String;
    /// A fixed total order, used only to make outputs canonical.
    fn cmp_elem(&self, a: &Self::Elem, b: &Self::Elem) -> Ordering;

    /// The value as a rational number, when it is one (characteristic zero only).
    fn as_rational(&self, _a: &Self::Elem) -> Option<BigRational> {
        None
    }

    /// Candidate roots of `f` in this field. Every returned value is a root;
    /// completeness is field dependent (finite fields: complete).
    fn roots(&self, f: &UPoly<Self>, hints: &[Self::Elem]) -> Vec<Self::Elem>;

    fn from_ratio(&self, num: i64, den: i64) -> Option<Self::Elem> {
        let d = self.inv(&self.from_i64(den))?;
        Some(self.mul(&self.from_i64(num), &d))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        Some(self.mul(a, &self.inv(b)?))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn pow(&self, a: &Self::Elem, mut e: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }
}
