use alloc::string::ToString;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::factor::{roots_in_fq, splitting_degree};
use super::field::Field;
use super::finite::FqField;
use super::matrix::Matrix;
use super::mpoly::MPoly;
use super::rational::QField;
use super::series::MatSeries;
use super::upoly::UPoly;
use crate::{Error, Result};

/// Reduce a rational number modulo an odd prime.
pub fn reduce_mod_p(x: &BigRational, p: u64) -> Result<u64> {
    let pb = BigInt::from(p);
    let d = x.denom().mod_floor(&pb);
    if d == BigInt::from(0) {
        return Err(Error::DenominatorDivisibleByP { denominator: x.denom().to_string(), p });
    }
    let n = x.numer().mod_floor(&pb).to_u64().unwrap();
    let fp = FqField::prime(p)?;
    let dinv = fp.inv(&d.to_u64().unwrap()).unwrap();
    Ok(fp.mul(&n, &dinv))
}

/// A ring homomorphism from `Q(a)` to a finite field, fixed by the image of `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct QReduction {
    pub source: QField,
    pub target: FqField,
    pub alpha_image: u64,
}

impl QReduction {
    /// Checks that `alpha_image` is a root of the reduced minimal polynomial.
    pub fn new(source: QField, target: FqField, alpha_image: u64) -> Result<Self> {
        let red = QReduction { source, target, alpha_image };
        let mp = red.minpoly_mod_p()?;
        if !red.target.is_zero(&mp.eval(&red.target, &alpha_image)) {
            return Err(Error::InvalidInput("generator image is not a root of the reduced minimal polynomial".into()));
        }
        Ok(red)
    }

    fn minpoly_mod_p(&self) -> Result<UPoly<FqField>> {
        let p = self.target.p();
        let coeffs = self
            .source
            .minpoly()
            .iter()
            .map(|c| reduce_mod_p(c, p).map(|x| self.target.from_digits(&[x])))
            .collect::<Result<Vec<_>>>()?;
        Ok(UPoly::new(&self.target, coeffs))
    }

    /// Reduction into the smallest `F_{p^k}` containing a root of the minimal
    /// polynomial, sending `a` to the smallest such root.
    pub fn to_prime(source: &QField, p: u64) -> Result<Self> {
        let base = FqField::prime(p)?;
        let coeffs = source.minpoly().iter().map(|c| reduce_mod_p(c, p)).collect::<Result<Vec<_>>>()?;
        let mp = UPoly::new(&base, coeffs);
        // smallest extension with a root: least degree among irreducible factors
        let k = super::factor::factor_over_finite_field(&base, &mp, 1)
            .iter()
            .map(|(g, _)| g.degree().unwrap_or(1))
            .min()
            .unwrap_or(1);
        Self::into_field(source, FqField::with_degree(p, k)?)
    }

    /// Reduction into a given finite field, sending `a` to the smallest root there.
    pub fn into_field(source: &QField, target: FqField) -> Result<Self> {
        let red = QReduction { source: source.clone(), target: target.clone(), alpha_image: 0 };
        let mp = red.minpoly_mod_p()?;
        let roots = roots_in_fq(&target, &mp);
        let Some(&r) = roots.first() else {
            return Err(Error::InvalidInput("minimal polynomial has no root in the target field".into()));
        };
        Ok(QReduction { alpha_image: r, ..red })
    }

    /// Degree over `F_p` of the splitting field of the reduced minimal polynomial.
    pub fn minpoly_splitting_degree(source: &QField, p: u64) -> Result<usize> {
        let base = FqField::prime(p)?;
        let coeffs = source.minpoly().iter().map(|c| reduce_mod_p(c, p)).collect::<Result<Vec<_>>>()?;
        Ok(splitting_degree(&base, &UPoly::new(&base, coeffs)))
    }

    pub fn rational(&self, r: &BigRational) -> Result<u64> {
        Ok(self.target.from_digits(&[reduce_mod_p(r, self.target.p())?]))
    }

    pub fn elem(&self, a: &[BigRational]) -> Result<u64> {
        let k = &self.target;
        let mut acc = k.zero();
        let mut pw = k.one();
        for c in a {
            acc = k.add(&acc, &k.mul(&self.rational(c)?, &pw));
            pw = k.mul(&pw, &self.alpha_image);
        }
        Ok(acc)
    }

    pub fn matrix(&self, m: &Matrix<QField>) -> Result<Matrix<FqField>> {
        m.try_map(|x| self.elem(x))
    }

    pub fn series(&self, s: &MatSeries<QField>) -> Result<MatSeries<FqField>> {
        Ok(MatSeries { rows: s.rows, cols: s.cols, coeffs: s.coeffs.iter().map(|m| self.matrix(m)).collect::<Result<_>>()? })
    }

    pub fn upoly(&self, f: &UPoly<QField>) -> Result<UPoly<FqField>> {
        Ok(UPoly::new(&self.target, f.coeffs.iter().map(|c| self.elem(c)).collect::<Result<_>>()?))
    }

    pub fn mpoly(&self, f: &MPoly<QField>) -> Result<MPoly<FqField>> {
        let mut out = MPoly::zero(f.nvars);
        for (m, c) in &f.terms {
            out.add_term(&self.target, self.elem(c)?, m.clone());
        }
        Ok(out)
    }
}
