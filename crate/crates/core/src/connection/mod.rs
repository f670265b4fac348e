//! Formal connections `d/dt + A_0/t^2 + A_1/t + A_2 + ...` on `k[[t]]^d`.
//!
//! Coefficients are stored as the series `A(t) = sum A_i t^i`, which is the
//! connection matrix in the `t^2 d/dt` frame: `t^2 nabla = t^2 d/dt + A(t)`.

mod rigidity;
mod split;

pub use rigidity::{intertwiner_recursion, verify_morphism_rigidity, IntertwinerRun, RigidityReport};
pub use split::{
    elementary_split, residual_connection, solve_block_sylvester, verify_projector_family, BlockInfo,
    ProjectorCondition, ProjectorFailure, ProjectorVerdict, ResidualConnection, SplitBlock, SplitOptions,
    SplittingResult,
};

use alloc::format;
use alloc::vec::Vec;

use crate::algebra::{Field, MatSeries, Matrix};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FormalConnection<F: Field> {
    pub field: F,
    pub rank: usize,
    /// `A_i` at index `i`; the number of coefficients is the truncation order.
    pub a: MatSeries<F>,
}

impl<F: Field> FormalConnection<F> {
    /// From `A_0, A_1, ...`; missing coefficients up to `order` are zero.
    pub fn new(field: F, coeffs: Vec<Matrix<F>>, order: usize) -> Result<Self> {
        let d = coeffs.first().map_or(0, |m| m.rows);
        if d == 0 {
            return Err(Error::InvalidInput("rank must be positive".into()));
        }
        if order < 2 {
            return Err(Error::TruncationTooSmall { needed: 2, have: order as i64 });
        }
        if coeffs.len() > order {
            return Err(Error::InvalidInput(format!("{} coefficients given for order {}", coeffs.len(), order)));
        }
        for (i, m) in coeffs.iter().enumerate() {
            if m.rows != d || m.cols != d {
                return Err(Error::DimensionMismatch(format!("A_{i} is {}x{}, expected {d}x{d}", m.rows, m.cols)));
            }
        }
        let a = MatSeries::from_coeffs(&field, d, d, coeffs, order);
        Ok(FormalConnection { field, rank: d, a })
    }

    /// The rank-one module `d/dt - lambda/t^2`.
    pub fn euler(field: F, lambda: &F::Elem, order: usize) -> Result<Self> {
        let m = Matrix::scalar(&field, 1, field.neg(lambda));
        Self::new(field, alloc::vec![m], order)
    }

    pub fn order(&self) -> usize {
        self.a.order()
    }

    pub fn coeff(&self, i: usize) -> &Matrix<F> {
        &self.a.coeffs[i]
    }

    pub fn truncate(&self, order: usize) -> Self {
        FormalConnection { field: self.field.clone(), rank: self.rank, a: self.a.truncate(order) }
    }

    pub fn direct_sum(&self, o: &Self) -> Self {
        let f = &self.field;
        let n = self.order().min(o.order());
        let d = self.rank + o.rank;
        let coeffs = (0..n)
            .map(|i| {
                let mut m = Matrix::zeros(f, d, d);
                m.set_block(0, 0, &self.a.coeffs[i]);
                m.set_block(self.rank, self.rank, &o.a.coeffs[i]);
                m
            })
            .collect();
        FormalConnection { field: f.clone(), rank: d, a: MatSeries { rows: d, cols: d, coeffs } }
    }

    /// `t^2 nabla(v) = t^2 v' + A v` for a vector (or matrix) series `v`.
    pub fn apply_t2(&self, v: &MatSeries<F>) -> MatSeries<F> {
        v.t2_derivative(&self.field).add(&self.field, &self.a.mul(&self.field, v))
    }

    pub fn map_field<G: Field>(&self, g: G, h: impl Fn(&F::Elem) -> G::Elem) -> FormalConnection<G> {
        FormalConnection { rank: self.rank, a: self.a.map(h), field: g }
    }

    pub fn try_map_field<G: Field>(&self, g: G, h: impl Fn(&MatSeries<F>) -> Result<MatSeries<G>>) -> Result<FormalConnection<G>> {
        Ok(FormalConnection { rank: self.rank, a: h(&self.a)?, field: g })
    }
}

/// A gauge transformation `v = P w` with `P(0)` invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransform<F: Field> {
    pub p: MatSeries<F>,
    pub inv: MatSeries<F>,
}

impl<F: Field> GaugeTransform<F> {
    pub fn new(f: &F, p: MatSeries<F>) -> Result<Self> {
        if p.rows != p.cols {
            return Err(Error::NonSquare { rows: p.rows, cols: p.cols });
        }
        let inv = p.inverse(f).ok_or(Error::NotInvertible)?;
        Ok(GaugeTransform { p, inv })
    }

    pub fn identity(f: &F, n: usize, order: usize) -> Self {
        let id = MatSeries::identity(f, n, order);
        GaugeTransform { p: id.clone(), inv: id }
    }

    pub fn order(&self) -> usize {
        self.p.order()
    }

    /// The transformation `v = (P Q) w`: first this one, then `o`.
    pub fn compose(&self, f: &F, o: &Self) -> Self {
        GaugeTransform { p: self.p.mul(f, &o.p), inv: o.inv.mul(f, &self.inv) }
    }
}

/// The connection in the new frame: `A' = P^{-1} A P + t^2 P^{-1} dP/dt`
/// (in the `t^2 d/dt` frame), valid to the smaller of the two orders.
pub fn gauge_apply<F: Field>(c: &FormalConnection<F>, g: &GaugeTransform<F>) -> Result<FormalConnection<F>> {
    if g.p.rows != c.rank {
        return Err(Error::DimensionMismatch(format!("gauge of size {} on rank {}", g.p.rows, c.rank)));
    }
    let f = &c.field;
    let conj = g.inv.mul(f, &c.a).mul(f, &g.p);
    let der = g.inv.mul(f, &g.p.t2_derivative(f));
    Ok(FormalConnection { field: f.clone(), rank: c.rank, a: conj.add(f, &der) })
}
