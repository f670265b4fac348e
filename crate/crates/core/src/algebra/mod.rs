//! Exact scalars, polynomials, matrices and truncated series.

mod factor;
mod field;
mod finite;
mod laurent;
mod matrix;
mod mpoly;
mod rational;
mod reduce;
mod series;
mod upoly;

pub use factor::{
    distinct_degree, find_irreducible, factor_over_finite_field, is_irreducible, roots_in_fq,
    splitting_degree, splitting_field, squarefree_decomposition,
};
pub use field::{Field, FieldSpec};
pub use finite::FqField;
pub use laurent::{Laurent, LaurentMat};
pub use matrix::{generalized_eigenspaces, Eigenspace, LinearSolution, Matrix};
pub use mpoly::{parse_mpoly, Monomial, MPoly};
pub use rational::{parse_rational, QField};
pub use reduce::{reduce_mod_p, QReduction};
pub use series::MatSeries;
pub use upoly::UPoly;


pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub(crate) fn lcm_u64(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd_u64(a, b) * b
}
