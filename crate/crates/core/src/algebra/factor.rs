//! Factorization of univariate polynomials over finite fields:
//! squarefree decomposition, distinct-degree and equal-degree splitting.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::Field;
use super::finite::FqField;
use super::upoly::UPoly;
use super::lcm_u64;
use crate::Result;

type P = UPoly<FqField>;

fn is_one(f: &P) -> bool {
    f.coeffs.len() == 1 && f.coeffs[0] == 1
}

fn exact_div(k: &FqField, a: &P, b: &P) -> P {
    a.divrem(k, b).0
}

/// `c(x)^(1/p)` for `c` a polynomial in `x^p`.
fn pth_root(k: &FqField, c: &P) -> P {
    let p = k.p() as usize;
    let e = k.order() / k.p();
    let v = c.coeffs.iter().step_by(p).map(|a| k.pow(a, e)).collect();
    UPoly::new(k, v)
}

/// Squarefree decomposition: monic pairwise coprime squarefree `g_i` with
/// `f = lead * prod g_i^{m_i}`.
pub fn squarefree_decomposition(k: &FqField, f: &P) -> Vec<(P, usize)> {
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let f = f.monic(k);
    let mut c = f.gcd(k, &f.derivative(k));
    let mut w = exact_div(k, &f, &c);
    let mut i = 1;
    while !is_one(&w) {
        let y = w.gcd(k, &c);
        let fac = exact_div(k, &w, &y);
        if !is_one(&fac) {
            out.push((fac, i));
        }
        w = y.clone();
        c = exact_div(k, &c, &y);
        i += 1;
    }
    if !is_one(&c) {
        let root = pth_root(k, &c);
        for (g, m) in squarefree_decomposition(k, &root) {
            out.push((g, m * k.p() as usize));
        }
    }
    out
}

/// Distinct-degree factorization of a monic squarefree polynomial:
/// pairs `(g, d)` with `g` the product of all irreducible factors of degree `d`.
pub fn distinct_degree(k: &FqField, f: &P) -> Vec<(P, usize)> {
    let mut out = Vec::new();
    let mut rest = f.monic(k);
    let x = UPoly::x(k);
    let mut h = x.clone();
    let mut d = 1;
    while rest.degree().unwrap_or(0) >= 2 * d {
        h = h.pow_mod(k, k.order(), &rest);
        let g = rest.gcd(k, &h.sub(k, &x));
        if !is_one(&g) {
            rest = exact_div(k, &rest, &g);
            h = h.rem(k, &rest);
            out.push((g, d));
        }
        d += 1;
    }
    if rest.degree().unwrap_or(0) > 0 {
        let deg = rest.degree().unwrap();
        out.push((rest, deg));
    }
    out
}

/// Cantor–Zassenhaus splitting of a monic squarefree product of degree-`d` irreducibles.
fn equal_degree(k: &FqField, f: &P, d: usize, rng: &mut ChaCha8Rng) -> Vec<P> {
    let n = f.degree().unwrap_or(0);
    if n <= d {
        return vec![f.clone()];
    }
    let q = k.order();
    loop {
        let a = UPoly::new(k, (0..n).map(|_| rng.gen_range(0..q)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let g = a.gcd(k, f);
        if !is_one(&g) && g.degree() != f.degree() {
            let mut out = equal_degree(k, &g, d, rng);
            out.extend(equal_degree(k, &exact_div(k, f, &g), d, rng));
            return out;
        }
        // b = a^((q^d - 1)/2) = (a^(1 + q + ... + q^(d-1)))^((q-1)/2)
        let mut ai = a.rem(k, f);
        let mut prod = ai.clone();
        for _ in 1..d {
            ai = ai.pow_mod(k, q, f);
            prod = prod.mul_mod(k, &ai, f);
        }
        let b = prod.pow_mod(k, (q - 1) / 2, f);
        let g = f.gcd(k, &b.sub(k, &UPoly::one(k)));
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && dg < n {
            let mut out = equal_degree(k, &g, d, rng);
            out.extend(equal_degree(k, &exact_div(k, f, &g), d, rng));
            return out;
        }
    }
}

fn cmp_poly(a: &P, b: &P) -> core::cmp::Ordering {
    a.coeffs.len().cmp(&b.coeffs.len()).then_with(|| a.coeffs.iter().rev().cmp(b.coeffs.iter().rev()))
}

/// Complete factorization into monic irreducibles with multiplicities, sorted
/// by degree and then coefficients. The leading unit is dropped. The seed
/// only affects the internal random splitting, never the result.
pub fn factor_over_finite_field(k: &FqField, f: &P, seed: u64) -> Vec<(P, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (g, m) in squarefree_decomposition(k, f) {
        for (h, d) in distinct_degree(k, &g) {
            for fac in equal_degree(k, &h, d, &mut rng) {
                out.push((fac, m));
            }
        }
    }
    out.sort_by(|a, b| cmp_poly(&a.0, &b.0).then(a.1.cmp(&b.1)));
    out
}

/// Distinct roots of `f` in the field, sorted by their packed encoding.
pub fn roots_in_fq(k: &FqField, f: &P) -> Vec<u64> {
    if f.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let f = f.monic(k);
    let x = UPoly::x(k);
    let mut roots = Vec::new();
    if f.coeffs[0] == 0 {
        roots.push(0);
    }
    // linear part of the nonzero roots: gcd(x^(q-1) - 1, f)
    let g = f.gcd(k, &x.pow_mod(k, k.order() - 1, &f).sub(k, &UPoly::one(k)));
    if g.degree().unwrap_or(0) > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0007_2007);
        for lin in equal_degree(k, &g, 1, &mut rng) {
            roots.push(k.neg(&lin.coeffs[0]));
        }
    }
    roots.sort_unstable();
    roots.dedup();
    roots
}

/// Rabin's test.
pub fn is_irreducible(k: &FqField, f: &P) -> bool {
    let n = match f.degree() {
        None | Some(0) => return false,
        Some(1) => return true,
        Some(n) => n,
    };
    let f = f.monic(k);
    let x = UPoly::x(k);
    let q = k.order();
    let frob = |times: usize| {
        let mut h = x.clone();
        for _ in 0..times {
            h = h.pow_mod(k, q, &f);
        }
        h
    };
    if !frob(n).sub(k, &x).is_zero() {
        return false;
    }
    let mut m = n;
    let mut r = 2;
    while m > 1 {
        if m % r == 0 {
            while m % r == 0 {
                m /= r;
            }
            let g = f.gcd(k, &frob(n / r).sub(k, &x));
            if !is_one(&g) {
                return false;
            }
        }
        r += 1;
    }
    true
}

/// The first monic irreducible polynomial of degree `n` over `k`, enumerating
/// lower coefficients in base-`|k|` counting order.
pub fn find_irreducible(k: &FqField, n: usize) -> P {
    let q = k.order();
    let mut idx: u64 = 0;
    loop {
        let mut coeffs = Vec::with_capacity(n + 1);
        let mut t = idx;
        for _ in 0..n {
            coeffs.push(t % q);
            t /= q;
        }
        coeffs.push(1);
        let f = UPoly::new(k, coeffs);
        if f.coeffs[0] != 0 && is_irreducible(k, &f) {
            return f;
        }
        idx += 1;
    }
}

/// Least `k` such that `f` splits over the degree-`k` extension of the given field.
pub fn splitting_degree(k: &FqField, f: &P) -> usize {
    factor_over_finite_field(k, f, 1)
        .iter()
        .fold(1u64, |acc, (g, _)| lcm_u64(acc, g.degree().unwrap_or(1).max(1) as u64)) as usize
}

/// Splitting field of a polynomial over the prime field `F_p`.
pub fn splitting_field(base: &FqField, f: &P) -> Result<FqField> {
    let k = splitting_degree(base, f);
    FqField::with_degree(base.p(), k)
}
