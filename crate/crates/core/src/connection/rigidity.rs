use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::FormalConnection;
use crate::algebra::{Field, Matrix};
use crate::{Error, Result};

/// Output of the order-by-order solve of `t^2 f' = f A - B f`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntertwinerRun<F: Field> {
    /// `f_0, f_1, ...` as far as the recursion got.
    pub coeffs: Vec<Matrix<F>>,
    /// Order at which a prescribed `f_0` turned out inconsistent.
    pub inconsistent_at: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityReport {
    pub order: usize,
    /// The recursion started from `f_0 = 0` produced only zeros.
    pub recursion_zero: bool,
    pub trials: usize,
    /// Random nonzero starting values rejected by the recursion.
    pub trials_rejected: usize,
    /// Dimension of the solution space of the full truncated linear system,
    /// computed independently of the recursion (skipped when too large).
    pub kernel_dim: Option<usize>,
}

impl RigidityReport {
    pub fn only_zero(&self) -> bool {
        self.recursion_zero && self.trials_rejected == self.trials && self.kernel_dim.unwrap_or(0) == 0
    }
}

fn single_eigenvalue<F: Field>(c: &FormalConnection<F>) -> Result<F::Elem> {
    let f = &c.field;
    let a0 = c.coeff(0);
    let mu = f.div(&a0.trace(f), &f.from_i64(c.rank as i64)).ok_or(Error::InvalidInput("rank divisible by p".into()))?;
    let n = a0.sub(f, &Matrix::scalar(f, c.rank, mu.clone()));
    if !n.pow(f, c.rank as u32).is_zero(f) {
        return Err(Error::LeadingNotSingleEigenvalue(f.format(&f.neg(&mu))));
    }
    Ok(mu)
}

/// Solve `X A0 - B0 X = Y` when `A0 = mu_a + N_a`, `B0 = mu_b + N_b`, `mu_a != mu_b`.
fn sylvester<F: Field>(f: &F, delta_inv: &F::Elem, na: &Matrix<F>, nb: &Matrix<F>, y: &Matrix<F>, steps: usize) -> Matrix<F> {
    let mut term = y.scale(f, delta_inv);
    let mut acc = term.clone();
    for _ in 0..steps {
        term = term.mul(f, na).sub(f, &nb.mul(f, &term)).scale(f, &f.neg(delta_inv));
        if term.is_zero(f) {
            break;
        }
        acc = acc.add(f, &term);
    }
    acc
}

/// Solve `t^2 f' = f A - B f` order by order for `f = sum f_r t^r`, starting
/// from `f_0`. The equation at order `r` reads
/// `f_r A_0 - B_0 f_r = (r - 1) f_{r-1} - sum_{j >= 1} (f_{r-j} A_j - B_j f_{r-j})`.
pub fn intertwiner_recursion<F: Field>(
    ca: &FormalConnection<F>,
    cb: &FormalConnection<F>,
    f0: &Matrix<F>,
    order: usize,
) -> Result<IntertwinerRun<F>> {
    let f = &ca.field;
    let mu_a = single_eigenvalue(ca)?;
    let mu_b = single_eigenvalue(cb)?;
    let delta = f.sub(&mu_a, &mu_b);
    let Some(delta_inv) = f.inv(&delta) else {
        return Err(Error::SameEigenvalue(f.format(&f.neg(&mu_a))));
    };
    let order = order.min(ca.order()).min(cb.order());
    let na = ca.coeff(0).sub(f, &Matrix::scalar(f, ca.rank, mu_a));
    let nb = cb.coeff(0).sub(f, &Matrix::scalar(f, cb.rank, mu_b));
    let steps = ca.rank + cb.rank;
    let res0 = f0.mul(f, ca.coeff(0)).sub(f, &cb.coeff(0).mul(f, f0));
    if !res0.is_zero(f) {
        return Ok(IntertwinerRun { coeffs: alloc::vec![f0.clone()], inconsistent_at: Some(0) });
    }
    let mut fs = alloc::vec![f0.clone()];
    for r in 1..order {
        let mut y = fs[r - 1].scale(f, &f.from_i64(r as i64 - 1));
        for j in 1..=r {
            let fj = &fs[r - j];
            y = y.sub(f, &fj.mul(f, ca.coeff(j)).sub(f, &cb.coeff(j).mul(f, fj)));
        }
        fs.push(sylvester(f, &delta_inv, &na, &nb, &y, steps));
    }
    Ok(IntertwinerRun { coeffs: fs, inconsistent_at: None })
}

/// Kernel dimension of the full linear system for `f_0, ..., f_{N-1}`.
fn full_kernel_dim<F: Field>(ca: &FormalConnection<F>, cb: &FormalConnection<F>, order: usize) -> usize {
    let f = &ca.field;
    let (da, db) = (ca.rank, cb.rank);
    let blk = da * db;
    let mut sys = Matrix::zeros(f, blk * order, blk * order);
    // unknown index: r * blk + i * da + j for (f_r)_{ij}
    for r in 0..order {
        for i in 0..db {
            for j in 0..da {
                let row = r * blk + i * da + j;
                // (r-1) f_{r-1}
                if r >= 1 {
                    let col = (r - 1) * blk + i * da + j;
                    let v = f.sub(sys.get(row, col), &f.from_i64(r as i64 - 1));
                    sys.set(row, col, v);
                }
                // - sum_{k} (f_{r-k} A_k - B_k f_{r-k})_{ij}, moved to the left
                for k in 0..=r {
                    let s = r - k;
                    for m in 0..da {
                        let col = s * blk + i * da + m;
                        let v = f.add(sys.get(row, col), ca.coeff(k).get(m, j));
                        sys.set(row, col, v);
                    }
                    for m in 0..db {
                        let col = s * blk + m * da + j;
                        let v = f.sub(sys.get(row, col), cb.coeff(k).get(i, m));
                        sys.set(row, col, v);
                    }
                }
            }
        }
    }
    blk * order - sys.rank(f)
}

/// Check that the only horizontal morphism between two single-exponent
/// connections with different exponents is zero, to order `order`.
pub fn verify_morphism_rigidity<F: Field>(
    ca: &FormalConnection<F>,
    cb: &FormalConnection<F>,
    trials: usize,
    order: usize,
    seed: u64,
) -> Result<RigidityReport> {
    let f = &ca.field;
    let order = order.min(ca.order()).min(cb.order());
    let zero = Matrix::zeros(f, cb.rank, ca.rank);
    let run = intertwiner_recursion(ca, cb, &zero, order)?;
    let recursion_zero = run.inconsistent_at.is_none() && run.coeffs.iter().all(|m| m.is_zero(f));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rejected = 0;
    for _ in 0..trials {
        let f0 = loop {
            let m = Matrix::from_fn(cb.rank, ca.rank, |_, _| f.random(&mut rng));
            if !m.is_zero(f) {
                break m;
            }
        };
        if intertwiner_recursion(ca, cb, &f0, order)?.inconsistent_at.is_some() {
            rejected += 1;
        }
    }
    let unknowns = ca.rank * cb.rank * order;
    let kernel_dim = (unknowns <= 400).then(|| full_kernel_dim(ca, cb, order));
    Ok(RigidityReport { order, recursion_zero, trials, trials_rejected: rejected, kernel_dim })
}
