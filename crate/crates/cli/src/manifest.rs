//! TOML manifests: field, ring or raw connection, Steenrod data, potential, run parameters.

use std::path::Path;

use exptype_core::algebra::{parse_mpoly, Field, Matrix, QField};
use exptype_core::connection::FormalConnection;
use exptype_core::quantum::{cp_n_ring, ProductTerm, QHRing, RingData};
use num_rational::BigRational;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::UsageError;

/// A field element: an integer, or an expression in the generator `a` such as `"3/2"` or `"-3 - 3*a"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct FieldSection {
    /// Monic minimal polynomial of `a`, constant term first. Absent for `Q`.
    pub minpoly: Option<Vec<Scalar>>,
    /// Candidate eigenvalues of `c1 *` (or of `-A_0`) when roots are not found automatically.
    #[serde(default)]
    pub hints: Vec<Scalar>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ProductEntry {
    pub left: String,
    pub right: String,
    #[serde(default)]
    pub q: usize,
    pub target: String,
    pub coeff: Scalar,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct RingSection {
    /// `"cpN"` for the projective space of dimension `N`.
    pub builtin: Option<String>,
    pub basis: Option<Vec<String>>,
    pub degrees: Option<Vec<i64>>,
    pub parities: Option<Vec<u8>>,
    pub dim: Option<i64>,
    pub unit: Option<String>,
    pub c1: Option<Vec<Scalar>>,
    #[serde(default)]
    pub products: Vec<ProductEntry>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ConnectionSection {
    /// `coeffs[i]` is `A_i` as a list of rows.
    pub coeffs: Vec<Vec<Vec<Scalar>>>,
    /// Precision of the data; terms from `t^order` on are unknown.
    pub order: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Perturbation {
    pub class: String,
    #[serde(default)]
    pub q: usize,
    #[serde(default)]
    pub t: usize,
    pub row: usize,
    pub col: usize,
    pub value: Scalar,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TableTerm {
    #[serde(default)]
    pub q: usize,
    #[serde(default)]
    pub t: usize,
    pub matrix: Vec<Vec<Scalar>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TableOp {
    pub class: String,
    #[serde(default)]
    pub terms: Vec<TableTerm>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SteenrodSection {
    /// `"canonical"`, `"classical"` or `"table"`.
    pub source: String,
    /// Additive changes applied to the basis operators after construction.
    #[serde(default)]
    pub perturb: Vec<Perturbation>,
    /// Basis operators for `source = "table"`.
    #[serde(default)]
    pub ops: Vec<TableOp>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MfSection {
    pub variables: Vec<String>,
    pub potential: String,
    pub max_power: Option<usize>,
    pub max_degree: Option<u32>,
    pub max_basis: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct RunSection {
    pub primes: Option<Vec<u64>>,
    pub t_order: Option<usize>,
    pub q_order: Option<usize>,
    pub seed: Option<u64>,
    pub root_bound: Option<u64>,
    pub cyclic_tries: Option<usize>,
    /// Inconclusive verdicts count as passes for the exit code.
    #[serde(default)]
    pub allow_inconclusive: bool,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub name: Option<String>,
    #[serde(default)]
    pub field: FieldSection,
    pub ring: Option<RingSection>,
    pub connection: Option<ConnectionSection>,
    pub steenrod: Option<SteenrodSection>,
    pub mf: Option<MfSection>,
    #[serde(default)]
    pub run: RunSection,
}

/// A parsed manifest with its hash and any keys that were not recognized.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub manifest: Manifest,
    pub sha256: String,
    pub unknown_keys: Vec<String>,
}

pub fn parse_manifest(text: &str) -> Result<Loaded, UsageError> {
    let de = toml::Deserializer::parse(text).map_err(|e| UsageError(format!("manifest is not valid TOML: {e}")))?;
    let mut unknown = Vec::new();
    let manifest: Manifest = serde_ignored::deserialize(de, |path| unknown.push(path.to_string())).map_err(|e| UsageError(format!("manifest: {e}")))?;
    let sha256 = hex::encode(Sha256::digest(text.as_bytes()));
    Ok(Loaded { manifest, sha256, unknown_keys: unknown })
}

pub fn load_manifest(path: &Path) -> Result<Loaded, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    parse_manifest(&text)
}

fn scalar_text(s: &Scalar) -> String {
    match s {
        Scalar::Int(n) => n.to_string(),
        Scalar::Text(t) => t.clone(),
    }
}

fn rational(s: &Scalar) -> Result<BigRational, UsageError> {
    let t = scalar_text(s);
    exptype_core::algebra::parse_rational(&t).ok_or_else(|| UsageError(format!("{t} is not a rational number")))
}

impl FieldSection {
    pub fn build(&self) -> Result<QField, UsageError> {
        match &self.minpoly {
            None => Ok(QField::rationals()),
            Some(c) => {
                let coeffs = c.iter().map(rational).collect::<Result<Vec<_>, _>>()?;
                QField::extension(coeffs).map_err(|e| UsageError(format!("field: {e}")))
            }
        }
    }
}

/// Parse an element of `Q` or `Q(a)` written as a polynomial in `a`.
pub fn scalar(k: &QField, s: &Scalar) -> Result<<QField as Field>::Elem, UsageError> {
    let t = scalar_text(s);
    let qq = QField::rationals();
    let p = parse_mpoly(&qq, &["a".to_string()], &t).map_err(|e| UsageError(format!("cannot parse {t:?}: {e}")))?;
    let mut out = k.zero();
    let g = k.generator();
    for (m, c) in &p.terms {
        if m.0[0] > 0 && k.degree() == 1 {
            return Err(UsageError(format!("{t:?} uses the generator a but the field is Q")));
        }
        let term = k.mul(&k.pow(&g, m.0[0] as u64), &k.from_rational(c[0].clone()));
        out = k.add(&out, &term);
    }
    Ok(out)
}

fn matrix(k: &QField, rows: &[Vec<Scalar>], n: usize, what: &str) -> Result<Matrix<QField>, UsageError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(UsageError(format!("{what} must be {n}x{n}")));
    }
    let vals = rows.iter().map(|r| r.iter().map(|x| scalar(k, x)).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
    Matrix::from_rows(vals).map_err(|e| UsageError(format!("{what}: {e}")))
}

impl RingSection {
    pub fn build(&self, k: &QField) -> Result<QHRing<QField>, UsageError> {
        if let Some(b) = &self.builtin {
            let n: usize = b.strip_prefix("cp").and_then(|s| s.parse().ok()).ok_or_else(|| UsageError(format!("unknown builtin ring {b}; use cpN")))?;
            return cp_n_ring(n, k.clone()).map_err(|e| UsageError(format!("ring: {e}")));
        }
        let names = self.basis.clone().ok_or_else(|| UsageError("ring needs a basis or a builtin".into()))?;
        let idx = |s: &str| names.iter().position(|n| n == s).ok_or_else(|| UsageError(format!("unknown basis class {s}")));
        let parities = match (&self.parities, &self.degrees) {
            (Some(p), _) => p.clone(),
            (None, Some(d)) => d.iter().map(|x| x.rem_euclid(2) as u8).collect(),
            (None, None) => return Err(UsageError("ring needs degrees or parities".into())),
        };
        let c1 = self.c1.as_ref().ok_or_else(|| UsageError("ring needs c1".into()))?.iter().map(|x| scalar(k, x)).collect::<Result<Vec<_>, _>>()?;
        let products = self
            .products
            .iter()
            .map(|p| Ok(ProductTerm { left: idx(&p.left)?, right: idx(&p.right)?, q_power: p.q, target: idx(&p.target)?, coeff: scalar(k, &p.coeff)? }))
            .collect::<Result<Vec<_>, UsageError>>()?;
        let unit = match &self.unit {
            Some(u) => idx(u)?,
            None => 0,
        };
        let dim = self.dim.ok_or_else(|| UsageError("ring needs dim".into()))?;
        let data = RingData { names: names.clone(), degrees: self.degrees.clone(), parities, dim, unit, c1, products };
        QHRing::new(k.clone(), data).map_err(|e| UsageError(format!("ring rejected: {e}")))
    }
}

impl ConnectionSection {
    pub fn build(&self, k: &QField, order: usize) -> Result<FormalConnection<QField>, UsageError> {
        let n = self.coeffs.first().map(|m| m.len()).ok_or_else(|| UsageError("connection needs at least A_0".into()))?;
        let mats = self.coeffs.iter().enumerate().map(|(i, m)| matrix(k, m, n, &format!("A_{i}"))).collect::<Result<Vec<_>, _>>()?;
        let order = self.order.map_or(order, |o| o.min(order));
        FormalConnection::new(k.clone(), mats, order).map_err(|e| UsageError(format!("connection: {e}")))
    }
}

impl Manifest {
    pub fn field(&self) -> Result<QField, UsageError> {
        self.field.build()
    }

    pub fn hints(&self, k: &QField) -> Result<Vec<<QField as Field>::Elem>, UsageError> {
        self.field.hints.iter().map(|h| scalar(k, h)).collect()
    }

    /// The `t`-connection of the ring, or the raw connection, to `order`.
    pub fn connection(&self, k: &QField, order: usize) -> Result<FormalConnection<QField>, UsageError> {
        match (&self.ring, &self.connection) {
            (Some(r), None) => r.build(k)?.build_t_connection(order).map_err(|e| UsageError(format!("ring: {e}"))),
            (None, Some(c)) => c.build(k, order),
            (Some(_), Some(_)) => Err(UsageError("give either a ring or a connection, not both".into())),
            (None, None) => Err(UsageError("manifest has neither a ring nor a connection section".into())),
        }
    }
}
