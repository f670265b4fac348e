//! The four commands. Each returns a JSON report and a worst-case status.

use exptype_core::algebra::{Field, FqField, QField, QReduction};
use exptype_core::connection::{elementary_split, FormalConnection, SplitOptions, SplittingResult};
use exptype_core::mf::{milnor_ring, mf_p_curvature, nullstellensatz_certificate, twisted_cohomology, Caps, Potential};
use exptype_core::pcurvature::BiMat;
use exptype_core::quantum::QHRing;
use exptype_core::regularity::{certify_char0, prime_evidence, CertifyOptions, FuchsVerdict, PrimeEvidence, QuasiUnipotence, ResidualReport};
use exptype_core::steenrod::{
    action_from_table, canonical_action, classical_steenrod_action, default_q_order, verify_axioms, verify_covariant_constancy, verify_eigenblock_nilpotency,
    verify_idempotent_projection, verify_orthogonal_vanishing, verify_prop33, FrobeniusAction, Outcome,
};
use exptype_core::Error;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::manifest::{scalar, Loaded, Manifest, MfSection, SteenrodSection};
use crate::report::{self, error_json, error_status, Status, Tally};
use crate::UsageError;

pub const DEFAULT_PRIMES: [u64; 5] = [3, 5, 7, 11, 13];
pub const CHAR0_ORDER: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Certify,
    Split,
    SteenrodVerify,
    Mf,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Certify => "certify",
            Command::Split => "split",
            Command::SteenrodVerify => "steenrod-verify",
            Command::Mf => "mf",
        }
    }
}

/// Flag values; each overrides the manifest's run section.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub primes: Option<Vec<u64>>,
    pub t_order: Option<usize>,
    pub q_order: Option<usize>,
    pub seed: Option<u64>,
    pub root_bound: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Params {
    pub primes: Vec<u64>,
    /// Whether the primes were asked for rather than defaulted.
    pub primes_given: bool,
    pub t_order: Option<usize>,
    pub q_order: Option<usize>,
    pub seed: u64,
    pub root_bound: u64,
    pub cyclic_tries: usize,
    pub allow_inconclusive: bool,
}

impl Params {
    pub fn resolve(m: &Manifest, o: &Overrides) -> Result<Self, UsageError> {
        let given = o.primes.clone().or_else(|| m.run.primes.clone());
        let mut primes = given.clone().unwrap_or_else(|| DEFAULT_PRIMES.to_vec());
        primes.sort_unstable();
        primes.dedup();
        if let Some(p) = primes.iter().find(|&&p| p < 3 || !is_prime(p)) {
            return Err(UsageError(format!("{p} is not an odd prime")));
        }
        Ok(Params {
            primes,
            primes_given: given.is_some(),
            t_order: o.t_order.or(m.run.t_order),
            q_order: o.q_order.or(m.run.q_order),
            seed: o.seed.or(m.run.seed).unwrap_or(0),
            root_bound: o.root_bound.or(m.run.root_bound).unwrap_or(64),
            cyclic_tries: m.run.cyclic_tries.unwrap_or(8),
            allow_inconclusive: m.run.allow_inconclusive,
        })
    }

    pub fn t_order_for(&self, p: u64) -> usize {
        self.t_order.unwrap_or((2 * p as usize + 4).max(CHAR0_ORDER))
    }

    pub fn char0_order(&self) -> usize {
        self.t_order.unwrap_or(CHAR0_ORDER)
    }

    fn json(&self) -> Value {
        json!({
            "primes": self.primes,
            "t_order": self.t_order.map_or_else(|| Value::String("max(2p+4, 24); 24 over Q".into()), |n| json!(n)),
            "q_order": self.q_order.map_or_else(|| Value::String("max(2p+2, collapse bound)".into()), |n| json!(n)),
            "seed": self.seed,
            "root_bound": self.root_bound,
            "cyclic_tries": self.cyclic_tries,
            "allow_inconclusive": self.allow_inconclusive,
        })
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// A finished command.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Value,
    pub status: Status,
    pub exit_code: i32,
}

pub fn run(cmd: Command, loaded: &Loaded, o: &Overrides) -> Result<RunOutput, UsageError> {
    let m = &loaded.manifest;
    let params = Params::resolve(m, o)?;
    let (body, status) = match cmd {
        Command::Certify => certify(m, &params)?,
        Command::Split => split(m, &params)?,
        Command::SteenrodVerify => steenrod(m, &params)?,
        Command::Mf => mf(m, &params)?,
    };
    let mut report = Map::new();
    report.insert("tool".into(), json!({ "name": "exptype", "version": env!("CARGO_PKG_VERSION") }));
    report.insert("command".into(), json!(cmd.name()));
    report.insert("manifest".into(), json!({ "name": m.name, "sha256": loaded.sha256, "unknown_keys": loaded.unknown_keys }));
    report.insert("parameters".into(), params.json());
    report.insert("status".into(), report::status_json(status));
    report.insert("exit_code".into(), json!(status.exit_code(params.allow_inconclusive)));
    report.insert(cmd.name().replace('-', "_"), body);
    Ok(RunOutput { report: Value::Object(report), status, exit_code: status.exit_code(params.allow_inconclusive) })
}

fn residual_status(r: &ResidualReport<QField>) -> Status {
    match &r.outcome {
        Err(e) => error_status(e),
        Ok(c) => match &c.fuchs.verdict {
            FuchsVerdict::Irregular { .. } => Status::Fail,
            FuchsVerdict::Inconclusive { .. } => Status::Inconclusive,
            FuchsVerdict::RegularSingular => match c.indicial.as_ref().map(|i| &i.quasi_unipotent) {
                Some(QuasiUnipotence::Yes { .. }) => Status::Pass,
                Some(QuasiUnipotence::No { .. }) => Status::Fail,
                _ => Status::Inconclusive,
            },
        },
    }
}

fn residual_json(k: &QField, r: &ResidualReport<QField>, status: Status) -> Value {
    let mut m = Map::new();
    m.insert("lambda".into(), report::elem(k, &r.lambda));
    m.insert("multiplicity".into(), json!(r.multiplicity));
    m.insert("status".into(), report::status_json(status));
    match &r.outcome {
        Err(e) => {
            m.insert("error".into(), error_json(e));
        }
        Ok(c) => {
            let fuchs = match &c.fuchs.verdict {
                FuchsVerdict::RegularSingular => json!({ "verdict": "regular_singular" }),
                FuchsVerdict::Irregular { slope } => json!({ "verdict": "irregular", "slope": slope.to_string() }),
                FuchsVerdict::Inconclusive { needed, have } => json!({ "verdict": "inconclusive", "needed": needed, "have": have }),
            };
            let mut fuchs = fuchs.as_object().cloned().unwrap_or_default();
            fuchs.insert("newton_points".into(), json!(c.fuchs.points.iter().map(|(i, v)| json!([i, v])).collect::<Vec<_>>()));
            fuchs.insert("slopes".into(), json!(c.fuchs.slopes.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
            m.insert("fuchs".into(), Value::Object(fuchs));
            m.insert(
                "operator".into(),
                json!({
                    "order": c.operator.order(),
                    "determinant_valuation": c.operator.det_valuation,
                    "cyclic_vector": c.operator.cyclic_vector.iter().map(|v| v.iter().map(|x| k.format(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                }),
            );
            if let Some(ind) = &c.indicial {
                let qu = match &ind.quasi_unipotent {
                    QuasiUnipotence::Yes { denominator } => json!({ "verdict": "yes", "denominator": denominator }),
                    QuasiUnipotence::No { witness } => json!({ "verdict": "no", "witness": k.format(witness) }),
                    QuasiUnipotence::Inconclusive { reason, bound } => json!({ "verdict": "inconclusive", "reason": reason, "bound": bound }),
                };
                m.insert(
                    "indicial".into(),
                    json!({
                        "polynomial": ind.polynomial.format(k),
                        "roots": ind.roots.iter().map(|(x, e)| json!({ "root": k.format(x), "multiplicity": e })).collect::<Vec<_>>(),
                        "quasi_unipotent": qu,
                    }),
                );
            }
        }
    }
    Value::Object(m)
}

fn prime_status(e: &PrimeEvidence) -> Status {
    match &e.outcome {
        Ok(blocks) if blocks.iter().all(|b| b.nilpotent) => Status::Pass,
        Ok(_) => Status::Fail,
        Err(err) => error_status(err),
    }
}

fn prime_json(k: &QField, lambdas: &[<QField as Field>::Elem], e: &PrimeEvidence, order: usize, status: Status) -> Value {
    let fq = e.field.as_ref().and_then(|s| FqField::from_spec(s).ok());
    let mut m = Map::new();
    m.insert("p".into(), json!(e.p));
    m.insert("t_order".into(), json!(order));
    m.insert("field".into(), json!(e.field.as_ref().map(|s| s.to_string())));
    m.insert("status".into(), report::status_json(status));
    match &e.outcome {
        Err(err) => {
            m.insert("error".into(), error_json(err));
        }
        Ok(blocks) => {
            let mut sorted: Vec<_> = blocks.iter().collect();
            sorted.sort_by_key(|b| b.lambda_index);
            let bs: Vec<Value> = sorted
                .into_iter()
                .map(|b| {
                    json!({
                        "lambda": b.lambda_index.map(|i| k.format(&lambdas[i])),
                        "lambda_mod_p": fq.as_ref().map_or_else(|| b.lambda_mod_p.to_string(), |f| f.format(&b.lambda_mod_p)),
                        "rank": b.rank,
                        "shifted_p_curvature_nilpotent": b.nilpotent,
                        "nilpotency_index": b.index,
                    })
                })
                .collect();
            m.insert("blocks".into(), Value::Array(bs));
        }
    }
    Value::Object(m)
}

fn certify(m: &Manifest, params: &Params) -> Result<(Value, Status), UsageError> {
    let k = m.field()?;
    let hints = m.hints(&k)?;
    let orders: Vec<(u64, usize)> = params.primes.iter().map(|&p| (p, params.t_order_for(p))).collect();
    let top = orders.iter().map(|x| x.1).chain([params.char0_order()]).max().unwrap_or(CHAR0_ORDER);
    let c = m.connection(&k, top)?;
    let opts = CertifyOptions { order: params.char0_order(), seed: params.seed, root_bound: params.root_bound, hints, cyclic_tries: params.cyclic_tries };
    let (lambdas, residuals) = certify_char0(&c, &opts);
    let ls: Vec<_> = lambdas.as_ref().map(|v| v.iter().map(|x| x.0.clone()).collect()).unwrap_or_default();
    let evidence: Vec<PrimeEvidence> = orders.par_iter().map(|&(p, n)| prime_evidence(&c, &ls, p, n)).collect();

    let mut tally = Tally::default();
    let mut out = Map::new();
    out.insert("field".into(), json!(k.spec().to_string()));
    out.insert("rank".into(), json!(c.rank));
    out.insert("char0_order".into(), json!(opts.order));
    match &lambdas {
        Ok(v) => {
            tally.add(Status::Pass);
            out.insert("lambdas".into(), json!(v.iter().map(|(l, e)| json!({ "lambda": k.format(l), "multiplicity": e })).collect::<Vec<_>>()));
        }
        Err(e) => {
            tally.add(error_status(e));
            out.insert("lambdas".into(), json!({ "error": error_json(e) }));
        }
    }
    let res: Vec<Value> = residuals
        .iter()
        .map(|r| {
            let s = tally.add(residual_status(r));
            residual_json(&k, r, s)
        })
        .collect();
    out.insert("residuals".into(), Value::Array(res));
    let pr: Vec<Value> = evidence
        .iter()
        .zip(&orders)
        .map(|(e, &(_, n))| {
            let s = tally.add(prime_status(e));
            prime_json(&k, &ls, e, n, s)
        })
        .collect();
    out.insert("primes".into(), Value::Array(pr));
    Ok((Value::Object(out), tally.0))
}

fn split_json<F: Field>(s: &SplittingResult<F>) -> Value {
    let f = &s.field;
    let blocks: Vec<Value> = s
        .sorted_blocks()
        .into_iter()
        .map(|b| {
            json!({
                "lambda": f.format(&b.lambda),
                "rank": b.multiplicity,
                "projector_t0": report::matrix(f, &b.projector.coeffs[0]),
            })
        })
        .collect();
    json!({ "order": s.order, "field": f.spec().to_string(), "blocks": blocks })
}

fn split(m: &Manifest, params: &Params) -> Result<(Value, Status), UsageError> {
    let k = m.field()?;
    let hints = m.hints(&k)?;
    let n0 = params.char0_order();
    let orders: Vec<(u64, usize)> = if params.primes_given { params.primes.iter().map(|&p| (p, params.t_order_for(p))).collect() } else { Vec::new() };
    let top = orders.iter().map(|x| x.1).chain([n0]).max().unwrap_or(n0);
    let c = m.connection(&k, top)?;
    let mut tally = Tally::default();
    let mut out = Map::new();
    let s0 = elementary_split(&c, n0, &SplitOptions { hints: hints.clone(), ..SplitOptions::default() });
    let char0 = match &s0 {
        Ok(s) => split_json(s),
        Err(e) => {
            tally.add(error_status(e).max(Status::Inconclusive));
            json!({ "error": error_json(e) })
        }
    };
    out.insert("char0".into(), char0);
    let lambdas: Vec<_> = s0.as_ref().map(|s| s.blocks.iter().map(|b| b.lambda.clone()).collect()).unwrap_or_default();
    let per: Vec<(u64, Result<SplittingResult<FqField>, Error>)> = orders
        .par_iter()
        .map(|&(p, n)| {
            let r = (|| {
                let red = QReduction::to_prime(&k, p)?;
                let cp: FormalConnection<FqField> = c.truncate(n).try_map_field(red.target.clone(), |s| red.series(s))?;
                let hints = lambdas.iter().map(|l| red.elem(l)).collect::<Result<Vec<_>, _>>()?;
                elementary_split(&cp, n, &SplitOptions { hints, ..SplitOptions::default() })
            })();
            (p, r)
        })
        .collect();
    let primes: Vec<Value> = per
        .iter()
        .map(|(p, r)| match r {
            Ok(s) => {
                let mut v = split_json(s);
                v["p"] = json!(p);
                v
            }
            Err(e) => {
                tally.add(error_status(e).max(Status::Inconclusive));
                json!({ "p": p, "error": error_json(e) })
            }
        })
        .collect();
    out.insert("primes".into(), Value::Array(primes));
    Ok((Value::Object(out), tally.0))
}

fn outcome_json(o: &Outcome) -> Value {
    match o {
        Outcome::Pass => json!("pass"),
        Outcome::Fail(w) => json!({ "fail": w }),
        Outcome::Skipped(w) => json!({ "skipped": w }),
    }
}

fn outcome_status(o: &Outcome) -> Status {
    if o.failed() {
        Status::Fail
    } else {
        Status::Pass
    }
}

fn class_index(ring: &QHRing<FqField>, name: &str) -> Result<usize, UsageError> {
    ring.names.iter().position(|n| n == name).ok_or_else(|| UsageError(format!("unknown basis class {name} in the steenrod section")))
}

fn reduce_scalar(k: &QField, red: &QReduction, s: &crate::manifest::Scalar) -> Result<u64, UsageError> {
    let x = scalar(k, s)?;
    red.elem(&x).map_err(|e| UsageError(format!("steenrod value does not reduce mod {}: {e}", red.target.p())))
}

fn build_action(
    k: &QField,
    red: &QReduction,
    ring: &QHRing<FqField>,
    sec: &SteenrodSection,
    q_order: usize,
    t_order: usize,
) -> Result<Result<FrobeniusAction<FqField>, Error>, UsageError> {
    let f = &ring.field;
    let d = ring.rank();
    let mut a = match sec.source.as_str() {
        "canonical" => canonical_action(ring, q_order, t_order),
        "classical" => classical_steenrod_action(ring, t_order),
        "table" => {
            let mut ops: Vec<BiMat<FqField>> = (0..d).map(|_| BiMat::zero(f, d, d, q_order, t_order)).collect();
            for op in &sec.ops {
                let i = class_index(ring, &op.class)?;
                for term in &op.terms {
                    if term.matrix.len() != d || term.matrix.iter().any(|r| r.len() != d) {
                        return Err(UsageError(format!("operator of {} must be {d}x{d}", op.class)));
                    }
                    if term.q < q_order && term.t < t_order {
                        for (r, row) in term.matrix.iter().enumerate() {
                            for (c, x) in row.iter().enumerate() {
                                let v = reduce_scalar(k, red, x)?;
                                let cur = ops[i].at(term.q, term.t).get(r, c).clone();
                                ops[i].at_mut(term.q, term.t).set(r, c, f.add(&cur, &v));
                            }
                        }
                    }
                }
            }
            action_from_table(ring, q_order, t_order, ops, Vec::new(), Vec::new())
        }
        other => return Err(UsageError(format!("unknown steenrod source {other}; use canonical, classical or table"))),
    };
    if let Ok(act) = a.as_mut() {
        for pert in &sec.perturb {
            let i = class_index(ring, &pert.class)?;
            if pert.row >= d || pert.col >= d {
                return Err(UsageError(format!("perturbation entry ({}, {}) out of range", pert.row, pert.col)));
            }
            if pert.q < act.q_order && pert.t < act.t_order {
                let v = reduce_scalar(k, red, &pert.value)?;
                let cur = act.ops[i].at(pert.q, pert.t).get(pert.row, pert.col).clone();
                act.ops[i].at_mut(pert.q, pert.t).set(pert.row, pert.col, f.add(&cur, &v));
            }
        }
        // a changed operator no longer matches the declared datum
        if !sec.perturb.is_empty() {
            act.declared.clear();
        }
    }
    Ok(a)
}

fn steenrod_prime(k: &QField, ring: &QHRing<QField>, sec: &SteenrodSection, p: u64, params: &Params) -> Result<(Value, Status), UsageError> {
    let mut tally = Tally::default();
    let mut out = Map::new();
    out.insert("p".into(), json!(p));
    let red = match QReduction::to_prime(k, p) {
        Ok(r) => r,
        Err(e) => {
            out.insert("error".into(), error_json(&e));
            return Ok((Value::Object(out), error_status(&e).max(Status::Inconclusive)));
        }
    };
    let ring_p = match ring.reduce(&red) {
        Ok(r) => r,
        Err(e) => {
            out.insert("error".into(), error_json(&e));
            return Ok((Value::Object(out), error_status(&e).max(Status::Inconclusive)));
        }
    };
    let t_order = params.t_order_for(p);
    let q_order = match params.q_order {
        Some(m) => m,
        None => (2 * p as usize + 2).max(default_q_order(&ring_p, p).unwrap_or(0)),
    };
    out.insert("q_order".into(), json!(q_order));
    out.insert("t_order".into(), json!(t_order));
    out.insert("source".into(), json!(sec.source));
    let a = match build_action(k, &red, &ring_p, sec, q_order, t_order)? {
        Ok(a) => a,
        Err(e) => {
            out.insert("error".into(), error_json(&e));
            return Ok((Value::Object(out), tally.add(error_status(&e))));
        }
    };
    let record = |tally: &mut Tally, out: &mut Map<String, Value>, key: &str, r: Result<(Value, Status), Error>| match r {
        Ok((v, s)) => {
            tally.add(s);
            out.insert(key.into(), v);
        }
        Err(e) => {
            let s = tally.add(error_status(&e).max(Status::Inconclusive));
            out.insert(key.into(), json!({ "error": error_json(&e), "status": s.name() }));
        }
    };
    record(
        &mut tally,
        &mut out,
        "axioms",
        verify_axioms(&a).map(|r| {
            let mut m = Map::new();
            let mut s = Status::Pass;
            for c in &r.checks {
                s = s.max(outcome_status(&c.outcome));
                m.insert(c.name.into(), outcome_json(&c.outcome));
            }
            (Value::Object(m), s)
        }),
    );
    record(
        &mut tally,
        &mut out,
        "covariant_constancy",
        verify_covariant_constancy(&a).map(|v| {
            let s = outcome_status(&v.q_connection).max(outcome_status(&v.t_connection));
            (json!({ "q_connection": outcome_json(&v.q_connection), "t_connection": outcome_json(&v.t_connection) }), s)
        }),
    );
    record(
        &mut tally,
        &mut out,
        "prop_q_power",
        verify_prop33(&a).map(|v| {
            let s = if v.passed() { Status::Pass } else { Status::Fail };
            (
                json!({
                    "shifted_nilpotency": report::nilpotency(&v.nilpotency),
                    "divisible_by_q_p": outcome_json(&v.divisible_by_q_p),
                    "t0_part_vanishes": outcome_json(&v.t0_part_vanishes),
                }),
                s,
            )
        }),
    );
    let split = ring_p.build_t_connection(t_order).and_then(|c| elementary_split(&c, t_order, &SplitOptions::default()));
    match &split {
        Err(e) => {
            let s = tally.add(error_status(e).max(Status::Inconclusive));
            out.insert("split".into(), json!({ "error": error_json(e), "status": s.name() }));
        }
        Ok(split) => {
            out.insert("split".into(), split_json(split));
            record(
                &mut tally,
                &mut out,
                "idempotent_projection",
                verify_idempotent_projection(&a, split).map(|v| match &v.projector.failure {
                    None => (json!({ "accepted": true, "order": v.projector.order }), Status::Pass),
                    Some(w) => (
                        json!({
                            "accepted": false,
                            "order": v.projector.order,
                            "condition": w.condition.name(),
                            "lambdas": w.lambdas,
                            "t_power": w.order,
                            "entry": [w.entry.0, w.entry.1],
                        }),
                        Status::Fail,
                    ),
                }),
            );
            record(
                &mut tally,
                &mut out,
                "orthogonal_vanishing",
                verify_orthogonal_vanishing(&a, split).map(|v| (json!({ "outcome": outcome_json(&v.outcome), "checked": v.checked }), outcome_status(&v.outcome))),
            );
            record(
                &mut tally,
                &mut out,
                "eigenblock_nilpotency",
                verify_eigenblock_nilpotency(&a, split).map(|vs| {
                    let mut s = Status::Pass;
                    let items: Vec<Value> = vs
                        .iter()
                        .map(|v| {
                            if !(v.operator_route.nilpotent && v.algebra_route && v.routes_agree) {
                                s = Status::Fail;
                            }
                            json!({
                                "lambda": a.field().format(&v.lambda),
                                "operator_route": report::nilpotency(&v.operator_route),
                                "algebra_index": v.algebra_index,
                                "algebra_route": v.algebra_route,
                                "routes_agree": v.routes_agree,
                            })
                        })
                        .collect();
                    (Value::Array(items), s)
                }),
            );
        }
    }
    out.insert("status".into(), report::status_json(tally.0));
    Ok((Value::Object(out), tally.0))
}

fn steenrod(m: &Manifest, params: &Params) -> Result<(Value, Status), UsageError> {
    let sec = m.steenrod.as_ref().ok_or_else(|| UsageError("manifest has no steenrod section".into()))?;
    let rs = m.ring.as_ref().ok_or_else(|| UsageError("steenrod-verify needs a ring section".into()))?;
    let k = m.field()?;
    let ring = rs.build(&k)?;
    let per: Vec<Result<(Value, Status), UsageError>> = params.primes.par_iter().map(|&p| steenrod_prime(&k, &ring, sec, p, params)).collect();
    let mut tally = Tally::default();
    let mut items = Vec::new();
    for r in per {
        let (v, s) = r?;
        tally.add(s);
        items.push(v);
    }
    Ok((json!({ "ring": ring.names, "primes": items }), tally.0))
}

fn caps(sec: &MfSection) -> Caps {
    let d = Caps::default();
    Caps { max_degree: sec.max_degree.unwrap_or(d.max_degree), max_basis: sec.max_basis.unwrap_or(d.max_basis), max_power: sec.max_power.unwrap_or(d.max_power), ..d }
}

fn potential<F: Field>(f: &F, sec: &MfSection) -> Result<Potential<F>, Error> {
    let w = exptype_core::algebra::parse_mpoly(f, &sec.variables, &sec.potential).map_err(Error::InvalidInput)?;
    Potential::new(f.clone(), sec.variables.clone(), w)
}

/// Milnor ring, certificate and weights over one field.
fn mf_common<F: Field>(w: &Potential<F>, caps: &Caps, tally: &mut Tally, out: &mut Map<String, Value>) -> bool {
    let f = &w.field;
    let ring = match milnor_ring(w, caps) {
        Ok(r) => r,
        Err(e) => {
            let s = tally.add(error_status(&e));
            out.insert("milnor".into(), json!({ "error": error_json(&e), "status": s.name() }));
            return false;
        }
    };
    out.insert(
        "milnor".into(),
        json!({
            "mu": ring.mu(),
            "basis": ring.basis.iter().map(|m| m.format(&w.names)).collect::<Vec<_>>(),
            "morse": ring.mu() == 1,
        }),
    );
    out.insert("weights".into(), json!(w.quasi_homogeneous_weights().map(|v| v.iter().map(|x| f.format(x)).collect::<Vec<_>>())));
    match nullstellensatz_certificate(w, &ring, caps) {
        Ok(c) => {
            out.insert(
                "nullstellensatz".into(),
                json!({
                    "n": c.n,
                    "cofactors": c.cofactors.iter().map(|g| g.format(f, &w.names)).collect::<Vec<_>>(),
                    "verified": c.verify(w),
                }),
            );
        }
        Err(e) => {
            let s = tally.add(error_status(&e));
            out.insert("nullstellensatz".into(), json!({ "error": error_json(&e), "status": s.name() }));
        }
    }
    true
}

fn mf_prime(sec: &MfSection, p: u64, order: usize) -> (Value, Status) {
    let mut tally = Tally::default();
    let mut out = Map::new();
    out.insert("p".into(), json!(p));
    out.insert("t_order".into(), json!(order));
    let caps = caps(sec);
    let w = match FqField::prime(p).and_then(|f| potential(&f, sec)) {
        Ok(w) => w,
        Err(e) => {
            let s = tally.add(Status::Inconclusive);
            out.insert("error".into(), error_json(&e));
            out.insert("status".into(), json!(s.name()));
            return (Value::Object(out), s);
        }
    };
    if mf_common(&w, &caps, &mut tally, &mut out) {
        match twisted_cohomology(&w, order, &caps).and_then(|h| mf_p_curvature(&h).map(|r| (h, r))) {
            Ok((h, r)) => {
                let s = tally.add(if r.passed() { Status::Pass } else { Status::Fail });
                out.insert(
                    "cohomology".into(),
                    json!({
                        "rank": h.rank(),
                        "rank_probe": h.rank_probe.iter().map(|(d, r)| json!({ "degree": d, "rank": r })).collect::<Vec<_>>(),
                    }),
                );
                out.insert(
                    "p_curvature".into(),
                    json!({
                        "matches_w_power": r.mismatch.is_none(),
                        "mismatch": r.mismatch.map(|(k, i, j)| json!({ "t_power": k, "entry": [i, j] })),
                        "operator": report::nilpotency(&r.operator_nilpotency),
                        "w_power": report::nilpotency(&r.w_power_nilpotency),
                        "w_power_matrix": report::series(&w.field, &r.w_power),
                        "status": s.name(),
                    }),
                );
            }
            Err(e) => {
                let s = tally.add(error_status(&e));
                out.insert("cohomology".into(), json!({ "error": error_json(&e), "status": s.name() }));
            }
        }
    }
    out.insert("status".into(), report::status_json(tally.0));
    (Value::Object(out), tally.0)
}

fn mf(m: &Manifest, params: &Params) -> Result<(Value, Status), UsageError> {
    let sec = m.mf.as_ref().ok_or_else(|| UsageError("manifest has no mf section".into()))?;
    let qq = QField::rationals();
    let w = potential(&qq, sec).map_err(|e| UsageError(format!("potential: {e}")))?;
    let caps = caps(sec);
    let mut tally = Tally::default();
    let mut char0 = Map::new();
    char0.insert("potential".into(), json!(w.format()));
    if mf_common(&w, &caps, &mut tally, &mut char0) {
        match twisted_cohomology(&w, 1, &caps) {
            Ok(h) => {
                char0.insert("cohomology_rank".into(), json!(h.rank()));
            }
            Err(e) => {
                let s = tally.add(error_status(&e));
                char0.insert("cohomology_rank".into(), json!({ "error": error_json(&e), "status": s.name() }));
            }
        }
    }
    let per: Vec<(Value, Status)> = params.primes.par_iter().map(|&p| mf_prime(sec, p, params.t_order_for(p))).collect();
    let primes: Vec<Value> = per
        .into_iter()
        .map(|(v, s)| {
            tally.add(s);
            v
        })
        .collect();
    Ok((json!({ "char0": Value::Object(char0), "primes": primes }), tally.0))
}
