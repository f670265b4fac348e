//! Canonical JSON: sorted keys, field elements and rationals as exact strings.

use exptype_core::algebra::{Field, Matrix, MatSeries};
use exptype_core::pcurvature::NilpotencyVerdict;
use exptype_core::Error;
use serde_json::{json, Map, Value};

/// Overall verdict, ordered by severity. The exit code is the contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
        }
    }

    pub fn exit_code(self, allow_inconclusive: bool) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Inconclusive if allow_inconclusive => 0,
            Status::Inconclusive => 2,
            Status::Fail => 1,
        }
    }
}

/// Running worst-case of statuses.
#[derive(Debug, Clone, Copy)]
pub struct Tally(pub Status);

impl Default for Tally {
    fn default() -> Self {
        Tally(Status::Pass)
    }
}

impl Tally {
    pub fn add(&mut self, s: Status) -> Status {
        self.0 = self.0.max(s);
        s
    }
}

/// Errors caused by the truncation or by a search bound, rather than by a witnessed failure.
pub fn error_status(e: &Error) -> Status {
    match e {
        Error::TruncationTooSmall { .. }
        | Error::CyclicSearchFailed { .. }
        | Error::ScaleExceeded(_)
        | Error::NoCertificateWithinCap(_)
        | Error::EigenvalueDifferenceNotInvertible(_)
        | Error::DenominatorDivisibleByP { .. }
        | Error::CharPolyDoesNotSplit { .. }
        | Error::RankUnstable(_) => Status::Inconclusive,
        _ => Status::Fail,
    }
}

pub fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

pub fn error_json(e: &Error) -> Value {
    let mut m = Map::new();
    m.insert("kind".into(), Value::String(error_kind(e)));
    m.insert("message".into(), Value::String(e.to_string()));
    if let Error::CharPolyDoesNotSplit { suggestion: Some(s), .. } = e {
        m.insert("suggested_field".into(), Value::String(s.clone()));
    }
    Value::Object(m)
}

pub fn status_json(s: Status) -> Value {
    Value::String(s.name().into())
}

pub fn elem<F: Field>(f: &F, x: &F::Elem) -> Value {
    Value::String(f.format(x))
}

pub fn matrix<F: Field>(f: &F, m: &Matrix<F>) -> Value {
    Value::Array(m.format_rows(f).into_iter().map(|r| Value::Array(r.into_iter().map(Value::String).collect())).collect())
}

/// Nonzero coefficients of a series, keyed by the power of `t`.
pub fn series<F: Field>(f: &F, s: &MatSeries<F>) -> Value {
    let mut m = Map::new();
    for (k, c) in s.coeffs.iter().enumerate() {
        if !c.is_zero(f) {
            m.insert(format!("t^{k}"), matrix(f, c));
        }
    }
    json!({ "order": s.order(), "coefficients": Value::Object(m) })
}

pub fn nilpotency(v: &NilpotencyVerdict) -> Value {
    json!({ "nilpotent": v.nilpotent, "index": v.index, "rank": v.rank, "order": v.order })
}

/// Pretty JSON with a trailing newline.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}
