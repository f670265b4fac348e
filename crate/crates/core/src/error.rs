use alloc::string::String;

/// Errors raised when a precondition of an operation does not hold.
///
/// Verification outcomes (a failed axiom, a non-nilpotent block) are not
/// errors; they are reported as values with witnesses.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("matrix or series is not invertible")]
    NotInvertible,
    #[error("linear system has no solution")]
    NoSolution,
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("field is too large for the packed representation: {0}")]
    FieldTooLarge(String),
    #[error("minimal polynomial is not monic and irreducible: {0}")]
    NotIrreducible(String),
    #[error("irreducibility of {0} could not be certified")]
    IrreducibilityUnproven(String),
    #[error("characteristic polynomial does not split; irreducible factor {factor}")]
    CharPolyDoesNotSplit { factor: String, suggestion: Option<String> },
    #[error("operation needs a field of positive characteristic")]
    CharacteristicZero,
    #[error("characteristic mismatch: field has {field}, requested {requested}")]
    CharacteristicMismatch { field: u64, requested: u64 },
    #[error("denominator {denominator} is divisible by {p}")]
    DenominatorDivisibleByP { denominator: String, p: u64 },
    #[error("eigenvalue difference {0} is not invertible")]
    EigenvalueDifferenceNotInvertible(String),
    #[error("truncation order too small: need {needed}, have {have}")]
    TruncationTooSmall { needed: i64, have: i64 },
    #[error("rigidity needs distinct eigenvalues, both are {0}")]
    SameEigenvalue(String),
    #[error("leading matrix does not have the single eigenvalue {0}")]
    LeadingNotSingleEigenvalue(String),
    #[error("family labels do not match the spectrum: {0}")]
    LabelMismatch(String),
    #[error("no cyclic vector after {tries} tries (smallest determinant valuation seen: {obstruction})")]
    CyclicSearchFailed { tries: usize, obstruction: String },
    #[error("associativity fails at ({0}, {1}, {2})")]
    AssociativityFailure(String, String, String),
    #[error("grading rule fails for {left} * {right}: {detail}")]
    GradingFailure { left: String, right: String, detail: String },
    #[error("unit law fails on {0}")]
    UnitFailure(String),
    #[error("graded commutativity fails for ({0}, {1})")]
    CommutativityFailure(String, String),
    #[error("cannot collapse q = 1: {0}")]
    CollapseNotFinite(String),
    #[error("basis degrees are only known mod 2")]
    MissingDegree,
    #[error("classical ring is not generated by degree-2 classes: {0}")]
    NotDegreeTwoGenerated(String),
    #[error("ring is not generated by c1 with q-free powers: {0}")]
    NotC1Generated(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("computation exceeded a cap: {0}")]
    ScaleExceeded(String),
    #[error("no Nullstellensatz certificate with N <= {0}")]
    NoCertificateWithinCap(usize),
    #[error("singularity is not isolated: {0}")]
    NotIsolated(String),
    #[error("cohomology rank unstable: {0}")]
    RankUnstable(String),
    #[error("not a coboundary: {0}")]
    NotACoboundary(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = core::result::Result<T, Error>;
