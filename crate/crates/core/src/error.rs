use std::path::PathBuf;

use crate::exact::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: Rational, hi: Rational },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("invalid piecewise polynomial: {0}")]
    InvalidPiecewise(String),
    #[error("basis mismatch: expected [{expected}], found [{found}]")]
    BasisMismatch { expected: String, found: String },
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("not pseudoeffective: {0}")]
    NotPseudoeffective(String),
    #[error("degenerate support: {0}")]
    DegenerateSupport(String),
    #[error("sweep direction {0} never leaves the pseudoeffective cone")]
    UnboundedSweep(String),
    #[error("invalid chamber {name} on [{lo}, {hi}]: {witness}")]
    InvalidChamber {
        name: String,
        lo: Rational,
        hi: Rational,
        witness: String,
    },
    #[error("unverified input: {0}")]
    UnverifiedInput(String),
    #[error("unknown curve: {0}")]
    UnknownCurve(String),
    #[error("degenerate cone: {0}")]
    DegenerateCone(String),
    #[error("chamber refinement exhausted on [{lo}, {hi}]")]
    ChamberRefinementExhausted { lo: Rational, hi: Rational },
    #[error("invalid triple form: {0}")]
    InvalidTripleForm(String),
    #[error("restriction incompatible with the triple form: {0}")]
    RestrictionMismatch(String),
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: schema error: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("unresolved symbol {symbol:?} in {context}")]
    UnresolvedSymbol { symbol: String, context: String },
    #[error("bad expression {expr:?}: {message}")]
    Expression { expr: String, message: String },
    #[error("duplicate case id {0}")]
    DuplicateId(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("case {id}: {source}")]
    Case {
        id: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyInterval { .. } => "empty-interval",
            Error::SingularSystem(_) => "singular-system",
            Error::InvalidPiecewise(_) => "invalid-piecewise",
            Error::BasisMismatch { .. } => "basis-mismatch",
            Error::UnsupportedModel(_) => "unsupported-model",
            Error::NotPseudoeffective(_) => "not-pseudoeffective",
            Error::DegenerateSupport(_) => "degenerate-support",
            Error::UnboundedSweep(_) => "unbounded-sweep",
            Error::InvalidChamber { .. } => "invalid-chamber",
            Error::UnverifiedInput(_) => "unverified-input",
            Error::UnknownCurve(_) => "unknown-curve",
            Error::DegenerateCone(_) => "degenerate-cone",
            Error::ChamberRefinementExhausted { .. } => "chamber-refinement-exhausted",
            Error::InvalidTripleForm(_) => "invalid-triple-form",
            Error::RestrictionMismatch(_) => "restriction-mismatch",
            Error::Parse { .. } => "parse",
            Error::Schema { .. } => "schema",
            Error::UnresolvedSymbol { .. } => "unresolved-symbol",
            Error::Expression { .. } => "expression",
            Error::DuplicateId(_) => "duplicate-id",
            Error::Io { .. } => "io",
            Error::Case { source, .. } => source.code(),
        }
    }

    /// True for failures of the corpus itself (unreadable or malformed case files)
    /// rather than of a computation.
    pub fn is_corpus_error(&self) -> bool {
        match self {
            Error::Case { source, .. } => source.is_corpus_error(),
            Error::Parse { .. }
            | Error::Schema { .. }
            | Error::UnresolvedSymbol { .. }
            | Error::Expression { .. }
            | Error::DuplicateId(_)
            | Error::Io { .. }
            | Error::InvalidTripleForm(_)
            | Error::RestrictionMismatch(_) => true,
            _ => false,
        }
    }

    pub fn in_case(self, id: &str) -> Error {
        match self {
            e @ Error::Case { .. } => e,
            e => Error::Case {
                id: id.to_string(),
                source: Box::new(e),
            },
        }
    }
}
