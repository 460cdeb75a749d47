use thiserror::Error;

/// Failure of a jet or expression evaluation outside its smooth domain.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("domain error: {reason}")]
pub struct DomainError {
    pub reason: String,
}

impl DomainError {
    pub fn new(reason: impl Into<String>) -> Self {
        DomainError { reason: reason.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected one of {}", expected.join(", "))]
    Syntax { offset: usize, expected: Vec<String> },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("zero vector has no causal character")]
    ZeroVector,
    #[error("curve is not regular near parameter {at}")]
    IrregularCurve { at: f64 },
    #[error("embedding is not spacelike near parameter {at}")]
    NotSpacelikeHypersurface { at: f64 },
    #[error("direct-mode normal violates <n,n> = -1 or <n,t> = 0 near parameter {at} (residual {residual:e})")]
    BadDirectNormal { at: f64, residual: f64 },
    #[error("Darboux frame degenerates at s = {s}: {reason}")]
    FrameDegenerate { s: f64, reason: String },
    #[error("direction is off the expected pseudo-sphere (residual {residual:e})")]
    BadDirection { residual: f64 },
    #[error("wrong regime at s = {s}: k_g^2 - k_n^2 = {gap:e}")]
    WrongRegime { s: f64, gap: f64 },
    #[error("k_n tau_2 + k_g tau_g vanishes at s = {s} (value {value:e})")]
    DegenerateAssumption { s: f64, value: f64 },
    #[error("no real theta at s = {s}: |tanh theta| would be {ratio}")]
    NoRealTheta { s: f64, ratio: f64 },
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Stable name of the variant, used in reports and per-sample statuses.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse(ParseError::Syntax { .. }) => "SyntaxError",
            Error::Parse(ParseError::UnknownIdentifier { .. }) => "UnknownIdentifier",
            Error::Domain(_) => "DomainError",
            Error::InvalidInput(_) => "InvalidInput",
            Error::ZeroVector => "ZeroVector",
            Error::IrregularCurve { .. } => "IrregularCurve",
            Error::NotSpacelikeHypersurface { .. } => "NotSpacelikeHypersurface",
            Error::BadDirectNormal { .. } => "BadDirectNormal",
            Error::FrameDegenerate { .. } => "FrameDegenerate",
            Error::BadDirection { .. } => "BadDirection",
            Error::WrongRegime { .. } => "WrongRegime",
            Error::DegenerateAssumption { .. } => "DegenerateAssumption",
            Error::NoRealTheta { .. } => "NoRealTheta",
            Error::Internal(_) => "Internal",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
