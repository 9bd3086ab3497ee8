//! Error types shared across the crate.

use thiserror::Error;

/// Why a pair (alpha, beta) fails the Buekenhout-Metz validity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamViolation {
    /// q odd: the discriminant (beta - beta^q)^2 + 4 alpha^(q+1) is a square in F_q.
    DiscriminantIsSquare { d: u32 },
    /// q even: beta lies in F_q, so beta + beta^q = 0 and the discriminant is undefined.
    BetaInBaseField,
    /// q even: the discriminant alpha^(q+1) / (beta + beta^q)^2 has absolute trace 1.
    DiscriminantTraceNonzero { d: u32 },
}

impl std::fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamViolation::DiscriminantIsSquare { d } => {
                write!(f, "discriminant (index {d}) is a square in F_q")
            }
            ParamViolation::BetaInBaseField => {
                write!(f, "beta lies in the base field F_q")
            }
            ParamViolation::DiscriminantTraceNonzero { d } => {
                write!(f, "discriminant (index {d}) has absolute trace 1")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("field order {0} unsupported: require 2 < p^m <= {max}", max = crate::gf::MAX_Q)]
    UnsupportedOrder(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("d = {d} does not divide m = {m}")]
    BadTraceDegree { d: u32, m: u32 },
    #[error("operation requires odd characteristic")]
    RequiresOddChar,
    #[error("operation requires characteristic 2")]
    RequiresCharTwo,
    #[error("operation requires odd extension degree m > 1")]
    RequiresOddDegree,
    #[error("element index {index} out of range for field of order {order}")]
    IndexOutOfRange { index: u64, order: u64 },
    #[error("field spec mismatch: {0}")]
    SpecMismatch(String),
    #[error("invalid projective triple: all coordinates zero")]
    ZeroTriple,
    #[error("join/meet requires two distinct arguments")]
    EqualArguments,
    #[error("cross-ratio undefined: {0}")]
    CrossRatioDegenerate(&'static str),
    #[error("baer subline test rejected input: {0}")]
    BaerPrecondition(String),
    #[error("invalid unital parameters: {0}")]
    InvalidParams(ParamViolation),
    #[error("transform scales f and s must be nonzero")]
    ZeroScale,
    #[error("classical unital (alpha = 0): contains no O'Nan configuration")]
    Classical,
    #[error("operation not defined for this unital kind: {0}")]
    WrongKind(&'static str),
    #[error("line is tangent to the unital; blocks live on secant lines")]
    TangentLine,
    #[error("parameters are not in normalized even form (alpha in F_q*, beta of relative trace 1)")]
    NotNormalized,
    #[error("unital axiom violated: {0}")]
    AxiomViolation(String),
    #[error("configuration rejected: {0}")]
    ConfigRejected(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("theorem violation in {context}\nstate dump:\n{dump}")]
    TheoremViolation { context: String, dump: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
