use thiserror::Error;

/// Failure modes shared by every module of the crate.
///
/// Each variant names the precondition that was violated so that callers
/// (and the CLI) can report it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fraction {p}/{q} is not in lowest terms")]
    NotReduced { p: String, q: String },

    #[error("expected 0 <= p < q, got {p}/{q}")]
    OutsideUnitInterval { p: String, q: String },

    #[error("partial quotient at position {index} must be >= 1")]
    ZeroQuotient { index: usize },

    #[error("tail ends in a partial quotient 1 and would merge into its predecessor; pass the canonical tail")]
    NonCanonicalTail,

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("gcd(a, q) = {gcd} for a = {a}, q = {q}; a must be coprime to q")]
    NotCoprime { a: u64, q: u64, gcd: u64 },

    #[error("modulus q = {q} must be at least {min}")]
    ModulusTooSmall { q: u64, min: u64 },

    #[error("modulus {q} exceeds the direct evaluation limit {limit}")]
    ModulusTooLarge { q: String, limit: u64 },

    #[error("m = {m} lies outside the window q_i^τ ≤ m < q_{{i+1}}^τ = [{lo}, {hi}) (τ = {tau})")]
    OutsideWindow { m: u64, lo: String, hi: String, tau: f64 },

    #[error("convergent index {index} unavailable: expansion has {available} convergents")]
    MissingConvergent { index: usize, available: usize },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("j + 1 = {j_next} exceeds J(k,m,N) = {bound}")]
    BeyondBlockRange { j_next: u64, bound: f64 },

    #[error("truncation N = {n} is below q² = {q_squared}")]
    TruncationTooShort { n: u64, q_squared: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
