//! Exact-arithmetic scalar rings, labeled sparse tensors, and the recursion engine that
//! assembles correlation coefficients F_{g,n} from a curve family's operator tensors.
//!
//! The crate is organized in three layers:
//!
//! * [`scalar`] — the coefficient field: exact rationals, polynomials in pi^2,
//!   cyclotomic field elements, and arbitrary-precision dyadic complex numbers, all
//!   behind one [`scalar::Scalar`] enum with a canonical JSON form.
//! * [`tensor`] — sparse tensors keyed by index tuples with named column labels, plus
//!   the operator type (a candidates enumerator and a value function) and label-based
//!   contraction.
//! * [`engine`] — the recursion proper: base cases, the simple-ramification recursion,
//!   the generalized higher-ramification recursion, free energies, evaluation of the
//!   assembled differentials at points, and a file cache.

pub mod engine;
pub mod scalar;
pub mod series;
pub mod tensor;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("scalar variant mismatch: {0} vs {1}")]
    VariantMismatch(&'static str, &'static str),
    #[error("division by zero")]
    DivisionByZero,
    #[error("cyclotomic order mismatch: {0} vs {1}")]
    CyclotomicOrderMismatch(u32, u32),
    #[error("division of a pi^2-polynomial by a non-constant divisor")]
    Pi2Division,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("label error: {0}")]
    Label(String),
    #[error("unstable pair (g={0}, n={1})")]
    Unstable(u32, u32),
    #[error("missing operator (n={0}, m={1}, h={2})")]
    MissingOperator(usize, usize, usize),
    #[error("enumeration cap exceeded at (g={0}, n={1}): {2} tuples")]
    CapExceeded(u32, u32, u64),
    #[error("evaluation point at a pole of the basis")]
    PointAtPole,
    #[error("missing pairing data for free energies")]
    MissingPairing,
    #[error("free energies are only defined for g >= 2 here (got g={0})")]
    FreeEnergyRange(u32),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("cache: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
