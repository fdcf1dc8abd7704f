use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("{value} is not invertible modulo {modulus}")]
    NotCoprime { value: u64, modulus: u64 },
    #[error("extension degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("field of size {p}^{degree} exceeds the enumeration bound {bound}")]
    EnumerationBound { p: u64, degree: usize, bound: u64 },
    #[error("element is not a square")]
    NonResidue,
    #[error("curve is singular (discriminant 0)")]
    Singular,
    #[error("points live in different fields")]
    FieldMismatch,
    #[error("{0} is a square; a twist needs a non-residue")]
    TwistBySquare(u64),
    #[error("sampling budget of {budget} points exhausted; increase the budget")]
    SamplingBudget { budget: u64 },
    #[error("point counts violate the Weil bound")]
    WeilBound,
    #[error("l = {l} does not divide the K_2 order {order}")]
    NonDividingPrime { l: u64, order: String },
    #[error("l must differ from the characteristic {0}")]
    CharacteristicPrime(u64),
    #[error("valuation sequence did not stabilize within {window} levels")]
    NoStabilization { window: u32 },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
