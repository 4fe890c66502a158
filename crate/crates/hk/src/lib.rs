//! Exact local commutative algebra: staircases of
//! initial exponents, formal and parametric division, standard bases,
//! Stanley decompositions of graded modules, generalized Jacobians and
//! resultants, and a small resolution driver for marked ideals.
//!
//! Everything runs over ℚ or a prime field with exact arithmetic. Power
//! series are represented by polynomials truncated at a total degree `D`.

pub mod diagrams;
pub mod division;
pub mod exponents;
pub mod field;
pub mod jacobians;
pub mod linalg;
pub mod resolution;
pub mod series;
pub mod stanley;
pub mod stdbasis;

pub use diagrams::{Diagram, Location};
pub use exponents::{Exponent, MonomialOrder};
pub use field::{Coeff, FieldSpec};
pub use series::Series;

use thiserror::Error;

/// Umbrella error carrying a stable machine-readable code per variant family.
#[derive(Debug, Error)]
pub enum HkError {
    #[error(transparent)]
    Field(#[from] field::FieldError),
    #[error(transparent)]
    Exponent(#[from] exponents::ExponentError),
    #[error(transparent)]
    Diagram(#[from] diagrams::DiagramError),
    #[error(transparent)]
    Series(#[from] series::SeriesError),
    #[error(transparent)]
    Division(#[from] division::DivisionError),
    #[error(transparent)]
    StdBasis(#[from] stdbasis::StdBasisError),
    #[error(transparent)]
    Stanley(#[from] stanley::StanleyError),
    #[error(transparent)]
    Jacobian(#[from] jacobians::JacobianError),
    #[error(transparent)]
    Resolution(#[from] resolution::ResolutionError),
}

impl HkError {
    pub fn code(&self) -> &'static str {
        match self {
            HkError::Field(e) => match e {
                field::FieldError::NotPrime(_) => "field.not_prime",
                field::FieldError::DenominatorVanishes(..) => "field.denominator_vanishes",
                field::FieldError::UnknownField(_) => "field.unknown",
                field::FieldError::DivisionByZero => "field.division_by_zero",
            },
            HkError::Exponent(e) => match e {
                exponents::ExponentError::DimensionMismatch { .. } => "exponent.dimension_mismatch",
                exponents::ExponentError::EmptyOrder => "exponent.empty_order",
                exponents::ExponentError::NegativeWeight { .. } => "exponent.negative_weight",
                exponents::ExponentError::BadLiteral(_) => "exponent.bad_literal",
            },
            HkError::Diagram(e) => e.code(),
            HkError::Series(e) => e.code(),
            HkError::Division(e) => e.code(),
            HkError::StdBasis(e) => e.code(),
            HkError::Stanley(e) => e.code(),
            HkError::Jacobian(e) => e.code(),
            HkError::Resolution(e) => e.code(),
        }
    }
}
