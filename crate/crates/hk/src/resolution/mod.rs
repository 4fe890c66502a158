//! Resolution of marked ideals by blow-ups of coordinate centers, for ambient
//! dimension at most 3 in characteristic zero.
//!
//! The driver works at chart origins with a stack of nested problems: a marked
//! ideal, its companion of maximal order, and the restriction of that companion
//! to a hypersurface of maximal contact. Frames persist through blow-ups via
//! controlled transforms, so the invariants recorded in the trace can be
//! replayed by [`verify_resolution`].

mod driver;
mod ops;
mod verify;

use thiserror::Error;

pub use driver::{
    resolve_marked, CoordinateChange, Limits, NodeStatus, ResolutionTrace, TraceNode,
};
pub use ops::{
    coefficient_capacitor, companion, companion_ideal, controlled_transform, derivative_ideal, factor_exceptional,
    monomial_center, pullback, strict_transform, tangent_direction, Companion, CompanionTag, Cosupport,
    ExceptionalDivisor, Factorization, MarkedIdeal, TangentDirection,
};
pub use verify::{hs_at, verify_resolution, Check, VerificationReport, VerifyOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolutionError {
    #[error("marked ideal has no nonzero generator")]
    EmptyIdeal,
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("center {center:?} is not admissible: pullback not divisible to order {mu}")]
    InadmissibleCenter { center: Vec<usize>, mu: u32 },
    #[error("capacitor requested for marking {0} > 3")]
    GuardExceeded(u32),
    #[error("no hypersurface of maximal contact found")]
    NoTangentDirection,
    #[error("no subset of divisors reaches the marking")]
    EmptyCosupport,
    #[error("limit exceeded: {limit}")]
    LimitExceeded { limit: String, trace: Box<ResolutionTrace> },
}

impl ResolutionError {
    pub fn code(&self) -> &'static str {
        match self {
            ResolutionError::EmptyIdeal => "resolution.empty_ideal",
            ResolutionError::Unsupported(_) => "resolution.unsupported",
            ResolutionError::InadmissibleCenter { .. } => "resolution.inadmissible_center",
            ResolutionError::GuardExceeded(_) => "resolution.guard_exceeded",
            ResolutionError::NoTangentDirection => "resolution.no_tangent_direction",
            ResolutionError::EmptyCosupport => "resolution.empty_cosupport",
            ResolutionError::LimitExceeded { .. } => "resolution.limit_exceeded",
        }
    }
}
