//! Monomial L^p geometry on Reinhardt monomial polyhedra: p-allowable
//! index sets, threshold exponents, closed-form monomial norms with a
//! quadrature oracle, and truncated p-monomial basis kernels.

pub mod exact;
pub mod geometry;
pub mod indexsets;
pub mod kernel;
pub mod norms;
pub mod quadrature;
pub mod region;
pub mod verify;

pub use exact::{ExactError, Exponent, PositiveReal, Rationality};
pub use geometry::{
    CompactSet, DomainKind, DomainSpec, GeometryError, LogShadowPolytope, Membership,
};
pub use indexsets::{
    AffineCondition, AllowabilityConditions, IndexBox, IndexError, MultiIndex, ThresholdSet,
};
pub use kernel::{KernelError, KernelQuery, KernelValue};
pub use norms::{NormError, NormValue, QuadratureReport};
