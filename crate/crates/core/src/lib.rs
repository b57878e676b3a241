//! Anisotropic quasi-metric geometry, rough kernels on the sphere, the
//! associated maximal / singular / Marcinkiewicz operators, generalized
//! local Morrey and Campanato norms, weighted Hardy machinery, and a
//! verification harness that turns the boundedness statements into
//! quantitative desk-scale checks.

pub mod conditions;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod operators;
pub mod polar;
pub mod quad;
pub mod spaces;

pub use conditions::{ConditionKind, ConditionReport, ConditionScheme, ConditionTag, Verdict};
pub use error::{Error, Result};
pub use functions::{FieldId, ProfileId, RadialProfile, ScalarField, Smoothness};
pub use geometry::{AnisotropySpec, Ellipsoid, SphereGrid};
pub use kernels::{KernelId, RoughKernel};
pub use operators::{OperatorResult, QuadratureScheme};
pub use spaces::{NormReport, NormScheme, Region};
