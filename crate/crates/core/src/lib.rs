//! Certificates of identifiability for tensor rank decompositions over
//! exact fields.
//!
//! [`generic_id::check_generic`] decides whether a generic tensor of a given
//! shape and rank has a unique decomposition. [`specific_id::check_specific`]
//! does the same for one given decomposition.

pub mod contraction;
pub mod field;
pub mod generic_id;
pub mod hessian;
pub mod linalg;
pub mod segre;
pub mod smooth;
pub mod specific_id;
pub mod sweep;
pub mod tangent;
pub mod tensor;

pub use field::{Field, PrimeField, Rational, RationalField, DEFAULT_PRIME, ESCALATION_PRIME};
pub use generic_id::{check_generic, GenericConfig, Verdict, VerdictKind};
pub use linalg::Matrix;
pub use segre::{exception_lookup, kruskal_generic_bound, ExceptionKind, KnownException, Shape};
pub use specific_id::{check_specific, Decomposition, SpecificConfig, SpecificReport, SpecificVerdict};
pub use sweep::{run_sweep, SweepConfig, SweepRecord, SweepSummary};
pub use tensor::Tensor;
