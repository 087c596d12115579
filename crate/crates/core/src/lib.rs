//! Mixed tensor algebra `T(V) ⊗ T(V*)` over `V = C^n`.
//!
//! The crate provides sparse mixed tensors with their operator calculus (tensor
//! product, star, contraction, mutation, flip, group action), constructors for the
//! classical invariant tensors, exact and floating-point subspace arithmetic,
//! invariant-space oracles for the classical groups, a graded contraction-closure
//! engine, and a verification campaign tying these together.

pub mod closure;
pub mod error;
pub mod generators;
pub mod matrix;
mod modp;
pub mod oracle;
pub mod scalar;
pub mod subspace;
pub mod tensor;
pub mod verify;

pub use closure::{closure, ClosureConfig, GradedBasisTable};
pub use error::{Error, Result};
pub use matrix::Matrix;
pub use oracle::{GroupKind, GroupSpec};
pub use scalar::{Field, GaussianRational, Mode, Rational, Scalar};
pub use subspace::{span_basis, SubspaceBasis, DEFAULT_TOL};
pub use tensor::{AnyTensor, Grade, GroupElement, MixedTensor, MultiIndex, Permutation};
pub use verify::{run_campaign, CampaignConfig, ModeChoice, Report, VerificationRecord};
