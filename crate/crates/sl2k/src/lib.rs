//! Exact computations with representations of the Lie ring sl2(K).
//!
//! The crate constructs modules over sl2 of a prime field, a small extension
//! field or Q, validates the defining bracket relations, verifies the
//! enveloping-ring identities, classifies modules of finite nilpotency length
//! into symmetric-power isotypes, reconstructs scalar structures, and measures
//! coherence degrees of the action. All arithmetic is exact.

pub mod coherence;
pub mod decomposition;
pub mod error;
pub mod field;
pub mod identities;
pub mod io;
pub mod linearization;
pub mod matrix;
pub mod module;
pub mod poly;

pub use error::{Error, Result};
pub use field::{FieldSpec, Scalar};
pub use matrix::{Matrix, Subspace};
pub use module::{GeneratorTriple, ModuleMap, SL2Module};
