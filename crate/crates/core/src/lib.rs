//! Translating finite-domain constraint satisfaction problems into answer set
//! programs, with a propagation engine and a conflict-driven solver for the
//! resulting programs.

pub mod asp;
pub mod bench;
pub mod csp;
pub mod domain;
pub mod encode;
pub mod error;
pub mod format;
pub mod generate;
pub mod oracle;
pub mod propagate;
pub mod solver;
pub mod verify;

pub use asp::{AtomId, GroundProgram, Rule, RuleKind, Symbol};
pub use csp::{
    normalize, Assignment, Constraint, ConstraintKind, CspInstance, Lowering, Normalized, VarId,
};
pub use domain::DomainState;
pub use encode::{encode, EncodeOptions, Encoding, EncodingKind, RegionMode, Vocabulary};
pub use error::{Error, Result};
