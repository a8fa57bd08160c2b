//! Modelling, validation and simulation of administrative workflow
//! processes specified in LSAWfP.
//!
//! An administrative process is described by a [`model::GMAWfP`]: a
//! grammatical workflow model (sorts, two-form precedence productions and
//! axioms) together with the actors involved and their read/write/execute
//! accreditations. Execution scenarios are annotated trees
//! ([`artifact::Artifact`]) whose hierarchical decompositions carry a
//! sequential or parallel scheduling mode.
//!
//! The crate covers the full tool chain:
//!
//! - [`builder`] grows scenario trees step by step, prunes branches at the
//!   second occurrence of a label and enumerates the representative
//!   artifacts of a grammar;
//! - [`derivation`] extracts a grammar back from representative artifacts
//!   and checks tree membership;
//! - [`validation`] reports structural and accreditation problems;
//! - [`views`] projects artifacts and grammars onto the set of sorts an
//!   actor is allowed to see;
//! - [`scenario`] unfolds a grammar into complete execution scenarios under
//!   an iteration bound and enumerates legal task linearizations;
//! - [`sim`] runs a deterministic multi-site execution in which a mobile
//!   artifact travels between actors, growing as tasks execute;
//! - [`format`] parses and prints the textual specification format;
//! - [`dot`] renders artifacts as directed graphs.

pub mod artifact;
pub mod builder;
pub mod derivation;
pub mod model;
pub mod scenario;
pub mod validation;


pub use artifact::{Artifact, ArtifactNode, ExecState, NodePath};
pub use model::{Accreditation, GMAWfP, GMWf, Mode, ModelError, Production, Sort, SortKind};
