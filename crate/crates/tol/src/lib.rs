//! Compiler front end, test metamodel, and test runner for TOL, the
//! Testable Object Language: a small object-oriented language in which
//! unit tests are declared inside the packages, classes, and methods
//! they exercise.
//!
//! The pipeline is `frontend` (lex/parse) -> `binder` (name resolution,
//! redefinition inference, variance checks) -> `metamodel` (the sealed
//! entity/relation store) -> `resolver` (inherited test-set algebra and
//! the execution plan) -> `conflicts` (multiple-inheritance clash
//! detection and rename/select/unify resolution) -> `runtime` (the
//! tree-walking interpreter and test executor).

pub mod binder;
pub mod cli;
pub mod conflicts;
pub mod dump;
pub mod frontend;
pub mod metamodel;
pub mod report;
pub mod resolver;
pub mod runtime;
pub mod span;
