//! Standard-library companion to `epsreach-core`: text syntax for formulas
//! and automaton models, an external SMT solver client, a combined backend,
//! and reporting helpers for the railroad crossing case study.

pub mod auto;
pub mod model;
pub mod smt;
pub mod syntax;
