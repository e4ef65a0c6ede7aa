//! Exact symbolic reachability for hybrid systems under epsilon-robust
//! semantics.
//!
//! This crate is `no_std` (with `alloc`) and contains the full analysis
//! stack:
//!
//! * [`term`], [`formula`], [`printer`], [`ops`] — first-order formulas over
//!   the reals with exact rational constants, plus the structural operations
//!   (substitution, normal forms, evaluation) everything else builds on.
//! * [`poly`] — multivariate polynomial normal form used by the decision
//!   engine.
//! * [`interval`] — exact unions of rational intervals with open/closed
//!   endpoints, the output language of one-dimensional set descriptions.
//! * [`backend`] — the decision-procedure interface (`check_sat`,
//!   `check_valid`, `qe`, `describe_1d`, `find_witness`) every analysis is
//!   generic over.
//! * [`engine`] — the built-in decision procedure: normalization to
//!   polynomial atoms, exact linearization of single-square quadratic atoms,
//!   and Fourier–Motzkin quantifier elimination over disjunctive normal form.
//! * [`automaton`] — hybrid automata given by per-location invariant/dynamics
//!   formulas and per-edge activation/reset formulas, with well-formedness
//!   and time-zero diagnostics.
//! * [`samples`] — small, fully worked automata used across tests and docs.
//! * [`reach`] — constructors for the bounded reachability predicates (time
//!   progression, flow-step relation, jump-bounded reach relations).
//! * [`transform`] — the epsilon-semantics region transforms (outward
//!   expansion, ball-interior opening, and the two robust interpretations).
//! * [`fraenzle`] — translation into guarded transition systems whose
//!   activation regions absorb bounded disturbances, with comparison
//!   predicates between variants.
//! * [`algorithms`] — the reachability procedures: exact bounded search,
//!   robust fixpoint iteration, and the expansion-based over-approximation.
//! * [`prep`] — exact formula preprocessing (equality substitution,
//!   constant-coefficient variable elimination under polynomial bounds) used
//!   to shrink queries before they reach a backend.
//! * [`railroad`] — the train/gate crossing case study: parametric automaton
//!   and the derived safe/unsafe entry conditions.
//! * [`oracle`] — an independent grid-sampling oracle for the region
//!   transforms, used by tests to cross-check the symbolic implementations.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algorithms;
pub mod automaton;
pub mod backend;
pub mod engine;
pub mod formula;
pub mod fraenzle;
pub mod interval;
pub mod ops;
pub mod oracle;
pub mod poly;
pub mod prep;
pub mod printer;
pub mod railroad;
pub mod reach;
pub mod samples;
pub mod term;
pub mod transform;

pub use formula::{Cmp, Formula};
pub use term::{Rational, Term, Var, VarVector};
