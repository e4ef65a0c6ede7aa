//! Built-in decision engine: an exact, deterministic procedure for linear
//! real arithmetic whose atoms may also be "single-square" quadratics
//! (polynomials equal to `λ·(linear)² + linear`), which are linearized
//! without loss before elimination.
//!
//! The pipeline for every query is
//! `simplify → eliminate_implies → nnf → linearize → quantifier elimination
//! (Fourier–Motzkin over disjunctive normal form)`, followed by
//! witness reconstruction or interval extraction as the operation demands.
//! Anything outside the supported fragment or the effort budget yields an
//! honest `Unknown`/error, never a guess.

pub mod atoms;
pub mod elim;

use alloc::format;

use num_traits::Zero;

use crate::backend::{Backend, BackendError, DecisionOutcome, UnknownReason};
use crate::formula::Formula;
use crate::interval::IntervalUnion;
use crate::ops;
use crate::term::{Rational, Var};

use self::atoms::linearize_formula;
use self::elim::{
    dnf_to_interval_union, qe_formula, sat_with_witness, to_dnf, Budget, EngineError,
};

/// Default effort budget per query (abstract operation units).
pub const DEFAULT_BUDGET_OPS: u64 = 2_000_000;

/// The built-in decision procedure. Construct one per thread of work;
/// queries are independent and each gets a fresh budget.
pub struct BuiltinBackend {
    budget_ops: u64,
}

impl BuiltinBackend {
    pub fn new() -> BuiltinBackend {
        BuiltinBackend {
            budget_ops: DEFAULT_BUDGET_OPS,
        }
    }

    /// Same engine with a custom effort budget (mainly for tests and for
    /// callers that want to bound worst-case latency).
    pub fn with_budget(budget_ops: u64) -> BuiltinBackend {
        BuiltinBackend { budget_ops }
    }
}

impl Default for BuiltinBackend {
    fn default() -> BuiltinBackend {
        BuiltinBackend::new()
    }
}

/// Normalization shared by all operations: simplification, implication
/// removal, negation normal form, exact linearization of square atoms.
fn prepare(f: &Formula) -> Result<Formula, EngineError> {
    let simplified = ops::simplify(f);
    let no_implies = ops::eliminate_implies(&simplified);
    let normal = ops::nnf(&no_implies);
    linearize_formula(&normal).map_err(EngineError::Unsupported)
}

fn unknown_from(e: EngineError) -> DecisionOutcome {
    match e {
        EngineError::Unsupported(m) => {
            DecisionOutcome::Unknown(UnknownReason::UnsupportedFragment(m))
        }
        EngineError::Budget(m) => DecisionOutcome::Unknown(UnknownReason::BudgetExceeded(m)),
    }
}

fn backend_error_from(e: EngineError) -> BackendError {
    match e {
        EngineError::Unsupported(m) => BackendError::UnsupportedFragment(m),
        EngineError::Budget(m) => {
            BackendError::UnsupportedFragment(format!("effort budget exceeded: {m}"))
        }
    }
}

impl Backend for BuiltinBackend {
    fn name(&self) -> &str {
        "builtin"
    }

    fn check_sat(&mut self, f: &Formula) -> Result<DecisionOutcome, BackendError> {
        let prepared = match prepare(f) {
            Ok(p) => p,
            Err(e) => return Ok(unknown_from(e)),
        };
        let mut budget = Budget::new(self.budget_ops);
        let qf = match qe_formula(&prepared, &mut budget) {
            Ok(qf) => qf,
            Err(e) => return Ok(unknown_from(e)),
        };
        match sat_with_witness(&qf, &mut budget) {
            Ok(Some(mut witness)) => {
                // Variables dropped by simplification or untouched by the
                // satisfied cube are unconstrained; fix them at zero so the
                // witness is total on the query's free variables.
                let mut free = ops::free_vars(f);
                free.extend(ops::free_vars(&qf));
                for v in free {
                    witness.entry(v).or_insert_with(Rational::zero);
                }
                Ok(DecisionOutcome::Sat(Some(witness)))
            }
            Ok(None) => Ok(DecisionOutcome::Unsat),
            Err(e) => Ok(unknown_from(e)),
        }
    }

    fn qe(&mut self, f: &Formula) -> Result<Formula, BackendError> {
        let prepared = prepare(f).map_err(backend_error_from)?;
        let mut budget = Budget::new(self.budget_ops);
        let eliminated = qe_formula(&prepared, &mut budget).map_err(backend_error_from)?;
        Ok(ops::simplify(&eliminated))
    }

    fn describe_1d(&mut self, f: &Formula, var: &Var) -> Result<IntervalUnion, BackendError> {
        let free = ops::free_vars(f);
        if let Some(extra) = free.iter().find(|v| *v != var) {
            return Err(BackendError::InvalidQuery(format!(
                "one-dimensional description over `{var}` given a formula with free variable `{extra}`",
            )));
        }
        let prepared = prepare(f).map_err(backend_error_from)?;
        let mut budget = Budget::new(self.budget_ops);
        let qf = qe_formula(&prepared, &mut budget).map_err(backend_error_from)?;
        let cubes = to_dnf(&qf, &mut budget).map_err(backend_error_from)?;
        dnf_to_interval_union(&cubes, var).map_err(backend_error_from)
    }
}
