//! The decision-procedure interface.
//!
//! Every analysis in this crate is generic over [`Backend`]: satisfiability,
//! validity, quantifier elimination, one-dimensional set description, and
//! witness extraction for first-order formulas over the reals. The crate
//! ships a built-in engine ([`crate::engine::BuiltinBackend`]) for linear
//! arithmetic (plus exactly linearizable squares); heavier fragments can be
//! served by an external process implementing the same trait.

use alloc::collections::BTreeMap;
use alloc::string::String;

use crate::formula::Formula;
use crate::interval::IntervalUnion;
use crate::term::{Rational, Var};

/// A rational assignment to (free) variables.
pub type Witness = BTreeMap<Var, Rational>;

/// Why a query could not be decided.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum UnknownReason {
    /// The formula lies outside the fragment this backend can decide.
    UnsupportedFragment(String),
    /// The deterministic effort budget of the built-in engine ran out.
    BudgetExceeded(String),
    /// An external solver hit its wall-clock timeout.
    Timeout(String),
    /// An external solver answered `unknown`.
    SolverGaveUp(String),
}

impl core::fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            UnknownReason::UnsupportedFragment(m) => write!(f, "unsupported fragment: {m}"),
            UnknownReason::BudgetExceeded(m) => write!(f, "effort budget exceeded: {m}"),
            UnknownReason::Timeout(m) => write!(f, "timeout: {m}"),
            UnknownReason::SolverGaveUp(m) => write!(f, "solver gave up: {m}"),
        }
    }
}

/// Result of a satisfiability check.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DecisionOutcome {
    /// Satisfiable; the witness (an assignment to the free variables), when
    /// present, satisfies the quantifier-eliminated form of the query.
    Sat(Option<Witness>),
    Unsat,
    Unknown(UnknownReason),
}

impl DecisionOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, DecisionOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, DecisionOutcome::Unsat)
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, DecisionOutcome::Unknown(_))
    }
}

/// Result of a validity check (satisfiability of the negation, inverted).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Validity {
    Valid,
    /// Not valid; the witness, when present, falsifies the formula.
    Invalid(Option<Witness>),
    Unknown(UnknownReason),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Failures of the backend itself (as opposed to honest `Unknown` answers).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BackendError {
    /// The operation cannot be performed on this fragment at all (e.g.
    /// quantifier elimination on nonlinear atoms in the built-in engine).
    UnsupportedFragment(String),
    /// No usable solver process/installation.
    BackendUnavailable(String),
    /// The query violates an operation precondition (e.g. `describe_1d` on a
    /// formula with more than one free variable).
    InvalidQuery(String),
    /// Transport failure when talking to an external process.
    Io(String),
}

impl core::fmt::Display for BackendError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BackendError::UnsupportedFragment(m) => write!(f, "unsupported fragment: {m}"),
            BackendError::BackendUnavailable(m) => write!(f, "backend unavailable: {m}"),
            BackendError::InvalidQuery(m) => write!(f, "invalid query: {m}"),
            BackendError::Io(m) => write!(f, "backend i/o error: {m}"),
        }
    }
}

/// A decision procedure for first-order formulas over the reals.
///
/// Soundness contract: `Sat`/`Unsat`/`Valid`/`Invalid` answers are always
/// correct for the standard semantics; uncertainty must surface as
/// `Unknown(reason)`, never as a guess. Callers that receive `Unknown` are
/// expected to stop with an explicit inconclusive result.
pub trait Backend {
    /// A short human-readable identifier (used in logs and metadata).
    fn name(&self) -> &str;

    fn check_sat(&mut self, f: &Formula) -> Result<DecisionOutcome, BackendError>;

    /// Validity via satisfiability of the negation.
    fn check_valid(&mut self, f: &Formula) -> Result<Validity, BackendError> {
        match self.check_sat(&Formula::not(f.clone()))? {
            DecisionOutcome::Unsat => Ok(Validity::Valid),
            DecisionOutcome::Sat(w) => Ok(Validity::Invalid(w)),
            DecisionOutcome::Unknown(r) => Ok(Validity::Unknown(r)),
        }
    }

    /// Quantifier elimination: returns a quantifier-free formula equivalent
    /// to `f`, or `UnsupportedFragment` when the backend cannot eliminate
    /// quantifiers for this formula class.
    fn qe(&mut self, f: &Formula) -> Result<Formula, BackendError>;

    /// Exact description of `{ x ∈ ℝ : f[x/var] }` for a formula whose free
    /// variables are contained in `{var}`.
    fn describe_1d(&mut self, f: &Formula, var: &Var) -> Result<IntervalUnion, BackendError>;

    /// A rational point satisfying `f`, if one can be produced. Absence is a
    /// valid result (it does not prove unsatisfiability).
    fn find_witness(&mut self, f: &Formula) -> Result<Option<Witness>, BackendError> {
        match self.check_sat(f)? {
            DecisionOutcome::Sat(w) => Ok(w),
            _ => Ok(None),
        }
    }

    /// Cumulative wall-clock milliseconds spent inside this backend's calls,
    /// when the implementation measures it. Callers sample it before and
    /// after a group of queries to attribute time per phase.
    fn elapsed_millis(&self) -> Option<u64> {
        None
    }
}
