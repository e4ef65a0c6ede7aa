//! A combined backend: the built-in engine first, an external solver for
//! whatever falls outside its fragment.
//!
//! The built-in engine is exact, deterministic, and fast on the linear
//! fragment, and it is the only backend that implements quantifier
//! elimination and interval descriptions. The external solver covers the
//! nonlinear and mixed-quantifier queries the built-in engine rejects.
//! Escalation happens when the built-in engine reports an unsupported
//! fragment or runs out of budget — honest `Unknown`s from the external
//! solver itself are passed through untouched.

use crate::smt::ExternalBackend;
use epsreach_core::backend::{Backend, BackendError, DecisionOutcome, UnknownReason};
use epsreach_core::engine::BuiltinBackend;
use epsreach_core::formula::Formula;
use epsreach_core::interval::IntervalUnion;
use epsreach_core::term::Var;

pub struct AutoBackend {
    builtin: BuiltinBackend,
    external: Option<ExternalBackend>,
}

impl AutoBackend {
    /// Builds with the given engines. Pass `None` to run builtin-only (the
    /// escalation path then propagates the builtin's refusals).
    pub fn new(builtin: BuiltinBackend, external: Option<ExternalBackend>) -> AutoBackend {
        AutoBackend { builtin, external }
    }

    /// Builtin plus a discovered external solver when one is available.
    pub fn discover(builtin: BuiltinBackend) -> AutoBackend {
        AutoBackend {
            builtin,
            external: ExternalBackend::discover().ok(),
        }
    }

    pub fn has_external(&self) -> bool {
        self.external.is_some()
    }

    pub fn external_mut(&mut self) -> Option<&mut ExternalBackend> {
        self.external.as_mut()
    }

    fn escalate(
        &mut self,
        f: &Formula,
        reason: UnknownReason,
    ) -> Result<DecisionOutcome, BackendError> {
        match &mut self.external {
            Some(ext) => ext.check_sat(f),
            None => Ok(DecisionOutcome::Unknown(reason)),
        }
    }
}

impl Backend for AutoBackend {
    fn name(&self) -> &str {
        "auto"
    }

    fn check_sat(&mut self, f: &Formula) -> Result<DecisionOutcome, BackendError> {
        match self.builtin.check_sat(f) {
            Ok(DecisionOutcome::Unknown(
                reason @ (UnknownReason::UnsupportedFragment(_) | UnknownReason::BudgetExceeded(_)),
            )) => self.escalate(f, reason),
            Err(BackendError::UnsupportedFragment(msg)) => match &mut self.external {
                Some(ext) => ext.check_sat(f),
                None => Err(BackendError::UnsupportedFragment(msg)),
            },
            other => other,
        }
    }

    /// Quantifier elimination stays with the built-in engine: the external
    /// solver decides but does not produce formulas.
    fn qe(&mut self, f: &Formula) -> Result<Formula, BackendError> {
        self.builtin.qe(f)
    }

    fn describe_1d(&mut self, f: &Formula, var: &Var) -> Result<IntervalUnion, BackendError> {
        self.builtin.describe_1d(f, var)
    }

    fn elapsed_millis(&self) -> Option<u64> {
        let ext = self
            .external
            .as_ref()
            .and_then(|e| e.elapsed_millis())
            .unwrap_or(0);
        Some(self.builtin.elapsed_millis().unwrap_or(0) + ext)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use epsreach_core::term::Term;

    #[test]
    fn linear_queries_never_leave_the_builtin_engine() {
        let mut auto = AutoBackend::new(BuiltinBackend::with_budget(1_000_000), None);
        let f = Formula::lt(Term::var("X"), Term::int(1));
        assert!(auto.check_sat(&f).unwrap().is_sat());
    }

    #[test]
    fn without_an_external_solver_refusals_propagate() {
        let mut auto = AutoBackend::new(BuiltinBackend::with_budget(1_000_000), None);
        // A cross-variable polynomial atom: outside the builtin fragment.
        let f = Formula::lt(Term::var("X").mul(Term::var("Y")), Term::var("Z"));
        match auto.check_sat(&f) {
            Ok(DecisionOutcome::Unknown(UnknownReason::UnsupportedFragment(_)))
            | Err(BackendError::UnsupportedFragment(_)) => {}
            other => panic!("expected an unsupported-fragment refusal, got {other:?}"),
        }
    }
}
