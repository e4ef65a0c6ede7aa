//! Executable reachability procedures on hybrid automata.
//!
//! * [`bounded_reach`] — exact reachability up to a switch bound: the final
//!   set is reachable from the initial set iff some `reach_le(H, i) ∧ I ∧ F`
//!   is satisfiable.
//! * [`epsilon_reach`] — the approximate fixpoint loop: advance an exact
//!   per-switch frontier, but *observe* it through an `ε`-transform and halt
//!   as soon as the part of the frontier outside the accumulated set has
//!   empty `ε`-approximation. Halting is guaranteed for bounded invariants
//!   because each pass that continues must contain a fresh open `ε`-ball.
//! * [`tilde_reach`] — the dilation-based over-approximation loop: grow the
//!   candidate by expanded flow images after switches and halt when the
//!   exact one-step relation no longer leaves the candidate.
//! * [`safety_check`] — the predicate-automaton safety procedure: unsafe iff
//!   some `initial ∧ Φ^i ∧ ¬safe` instance is satisfiable.
//!
//! All loops pass intermediate formulas through backend quantifier
//! elimination when the fragment allows it (falling back to syntactic
//! simplification), which keeps formula growth linear in practice. Every
//! inconclusive outcome carries the exact query that could not be decided.

use alloc::collections::BTreeMap;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::automaton::HybridAutomaton;
use crate::backend::{Backend, BackendError, DecisionOutcome, UnknownReason, Validity, Witness};
use crate::formula::Formula;
use crate::fraenzle::{self, FraenzleError};
use crate::interval::IntervalUnion;
use crate::ops;
use crate::reach::{self, FreshBlocks};
use crate::term::{Rational, Var};
use crate::transform::{self, TransformConfig, TransformError};

/// Iteration cap applied when the caller does not choose one; converts
/// potential divergence into an inconclusive outcome.
pub const DEFAULT_ITERATION_CAP: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlgorithmError {
    /// `initial`/`final` formulas may only use the state variables.
    ScopeViolation { role: &'static str, var: Var },
    /// The approximation radius must be strictly positive.
    NonPositiveRadius,
    /// The transform configuration must perturb exactly the state variables.
    ApproxVarsMismatch,
    Backend(BackendError),
    Translation(FraenzleError),
}

impl core::fmt::Display for AlgorithmError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AlgorithmError::ScopeViolation { role, var } => {
                write!(f, "{role} formula mentions `{var}`, outside the state variables")
            }
            AlgorithmError::NonPositiveRadius => {
                write!(f, "approximation radius must be strictly positive")
            }
            AlgorithmError::ApproxVarsMismatch => write!(
                f,
                "the transform configuration must perturb exactly the automaton's state variables"
            ),
            AlgorithmError::Backend(e) => write!(f, "backend failure: {e}"),
            AlgorithmError::Translation(e) => write!(f, "{e}"),
        }
    }
}

impl From<BackendError> for AlgorithmError {
    fn from(e: BackendError) -> AlgorithmError {
        AlgorithmError::Backend(e)
    }
}

impl From<FraenzleError> for AlgorithmError {
    fn from(e: FraenzleError) -> AlgorithmError {
        AlgorithmError::Translation(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReachStatus {
    /// A final state was reached within the switch bound.
    Reached,
    /// No final state is reachable within the switch bound.
    NotReachedWithinBound,
    /// The approximation loop observed an empty frontier and halted.
    FixpointEmptyObservation,
    /// A backend query could not be decided, or the iteration cap was hit.
    Inconclusive,
}

/// One loop pass: the size of the working formula after tidying, the time
/// spent in backend calls (when the backend measures it), and a 1-D
/// rendering of the working set when available.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub index: u32,
    pub formula_atoms: usize,
    pub query_millis: Option<u64>,
    pub rendered: Option<IntervalUnion>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachResult {
    pub status: ReachStatus,
    /// Loop passes performed (for [`bounded_reach`]: the deciding bound).
    pub iterations: u32,
    /// Free variables are contained in the automaton's state variables.
    pub result_formula: Formula,
    /// Exact 1-D rendering of `result_formula` for one-variable automata.
    pub rendered: Option<IntervalUnion>,
    pub log: Vec<IterationRecord>,
    /// For [`ReachStatus::Reached`]: a satisfying start/end point pair.
    pub witness: Option<Witness>,
    /// For [`ReachStatus::Inconclusive`]: the query that stopped the run.
    pub inconclusive_query: Option<Formula>,
}

/// Which structural transform observes the frontier in [`epsilon_reach`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsSemantics {
    /// Atoms dilated, conjunctions/negations interiorised ([`transform::sphere`]).
    Sphere,
    /// Everything interiorised ([`transform::contract`]).
    Bottom,
}

fn check_scope(
    f: &Formula,
    h: &HybridAutomaton,
    role: &'static str,
) -> Result<(), AlgorithmError> {
    for v in ops::free_vars(f) {
        if !h.vars().contains(&v) {
            return Err(AlgorithmError::ScopeViolation { role, var: v });
        }
    }
    Ok(())
}

/// Quantifier-eliminate when the backend supports the fragment, otherwise
/// simplify; keeps loop formulas from nesting linearly in the pass count.
fn tidy(f: &Formula, backend: &mut dyn Backend) -> Result<Formula, AlgorithmError> {
    match backend.qe(f) {
        Ok(q) => Ok(q),
        Err(BackendError::UnsupportedFragment(_)) => Ok(ops::simplify(f)),
        Err(e) => Err(AlgorithmError::Backend(e)),
    }
}

fn atom_count(f: &Formula) -> usize {
    match f {
        Formula::True | Formula::False => 1,
        Formula::Atom { .. } => 1,
        Formula::Not(g) => atom_count(g),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().map(atom_count).sum(),
        Formula::Implies(a, b) => atom_count(a) + atom_count(b),
        Formula::Exists(_, g) | Formula::Forall(_, g) => atom_count(g),
    }
}

/// Best-effort 1-D rendering over `var`; `None` when the automaton is not
/// one-dimensional or the backend cannot describe the set exactly.
fn render_1d(
    f: &Formula,
    h: &HybridAutomaton,
    var: &Var,
    backend: &mut dyn Backend,
) -> Option<IntervalUnion> {
    if h.dim() != 1 {
        return None;
    }
    backend.describe_1d(f, var).ok()
}

fn elapsed_since(backend: &dyn Backend, start: Option<u64>) -> Option<u64> {
    match (start, backend.elapsed_millis()) {
        (Some(a), Some(b)) => Some(b.saturating_sub(a)),
        _ => None,
    }
}

/// Exact reachability within `max_i` switches: for each `i ≤ max_i`, decides
/// satisfiability of `reach_le(h, i)[Z,Z′] ∧ initial[Z] ∧ final[Z′]`.
pub fn bounded_reach(
    h: &HybridAutomaton,
    initial: &Formula,
    final_states: &Formula,
    max_i: u32,
    backend: &mut dyn Backend,
) -> Result<ReachResult, AlgorithmError> {
    check_scope(initial, h, "initial-states")?;
    check_scope(final_states, h, "final-states")?;
    let final_primed = ops::substitute(
        final_states,
        &reach::vector_map(h.vars(), h.primed()),
    );
    let mut log = Vec::new();
    for i in 0..=max_i {
        let relation =
            reach::reach_le(h, i);
        let query = Formula::and(vec![
            relation.clone(),
            initial.clone(),
            final_primed.clone(),
        ]);
        let t0 = backend.elapsed_millis();
        let outcome = backend.check_sat(&query)?;
        log.push(IterationRecord {
            index: i,
            formula_atoms: atom_count(&query),
            query_millis: elapsed_since(backend, t0),
            rendered: None,
        });
        match outcome {
            DecisionOutcome::Sat(witness) => {
                // Start states of `initial` from which `final` is reachable
                // within i switches.
                let reached_from = Formula::and(vec![
                    initial.clone(),
                    Formula::exists_many(
                        h.primed().vars(),
                        Formula::and(vec![relation, final_primed.clone()]),
                    ),
                ]);
                let result_formula = tidy(&reached_from, backend)?;
                let rendered = render_1d(&result_formula, h, &h.vars()[0], backend);
                return Ok(ReachResult {
                    status: ReachStatus::Reached,
                    iterations: i,
                    result_formula,
                    rendered,
                    log,
                    witness,
                    inconclusive_query: None,
                });
            }
            DecisionOutcome::Unsat => {}
            DecisionOutcome::Unknown(_) => {
                return Ok(ReachResult {
                    status: ReachStatus::Inconclusive,
                    iterations: i,
                    result_formula: Formula::False,
                    rendered: None,
                    log,
                    witness: None,
                    inconclusive_query: Some(query),
                });
            }
        }
    }
    Ok(ReachResult {
        status: ReachStatus::NotReachedWithinBound,
        iterations: max_i,
        result_formula: Formula::False,
        rendered: None,
        log,
        witness: None,
        inconclusive_query: None,
    })
}

/// The chosen structural transform.
fn apply_semantics(f: &Formula, cfg: &TransformConfig, semantics: EpsSemantics) -> Formula {
    match semantics {
        EpsSemantics::Sphere => transform::sphere(f, cfg),
        EpsSemantics::Bottom => transform::contract(f, cfg),
    }
}

/// Approximate reachability with `ε`-observation (the fixpoint loop).
///
/// The frontier advances by exactly one discrete transition per pass: a
/// per-location map carries the states reachable with exactly `k` switches
/// (each followed by its continuous phase), and `R` accumulates the
/// frontiers. Composing the full one-step relation onto the accumulated set
/// would instead chain extra continuous phases; for dynamics that are not
/// closed under temporal composition that overshoots the per-switch strata.
/// Each pass observes the frontier through the chosen transform: the loop
/// halts when `filled_ball(transform(N) ∧ filled_ball(¬R))` is
/// unsatisfiable — nothing new remains at observation scale — and returns
/// the transform of `R`.
/// The negated accumulator is interiorised without recursion for both
/// semantics choices (see the negation clause of [`transform::contract`]);
/// recursing there would dilate `R` before complementing and halt one pass
/// too early, losing the final frontier layer.
///
/// `cfg` must perturb exactly the automaton's state variables.
pub fn epsilon_reach(
    h: &HybridAutomaton,
    initial: &Formula,
    cfg: &TransformConfig,
    semantics: EpsSemantics,
    max_iter: u32,
    backend: &mut dyn Backend,
) -> Result<ReachResult, AlgorithmError> {
    check_scope(initial, h, "initial-states")?;
    if cfg.approx_vars() != h.vars() {
        return Err(AlgorithmError::ApproxVarsMismatch);
    }
    // Per-location continuous images, reused by every pass.
    let flow0: BTreeMap<&str, Formula> = h
        .locations()
        .iter()
        .map(|loc| {
            let f = reach::reach0(h, &loc.name, &loc.name)
                .expect("location names come from the automaton");
            (loc.name.as_str(), f)
        })
        .collect();
    let mut r = tidy(initial, backend)?;
    // Zero-switch frontier: the continuous image of the initial set.
    let mut frontier: BTreeMap<&str, Formula> = BTreeMap::new();
    for loc in h.locations() {
        let mut blocks = scan_all(&[initial, &flow0[loc.name.as_str()]], h);
        let w = FreshBlocks::state_vector(blocks.alloc(), h.dim());
        let start = ops::substitute(initial, &reach::vector_map(h.vars(), &w));
        let mut flow_map = reach::vector_map(h.vars(), &w);
        flow_map.extend(reach::vector_map(h.primed(), h.vars()));
        let flowed = ops::substitute(&flow0[loc.name.as_str()], &flow_map);
        let image = Formula::exists_many(w.vars(), Formula::and(vec![start, flowed]));
        frontier.insert(loc.name.as_str(), tidy(&image, backend)?);
    }
    let mut log = Vec::new();
    for pass in 1..=max_iter {
        let t0 = backend.elapsed_millis();
        let n = tidy(
            &Formula::or(frontier.values().cloned().collect()),
            backend,
        )?;
        // Observation: does the frontier leave R at scale ε?
        let novelty = transform::filled_ball(
            &Formula::and(vec![
                apply_semantics(&n, cfg, semantics),
                transform::filled_ball(&Formula::not(r.clone()), cfg),
            ]),
            cfg,
        );
        let outcome = backend.check_sat(&novelty)?;
        log.push(IterationRecord {
            index: pass,
            formula_atoms: atom_count(&r),
            query_millis: elapsed_since(backend, t0),
            rendered: render_1d(&r, h, &h.vars()[0], backend),
        });
        match outcome {
            DecisionOutcome::Unsat => {
                let result_formula = tidy(&apply_semantics(&r, cfg, semantics), backend)?;
                let rendered = render_1d(&result_formula, h, &h.vars()[0], backend);
                return Ok(ReachResult {
                    status: ReachStatus::FixpointEmptyObservation,
                    iterations: pass,
                    result_formula,
                    rendered,
                    log,
                    witness: None,
                    inconclusive_query: None,
                });
            }
            DecisionOutcome::Sat(_) => {
                r = tidy(&Formula::or(vec![r, n]), backend)?;
                frontier = advance_frontier(h, &frontier, &flow0, backend)?;
            }
            DecisionOutcome::Unknown(_) => {
                return Ok(ReachResult {
                    status: ReachStatus::Inconclusive,
                    iterations: pass,
                    result_formula: Formula::False,
                    rendered: None,
                    log,
                    witness: None,
                    inconclusive_query: Some(novelty),
                });
            }
        }
    }
    Ok(ReachResult {
        status: ReachStatus::Inconclusive,
        iterations: max_iter,
        result_formula: Formula::False,
        rendered: None,
        log,
        witness: None,
        inconclusive_query: None,
    })
}

/// One more discrete transition: push every location's frontier through each
/// outgoing edge (guard, reset) and the target's continuous image.
fn advance_frontier<'h>(
    h: &'h HybridAutomaton,
    frontier: &BTreeMap<&'h str, Formula>,
    flow0: &BTreeMap<&'h str, Formula>,
    backend: &mut dyn Backend,
) -> Result<BTreeMap<&'h str, Formula>, AlgorithmError> {
    let mut pieces: BTreeMap<&str, Vec<Formula>> = h
        .locations()
        .iter()
        .map(|loc| (loc.name.as_str(), Vec::new()))
        .collect();
    for e in h.edges() {
        let from = &frontier[e.from.as_str()];
        if *from == Formula::False {
            continue;
        }
        let landing = &flow0[e.to.as_str()];
        let mut blocks = scan_all(&[from, &e.act, &e.res, landing], h);
        let w1 = FreshBlocks::state_vector(blocks.alloc(), h.dim());
        let w2 = FreshBlocks::state_vector(blocks.alloc(), h.dim());
        let start = ops::substitute(from, &reach::vector_map(h.vars(), &w1));
        let act = ops::substitute(&e.act, &reach::vector_map(h.vars(), &w1));
        let mut res_map = reach::vector_map(h.vars(), &w1);
        res_map.extend(reach::vector_map(h.primed(), &w2));
        let res = ops::substitute(&e.res, &res_map);
        let mut flow_map = reach::vector_map(h.vars(), &w2);
        flow_map.extend(reach::vector_map(h.primed(), h.vars()));
        let flowed = ops::substitute(landing, &flow_map);
        let mut bound = w1.vars().to_vec();
        bound.extend_from_slice(w2.vars());
        let piece = Formula::exists_many(
            &bound,
            Formula::and(vec![start, act, res, flowed]),
        );
        pieces
            .get_mut(e.to.as_str())
            .expect("edge targets are declared locations")
            .push(piece);
    }
    let mut next = BTreeMap::new();
    for (name, parts) in pieces {
        next.insert(name, tidy(&Formula::or(parts), backend)?);
    }
    Ok(next)
}

fn scan_all(fs: &[&Formula], h: &HybridAutomaton) -> FreshBlocks {
    let mut names = alloc::collections::BTreeSet::new();
    for f in fs {
        names.extend(ops::all_var_names(f));
    }
    for v in h.vars().iter().chain(h.primed().iter()) {
        names.insert(v.name().to_string());
    }
    names.insert(h.time().name().to_string());
    FreshBlocks::scanning(names.iter().map(|s| s.as_str()))
}

/// Dilation-based over-approximation of the reachable set.
///
/// The candidate is carried over the primed variables. It starts as the
/// `ε`-expansion of the flow image of the initial set and grows by expanded
/// switch-then-flow images; the loop halts when the backend proves that the
/// exact one-step relation cannot leave the *previous* candidate `V`, and
/// returns `V` (renamed to the unprimed state variables).
pub fn tilde_reach(
    h: &HybridAutomaton,
    initial: &Formula,
    epsilon: &Rational,
    max_iter: u32,
    backend: &mut dyn Backend,
) -> Result<ReachResult, AlgorithmError> {
    check_scope(initial, h, "initial-states")?;
    let cfg = TransformConfig::new(epsilon.clone(), h.primed().clone()).map_err(
        |TransformError::NonPositiveRadius| AlgorithmError::NonPositiveRadius,
    )?;
    let flow_all = reach::reach_all(h, 0);
    let switch_step = Formula::or(
        h.edges()
            .iter()
            .map(|e| Formula::and(vec![e.act.clone(), e.res.clone()]))
            .collect(),
    );
    let one_step = reach::reach_le(h, 1);

    // R := expansion of ∃Z(initial[Z] ∧ flow_all[Z,Z′]); free variables Z′.
    let seed = Formula::exists_many(
        h.vars().vars(),
        Formula::and(vec![initial.clone(), flow_all.clone()]),
    );
    let mut r = tidy(&transform::expand(&seed, &cfg), backend)?;
    let mut log = Vec::new();

    for pass in 1..=max_iter {
        let v = r.clone();
        let t0 = backend.elapsed_millis();

        // J := ∃W(V[W/Z′] ∧ switch_step[W/Z, Z′]); free variables Z′.
        let mut blocks = scan_all(&[&v, &switch_step, &flow_all], h);
        let w1 = FreshBlocks::state_vector(blocks.alloc(), h.dim());
        let v_at_w1 = ops::substitute(&v, &reach::vector_map(h.primed(), &w1));
        let switch_moved = ops::substitute(&switch_step, &reach::vector_map(h.vars(), &w1));
        let jumped = Formula::exists_many(
            w1.vars(),
            Formula::and(vec![v_at_w1, switch_moved]),
        );

        // R := expansion of ∃W(J[W/Z′] ∧ flow_all[W/Z, Z′]), then R ∨ V.
        let w2 = FreshBlocks::state_vector(blocks.alloc(), h.dim());
        let jumped_at_w2 = ops::substitute(&jumped, &reach::vector_map(h.primed(), &w2));
        let flow_moved = ops::substitute(&flow_all, &reach::vector_map(h.vars(), &w2));
        let grown = Formula::exists_many(
            w2.vars(),
            Formula::and(vec![jumped_at_w2, flow_moved]),
        );
        let expanded = transform::expand(&grown, &cfg);
        r = tidy(&Formula::or(vec![expanded, v.clone()]), backend)?;

        // Halt when the exact one-step relation cannot leave V.
        let v_unprimed = ops::substitute(&v, &reach::vector_map(h.primed(), h.vars()));
        let mut closure_vars: Vec<Var> = h.vars().vars().to_vec();
        closure_vars.extend(h.primed().vars().iter().cloned());
        let closed = Formula::forall_many(
            &closure_vars,
            Formula::implies(
                Formula::and(vec![v_unprimed, one_step.clone()]),
                v.clone(),
            ),
        );
        let verdict = backend.check_valid(&closed)?;
        log.push(IterationRecord {
            index: pass,
            formula_atoms: atom_count(&v),
            query_millis: elapsed_since(backend, t0),
            rendered: render_1d(&v, h, &h.primed()[0], backend),
        });
        match verdict {
            Validity::Valid => {
                let result_formula =
                    ops::substitute(&v, &reach::vector_map(h.primed(), h.vars()));
                let rendered = render_1d(&result_formula, h, &h.vars()[0], backend);
                return Ok(ReachResult {
                    status: ReachStatus::FixpointEmptyObservation,
                    iterations: pass,
                    result_formula,
                    rendered,
                    log,
                    witness: None,
                    inconclusive_query: None,
                });
            }
            Validity::Invalid(_) => {}
            Validity::Unknown(_) => {
                return Ok(ReachResult {
                    status: ReachStatus::Inconclusive,
                    iterations: pass,
                    result_formula: Formula::False,
                    rendered: None,
                    log,
                    witness: None,
                    inconclusive_query: Some(closed),
                });
            }
        }
    }
    Ok(ReachResult {
        status: ReachStatus::Inconclusive,
        iterations: max_iter,
        result_formula: Formula::False,
        rendered: None,
        log,
        witness: None,
        inconclusive_query: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SafetyVerdict {
    /// No unsafe state is reachable within the switch bound.
    Safe { bound: u32 },
    /// An initial state reaches an unsafe state using `switches` switches.
    Unsafe {
        switches: u32,
        witness: Option<Witness>,
    },
    Inconclusive {
        reason: UnknownReason,
        query: Formula,
    },
}

/// Safety of the predicate presentation within `max_i` switches: unsafe iff
/// `initial_v[Z] ∧ Φ^i_{v→v′}[Z,Z′] ∧ ¬safe_{v′}[Z′]` is satisfiable for
/// some locations `v, v′` and some `i ≤ max_i`. Agrees with
/// [`bounded_reach`] on the same inputs.
pub fn safety_check(
    h: &HybridAutomaton,
    initial: &Formula,
    final_states: &Formula,
    max_i: u32,
    backend: &mut dyn Backend,
) -> Result<SafetyVerdict, AlgorithmError> {
    let fa = fraenzle_translate_checked(h, initial, final_states)?;
    let unprimed_to_primed = reach::vector_map(h.vars(), h.primed());
    for i in 0..=max_i {
        for v in fa.locations() {
            for v2 in fa.locations() {
                let phi = fraenzle::phi_i(&fa, v, v2, i)?;
                if phi == Formula::False {
                    continue;
                }
                let unsafe_end = Formula::not(ops::substitute(
                    fa.safe(v2).expect("location known"),
                    &unprimed_to_primed,
                ));
                let query = Formula::and(vec![
                    fa.initial(v).expect("location known").clone(),
                    phi,
                    unsafe_end,
                ]);
                match backend.check_sat(&query)? {
                    DecisionOutcome::Sat(witness) => {
                        return Ok(SafetyVerdict::Unsafe {
                            switches: i,
                            witness,
                        })
                    }
                    DecisionOutcome::Unsat => {}
                    DecisionOutcome::Unknown(reason) => {
                        return Ok(SafetyVerdict::Inconclusive { reason, query })
                    }
                }
            }
        }
    }
    Ok(SafetyVerdict::Safe { bound: max_i })
}

fn fraenzle_translate_checked(
    h: &HybridAutomaton,
    initial: &Formula,
    final_states: &Formula,
) -> Result<fraenzle::FraenzleAutomaton, AlgorithmError> {
    fraenzle::fraenzle_translate(h, initial, final_states).map_err(AlgorithmError::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BuiltinBackend;
    use crate::interval::Interval;
    use crate::samples;
    use crate::term::{rat, Term, VarVector};
    use alloc::string::String;

    fn backend() -> BuiltinBackend {
        BuiltinBackend::with_budget(100_000_000)
    }

    fn shrink_at_10() -> (HybridAutomaton, Formula) {
        (
            samples::shrink(),
            Formula::eq(Term::var("Z1"), Term::int(10)),
        )
    }

    fn open(a: Rational, b: Rational) -> IntervalUnion {
        IntervalUnion::singleton(Interval::open(a, b).unwrap())
    }

    fn state_cfg(h: &HybridAutomaton, eps: Rational) -> TransformConfig {
        TransformConfig::new(eps, h.vars().clone()).unwrap()
    }

    #[test]
    fn bounded_reach_decides_at_the_first_sufficient_bound() {
        let (h, init) = shrink_at_10();
        let fin = Formula::lt(Term::var("Z1"), Term::rat(1, 2));
        let r = bounded_reach(&h, &init, &fin, 3, &mut backend()).unwrap();
        assert_eq!(r.status, ReachStatus::Reached);
        assert_eq!(r.iterations, 2);
        let w = r.witness.expect("a reachability witness");
        assert_eq!(w.get(&Var::new("Z1")), Some(&rat(10, 1)));
        assert!(w.get(&Var::new("Z1'")).unwrap() < &rat(1, 2));
        assert_eq!(r.log.len(), 3);
    }

    #[test]
    fn bounded_reach_accepts_identity_flow_at_bound_zero() {
        let (h, init) = shrink_at_10();
        let fin = Formula::le(Term::var("Z1"), Term::int(10));
        let r = bounded_reach(&h, &init, &fin, 3, &mut backend()).unwrap();
        assert_eq!(r.status, ReachStatus::Reached);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn bounded_reach_never_reaches_nonpositive_values() {
        let (h, init) = shrink_at_10();
        let fin = Formula::lt(Term::var("Z1"), Term::int(0));
        let r = bounded_reach(&h, &init, &fin, 4, &mut backend()).unwrap();
        assert_eq!(r.status, ReachStatus::NotReachedWithinBound);
        assert_eq!(r.iterations, 4);
        assert_eq!(r.log.len(), 5);
        assert_eq!(r.result_formula, Formula::False);
    }

    #[test]
    fn bounded_reach_rejects_out_of_scope_formulas() {
        let (h, init) = shrink_at_10();
        let bad = Formula::lt(Term::var("T"), Term::int(0));
        match bounded_reach(&h, &init, &bad, 1, &mut backend()) {
            Err(AlgorithmError::ScopeViolation { role, .. }) => {
                assert_eq!(role, "final-states")
            }
            other => panic!("expected a scope violation, got {other:?}"),
        }
    }

    #[test]
    fn epsilon_reach_sphere_halts_on_the_worked_example() {
        let (h, init) = shrink_at_10();
        let cfg = state_cfg(&h, rat(1, 2));
        let r = epsilon_reach(
            &h,
            &init,
            &cfg,
            EpsSemantics::Sphere,
            DEFAULT_ITERATION_CAP,
            &mut backend(),
        )
        .unwrap();
        assert_eq!(r.status, ReachStatus::FixpointEmptyObservation);
        assert_eq!(r.rendered, Some(open(rat(-3, 16), rat(21, 2))));
        assert_eq!(r.iterations, 4);
        // Accumulated exact sets per pass: the start point, then its
        // continuous image, then one and two switches deep.
        assert_eq!(
            r.log[0].rendered,
            Some(IntervalUnion::singleton(
                Interval::point(rat(10, 1))
            ))
        );
        assert_eq!(
            r.log[3].rendered,
            Some(IntervalUnion::singleton(
                Interval::open_closed(rat(5, 16), rat(10, 1)).unwrap()
            ))
        );
    }

    #[test]
    fn epsilon_reach_bottom_returns_an_interior_set() {
        let (h, init) = shrink_at_10();
        let cfg = state_cfg(&h, rat(1, 2));
        let r = epsilon_reach(
            &h,
            &init,
            &cfg,
            EpsSemantics::Bottom,
            DEFAULT_ITERATION_CAP,
            &mut backend(),
        )
        .unwrap();
        assert_eq!(r.status, ReachStatus::FixpointEmptyObservation);
        assert_eq!(r.rendered, Some(open(rat(5, 4), rat(10, 1))));
        assert_eq!(r.iterations, 3);
        // Soundness: the returned set is inside the exact accumulation.
        let exact_band = Formula::and(vec![
            Formula::lt(Term::rat(5, 4), Term::var("Z1")),
            Formula::le(Term::var("Z1"), Term::int(10)),
        ]);
        match backend()
            .check_valid(&Formula::implies(r.result_formula, exact_band))
            .unwrap()
        {
            Validity::Valid => {}
            other => panic!("under-approximation violated: {other:?}"),
        }
    }

    #[test]
    fn epsilon_reach_halts_immediately_on_an_empty_initial_set() {
        let (h, _) = shrink_at_10();
        let cfg = state_cfg(&h, rat(1, 2));
        let r = epsilon_reach(
            &h,
            &Formula::False,
            &cfg,
            EpsSemantics::Sphere,
            DEFAULT_ITERATION_CAP,
            &mut backend(),
        )
        .unwrap();
        assert_eq!(r.status, ReachStatus::FixpointEmptyObservation);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.result_formula, Formula::False);
        assert_eq!(r.rendered, Some(IntervalUnion::empty()));
    }

    #[test]
    fn epsilon_reach_reports_the_cap_as_inconclusive() {
        let (h, init) = shrink_at_10();
        let cfg = state_cfg(&h, rat(1, 2));
        let r = epsilon_reach(&h, &init, &cfg, EpsSemantics::Sphere, 1, &mut backend()).unwrap();
        assert_eq!(r.status, ReachStatus::Inconclusive);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn epsilon_reach_requires_the_state_variables_as_approximation_vars() {
        let (h, init) = shrink_at_10();
        let cfg = TransformConfig::new(rat(1, 2), VarVector::of(&["Z1'"])).unwrap();
        match epsilon_reach(
            &h,
            &init,
            &cfg,
            EpsSemantics::Sphere,
            4,
            &mut backend(),
        ) {
            Err(AlgorithmError::ApproxVarsMismatch) => {}
            other => panic!("expected an approximation-variable mismatch, got {other:?}"),
        }
    }

    #[test]
    fn tilde_reach_follows_the_interval_iteration() {
        let (h, init) = shrink_at_10();
        let r = tilde_reach(&h, &init, &rat(1, 2), DEFAULT_ITERATION_CAP, &mut backend())
            .unwrap();
        assert_eq!(r.status, ReachStatus::FixpointEmptyObservation);
        assert_eq!(r.iterations, 3);
        // Candidate sets per pass, all carried over the primed variable.
        assert_eq!(r.log[0].rendered, Some(open(rat(9, 2), rat(21, 2))));
        assert_eq!(r.log[1].rendered, Some(open(rat(5, 8), rat(11, 1))));
        assert_eq!(r.log[2].rendered, Some(open(rat(-11, 32), rat(23, 2))));
        assert_eq!(r.rendered, Some(open(rat(-11, 32), rat(23, 2))));
        // Over-approximation: the exact three-switch reach image at 10 is
        // inside the returned set.
        let exact = Formula::and(vec![
            Formula::lt(Term::rat(5, 64), Term::var("Z1")),
            Formula::le(Term::var("Z1"), Term::int(10)),
        ]);
        match backend()
            .check_valid(&Formula::implies(exact, r.result_formula))
            .unwrap()
        {
            Validity::Valid => {}
            other => panic!("over-approximation violated: {other:?}"),
        }
    }

    #[test]
    fn tilde_reach_halts_immediately_on_an_empty_initial_set() {
        let (h, _) = shrink_at_10();
        let r = tilde_reach(
            &h,
            &Formula::False,
            &rat(1, 2),
            DEFAULT_ITERATION_CAP,
            &mut backend(),
        )
        .unwrap();
        assert_eq!(r.status, ReachStatus::FixpointEmptyObservation);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.result_formula, Formula::False);
    }

    #[test]
    fn tilde_reach_rejects_a_nonpositive_radius() {
        let (h, init) = shrink_at_10();
        match tilde_reach(&h, &init, &rat(0, 1), 4, &mut backend()) {
            Err(AlgorithmError::NonPositiveRadius) => {}
            other => panic!("expected a radius error, got {other:?}"),
        }
    }

    #[test]
    fn safety_check_agrees_with_bounded_reach() {
        let (h, init) = shrink_at_10();
        let fin = Formula::lt(Term::var("Z1"), Term::rat(1, 2));
        let direct = bounded_reach(&h, &init, &fin, 3, &mut backend()).unwrap();
        match safety_check(&h, &init, &fin, 3, &mut backend()).unwrap() {
            SafetyVerdict::Unsafe { switches, witness } => {
                assert_eq!(switches, direct.iterations);
                assert!(witness.is_some());
            }
            other => panic!("expected an unsafe verdict, got {other:?}"),
        }
    }

    #[test]
    fn safety_check_with_no_final_states_is_safe_at_every_bound() {
        let (h, init) = shrink_at_10();
        for bound in 0..=2 {
            assert_eq!(
                safety_check(&h, &init, &Formula::False, bound, &mut backend()).unwrap(),
                SafetyVerdict::Safe { bound }
            );
        }
    }

    #[test]
    fn safety_check_crosses_locations() {
        // Both locations hold their value; only the edge's reset moves it up
        // by 20. Initial states are not pinned to a location, so a target
        // only above the reset is reachable in exactly one switch.
        let z1 = || Term::var("Z1");
        let hold = Formula::eq(Term::var("Z1'"), z1());
        let h = HybridAutomaton::new(
            VarVector::of(&["Z1"]),
            Var::new("T"),
            vec![
                crate::automaton::Location {
                    name: String::from("a"),
                    inv: Formula::between(Term::int(0), z1(), Term::int(10)),
                    flow: hold.clone(),
                },
                crate::automaton::Location {
                    name: String::from("b"),
                    inv: Formula::between(Term::int(0), z1(), Term::int(50)),
                    flow: hold,
                },
            ],
            vec![crate::automaton::Edge {
                from: String::from("a"),
                to: String::from("b"),
                act: Formula::ge(z1(), Term::int(5)),
                res: Formula::eq(Term::var("Z1'"), z1().add(Term::int(20))),
            }],
        )
        .unwrap();
        let init = Formula::eq(z1(), Term::int(6));
        let fin = Formula::ge(z1(), Term::int(20));
        let direct = bounded_reach(&h, &init, &fin, 2, &mut backend()).unwrap();
        assert_eq!(direct.status, ReachStatus::Reached);
        assert_eq!(direct.iterations, 1);
        match safety_check(&h, &init, &fin, 2, &mut backend()).unwrap() {
            SafetyVerdict::Unsafe { switches, .. } => assert_eq!(switches, 1),
            other => panic!("expected an unsafe verdict, got {other:?}"),
        }
    }
}
