//! Predicate-style presentation of a hybrid automaton for safety checking.
//!
//! The translation replaces the automaton's syntactic pieces by four
//! predicate families over the state vector:
//!
//! * `act(v)[Z,Z′]` — the jump-free reachability relation of location `v`
//!   (flow for some non-negative duration while staying inside the
//!   invariant);
//! * `trans(v→v′)[Z,Z′]` — guard-and-reset of the discrete switches from
//!   `v` to `v′`, and `⊥` for pairs with no edge (the map is total);
//! * `initial(v)[Z]` — the invariant conjoined with the initial-states
//!   formula;
//! * `safe(v)[Z]` — the invariant conjoined with the negated final-states
//!   formula.
//!
//! Iterating activity through transitions yields [`phi_i`], the relation
//! "reachable with exactly `i` switches", which matches the direct
//! construction in [`crate::reach`] location-pair-wise — a fact the test
//! suite checks by backend validity.
//!
//! [`min_disturbed`] produces the variant whose activity predicates are the
//! `ε`-dilations (over the post-state variables) of the original ones: the
//! least disturbed variant at noise level `ε`. [`is_disturbed_variant`] and
//! [`noise_level_at_least`] decide the per-location containments relating an
//! automaton to a claimed disturbed variant.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::automaton::HybridAutomaton;
use crate::backend::{Backend, BackendError, UnknownReason, Validity, Witness};
use crate::formula::Formula;
use crate::ops;
use crate::reach::{self, FreshBlocks};
use crate::term::{Rational, Var, VarVector};
use crate::transform::{self, TransformConfig, TransformError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FraenzleError {
    /// `initial`/`final` formulas may only use the state variables.
    ScopeViolation { role: &'static str, var: Var },
    /// The disturbance radius must be strictly positive.
    NonPositiveRadius,
    UnknownLocation(String),
    /// Comparing automata requires identical location sets.
    LocationMismatch,
    /// Comparing automata requires identical state dimensions.
    DimensionMismatch { expected: usize, actual: usize },
    Backend(BackendError),
}

impl core::fmt::Display for FraenzleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FraenzleError::ScopeViolation { role, var } => {
                write!(f, "{role} formula mentions `{var}`, outside the state variables")
            }
            FraenzleError::NonPositiveRadius => {
                write!(f, "disturbance radius must be strictly positive")
            }
            FraenzleError::UnknownLocation(name) => write!(f, "unknown location `{name}`"),
            FraenzleError::LocationMismatch => {
                write!(f, "automata have different location sets")
            }
            FraenzleError::DimensionMismatch { expected, actual } => {
                write!(f, "dimension mismatch: expected {expected}, got {actual}")
            }
            FraenzleError::Backend(e) => write!(f, "backend failure: {e}"),
        }
    }
}

impl From<BackendError> for FraenzleError {
    fn from(e: BackendError) -> FraenzleError {
        FraenzleError::Backend(e)
    }
}

/// The predicate presentation produced by [`fraenzle_translate`] and
/// [`min_disturbed`]. Location order follows the source automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FraenzleAutomaton {
    vars: VarVector,
    primed: VarVector,
    locations: Vec<String>,
    act: BTreeMap<String, Formula>,
    initial: BTreeMap<String, Formula>,
    safe: BTreeMap<String, Formula>,
    trans: BTreeMap<(String, String), Formula>,
}

impl FraenzleAutomaton {
    pub fn vars(&self) -> &VarVector {
        &self.vars
    }

    pub fn primed(&self) -> &VarVector {
        &self.primed
    }

    pub fn locations(&self) -> &[String] {
        &self.locations
    }

    fn known(&self, name: &str) -> Result<(), FraenzleError> {
        if self.act.contains_key(name) {
            Ok(())
        } else {
            Err(FraenzleError::UnknownLocation(name.to_string()))
        }
    }

    /// Jump-free reachability predicate of `v`, over `Z, Z′`.
    pub fn act(&self, v: &str) -> Result<&Formula, FraenzleError> {
        self.known(v)?;
        Ok(&self.act[v])
    }

    /// Initial-states predicate of `v`, over `Z`.
    pub fn initial(&self, v: &str) -> Result<&Formula, FraenzleError> {
        self.known(v)?;
        Ok(&self.initial[v])
    }

    /// Safe-states predicate of `v`, over `Z`.
    pub fn safe(&self, v: &str) -> Result<&Formula, FraenzleError> {
        self.known(v)?;
        Ok(&self.safe[v])
    }

    /// Switch predicate from `v` to `v2`, over `Z, Z′`; `⊥` when the source
    /// automaton has no such edge (the map is total).
    pub fn trans(&self, v: &str, v2: &str) -> Result<&Formula, FraenzleError> {
        self.known(v)?;
        self.known(v2)?;
        Ok(&self.trans[&(v.to_string(), v2.to_string())])
    }

    fn scan(&self) -> FreshBlocks {
        let mut names: BTreeSet<String> = BTreeSet::new();
        for v in self.vars.iter().chain(self.primed.iter()) {
            names.insert(String::from(v.name()));
        }
        for f in self
            .act
            .values()
            .chain(self.initial.values())
            .chain(self.safe.values())
            .chain(self.trans.values())
        {
            names.extend(ops::all_var_names(f));
        }
        FreshBlocks::scanning(names.iter().map(String::as_str))
    }
}

fn check_scope(f: &Formula, vars: &VarVector, role: &'static str) -> Result<(), FraenzleError> {
    for v in ops::free_vars(f) {
        if !vars.contains(&v) {
            return Err(FraenzleError::ScopeViolation { role, var: v });
        }
    }
    Ok(())
}

/// Translates `h` with initial states `initial` and final (unsafe) states
/// `final_states`, both over the state variables only.
pub fn fraenzle_translate(
    h: &HybridAutomaton,
    initial: &Formula,
    final_states: &Formula,
) -> Result<FraenzleAutomaton, FraenzleError> {
    check_scope(initial, h.vars(), "initial-states")?;
    check_scope(final_states, h.vars(), "final-states")?;

    let locations: Vec<String> = h.locations().iter().map(|l| l.name.clone()).collect();
    let mut act = BTreeMap::new();
    let mut init = BTreeMap::new();
    let mut safe = BTreeMap::new();
    for loc in h.locations() {
        let reach0 = reach::reach0(h, &loc.name, &loc.name)
            .expect("location names come from the automaton");
        act.insert(loc.name.clone(), reach0);
        init.insert(
            loc.name.clone(),
            Formula::and(vec![loc.inv.clone(), initial.clone()]),
        );
        safe.insert(
            loc.name.clone(),
            Formula::and(vec![loc.inv.clone(), Formula::not(final_states.clone())]),
        );
    }

    let mut trans = BTreeMap::new();
    for from in &locations {
        for to in &locations {
            let switches: Vec<Formula> = h
                .edges_from(from)
                .filter(|e| &e.to == to)
                .map(|e| Formula::and(vec![e.act.clone(), e.res.clone()]))
                .collect();
            trans.insert((from.clone(), to.clone()), Formula::or(switches));
        }
    }

    Ok(FraenzleAutomaton {
        vars: h.vars().clone(),
        primed: h.primed().clone(),
        locations,
        act,
        initial: init,
        safe,
        trans,
    })
}

/// The translation of `h` with every activity predicate replaced by its
/// `ε`-dilation over the post-state variables (pre-state variables are
/// parameters): the least disturbed variant of `h` at noise level `ε`.
pub fn min_disturbed(
    h: &HybridAutomaton,
    initial: &Formula,
    final_states: &Formula,
    epsilon: &Rational,
) -> Result<FraenzleAutomaton, FraenzleError> {
    let mut fa = fraenzle_translate(h, initial, final_states)?;
    let cfg = TransformConfig::new(epsilon.clone(), fa.primed.clone()).map_err(
        |TransformError::NonPositiveRadius| FraenzleError::NonPositiveRadius,
    )?;
    for act in fa.act.values_mut() {
        *act = transform::expand(act, &cfg);
    }
    Ok(fa)
}

/// `Φ^i_{v→v2}[Z,Z′]`: reachable from `v` to `v2` with exactly `i` switches,
/// built by composing activity and switch predicates through fresh
/// intermediate state vectors.
pub fn phi_i(
    fa: &FraenzleAutomaton,
    v: &str,
    v2: &str,
    i: u32,
) -> Result<Formula, FraenzleError> {
    fa.known(v)?;
    fa.known(v2)?;
    let mut blocks = fa.scan();
    Ok(phi_with(fa, v, v2, i, &mut blocks))
}

fn phi_with(
    fa: &FraenzleAutomaton,
    v: &str,
    v2: &str,
    i: u32,
    blocks: &mut FreshBlocks,
) -> Formula {
    if i == 0 {
        return if v == v2 {
            fa.act[v].clone()
        } else {
            Formula::False
        };
    }
    let mut disjuncts = Vec::new();
    for mid in &fa.locations {
        let switch = fa.trans[&(mid.clone(), v2.to_string())].clone();
        if switch == Formula::False {
            // No switch into `v2` from here: the disjunct is ⊥.
            continue;
        }
        let prefix = phi_with(fa, v, mid, i - 1, blocks);
        if prefix == Formula::False {
            continue;
        }
        let z1 = FreshBlocks::state_vector(blocks.alloc(), fa.vars.dim());
        let z2 = FreshBlocks::state_vector(blocks.alloc(), fa.vars.dim());
        let prefix_sub = ops::substitute(&prefix, &reach::vector_map(&fa.primed, &z1));
        let mut switch_map = reach::vector_map(&fa.vars, &z1);
        switch_map.extend(reach::vector_map(&fa.primed, &z2));
        let switch_sub = ops::substitute(&switch, &switch_map);
        let tail_sub = ops::substitute(&fa.act[v2], &reach::vector_map(&fa.vars, &z2));
        let mut bound: Vec<Var> = z1.vars().to_vec();
        bound.extend(z2.vars().iter().cloned());
        disjuncts.push(Formula::exists_many(
            &bound,
            Formula::and(vec![prefix_sub, switch_sub, tail_sub]),
        ));
    }
    Formula::or(disjuncts)
}

/// Per-location verdict of the containment queries relating an automaton to
/// a claimed disturbed variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DisturbanceVerdict {
    Holds,
    /// The containment fails at this location; the witness (when the backend
    /// produces one) is a point of the left-hand side outside the right.
    Fails {
        location: String,
        witness: Option<Witness>,
    },
    Unknown(UnknownReason),
}

fn check_comparable(
    h: &HybridAutomaton,
    variant: &FraenzleAutomaton,
) -> Result<(), FraenzleError> {
    if h.dim() != variant.vars.dim() {
        return Err(FraenzleError::DimensionMismatch {
            expected: h.dim(),
            actual: variant.vars.dim(),
        });
    }
    let left: BTreeSet<&str> = h.locations().iter().map(|l| l.name.as_str()).collect();
    let right: BTreeSet<&str> = variant.locations.iter().map(String::as_str).collect();
    if left != right {
        return Err(FraenzleError::LocationMismatch);
    }
    Ok(())
}

/// Checks, location by location, that every behaviour of `h`'s jump-free
/// reachability is admitted by the variant's activity predicate:
/// `act_h(v) → act_variant(v)` valid for every `v`.
pub fn is_disturbed_variant(
    h: &HybridAutomaton,
    variant: &FraenzleAutomaton,
    backend: &mut dyn Backend,
) -> Result<DisturbanceVerdict, FraenzleError> {
    check_comparable(h, variant)?;
    containment_per_location(h, variant, backend, |reach0, _| reach0.clone())
}

/// Checks that the variant absorbs every behaviour of `h` even after
/// perturbing the post-state by up to `epsilon`: the `ε`-dilation (over the
/// post-state variables) of `act_h(v)` must imply `act_variant(v)`.
pub fn noise_level_at_least(
    h: &HybridAutomaton,
    variant: &FraenzleAutomaton,
    epsilon: &Rational,
    backend: &mut dyn Backend,
) -> Result<DisturbanceVerdict, FraenzleError> {
    check_comparable(h, variant)?;
    let cfg = TransformConfig::new(epsilon.clone(), h.primed().clone()).map_err(
        |TransformError::NonPositiveRadius| FraenzleError::NonPositiveRadius,
    )?;
    containment_per_location(h, variant, backend, |reach0, _| {
        transform::expand(reach0, &cfg)
    })
}

fn containment_per_location(
    h: &HybridAutomaton,
    variant: &FraenzleAutomaton,
    backend: &mut dyn Backend,
    lhs_of: impl Fn(&Formula, &str) -> Formula,
) -> Result<DisturbanceVerdict, FraenzleError> {
    for loc in h.locations() {
        let reach0 = reach::reach0(h, &loc.name, &loc.name)
            .expect("location names come from the automaton");
        let lhs = lhs_of(&reach0, &loc.name);
        let rhs = variant.act[&loc.name].clone();
        match backend.check_valid(&Formula::implies(lhs, rhs))? {
            Validity::Valid => {}
            Validity::Invalid(witness) => {
                return Ok(DisturbanceVerdict::Fails {
                    location: loc.name.clone(),
                    witness,
                })
            }
            Validity::Unknown(reason) => return Ok(DisturbanceVerdict::Unknown(reason)),
        }
    }
    Ok(DisturbanceVerdict::Holds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BuiltinBackend;
    use crate::interval::Interval;
    use crate::interval::IntervalUnion;
    use crate::samples;
    use crate::term::{rat, Term};

    fn backend() -> BuiltinBackend {
        BuiltinBackend::with_budget(60_000_000)
    }

    fn shrink_inputs() -> (HybridAutomaton, Formula, Formula) {
        let h = samples::shrink();
        let init = Formula::eq(Term::var("Z1"), Term::int(10));
        let fin = Formula::lt(Term::var("Z1"), Term::int(0));
        (h, init, fin)
    }

    fn assert_valid(f: &Formula, what: &str) {
        match backend().check_valid(f) {
            Ok(Validity::Valid) => {}
            other => panic!("{what}: expected validity, got {other:?}"),
        }
    }

    #[test]
    fn translation_produces_the_defined_predicates() {
        let (h, init, fin) = shrink_inputs();
        let fa = fraenzle_translate(&h, &init, &fin).unwrap();
        let inv = h.location("v").unwrap().inv.clone();
        assert_eq!(
            fa.initial("v").unwrap(),
            &Formula::and(vec![inv.clone(), init.clone()])
        );
        assert_eq!(
            fa.safe("v").unwrap(),
            &Formula::and(vec![inv, Formula::not(fin)])
        );
        // The activity predicate is exactly the jump-free reachability
        // relation, byte for byte (same fresh-name scheme).
        assert_eq!(
            fa.act("v").unwrap(),
            &reach::reach0(&h, "v", "v").unwrap()
        );
        // The self-switch collects guard ∧ reset of the one edge.
        let edge = &h.edges()[0];
        assert_eq!(
            fa.trans("v", "v").unwrap(),
            &Formula::and(vec![edge.act.clone(), edge.res.clone()])
        );
    }

    #[test]
    fn switch_predicates_are_total_with_bottom_for_non_edges() {
        let h = samples::two_phase();
        let fa = fraenzle_translate(&h, &Formula::True, &Formula::False).unwrap();
        assert_ne!(fa.trans("a", "b").unwrap(), &Formula::False);
        assert_eq!(fa.trans("b", "a").unwrap(), &Formula::False);
        assert_eq!(fa.trans("a", "a").unwrap(), &Formula::False);
        assert_eq!(fa.trans("b", "b").unwrap(), &Formula::False);
    }

    #[test]
    fn translation_rejects_out_of_scope_inputs() {
        let (h, init, _) = shrink_inputs();
        let bad = Formula::lt(Term::var("Z1'"), Term::int(0));
        match fraenzle_translate(&h, &init, &bad) {
            Err(FraenzleError::ScopeViolation { role, var }) => {
                assert_eq!(role, "final-states");
                assert_eq!(var, Var::new("Z1'"));
            }
            other => panic!("expected a scope violation, got {other:?}"),
        }
    }

    #[test]
    fn phi_zero_is_the_activity_predicate() {
        let (h, init, fin) = shrink_inputs();
        let fa = fraenzle_translate(&h, &init, &fin).unwrap();
        assert_eq!(phi_i(&fa, "v", "v", 0).unwrap(), *fa.act("v").unwrap());
        let h2 = samples::two_phase();
        let fa2 = fraenzle_translate(&h2, &Formula::True, &Formula::False).unwrap();
        assert_eq!(phi_i(&fa2, "a", "b", 0).unwrap(), Formula::False);
    }

    #[test]
    fn phi_matches_the_direct_reach_construction() {
        let (h, init, fin) = shrink_inputs();
        let fa = fraenzle_translate(&h, &init, &fin).unwrap();
        for i in 0..=2 {
            let phi = phi_i(&fa, "v", "v", i).unwrap();
            let direct = reach::reach_i(&h, "v", "v", i).unwrap();
            assert_valid(
                &Formula::iff(phi, direct),
                "switch-composed and direct relations must agree",
            );
        }
    }

    #[test]
    fn phi_matches_reach_across_locations() {
        let h = samples::two_phase();
        let fa = fraenzle_translate(&h, &Formula::True, &Formula::False).unwrap();
        for (v, v2) in [("a", "a"), ("a", "b"), ("b", "b"), ("b", "a")] {
            for i in 0..=1 {
                let phi = phi_i(&fa, v, v2, i).unwrap();
                let direct = reach::reach_i(&h, v, v2, i).unwrap();
                assert_valid(
                    &Formula::iff(phi, direct),
                    "switch-composed and direct relations must agree",
                );
            }
        }
    }

    #[test]
    fn disturbed_activity_dilates_the_jump_free_image() {
        let (h, init, fin) = shrink_inputs();
        let fa = min_disturbed(&h, &init, &fin, &rat(1, 2)).unwrap();
        let mut at10 = BTreeMap::new();
        at10.insert(Var::new("Z1"), Term::int(10));
        let slice = ops::substitute(fa.act("v").unwrap(), &at10);
        let u = backend().describe_1d(&slice, &Var::new("Z1'")).unwrap();
        assert_eq!(
            u,
            IntervalUnion::singleton(Interval::open(rat(9, 2), rat(21, 2)).unwrap())
        );
    }

    #[test]
    fn disturbance_radius_must_be_positive() {
        let (h, init, fin) = shrink_inputs();
        assert_eq!(
            min_disturbed(&h, &init, &fin, &rat(0, 1)),
            Err(FraenzleError::NonPositiveRadius)
        );
    }

    #[test]
    fn every_automaton_is_a_disturbed_variant_of_itself() {
        let (h, init, fin) = shrink_inputs();
        let fa = fraenzle_translate(&h, &init, &fin).unwrap();
        let verdict = is_disturbed_variant(&h, &fa, &mut backend()).unwrap();
        assert_eq!(verdict, DisturbanceVerdict::Holds);
    }

    #[test]
    fn undisturbed_activity_has_no_noise_margin() {
        let (h, init, fin) = shrink_inputs();
        let fa = fraenzle_translate(&h, &init, &fin).unwrap();
        match noise_level_at_least(&h, &fa, &rat(1, 2), &mut backend()).unwrap() {
            DisturbanceVerdict::Fails { location, witness } => {
                assert_eq!(location, "v");
                assert!(witness.is_some());
            }
            other => panic!("expected a failing containment, got {other:?}"),
        }
    }

    #[test]
    fn least_disturbed_variant_reaches_the_claimed_noise_level() {
        let (h, init, fin) = shrink_inputs();
        let fa = min_disturbed(&h, &init, &fin, &rat(1, 2)).unwrap();
        assert_eq!(
            is_disturbed_variant(&h, &fa, &mut backend()).unwrap(),
            DisturbanceVerdict::Holds
        );
        assert_eq!(
            noise_level_at_least(&h, &fa, &rat(1, 2), &mut backend()).unwrap(),
            DisturbanceVerdict::Holds
        );
    }

    #[test]
    fn comparisons_require_matching_location_sets() {
        let (h, _, _) = shrink_inputs();
        let other = samples::two_phase();
        let fa = fraenzle_translate(&other, &Formula::True, &Formula::False).unwrap();
        assert_eq!(
            is_disturbed_variant(&h, &fa, &mut backend()),
            Err(FraenzleError::LocationMismatch)
        );
    }
}
