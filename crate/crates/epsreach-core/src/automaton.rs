//! The hybrid-automaton data model: named locations carrying an invariant
//! and a time-parameterized flow relation, and directed edges carrying a
//! guard and a reset relation, all given as first-order formulas over a
//! shared state vector `Z`, its primed copy `Z'`, and a time variable `T`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::backend::{Backend, BackendError, UnknownReason, Validity, Witness};
use crate::formula::Formula;
use crate::ops;
use crate::term::{Rational, Term, Var, VarVector};

/// A control location: its invariant `inv[Z]` and its flow relation
/// `flow[Z, Z', T]` describing where a continuous step of duration `T`
/// starting at `Z` may end up (`Z'`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Location {
    pub name: String,
    pub inv: Formula,
    pub flow: Formula,
}

/// A discrete edge: guard `act[Z]` enabling the jump and reset relation
/// `res[Z, Z']` relating pre- and post-states.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Edge {
    pub from: String,
    pub to: String,
    pub act: Formula,
    pub res: Formula,
}

/// Structural problems that make an automaton unusable (as opposed to
/// [`Violation`]s, which are reportable data).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum AutomatonError {
    NoLocations,
    DuplicateLocation(String),
    UnknownLocation(String),
    /// The time variable collides with a state variable (plain or primed).
    TimeVariableCollision(Var),
    DimensionMismatch {
        expected: usize,
        actual: usize,
    },
    /// The backend failed as a process (transport, fragment, precondition).
    Backend(BackendError),
    /// The backend answered but could not decide the query.
    Undecided(UnknownReason),
}

impl core::fmt::Display for AutomatonError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            AutomatonError::NoLocations => write!(f, "automaton has no locations"),
            AutomatonError::DuplicateLocation(n) => {
                write!(f, "location `{n}` is declared more than once")
            }
            AutomatonError::UnknownLocation(n) => {
                write!(f, "reference to undeclared location `{n}`")
            }
            AutomatonError::TimeVariableCollision(v) => {
                write!(f, "time variable `{v}` collides with a state variable")
            }
            AutomatonError::DimensionMismatch { expected, actual } => {
                write!(f, "point has dimension {actual}, expected {expected}")
            }
            AutomatonError::Backend(e) => write!(f, "backend error: {e}"),
            AutomatonError::Undecided(r) => write!(f, "query left undecided: {r}"),
        }
    }
}

impl From<BackendError> for AutomatonError {
    fn from(e: BackendError) -> AutomatonError {
        AutomatonError::Backend(e)
    }
}

/// A hybrid automaton over the state vector `Z` (dimension ≥ 1). The primed
/// copy `Z'` and the time variable are fixed at construction; the formula
/// scoping rules (which operation may mention which variables) are checked
/// by [`HybridAutomaton::validate`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HybridAutomaton {
    vars: VarVector,
    primed: VarVector,
    time: Var,
    locations: Vec<Location>,
    edges: Vec<Edge>,
}

impl HybridAutomaton {
    pub fn new(
        vars: VarVector,
        time: Var,
        locations: Vec<Location>,
        edges: Vec<Edge>,
    ) -> Result<HybridAutomaton, AutomatonError> {
        if locations.is_empty() {
            return Err(AutomatonError::NoLocations);
        }
        let primed = vars.primed();
        if vars.contains(&time) || primed.contains(&time) {
            return Err(AutomatonError::TimeVariableCollision(time));
        }
        for (i, loc) in locations.iter().enumerate() {
            if locations[..i].iter().any(|l| l.name == loc.name) {
                return Err(AutomatonError::DuplicateLocation(loc.name.clone()));
            }
        }
        for e in &edges {
            for end in [&e.from, &e.to] {
                if !locations.iter().any(|l| &l.name == end) {
                    return Err(AutomatonError::UnknownLocation(end.clone()));
                }
            }
        }
        Ok(HybridAutomaton {
            vars,
            primed,
            time,
            locations,
            edges,
        })
    }

    pub fn dim(&self) -> usize {
        self.vars.dim()
    }

    /// The state vector `Z`.
    pub fn vars(&self) -> &VarVector {
        &self.vars
    }

    /// The primed copy `Z'`.
    pub fn primed(&self) -> &VarVector {
        &self.primed
    }

    pub fn time(&self) -> &Var {
        &self.time
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn location(&self, name: &str) -> Result<&Location, AutomatonError> {
        self.locations
            .iter()
            .find(|l| l.name == name)
            .ok_or_else(|| AutomatonError::UnknownLocation(String::from(name)))
    }

    /// Edges leaving `from`, in declaration order.
    pub fn edges_from<'a>(&'a self, from: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.from == from)
    }

    /// The formula `Z = Z'` (component-wise conjunction of equalities).
    pub fn identity_formula(&self) -> Formula {
        Formula::and(
            self.vars
                .iter()
                .zip(self.primed.iter())
                .map(|(z, zp)| Formula::eq(Term::var(z.clone()), Term::var(zp.clone())))
                .collect(),
        )
    }

    /// Checks the variable-scoping conventions: invariants over `Z`, guards
    /// over `Z`, resets over `Z ∪ Z'`, flows over `Z ∪ Z' ∪ {T}`. Returns
    /// one violation per formula and offending variable.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let in_z = |v: &Var| self.vars.contains(v);
        let in_zz = |v: &Var| self.vars.contains(v) || self.primed.contains(v);
        let in_zzt = |v: &Var| in_zz(v) || *v == self.time;
        for loc in &self.locations {
            for v in ops::free_vars(&loc.inv) {
                if !in_z(&v) {
                    out.push(Violation::InvariantScope {
                        location: loc.name.clone(),
                        var: v,
                    });
                }
            }
            for v in ops::free_vars(&loc.flow) {
                if !in_zzt(&v) {
                    out.push(Violation::FlowScope {
                        location: loc.name.clone(),
                        var: v,
                    });
                }
            }
        }
        for e in &self.edges {
            for v in ops::free_vars(&e.act) {
                if !in_z(&v) {
                    out.push(Violation::GuardScope {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        var: v,
                    });
                }
            }
            for v in ops::free_vars(&e.res) {
                if !in_zz(&v) {
                    out.push(Violation::ResetScope {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        var: v,
                    });
                }
            }
        }
        out
    }
}

/// A variable-scoping violation found by [`HybridAutomaton::validate`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    InvariantScope { location: String, var: Var },
    FlowScope { location: String, var: Var },
    GuardScope { from: String, to: String, var: Var },
    ResetScope { from: String, to: String, var: Var },
}

impl core::fmt::Display for Violation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Violation::InvariantScope { location, var } => write!(
                f,
                "invariant of location `{location}` mentions `{var}`, which is outside the state vector"
            ),
            Violation::FlowScope { location, var } => write!(
                f,
                "flow of location `{location}` mentions `{var}`, which is not a state variable, primed state variable, or the time variable"
            ),
            Violation::GuardScope { from, to, var } => write!(
                f,
                "guard of edge `{from}` → `{to}` mentions `{var}`, which is outside the state vector"
            ),
            Violation::ResetScope { from, to, var } => write!(
                f,
                "reset of edge `{from}` → `{to}` mentions `{var}`, which is not a state variable or primed state variable"
            ),
        }
    }
}

/// A located point.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct State {
    pub location: String,
    pub point: Vec<Rational>,
}

impl State {
    pub fn new(location: impl Into<String>, point: Vec<Rational>) -> State {
        State {
            location: location.into(),
            point,
        }
    }
}

/// Which half of the zero-time identity condition a location violates.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TimeZeroFailure {
    /// A zero-duration step can move the state: `Inv ∧ flow[T:=0]` admits
    /// `Z' ≠ Z`.
    DriftAtZeroTime,
    /// Staying put is not always a legal zero-duration step: some invariant
    /// point falsifies `flow[Z':=Z, T:=0]`.
    IdentityNotAdmitted,
}

impl core::fmt::Display for TimeZeroFailure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TimeZeroFailure::DriftAtZeroTime => {
                write!(f, "a zero-duration step can change the state")
            }
            TimeZeroFailure::IdentityNotAdmitted => {
                write!(f, "staying put is not admitted as a zero-duration step")
            }
        }
    }
}

/// Per-location verdict of [`time_zero_check`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TimeZeroVerdict {
    Holds,
    Fails(TimeZeroFailure, Option<Witness>),
    Unknown(UnknownReason),
}

/// Decides, per location, whether zero-duration flow steps are exactly the
/// identity on invariant states: both
/// `∀Z ∀Z' ((Inv[Z] ∧ flow[Z,Z',0]) → Z = Z')` and
/// `∀Z (Inv[Z] → flow[Z,Z,0])` must be valid.
pub fn time_zero_check(
    h: &HybridAutomaton,
    backend: &mut dyn Backend,
) -> Result<Vec<(String, TimeZeroVerdict)>, BackendError> {
    let mut out = Vec::new();
    let zero_time: BTreeMap<Var, Term> =
        core::iter::once((h.time().clone(), Term::int(0))).collect();
    let unprime: BTreeMap<Var, Term> = h
        .primed()
        .iter()
        .zip(h.vars().iter())
        .map(|(zp, z)| (zp.clone(), Term::var(z.clone())))
        .collect();
    for loc in h.locations() {
        let flow_zero = ops::substitute(&loc.flow, &zero_time);
        let no_drift = Formula::implies(
            Formula::and(alloc::vec![loc.inv.clone(), flow_zero.clone()]),
            h.identity_formula(),
        );
        let identity_admitted = Formula::implies(
            loc.inv.clone(),
            ops::substitute(&flow_zero, &unprime),
        );
        let verdict = match backend.check_valid(&no_drift)? {
            Validity::Invalid(w) => {
                TimeZeroVerdict::Fails(TimeZeroFailure::DriftAtZeroTime, w)
            }
            first => match backend.check_valid(&identity_admitted)? {
                Validity::Invalid(w) => {
                    TimeZeroVerdict::Fails(TimeZeroFailure::IdentityNotAdmitted, w)
                }
                Validity::Valid => match first {
                    Validity::Valid => TimeZeroVerdict::Holds,
                    Validity::Unknown(r) => TimeZeroVerdict::Unknown(r),
                    Validity::Invalid(_) => unreachable!("handled above"),
                },
                Validity::Unknown(r) => TimeZeroVerdict::Unknown(r),
            },
        };
        out.push((loc.name.clone(), verdict));
    }
    Ok(out)
}

/// Whether the state satisfies its location's invariant: direct evaluation
/// when the invariant is quantifier-free, a ground backend query otherwise.
pub fn admissible(
    h: &HybridAutomaton,
    s: &State,
    backend: &mut dyn Backend,
) -> Result<bool, AutomatonError> {
    if s.point.len() != h.dim() {
        return Err(AutomatonError::DimensionMismatch {
            expected: h.dim(),
            actual: s.point.len(),
        });
    }
    let loc = h.location(&s.location)?;
    let point: BTreeMap<Var, Rational> = h
        .vars()
        .iter()
        .cloned()
        .zip(s.point.iter().cloned())
        .collect();
    if loc.inv.is_quantifier_free() {
        return ops::eval_qf(&loc.inv, &point).map_err(|_| {
            // The scoping invariant guarantees Inv's free variables lie in Z,
            // so evaluation can only fail on out-of-scope formulas.
            AutomatonError::Backend(BackendError::InvalidQuery(String::from(
                "invariant mentions variables outside the state vector",
            )))
        });
    }
    let subst: BTreeMap<Var, Term> = point
        .into_iter()
        .map(|(v, r)| (v, Term::constant(r)))
        .collect();
    let ground = ops::substitute(&loc.inv, &subst);
    match backend.check_sat(&ground)? {
        crate::backend::DecisionOutcome::Sat(_) => Ok(true),
        crate::backend::DecisionOutcome::Unsat => Ok(false),
        crate::backend::DecisionOutcome::Unknown(r) => Err(AutomatonError::Undecided(r)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::BuiltinBackend;
    use crate::samples;
    use crate::term::rat;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn construction_rejects_structural_errors() {
        let vars = VarVector::of(&["Z1"]);
        let loc = Location {
            name: String::from("v"),
            inv: Formula::True,
            flow: Formula::True,
        };
        assert_eq!(
            HybridAutomaton::new(vars.clone(), Var::new("T"), vec![], vec![]),
            Err(AutomatonError::NoLocations)
        );
        assert_eq!(
            HybridAutomaton::new(
                vars.clone(),
                Var::new("Z1"),
                vec![loc.clone()],
                vec![]
            ),
            Err(AutomatonError::TimeVariableCollision(Var::new("Z1")))
        );
        assert_eq!(
            HybridAutomaton::new(
                vars.clone(),
                Var::new("T"),
                vec![loc.clone(), loc.clone()],
                vec![]
            ),
            Err(AutomatonError::DuplicateLocation(String::from("v")))
        );
        let dangling = Edge {
            from: String::from("v"),
            to: String::from("w"),
            act: Formula::True,
            res: Formula::True,
        };
        assert_eq!(
            HybridAutomaton::new(vars, Var::new("T"), vec![loc], vec![dangling]),
            Err(AutomatonError::UnknownLocation(String::from("w")))
        );
    }

    #[test]
    fn sample_models_validate_cleanly() {
        assert_eq!(samples::shrink().validate(), vec![]);
        assert_eq!(samples::two_phase().validate(), vec![]);
    }

    #[test]
    fn validate_flags_out_of_scope_variables() {
        let mut h = samples::shrink();
        // Corrupt the self-loop guard with a primed variable.
        let primed = h.primed()[0].clone();
        h.edges[0].act = Formula::lt(Term::var(primed.clone()), Term::int(0));
        let violations = h.validate();
        assert_eq!(
            violations,
            vec![Violation::GuardScope {
                from: String::from("v"),
                to: String::from("v"),
                var: primed,
            }]
        );
    }

    #[test]
    fn time_zero_holds_for_samples() {
        let mut backend = BuiltinBackend::new();
        for h in [samples::shrink(), samples::two_phase()] {
            for (name, verdict) in time_zero_check(&h, &mut backend).unwrap() {
                assert_eq!(verdict, TimeZeroVerdict::Holds, "location {name}");
            }
        }
    }

    #[test]
    fn time_zero_holds_for_identity_flow() {
        let vars = VarVector::of(&["Z1"]);
        let h = HybridAutomaton::new(
            vars.clone(),
            Var::new("T"),
            vec![Location {
                name: String::from("v"),
                inv: Formula::True,
                flow: Formula::eq(Term::var("Z1'"), Term::var("Z1")),
            }],
            vec![],
        )
        .unwrap();
        let verdicts = time_zero_check(&h, &mut BuiltinBackend::new()).unwrap();
        assert_eq!(verdicts[0].1, TimeZeroVerdict::Holds);
    }

    #[test]
    fn time_zero_fails_without_identity_branch() {
        // The shrinking flow with its zero-duration branch removed: no
        // zero-time step is possible at all, so staying put is not admitted.
        let mut h = samples::shrink();
        h.locations[0].flow = Formula::and(vec![
            Formula::lt(Term::int(0), Term::var("T")),
            Formula::lt(Term::var("Z1"), Term::int(2).mul(Term::var("Z1'"))),
            Formula::le(
                Term::int(2).mul(Term::var("Z1'")),
                Term::int(2).mul(Term::var("Z1")),
            ),
        ]);
        let mut backend = BuiltinBackend::new();
        let verdicts = time_zero_check(&h, &mut backend).unwrap();
        let TimeZeroVerdict::Fails(kind, Some(w)) = &verdicts[0].1 else {
            panic!("expected a failure with witness, got {:?}", verdicts[0].1);
        };
        assert_eq!(*kind, TimeZeroFailure::IdentityNotAdmitted);
        // The witness is an invariant point that admits no zero-time
        // self-step: check it against the invariant.
        let z1 = w.get(&Var::new("Z1")).expect("witness names Z1");
        assert!(z1 >= &rat(-100, 1) && z1 <= &rat(100, 1));
    }

    #[test]
    fn time_zero_fails_on_zero_time_drift() {
        // flow admitting a slack of ±1 at any duration, including zero.
        let vars = VarVector::of(&["Z1"]);
        let h = HybridAutomaton::new(
            vars,
            Var::new("T"),
            vec![Location {
                name: String::from("v"),
                inv: Formula::True,
                flow: Formula::and(vec![
                    Formula::le(
                        Term::var("Z1").sub(Term::int(1)),
                        Term::var("Z1'"),
                    ),
                    Formula::le(
                        Term::var("Z1'"),
                        Term::var("Z1").add(Term::int(1)),
                    ),
                ]),
            }],
            vec![],
        )
        .unwrap();
        let verdicts = time_zero_check(&h, &mut BuiltinBackend::new()).unwrap();
        let TimeZeroVerdict::Fails(kind, Some(w)) = &verdicts[0].1 else {
            panic!("expected drift failure, got {:?}", verdicts[0].1);
        };
        assert_eq!(*kind, TimeZeroFailure::DriftAtZeroTime);
        // The witness falsifies Z = Z'.
        assert_ne!(w.get(&Var::new("Z1")), w.get(&Var::new("Z1'")));
    }

    #[test]
    fn admissibility_examples() {
        let h = samples::shrink();
        let mut backend = BuiltinBackend::new();
        let cases = [
            (rat(10, 1), true),
            (rat(101, 1), false),
            (rat(-100, 1), true),
        ];
        for (value, expected) in cases {
            let s = State::new("v", vec![value.clone()]);
            assert_eq!(
                admissible(&h, &s, &mut backend).unwrap(),
                expected,
                "point {value}"
            );
        }
        let wrong_dim = State::new("v", vec![rat(0, 1), rat(0, 1)]);
        assert!(matches!(
            admissible(&h, &wrong_dim, &mut backend),
            Err(AutomatonError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn admissible_matches_direct_evaluation_on_random_points() {
        let mut backend = BuiltinBackend::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0xad31);
        let shrink = samples::shrink();
        let two_phase = samples::two_phase();
        for _ in 0..1000 {
            let (h, loc_name) = if rng.gen_bool(0.5) {
                (&shrink, "v")
            } else if rng.gen_bool(0.5) {
                (&two_phase, "a")
            } else {
                (&two_phase, "b")
            };
            let value = rat(rng.gen_range(-220i64..=220), rng.gen_range(1i64..=2));
            let s = State::new(loc_name, vec![value.clone()]);
            let inv = &h.location(loc_name).unwrap().inv;
            let point: BTreeMap<Var, Rational> =
                core::iter::once((h.vars()[0].clone(), value)).collect();
            let direct = ops::eval_qf(inv, &point).unwrap();
            assert_eq!(admissible(&h, &s, &mut backend).unwrap(), direct);
        }
    }
}
