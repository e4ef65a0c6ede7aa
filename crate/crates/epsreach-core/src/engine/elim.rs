//! Quantifier elimination over disjunctive normal form: cube normalization,
//! Fourier–Motzkin single-variable elimination with strict/weak tracking and
//! equality substitution, witness reconstruction, and interval extraction.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::engine::atoms::{PolyAtom, Rel};
use crate::formula::Formula;
use crate::interval::{Interval, IntervalUnion, LowerBound, UpperBound};
use crate::poly::Poly;
use crate::term::{Rational, Var};

/// Internal engine failures, mapped by the backend wrapper onto honest
/// `Unknown`/error results.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EngineError {
    Unsupported(String),
    Budget(String),
}

/// Deterministic effort budget. Every structural operation spends units; an
/// exhausted budget aborts the query rather than running unboundedly.
pub struct Budget {
    remaining: u64,
}

impl Budget {
    pub fn new(units: u64) -> Budget {
        Budget { remaining: units }
    }

    pub fn spend(&mut self, units: u64) -> Result<(), EngineError> {
        if self.remaining < units {
            self.remaining = 0;
            return Err(EngineError::Budget(String::from(
                "formula expansion exceeded the engine effort budget",
            )));
        }
        self.remaining -= units;
        Ok(())
    }
}

/// A conjunction of polynomial constraints.
pub type Cube = Vec<PolyAtom>;

/// Converts a quantifier-free formula in negation normal form into a list of
/// normalized, mutually non-subsuming cubes (disjunctive normal form).
/// `True` yields one empty cube; `False` yields no cubes. Contradictory
/// conjunction products are discarded as they are formed, which keeps memory
/// proportional to the surviving cubes rather than the raw product size.
pub fn to_dnf(f: &Formula, budget: &mut Budget) -> Result<Vec<Cube>, EngineError> {
    match f {
        Formula::True => Ok(alloc::vec![Vec::new()]),
        Formula::False => Ok(Vec::new()),
        Formula::Atom { lhs, op, rhs } => {
            let atom = PolyAtom::from_parts(lhs, *op, rhs);
            Ok(normalize_cube(&alloc::vec![atom])
                .into_iter()
                .collect())
        }
        Formula::Or(fs) => {
            let mut out = Vec::new();
            for g in fs {
                out.extend(to_dnf(g, budget)?);
            }
            dedup_subsume(out, budget)
        }
        Formula::And(fs) => {
            let mut acc: Vec<Cube> = alloc::vec![Vec::new()];
            for g in fs {
                let cubes = to_dnf(g, budget)?;
                budget.spend((acc.len() as u64).saturating_mul(cubes.len().max(1) as u64))?;
                let mut next = Vec::new();
                for a in &acc {
                    for c in &cubes {
                        let mut merged = a.clone();
                        merged.extend(c.iter().cloned());
                        if let Some(consistent) = normalize_cube(&merged) {
                            next.push(consistent);
                        }
                    }
                }
                acc = dedup_subsume(next, budget)?;
                if acc.is_empty() {
                    return Ok(acc);
                }
            }
            Ok(acc)
        }
        Formula::Not(_) | Formula::Implies(..) => Err(EngineError::Unsupported(String::from(
            "disjunctive normal form requires negation normal form input",
        ))),
        Formula::Exists(..) | Formula::Forall(..) => Err(EngineError::Unsupported(
            String::from("disjunctive normal form requires quantifier-free input"),
        )),
    }
}

/// Accumulated bounds on one normalized left-hand side.
#[derive(Default)]
struct DirectedBounds {
    lower: Option<(Rational, bool)>, // (value, strict)
    upper: Option<(Rational, bool)>,
    eq: Option<Rational>,
}

impl DirectedBounds {
    fn add_lower(&mut self, v: Rational, strict: bool) {
        let replace = match &self.lower {
            None => true,
            Some((cur, cur_strict)) => v > *cur || (v == *cur && strict && !cur_strict),
        };
        if replace {
            self.lower = Some((v, strict));
        }
    }

    fn add_upper(&mut self, v: Rational, strict: bool) {
        let replace = match &self.upper {
            None => true,
            Some((cur, cur_strict)) => v < *cur || (v == *cur && strict && !cur_strict),
        };
        if replace {
            self.upper = Some((v, strict));
        }
    }

    /// `None` means contradictory.
    fn add_eq(&mut self, v: Rational) -> Option<()> {
        match &self.eq {
            None => {
                self.eq = Some(v);
                Some(())
            }
            Some(cur) if *cur == v => Some(()),
            _ => None,
        }
    }

    fn consistent(&self) -> bool {
        if let Some(e) = &self.eq {
            if let Some((lo, strict)) = &self.lower {
                if e < lo || (e == lo && *strict) {
                    return false;
                }
            }
            if let Some((hi, strict)) = &self.upper {
                if e > hi || (e == hi && *strict) {
                    return false;
                }
            }
            return true;
        }
        if let (Some((lo, ls)), Some((hi, hs))) = (&self.lower, &self.upper) {
            if lo > hi {
                return false;
            }
            if lo == hi && (*ls || *hs) {
                return false;
            }
        }
        true
    }
}

/// Removes ground atoms, deduplicates rescaled copies, keeps only the
/// tightest bound per direction, and detects shallow contradictions.
/// Returns `None` when the cube is unsatisfiable on its face.
pub fn normalize_cube(cube: &Cube) -> Option<Cube> {
    let mut table: BTreeMap<Poly, DirectedBounds> = BTreeMap::new();
    for atom in cube {
        if let Some(value) = atom.eval_ground() {
            if value {
                continue;
            }
            return None;
        }
        // Split p = q + c and orient so q's leading coefficient is +1.
        let c = atom.poly.constant_part();
        let q = atom.poly.sub(&Poly::constant(c.clone()));
        let lead = q
            .monomials()
            .next()
            .map(|(_, coeff)| coeff.clone())
            .expect("non-ground atom has a non-constant part");
        let q_hat = q.scale(&lead.recip());
        // q ⋄ −c  ⟺  q̂ ⋄' −c/lead (direction flips when lead < 0)
        let bound = -&c / &lead;
        let entry = table.entry(q_hat).or_default();
        let positive = lead.is_positive();
        match (atom.rel, positive) {
            (Rel::Eq, _) => entry.add_eq(bound)?,
            (Rel::Lt, true) => entry.add_upper(bound, true),
            (Rel::Le, true) => entry.add_upper(bound, false),
            (Rel::Lt, false) => entry.add_lower(bound, true),
            (Rel::Le, false) => entry.add_lower(bound, false),
        }
    }
    let mut out = Vec::new();
    for (q, bounds) in table {
        if !bounds.consistent() {
            return None;
        }
        if let Some(e) = bounds.eq {
            out.push(PolyAtom::new(q.sub(&Poly::constant(e)), Rel::Eq));
            continue;
        }
        // Equal weak bounds collapse to an equality.
        if let (Some((lo, false)), Some((hi, false))) = (&bounds.lower, &bounds.upper) {
            if lo == hi {
                out.push(PolyAtom::new(q.sub(&Poly::constant(lo.clone())), Rel::Eq));
                continue;
            }
        }
        if let Some((lo, strict)) = bounds.lower {
            let rel = if strict { Rel::Lt } else { Rel::Le };
            out.push(PolyAtom::new(Poly::constant(lo).sub(&q), rel));
        }
        if let Some((hi, strict)) = bounds.upper {
            let rel = if strict { Rel::Lt } else { Rel::Le };
            out.push(PolyAtom::new(q.sub(&Poly::constant(hi)), rel));
        }
    }
    Some(out)
}

/// Eliminates `v` from a single cube: equality substitution when an equation
/// is available, Fourier–Motzkin combination otherwise. Requires every
/// occurrence of `v` to be linear with a constant coefficient (bounds may be
/// arbitrary polynomials in the other variables). Returns `None` when the
/// cube collapses to `⊥`.
pub fn fm_step(cube: &Cube, v: &Var, budget: &mut Budget) -> Result<Option<Cube>, EngineError> {
    let Some(cube) = normalize_cube(cube) else {
        return Ok(None);
    };
    if cube.iter().all(|a| a.poly.degree_in(v) == 0) {
        return Ok(Some(cube));
    }
    // Equality substitution: v = −rest/c.
    let eq_candidate = cube.iter().enumerate().find_map(|(i, a)| {
        if a.rel != Rel::Eq || a.poly.degree_in(v) == 0 {
            return None;
        }
        let (c, rest) = a.poly.split_constant_linear(v)?;
        if c.is_zero() {
            return None;
        }
        Some((i, rest.scale(&(-c.recip()))))
    });
    if let Some((skip, replacement)) = eq_candidate {
        budget.spend(cube.len() as u64)?;
        let mut out = Vec::with_capacity(cube.len() - 1);
        for (i, a) in cube.iter().enumerate() {
            if i == skip {
                continue;
            }
            out.push(PolyAtom::new(a.poly.subst(v, &replacement), a.rel));
        }
        return Ok(normalize_cube(&out));
    }
    // Fourier–Motzkin: classify each atom containing v.
    let mut lowers: Vec<(Poly, bool)> = Vec::new(); // v > bound (strict?)
    let mut uppers: Vec<(Poly, bool)> = Vec::new(); // v < bound (strict?)
    let mut free: Cube = Vec::new();
    for a in &cube {
        if a.poly.degree_in(v) == 0 {
            free.push(a.clone());
            continue;
        }
        let Some((c, rest)) = a.poly.split_constant_linear(v) else {
            return Err(EngineError::Unsupported(format!(
                "variable `{v}` occurs nonlinearly or with a non-constant coefficient in `{}`",
                a.to_formula()
            )));
        };
        if c.is_zero() {
            free.push(a.clone());
            continue;
        }
        let bound = rest.scale(&(-c.recip()));
        let strict = a.rel == Rel::Lt;
        match a.rel {
            Rel::Eq => {
                return Err(EngineError::Unsupported(format!(
                    "unexpected equation on `{v}` survived substitution",
                )));
            }
            _ => {
                if c.is_positive() {
                    uppers.push((bound, strict));
                } else {
                    lowers.push((bound, strict));
                }
            }
        }
    }
    budget.spend((lowers.len() as u64).saturating_mul(uppers.len() as u64).max(1))?;
    let mut out = free;
    for (lo, lo_strict) in &lowers {
        for (hi, hi_strict) in &uppers {
            let rel = if *lo_strict || *hi_strict { Rel::Lt } else { Rel::Le };
            out.push(PolyAtom::new(lo.sub(hi), rel));
        }
    }
    Ok(normalize_cube(&out))
}

/// Drops duplicate cubes and cubes subsumed by a syntactically weaker cube
/// (fewer constraints ⇒ larger solution set).
pub fn dedup_subsume(cubes: Vec<Cube>, budget: &mut Budget) -> Result<Vec<Cube>, EngineError> {
    let mut sets: Vec<BTreeSet<PolyAtom>> = Vec::new();
    let mut kept: Vec<Cube> = Vec::new();
    budget.spend((cubes.len() as u64).saturating_mul(cubes.len().max(1) as u64) / 2)?;
    'outer: for cube in cubes {
        let set: BTreeSet<PolyAtom> = cube.iter().map(PolyAtom::normalized).collect();
        let mut i = 0;
        while i < sets.len() {
            if sets[i].is_subset(&set) {
                // an existing weaker cube already covers this one
                continue 'outer;
            }
            if set.is_subset(&sets[i]) {
                sets.remove(i);
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        sets.push(set);
        kept.push(cube);
    }
    Ok(kept)
}

/// Eliminates an existential variable from a disjunction of cubes.
pub fn eliminate_exists(
    cubes: Vec<Cube>,
    v: &Var,
    budget: &mut Budget,
) -> Result<Vec<Cube>, EngineError> {
    let mut out = Vec::new();
    for cube in &cubes {
        if let Some(reduced) = fm_step(cube, v, budget)? {
            out.push(reduced);
        }
    }
    dedup_subsume(out, budget)
}

/// Rebuilds a formula from cubes (deterministic ordering).
pub fn dnf_to_formula(mut cubes: Vec<Cube>) -> Formula {
    for cube in &mut cubes {
        cube.sort();
        cube.dedup();
    }
    cubes.sort();
    cubes.dedup();
    Formula::or(
        cubes
            .into_iter()
            .map(|cube| Formula::and(cube.iter().map(PolyAtom::to_formula).collect()))
            .collect(),
    )
}

/// Recursive quantifier elimination, innermost binder first. Input must be
/// negation normal form with linear atoms; output is quantifier-free.
pub fn qe_formula(f: &Formula, budget: &mut Budget) -> Result<Formula, EngineError> {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => Ok(f.clone()),
        Formula::And(fs) => Ok(Formula::and(
            fs.iter()
                .map(|g| qe_formula(g, budget))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        Formula::Or(fs) => Ok(Formula::or(
            fs.iter()
                .map(|g| qe_formula(g, budget))
                .collect::<Result<Vec<_>, _>>()?,
        )),
        Formula::Not(_) | Formula::Implies(..) => Err(EngineError::Unsupported(String::from(
            "quantifier elimination requires negation normal form input",
        ))),
        Formula::Exists(v, body) => {
            let inner = qe_formula(body, budget)?;
            let cubes = to_dnf(&inner, budget)?;
            let reduced = eliminate_exists(cubes, v, budget)?;
            Ok(dnf_to_formula(reduced))
        }
        Formula::Forall(v, body) => {
            // ∀v.φ ≡ ¬∃v.¬φ
            let inner = qe_formula(body, budget)?;
            let negated = crate::ops::nnf(&Formula::not(inner));
            let cubes = to_dnf(&negated, budget)?;
            let reduced = eliminate_exists(cubes, v, budget)?;
            let eliminated = dnf_to_formula(reduced);
            Ok(crate::ops::nnf(&Formula::not(eliminated)))
        }
    }
}

/// Satisfiability of a quantifier-free linear-atom formula, with witness.
///
/// Eliminates the free variables of each cube in order, then reconstructs a
/// satisfying rational point by back-substitution through the elimination
/// chain.
pub fn sat_with_witness(
    qf: &Formula,
    budget: &mut Budget,
) -> Result<Option<BTreeMap<Var, Rational>>, EngineError> {
    let cubes = to_dnf(qf, budget)?;
    for cube in cubes {
        let Some(start) = normalize_cube(&cube) else {
            continue;
        };
        let vars: Vec<Var> = {
            let mut set = BTreeSet::new();
            for a in &start {
                set.extend(a.poly.vars());
            }
            set.into_iter().collect()
        };
        // Forward elimination, recording each intermediate system.
        let mut chain: Vec<Cube> = alloc::vec![start];
        let mut feasible = true;
        for v in &vars {
            let current = chain.last().unwrap();
            match fm_step(current, v, budget)? {
                Some(next) => chain.push(next),
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible {
            continue;
        }
        // The final system is ground; normalize_cube inside fm_step already
        // verified consistency (it returned Some).
        // Back-substitution: choose values for the variables in reverse
        // elimination order.
        let mut witness: BTreeMap<Var, Rational> = BTreeMap::new();
        for (i, v) in vars.iter().enumerate().rev() {
            let system = &chain[i];
            match choose_value(system, v, &witness) {
                Some(value) => {
                    witness.insert(v.clone(), value);
                }
                None => {
                    // The forward pass proved the cube feasible, so value
                    // selection cannot fail for linear input; refuse to
                    // answer rather than risk a wrong verdict.
                    return Err(EngineError::Unsupported(String::from(
                        "witness reconstruction failed on a feasible constraint system",
                    )));
                }
            }
        }
        return Ok(Some(witness));
    }
    Ok(None)
}

/// Picks a rational value for `v` inside the cube `system`, where all other
/// variables of the cube are already fixed by `fixed`.
fn choose_value(
    system: &Cube,
    v: &Var,
    fixed: &BTreeMap<Var, Rational>,
) -> Option<Rational> {
    let mut lower: Option<(Rational, bool)> = None;
    let mut upper: Option<(Rational, bool)> = None;
    let mut pin: Option<Rational> = None;
    for atom in system {
        if atom.poly.degree_in(v) == 0 {
            continue;
        }
        let (c, rest) = atom.poly.split_constant_linear(v)?;
        if c.is_zero() {
            continue;
        }
        let mut rest_value = rest;
        for (w, val) in fixed {
            rest_value = rest_value.subst(w, &Poly::constant(val.clone()));
        }
        let rest_const = rest_value.as_constant()?;
        let bound = -rest_const / &c;
        match (atom.rel, c.is_positive()) {
            (Rel::Eq, _) => match &pin {
                None => pin = Some(bound),
                Some(p) if *p == bound => {}
                _ => return None,
            },
            (Rel::Lt, true) => merge_upper(&mut upper, bound, true),
            (Rel::Le, true) => merge_upper(&mut upper, bound, false),
            (Rel::Lt, false) => merge_lower(&mut lower, bound, true),
            (Rel::Le, false) => merge_lower(&mut lower, bound, false),
        }
    }
    if let Some(p) = pin {
        let lo_ok = lower
            .as_ref()
            .map_or(true, |(lo, s)| p > *lo || (!s && p == *lo));
        let hi_ok = upper
            .as_ref()
            .map_or(true, |(hi, s)| p < *hi || (!s && p == *hi));
        return (lo_ok && hi_ok).then_some(p);
    }
    match (lower, upper) {
        (None, None) => Some(Rational::zero()),
        (Some((lo, _)), None) => Some(lo + Rational::from_integer(1.into())),
        (None, Some((hi, _))) => Some(hi - Rational::from_integer(1.into())),
        (Some((lo, ls)), Some((hi, hs))) => {
            if lo > hi || (lo == hi && (ls || hs)) {
                None
            } else if lo == hi {
                Some(lo)
            } else {
                Some((lo + hi) / Rational::from_integer(2.into()))
            }
        }
    }
}

fn merge_lower(slot: &mut Option<(Rational, bool)>, v: Rational, strict: bool) {
    let replace = match slot.as_ref() {
        None => true,
        Some((cur, cur_strict)) => v > *cur || (v == *cur && strict && !cur_strict),
    };
    if replace {
        *slot = Some((v, strict));
    }
}

fn merge_upper(slot: &mut Option<(Rational, bool)>, v: Rational, strict: bool) {
    let replace = match slot.as_ref() {
        None => true,
        Some((cur, cur_strict)) => v < *cur || (v == *cur && strict && !cur_strict),
    };
    if replace {
        *slot = Some((v, strict));
    }
}

/// Converts a disjunction of univariate cubes over `v` into an exact
/// interval union.
pub fn dnf_to_interval_union(
    cubes: &[Cube],
    v: &Var,
) -> Result<IntervalUnion, EngineError> {
    let mut pieces: Vec<Interval> = Vec::new();
    for cube in cubes {
        let Some(cube) = normalize_cube(cube) else {
            continue;
        };
        let mut lo = LowerBound::Unbounded;
        let mut hi = UpperBound::Unbounded;
        let mut pin: Option<Rational> = None;
        let mut contradictory = false;
        for atom in &cube {
            if atom.poly.degree_in(v) == 0 {
                match atom.eval_ground() {
                    Some(true) => continue,
                    Some(false) => {
                        contradictory = true;
                        break;
                    }
                    None => {
                        return Err(EngineError::Unsupported(format!(
                            "interval extraction over `{v}` hit a residual variable in `{}`",
                            atom.to_formula()
                        )));
                    }
                }
            }
            let Some((c, rest)) = atom.poly.split_constant_linear(v) else {
                return Err(EngineError::Unsupported(format!(
                    "interval extraction requires `{v}` to occur linearly",
                )));
            };
            let Some(rest_const) = rest.as_constant() else {
                return Err(EngineError::Unsupported(format!(
                    "interval extraction over `{v}` hit a residual variable in `{}`",
                    atom.to_formula()
                )));
            };
            if c.is_zero() {
                continue;
            }
            let bound = -rest_const / &c;
            match (atom.rel, c.is_positive()) {
                (Rel::Eq, _) => match &pin {
                    None => pin = Some(bound),
                    Some(p) if *p == bound => {}
                    _ => {
                        contradictory = true;
                        break;
                    }
                },
                (Rel::Lt, true) => tighten_upper(&mut hi, bound, true),
                (Rel::Le, true) => tighten_upper(&mut hi, bound, false),
                (Rel::Lt, false) => tighten_lower(&mut lo, bound, true),
                (Rel::Le, false) => tighten_lower(&mut lo, bound, false),
            }
        }
        if contradictory {
            continue;
        }
        if let Some(p) = pin {
            let candidate = Interval::point(p);
            let lo_ok = match &lo {
                LowerBound::Unbounded => true,
                LowerBound::Closed(a) => candidate.contains(a) || a < must_point(&candidate),
                LowerBound::Open(a) => a < must_point(&candidate),
            };
            let hi_ok = match &hi {
                UpperBound::Unbounded => true,
                UpperBound::Closed(b) => b >= must_point(&candidate),
                UpperBound::Open(b) => b > must_point(&candidate),
            };
            if lo_ok && hi_ok {
                pieces.push(candidate);
            }
            continue;
        }
        if let Some(piece) = Interval::new(lo, hi) {
            pieces.push(piece);
        }
    }
    Ok(IntervalUnion::from_intervals(pieces))
}

fn must_point(i: &Interval) -> &Rational {
    match i.lower() {
        LowerBound::Closed(a) => a,
        _ => unreachable!("point intervals have closed bounds"),
    }
}

fn tighten_lower(slot: &mut LowerBound, v: Rational, strict: bool) {
    let candidate = if strict {
        LowerBound::Open(v)
    } else {
        LowerBound::Closed(v)
    };
    let replace = match (&*slot, &candidate) {
        (LowerBound::Unbounded, _) => true,
        (LowerBound::Closed(a), LowerBound::Closed(b))
        | (LowerBound::Open(a), LowerBound::Open(b)) => b > a,
        (LowerBound::Closed(a), LowerBound::Open(b)) => b >= a,
        (LowerBound::Open(a), LowerBound::Closed(b)) => b > a,
        (_, LowerBound::Unbounded) => false,
    };
    if replace {
        *slot = candidate;
    }
}

fn tighten_upper(slot: &mut UpperBound, v: Rational, strict: bool) {
    let candidate = if strict {
        UpperBound::Open(v)
    } else {
        UpperBound::Closed(v)
    };
    let replace = match (&*slot, &candidate) {
        (UpperBound::Unbounded, _) => true,
        (UpperBound::Closed(a), UpperBound::Closed(b))
        | (UpperBound::Open(a), UpperBound::Open(b)) => b < a,
        (UpperBound::Closed(a), UpperBound::Open(b)) => b <= a,
        (UpperBound::Open(a), UpperBound::Closed(b)) => b < a,
        (_, UpperBound::Unbounded) => false,
    };
    if replace {
        *slot = candidate;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Cmp;
    use crate::term::{rat, Term};
    use alloc::vec;

    fn budget() -> Budget {
        Budget::new(1_000_000)
    }

    fn atom(lhs: Term, op: Cmp, rhs: Term) -> Formula {
        Formula::atom(lhs, op, rhs)
    }

    #[test]
    fn dnf_distributes_and_over_or() {
        let f = Formula::and(vec![
            Formula::or(vec![
                atom(Term::var("X"), Cmp::Lt, Term::int(0)),
                atom(Term::var("X"), Cmp::Lt, Term::int(1)),
            ]),
            atom(Term::var("Y"), Cmp::Le, Term::int(2)),
        ]);
        let cubes = to_dnf(&f, &mut budget()).unwrap();
        assert_eq!(cubes.len(), 2);
        assert!(cubes.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn normalize_detects_contradiction_and_collapses_weak_bounds() {
        // X < 1 ∧ X > 2 is contradictory.
        let c1 = vec![
            PolyAtom::from_parts(&Term::var("X"), Cmp::Lt, &Term::int(1)),
            PolyAtom::from_parts(&Term::int(2), Cmp::Lt, &Term::var("X")),
        ];
        assert_eq!(normalize_cube(&c1), None);
        // X ≤ 1 ∧ X ≥ 1 collapses to X = 1.
        let c2 = vec![
            PolyAtom::from_parts(&Term::var("X"), Cmp::Le, &Term::int(1)),
            PolyAtom::from_parts(&Term::int(1), Cmp::Le, &Term::var("X")),
        ];
        let n = normalize_cube(&c2).unwrap();
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].rel, Rel::Eq);
        // X < 1 ∧ X ≥ 1 is contradictory.
        let c3 = vec![
            PolyAtom::from_parts(&Term::var("X"), Cmp::Lt, &Term::int(1)),
            PolyAtom::from_parts(&Term::int(1), Cmp::Le, &Term::var("X")),
        ];
        assert_eq!(normalize_cube(&c3), None);
    }

    #[test]
    fn fm_transitivity() {
        // ∃X (Y < X ∧ X < Z) ⇒ Y < Z
        let cube = vec![
            PolyAtom::from_parts(&Term::var("Y"), Cmp::Lt, &Term::var("X")),
            PolyAtom::from_parts(&Term::var("X"), Cmp::Lt, &Term::var("Z")),
        ];
        let out = fm_step(&cube, &Var::new("X"), &mut budget())
            .unwrap()
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].rel, Rel::Lt);
        // Y − Z < 0
        let expected = Poly::var(Var::new("Y")).sub(&Poly::var(Var::new("Z")));
        assert_eq!(out[0].normalized(), PolyAtom::new(expected, Rel::Lt).normalized());
    }

    #[test]
    fn fm_keeps_strictness_of_the_weak_pair_only() {
        // 0 ≤ X ∧ X ≤ 3 ⇒ feasible (0 ≤ 3), eliminated to true
        let cube = vec![
            PolyAtom::from_parts(&Term::int(0), Cmp::Le, &Term::var("X")),
            PolyAtom::from_parts(&Term::var("X"), Cmp::Le, &Term::int(3)),
        ];
        let out = fm_step(&cube, &Var::new("X"), &mut budget())
            .unwrap()
            .unwrap();
        assert!(out.is_empty());
        // 0 < X ∧ X < 0 infeasible
        let bad = vec![
            PolyAtom::from_parts(&Term::int(0), Cmp::Lt, &Term::var("X")),
            PolyAtom::from_parts(&Term::var("X"), Cmp::Lt, &Term::int(0)),
        ];
        assert_eq!(fm_step(&bad, &Var::new("X"), &mut budget()).unwrap(), None);
    }

    #[test]
    fn equality_substitution_handles_nonlinear_rest() {
        // X = Y + 1 ∧ X² ≤ 4 → (Y+1)² ≤ 4 (stays polynomial, no failure)
        let cube = vec![
            PolyAtom::from_parts(
                &Term::var("X"),
                Cmp::Eq,
                &Term::var("Y").add(Term::int(1)),
            ),
            PolyAtom::from_parts(&Term::var("X").squared(), Cmp::Le, &Term::int(4)),
        ];
        let out = fm_step(&cube, &Var::new("X"), &mut budget())
            .unwrap()
            .unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].poly.degree_in(&Var::new("Y")), 2);
    }

    #[test]
    fn nonlinear_occurrence_without_equation_is_unsupported() {
        let cube = vec![PolyAtom::from_parts(
            &Term::var("X").squared(),
            Cmp::Le,
            &Term::int(4),
        )];
        let err = fm_step(&cube, &Var::new("X"), &mut budget()).unwrap_err();
        assert!(matches!(err, EngineError::Unsupported(_)));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let mut tiny = Budget::new(1);
        let f = Formula::and(vec![
            Formula::or(vec![
                atom(Term::var("X"), Cmp::Lt, Term::int(0)),
                atom(Term::var("X"), Cmp::Lt, Term::int(1)),
            ]),
            Formula::or(vec![
                atom(Term::var("Y"), Cmp::Lt, Term::int(0)),
                atom(Term::var("Y"), Cmp::Lt, Term::int(1)),
            ]),
        ]);
        assert!(matches!(
            to_dnf(&f, &mut tiny),
            Err(EngineError::Budget(_))
        ));
    }

    #[test]
    fn witness_for_band() {
        // 3 < X ∧ X < 4
        let f = Formula::and(vec![
            atom(Term::int(3), Cmp::Lt, Term::var("X")),
            atom(Term::var("X"), Cmp::Lt, Term::int(4)),
        ]);
        let w = sat_with_witness(&f, &mut budget()).unwrap().unwrap();
        let x = w.get(&Var::new("X")).unwrap();
        assert!(x > &rat(3, 1) && x < &rat(4, 1));
        assert_eq!(crate::ops::eval_qf(&f, &w), Ok(true));
    }

    #[test]
    fn witness_threads_through_chained_variables() {
        // X < Y ∧ Y < Z ∧ Z < X is infeasible
        let f = Formula::and(vec![
            atom(Term::var("X"), Cmp::Lt, Term::var("Y")),
            atom(Term::var("Y"), Cmp::Lt, Term::var("Z")),
            atom(Term::var("Z"), Cmp::Lt, Term::var("X")),
        ]);
        assert_eq!(sat_with_witness(&f, &mut budget()).unwrap(), None);
        // Drop one atom and it becomes satisfiable with a verified witness.
        let g = Formula::and(vec![
            atom(Term::var("X"), Cmp::Lt, Term::var("Y")),
            atom(Term::var("Y"), Cmp::Lt, Term::var("Z")),
        ]);
        let w = sat_with_witness(&g, &mut budget()).unwrap().unwrap();
        assert_eq!(crate::ops::eval_qf(&g, &w), Ok(true));
    }

    #[test]
    fn equalities_pin_witness_values() {
        let f = Formula::and(vec![
            atom(Term::var("X"), Cmp::Eq, Term::int(7)),
            atom(Term::var("X"), Cmp::Lt, Term::var("Y")),
        ]);
        let w = sat_with_witness(&f, &mut budget()).unwrap().unwrap();
        assert_eq!(w.get(&Var::new("X")), Some(&rat(7, 1)));
        assert_eq!(crate::ops::eval_qf(&f, &w), Ok(true));
    }

    #[test]
    fn interval_extraction_reads_strictness() {
        // 5 < X ∧ X ≤ 10
        let cube = vec![
            PolyAtom::from_parts(&Term::int(5), Cmp::Lt, &Term::var("X")),
            PolyAtom::from_parts(&Term::var("X"), Cmp::Le, &Term::int(10)),
        ];
        let u = dnf_to_interval_union(&[cube], &Var::new("X")).unwrap();
        assert_eq!(
            u,
            IntervalUnion::singleton(Interval::open_closed(rat(5, 1), rat(10, 1)).unwrap())
        );
    }

    #[test]
    fn interval_extraction_handles_points_and_unions() {
        let c1 = vec![PolyAtom::from_parts(&Term::var("X"), Cmp::Eq, &Term::int(3))];
        let c2 = vec![
            PolyAtom::from_parts(&Term::int(5), Cmp::Lt, &Term::var("X")),
            PolyAtom::from_parts(&Term::var("X"), Cmp::Lt, &Term::int(6)),
        ];
        let u = dnf_to_interval_union(&[c1, c2], &Var::new("X")).unwrap();
        assert_eq!(u.pieces().len(), 2);
        assert!(u.contains(&rat(3, 1)));
        assert!(u.contains(&rat(11, 2)));
        assert!(!u.contains(&rat(5, 1)));
    }

    #[test]
    fn subsumption_removes_stronger_duplicate_cubes() {
        let weak = vec![PolyAtom::from_parts(&Term::var("X"), Cmp::Lt, &Term::int(1))];
        let strong = vec![
            PolyAtom::from_parts(&Term::var("X"), Cmp::Lt, &Term::int(1)),
            PolyAtom::from_parts(&Term::int(0), Cmp::Lt, &Term::var("X")),
        ];
        let kept = dedup_subsume(vec![weak.clone(), strong], &mut budget()).unwrap();
        assert_eq!(kept, vec![weak]);
    }
}
