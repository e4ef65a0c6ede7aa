//! Exact quantifier pruning for formulas outside the linear fragment.
//!
//! [`prune_quantifiers`] removes quantified variables that admit an exact
//! elimination even when the surrounding atoms are polynomial:
//!
//! * **equality substitution** — a conjunct pinning the variable to a
//!   `v`-free polynomial replaces every other occurrence;
//! * **Fourier–Motzkin** — when the variable occurs with *constant*
//!   coefficients only, its lower and upper bounds (arbitrary polynomials in
//!   the remaining variables) combine pairwise.
//!
//! Variables that occur nonlinearly, with variable coefficients, or inside
//! a quantified subformula that itself resisted elimination are left
//! quantified; the output is always equivalent to the input. The point is
//! to shrink queries before handing them to an external solver whose
//! quantified nonlinear reasoning is expensive, and the procedure never
//! trades exactness for size.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::engine::atoms::{PolyAtom, Rel};
use crate::formula::Formula;
use crate::ops;
use crate::poly::Poly;
use crate::term::{Rational, Var};

/// Upper bound on the number of disjuncts produced while normalizing one
/// quantifier body; beyond it the quantifier is kept as written.
const CUBE_CAP: usize = 512;

/// Eliminates every quantifier that yields to equality substitution or
/// constant-coefficient Fourier–Motzkin; the result is logically equivalent
/// to the input.
pub fn prune_quantifiers(f: &Formula) -> Formula {
    let pruned = prune(&ops::eliminate_implies(f));
    ops::simplify(&pruned)
}

fn prune(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => f.clone(),
        Formula::Not(g) => Formula::not(prune(g)),
        Formula::And(gs) => Formula::and(gs.iter().map(prune).collect()),
        Formula::Or(gs) => Formula::or(gs.iter().map(prune).collect()),
        Formula::Implies(a, b) => Formula::implies(prune(a), prune(b)),
        Formula::Exists(x, body) => {
            let body = prune(body);
            match eliminate_existential(x, &body) {
                Some(out) => out,
                None => Formula::exists(x.clone(), body),
            }
        }
        Formula::Forall(x, body) => {
            let body = prune(body);
            // ∀x φ ≡ ¬∃x ¬φ.
            match eliminate_existential(x, &Formula::not(body.clone())) {
                Some(out) => ops::simplify(&Formula::not(out)),
                None => Formula::forall(x.clone(), body),
            }
        }
    }
}

/// One literal of a disjunct, relative to the variable being eliminated.
#[derive(Clone)]
enum Lit {
    /// Does not mention the variable; carried through opaquely.
    Free(Formula),
    /// A polynomial atom that mentions the variable.
    Bound(PolyAtom),
    /// Mentions the variable but cannot be decomposed (a kept quantifier);
    /// forces the disjunct to stay quantified.
    Stuck(Formula),
}

/// `∃x body` with the quantifier removed wherever possible; `None` when the
/// disjunctive normalization exceeds [`CUBE_CAP`].
fn eliminate_existential(x: &Var, body: &Formula) -> Option<Formula> {
    let cubes = dnf(x, body, false)?;
    let mut out = Vec::with_capacity(cubes.len());
    for cube in cubes {
        out.push(eliminate_cube(x, cube));
    }
    Some(ops::simplify(&Formula::or(out)))
}

/// Disjunctive normal form of `body` (under negation when `negated`), with
/// `x`-free subformulas kept opaque.
fn dnf(x: &Var, body: &Formula, negated: bool) -> Option<Vec<Vec<Lit>>> {
    // A formula that never mentions x needs no decomposition at all.
    if !ops::free_vars(body).contains(x) {
        let f = if negated {
            Formula::not(body.clone())
        } else {
            body.clone()
        };
        return Some(vec![vec![Lit::Free(f)]]);
    }
    match body {
        Formula::Atom { lhs, op, rhs } => {
            let atom = PolyAtom::from_parts(lhs, *op, rhs);
            let lits = if negated { negate_atom(&atom) } else { vec![atom] };
            Some(lits.into_iter().map(|a| vec![Lit::Bound(a)]).collect())
        }
        Formula::Not(g) => dnf(x, g, !negated),
        Formula::And(gs) if !negated => cross(x, gs, negated),
        Formula::Or(gs) if negated => cross(x, gs, negated),
        Formula::And(gs) | Formula::Or(gs) => {
            // Disjunctive position: concatenate the children's disjuncts.
            let mut out = Vec::new();
            for g in gs {
                out.extend(dnf(x, g, negated)?);
                if out.len() > CUBE_CAP {
                    return None;
                }
            }
            Some(out)
        }
        Formula::Implies(a, b) => {
            // a → b ≡ ¬a ∨ b.
            let flipped = Formula::or(vec![Formula::not((**a).clone()), (**b).clone()]);
            dnf(x, &flipped, negated)
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            let f = if negated {
                Formula::not(body.clone())
            } else {
                body.clone()
            };
            Some(vec![vec![Lit::Stuck(f)]])
        }
        Formula::True | Formula::False => unreachable!("handled by the x-free branch"),
    }
}

/// Conjunctive position: the cartesian product of the children's disjuncts.
fn cross(x: &Var, gs: &[Formula], negated: bool) -> Option<Vec<Vec<Lit>>> {
    let mut acc: Vec<Vec<Lit>> = vec![Vec::new()];
    for g in gs {
        let parts = dnf(x, g, negated)?;
        let mut next = Vec::with_capacity(acc.len() * parts.len());
        for cube in &acc {
            for part in &parts {
                let mut merged = cube.clone();
                merged.extend(part.iter().cloned());
                next.push(merged);
            }
        }
        if next.len() > CUBE_CAP {
            return None;
        }
        acc = next;
    }
    Some(acc)
}

/// `¬(p ⋄ 0)` as a disjunction of positive atoms.
fn negate_atom(atom: &PolyAtom) -> Vec<PolyAtom> {
    match atom.rel {
        Rel::Eq => vec![
            PolyAtom::new(atom.poly.clone(), Rel::Lt),
            PolyAtom::new(atom.poly.neg(), Rel::Lt),
        ],
        Rel::Lt => vec![PolyAtom::new(atom.poly.neg(), Rel::Le)],
        Rel::Le => vec![PolyAtom::new(atom.poly.neg(), Rel::Lt)],
    }
}

/// `∃x` over one conjunction of literals.
fn eliminate_cube(x: &Var, cube: Vec<Lit>) -> Formula {
    let mut free = Vec::new();
    let mut bound = Vec::new();
    let mut stuck = false;
    for lit in &cube {
        match lit {
            Lit::Free(f) => free.push(f.clone()),
            Lit::Bound(a) => bound.push(a.clone()),
            Lit::Stuck(_) => stuck = true,
        }
    }
    let rebuild = |cube: &[Lit]| {
        Formula::and(
            cube.iter()
                .map(|lit| match lit {
                    Lit::Free(f) | Lit::Stuck(f) => f.clone(),
                    Lit::Bound(a) => a.to_formula(),
                })
                .collect(),
        )
    };
    if stuck {
        return Formula::exists(x.clone(), rebuild(&cube));
    }
    // Every bound atom must be linear in x with a constant coefficient.
    let mut split = Vec::with_capacity(bound.len());
    for atom in &bound {
        match atom.poly.split_constant_linear(x) {
            Some((c, rest)) => split.push((c, rest, atom.rel)),
            None => return Formula::exists(x.clone(), rebuild(&cube)),
        }
    }
    // Equality substitution: x = −rest/c into every other atom.
    if let Some(pos) = split.iter().position(|(_, _, rel)| *rel == Rel::Eq) {
        let (c, rest, _) = &split[pos];
        let image = rest.scale(&-c.recip());
        for (i, atom) in bound.iter().enumerate() {
            if i == pos {
                continue;
            }
            let substituted = PolyAtom::new(atom.poly.subst(x, &image), atom.rel);
            free.push(substituted.to_formula());
        }
        return Formula::and(free);
    }
    // Fourier–Motzkin: collect lower and upper bounds on x.
    let mut lowers: Vec<(Poly, bool)> = Vec::new();
    let mut uppers: Vec<(Poly, bool)> = Vec::new();
    for (c, rest, rel) in &split {
        debug_assert!(!c.is_zero(), "the atom was classified as mentioning x");
        let edge = rest.scale(&-c.recip());
        let strict = *rel == Rel::Lt;
        if c > &Rational::zero() {
            uppers.push((edge, strict));
        } else {
            lowers.push((edge, strict));
        }
    }
    if !lowers.is_empty() && !uppers.is_empty() {
        for (lo, lo_strict) in &lowers {
            for (hi, hi_strict) in &uppers {
                let rel = if *lo_strict || *hi_strict { Rel::Lt } else { Rel::Le };
                free.push(PolyAtom::new(lo.sub(hi), rel).to_formula());
            }
        }
    }
    // One-sided (or absent) bounds are always satisfiable by some x.
    Formula::and(free)
}
