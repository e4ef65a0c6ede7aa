//! Structural operations on terms and formulas: free variables, capture-
//! avoiding substitution, exact evaluation, ball atoms, and the normal forms
//! required by the decision engine (implication elimination, negation normal
//! form, renaming apart, prenex form, and propositional simplification).

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::Zero;

use crate::formula::{Cmp, Formula};
use crate::term::{Rational, Term, Var, VarVector};

/// Collects the variables occurring in a term.
pub fn term_vars(t: &Term, out: &mut BTreeSet<Var>) {
    match t {
        Term::Const(_) => {}
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::Sum(ts) | Term::Product(ts) => {
            for s in ts {
                term_vars(s, out);
            }
        }
        Term::Neg(s) => term_vars(s, out),
        Term::Pow(s, _) => term_vars(s, out),
    }
}

/// The set of variables with a free occurrence in `f`.
pub fn free_vars(f: &Formula) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    let mut bound = Vec::new();
    free_vars_rec(f, &mut bound, &mut out);
    out
}

fn free_vars_rec(f: &Formula, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom { lhs, rhs, .. } => {
            let mut vars = BTreeSet::new();
            term_vars(lhs, &mut vars);
            term_vars(rhs, &mut vars);
            for v in vars {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        }
        Formula::Not(g) => free_vars_rec(g, bound, out),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                free_vars_rec(g, bound, out);
            }
        }
        Formula::Implies(a, b) => {
            free_vars_rec(a, bound, out);
            free_vars_rec(b, bound, out);
        }
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            bound.push(v.clone());
            free_vars_rec(body, bound, out);
            bound.pop();
        }
    }
}

/// Every variable name occurring in `f`, free or bound.
pub fn all_var_names(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    all_var_names_rec(f, &mut out);
    out
}

fn all_var_names_rec(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::Atom { lhs, rhs, .. } => {
            let mut vars = BTreeSet::new();
            term_vars(lhs, &mut vars);
            term_vars(rhs, &mut vars);
            for v in vars {
                out.insert(v.name().to_string());
            }
        }
        Formula::Not(g) => all_var_names_rec(g, out),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                all_var_names_rec(g, out);
            }
        }
        Formula::Implies(a, b) => {
            all_var_names_rec(a, out);
            all_var_names_rec(b, out);
        }
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            out.insert(v.name().to_string());
            all_var_names_rec(body, out);
        }
    }
}

/// Picks a name of the shape `root@k` (smallest `k ≥ 1`) that does not occur
/// in `taken`, where `root` is `base` truncated at its first `@`. The chosen
/// name is inserted into `taken`.
pub fn fresh_var(base: &Var, taken: &mut BTreeSet<String>) -> Var {
    let name = base.name();
    let root = match name.find('@') {
        Some(i) => &name[..i],
        None => name,
    };
    let mut k: u64 = 1;
    loop {
        let candidate = format!("{root}@{k}");
        if !taken.contains(candidate.as_str()) {
            taken.insert(candidate.clone());
            return Var::new(candidate);
        }
        k += 1;
    }
}

/// Substitutes variables in a term (terms contain no binders).
pub fn substitute_term(t: &Term, map: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Const(_) => t.clone(),
        Term::Var(v) => match map.get(v) {
            Some(r) => r.clone(),
            None => t.clone(),
        },
        Term::Sum(ts) => Term::Sum(ts.iter().map(|s| substitute_term(s, map)).collect()),
        Term::Product(ts) => Term::Product(ts.iter().map(|s| substitute_term(s, map)).collect()),
        Term::Neg(s) => Term::Neg(Box::new(substitute_term(s, map))),
        Term::Pow(s, k) => Term::Pow(Box::new(substitute_term(s, map)), *k),
    }
}

/// Capture-avoiding simultaneous substitution of free variables.
///
/// Bound variables that would capture a variable of a replacement term are
/// renamed to fresh `name@k` variants first.
pub fn substitute(f: &Formula, map: &BTreeMap<Var, Term>) -> Formula {
    if map.is_empty() {
        return f.clone();
    }
    // Names that must not be captured or reused when inventing fresh ones.
    let mut taken = all_var_names(f);
    let mut range_vars = BTreeSet::new();
    for t in map.values() {
        term_vars(t, &mut range_vars);
    }
    for v in map.keys() {
        taken.insert(v.name().to_string());
    }
    for v in &range_vars {
        taken.insert(v.name().to_string());
    }
    substitute_rec(f, map, &range_vars, &mut taken)
}

fn substitute_rec(
    f: &Formula,
    map: &BTreeMap<Var, Term>,
    range_vars: &BTreeSet<Var>,
    taken: &mut BTreeSet<String>,
) -> Formula {
    if map.is_empty() {
        return f.clone();
    }
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom { lhs, op, rhs } => Formula::Atom {
            lhs: substitute_term(lhs, map),
            op: *op,
            rhs: substitute_term(rhs, map),
        },
        Formula::Not(g) => Formula::not(substitute_rec(g, map, range_vars, taken)),
        Formula::And(fs) => Formula::And(
            fs.iter()
                .map(|g| substitute_rec(g, map, range_vars, taken))
                .collect(),
        ),
        Formula::Or(fs) => Formula::Or(
            fs.iter()
                .map(|g| substitute_rec(g, map, range_vars, taken))
                .collect(),
        ),
        Formula::Implies(a, b) => Formula::implies(
            substitute_rec(a, map, range_vars, taken),
            substitute_rec(b, map, range_vars, taken),
        ),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let is_exists = matches!(f, Formula::Exists(..));
            // The binder shadows any substitution for its own name.
            let mut inner: BTreeMap<Var, Term> = map.clone();
            inner.remove(v);
            let (v2, body2) = if inner.is_empty() {
                (v.clone(), (**body).clone())
            } else if range_vars.contains(v) {
                // Renaming is required: a replacement term mentions `v`.
                let fresh = fresh_var(v, taken);
                let mut rename = BTreeMap::new();
                rename.insert(v.clone(), Term::Var(fresh.clone()));
                let renamed = substitute_rec(body, &rename, &BTreeSet::new(), taken);
                (fresh, renamed)
            } else {
                (v.clone(), (**body).clone())
            };
            let new_body = substitute_rec(&body2, &inner, range_vars, taken);
            if is_exists {
                Formula::exists(v2, new_body)
            } else {
                Formula::forall(v2, new_body)
            }
        }
    }
}

/// Errors raised by exact evaluation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum EvalError {
    UnboundVariable(Var),
    NotQuantifierFree,
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::UnboundVariable(v) => write!(f, "no value given for variable `{v}`"),
            EvalError::NotQuantifierFree => write!(f, "formula contains quantifiers"),
        }
    }
}

/// Evaluates a term at a rational point.
pub fn eval_term(t: &Term, point: &BTreeMap<Var, Rational>) -> Result<Rational, EvalError> {
    match t {
        Term::Const(r) => Ok(r.clone()),
        Term::Var(v) => point
            .get(v)
            .cloned()
            .ok_or_else(|| EvalError::UnboundVariable(v.clone())),
        Term::Sum(ts) => {
            let mut acc = Rational::zero();
            for s in ts {
                acc += eval_term(s, point)?;
            }
            Ok(acc)
        }
        Term::Product(ts) => {
            let mut acc = Rational::from_integer(1.into());
            for s in ts {
                acc *= eval_term(s, point)?;
            }
            Ok(acc)
        }
        Term::Neg(s) => Ok(-eval_term(s, point)?),
        Term::Pow(s, k) => {
            let base = eval_term(s, point)?;
            let mut acc = Rational::from_integer(1.into());
            for _ in 0..*k {
                acc *= &base;
            }
            Ok(acc)
        }
    }
}

/// Exact truth value of a quantifier-free formula at a rational point.
pub fn eval_qf(f: &Formula, point: &BTreeMap<Var, Rational>) -> Result<bool, EvalError> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Atom { lhs, op, rhs } => {
            let l = eval_term(lhs, point)?;
            let r = eval_term(rhs, point)?;
            Ok(match op {
                Cmp::Eq => l == r,
                Cmp::Lt => l < r,
                Cmp::Le => l <= r,
            })
        }
        Formula::Not(g) => Ok(!eval_qf(g, point)?),
        Formula::And(fs) => {
            for g in fs {
                if !eval_qf(g, point)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval_qf(g, point)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Implies(a, b) => Ok(!eval_qf(a, point)? || eval_qf(b, point)?),
        Formula::Exists(..) | Formula::Forall(..) => Err(EvalError::NotQuantifierFree),
    }
}

/// Errors raised by [`ball_atom`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BallAtomError {
    DimensionMismatch { center: usize, point: usize },
    NonPositiveRadius,
}

impl core::fmt::Display for BallAtomError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BallAtomError::DimensionMismatch { center, point } => write!(
                f,
                "ball atom dimensions differ: center has {center}, point has {point}"
            ),
            BallAtomError::NonPositiveRadius => write!(f, "ball atom radius must be positive"),
        }
    }
}

/// The single polynomial atom `Σ_i (center_i − point_i)² < radius²`, the
/// definable encoding of "the euclidean distance between `center` and
/// `point` is below `radius`".
pub fn ball_atom(
    center: &VarVector,
    point: &VarVector,
    radius: &Rational,
) -> Result<Formula, BallAtomError> {
    if center.dim() != point.dim() {
        return Err(BallAtomError::DimensionMismatch {
            center: center.dim(),
            point: point.dim(),
        });
    }
    if radius <= &Rational::zero() {
        return Err(BallAtomError::NonPositiveRadius);
    }
    let squares: Vec<Term> = center
        .iter()
        .zip(point.iter())
        .map(|(c, p)| Term::var(c.clone()).sub(Term::var(p.clone())).squared())
        .collect();
    Ok(Formula::lt(
        Term::sum(squares),
        Term::constant(radius * radius),
    ))
}

/// Replaces every implication `a → b` by `¬a ∨ b`.
pub fn eliminate_implies(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => f.clone(),
        Formula::Not(g) => Formula::not(eliminate_implies(g)),
        Formula::And(fs) => Formula::And(fs.iter().map(eliminate_implies).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(eliminate_implies).collect()),
        Formula::Implies(a, b) => Formula::Or(alloc::vec![
            Formula::not(eliminate_implies(a)),
            eliminate_implies(b),
        ]),
        Formula::Exists(v, b) => Formula::exists(v.clone(), eliminate_implies(b)),
        Formula::Forall(v, b) => Formula::forall(v.clone(), eliminate_implies(b)),
    }
}

/// Negation normal form. The output contains no `Not` and no `Implies`:
/// negation is pushed to the atoms and resolved there (`¬(a<b)` becomes
/// `b≤a`, `¬(a≤b)` becomes `b<a`, `¬(a=b)` becomes `a<b ∨ b<a`).
pub fn nnf(f: &Formula) -> Formula {
    nnf_pos(f)
}

fn nnf_pos(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => f.clone(),
        Formula::Not(g) => nnf_neg(g),
        Formula::And(fs) => Formula::and(fs.iter().map(nnf_pos).collect()),
        Formula::Or(fs) => Formula::or(fs.iter().map(nnf_pos).collect()),
        Formula::Implies(a, b) => Formula::or(alloc::vec![nnf_neg(a), nnf_pos(b)]),
        Formula::Exists(v, b) => Formula::exists(v.clone(), nnf_pos(b)),
        Formula::Forall(v, b) => Formula::forall(v.clone(), nnf_pos(b)),
    }
}

fn nnf_neg(f: &Formula) -> Formula {
    match f {
        Formula::True => Formula::False,
        Formula::False => Formula::True,
        Formula::Atom { lhs, op, rhs } => match op {
            Cmp::Eq => Formula::or(alloc::vec![
                Formula::lt(lhs.clone(), rhs.clone()),
                Formula::lt(rhs.clone(), lhs.clone()),
            ]),
            Cmp::Lt => Formula::le(rhs.clone(), lhs.clone()),
            Cmp::Le => Formula::lt(rhs.clone(), lhs.clone()),
        },
        Formula::Not(g) => nnf_pos(g),
        Formula::And(fs) => Formula::or(fs.iter().map(nnf_neg).collect()),
        Formula::Or(fs) => Formula::and(fs.iter().map(nnf_neg).collect()),
        Formula::Implies(a, b) => Formula::and(alloc::vec![nnf_pos(a), nnf_neg(b)]),
        Formula::Exists(v, b) => Formula::forall(v.clone(), nnf_neg(b)),
        Formula::Forall(v, b) => Formula::exists(v.clone(), nnf_neg(b)),
    }
}

/// Renames bound variables so that every binder introduces a name distinct
/// from all free variables and from every other binder in the formula.
pub fn rename_apart(f: &Formula) -> Formula {
    let mut taken: BTreeSet<String> = free_vars(f)
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    rename_apart_rec(f, &BTreeMap::new(), &mut taken)
}

/// Like [`rename_apart`], additionally avoiding the names in `avoid`.
pub fn rename_apart_avoiding(f: &Formula, avoid: &BTreeSet<String>) -> Formula {
    let mut taken: BTreeSet<String> = free_vars(f)
        .iter()
        .map(|v| v.name().to_string())
        .collect();
    taken.extend(avoid.iter().cloned());
    rename_apart_rec(f, &BTreeMap::new(), &mut taken)
}

fn rename_apart_rec(
    f: &Formula,
    env: &BTreeMap<Var, Var>,
    taken: &mut BTreeSet<String>,
) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom { lhs, op, rhs } => {
            let map: BTreeMap<Var, Term> = env
                .iter()
                .map(|(k, v)| (k.clone(), Term::Var(v.clone())))
                .collect();
            Formula::Atom {
                lhs: substitute_term(lhs, &map),
                op: *op,
                rhs: substitute_term(rhs, &map),
            }
        }
        Formula::Not(g) => Formula::not(rename_apart_rec(g, env, taken)),
        Formula::And(fs) => Formula::And(
            fs.iter()
                .map(|g| rename_apart_rec(g, env, taken))
                .collect(),
        ),
        Formula::Or(fs) => Formula::Or(
            fs.iter()
                .map(|g| rename_apart_rec(g, env, taken))
                .collect(),
        ),
        Formula::Implies(a, b) => Formula::implies(
            rename_apart_rec(a, env, taken),
            rename_apart_rec(b, env, taken),
        ),
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let new_v = if taken.contains(v.name()) {
                fresh_var(v, taken)
            } else {
                taken.insert(v.name().to_string());
                v.clone()
            };
            let mut inner = env.clone();
            inner.insert(v.clone(), new_v.clone());
            let new_body = rename_apart_rec(body, &inner, taken);
            if matches!(f, Formula::Exists(..)) {
                Formula::exists(new_v, new_body)
            } else {
                Formula::forall(new_v, new_body)
            }
        }
    }
}

/// Prenex normal form: all quantifiers outermost, over a quantifier-free
/// matrix in negation normal form. Binders are renamed apart first, so the
/// extracted prefix never captures.
pub fn prenex(f: &Formula) -> Formula {
    let g = rename_apart(&nnf(f));
    let mut prefix: Vec<(bool, Var)> = Vec::new();
    let matrix = pull_quantifiers(&g, &mut prefix);
    prefix
        .into_iter()
        .rev()
        .fold(matrix, |acc, (is_exists, v)| {
            if is_exists {
                Formula::exists(v, acc)
            } else {
                Formula::forall(v, acc)
            }
        })
}

fn pull_quantifiers(f: &Formula, prefix: &mut Vec<(bool, Var)>) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } | Formula::Not(_) => f.clone(),
        Formula::And(fs) => Formula::and(
            fs.iter()
                .map(|g| pull_quantifiers(g, prefix))
                .collect(),
        ),
        Formula::Or(fs) => Formula::or(
            fs.iter()
                .map(|g| pull_quantifiers(g, prefix))
                .collect(),
        ),
        Formula::Implies(a, b) => {
            // `nnf` removes implications; handle defensively anyway.
            let a2 = pull_quantifiers(a, prefix);
            let b2 = pull_quantifiers(b, prefix);
            Formula::implies(a2, b2)
        }
        Formula::Exists(v, body) => {
            prefix.push((true, v.clone()));
            pull_quantifiers(body, prefix)
        }
        Formula::Forall(v, body) => {
            prefix.push((false, v.clone()));
            pull_quantifiers(body, prefix)
        }
    }
}

/// Propositional and arithmetic housekeeping: flattens nested `And`/`Or`,
/// absorbs `⊤`/`⊥`, deduplicates identical siblings, folds closed atoms to
/// constants, collapses double negation, and drops binders whose variable
/// does not occur free in the body. The result is logically equivalent.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom { lhs, op, rhs } => {
            let empty = BTreeMap::new();
            if let (Ok(l), Ok(r)) = (eval_term(lhs, &empty), eval_term(rhs, &empty)) {
                let value = match op {
                    Cmp::Eq => l == r,
                    Cmp::Lt => l < r,
                    Cmp::Le => l <= r,
                };
                return if value { Formula::True } else { Formula::False };
            }
            if lhs == rhs {
                return match op {
                    Cmp::Eq | Cmp::Le => Formula::True,
                    Cmp::Lt => Formula::False,
                };
            }
            f.clone()
        }
        Formula::Not(g) => {
            let g2 = simplify(g);
            match g2 {
                Formula::True => Formula::False,
                Formula::False => Formula::True,
                Formula::Not(h) => *h,
                other => Formula::not(other),
            }
        }
        Formula::And(fs) => {
            let mut out: Vec<Formula> = Vec::new();
            let mut seen: BTreeSet<Formula> = BTreeSet::new();
            for g in fs {
                let g2 = simplify(g);
                match g2 {
                    Formula::True => {}
                    Formula::False => return Formula::False,
                    Formula::And(inner) => {
                        for h in inner {
                            if h == Formula::False {
                                return Formula::False;
                            }
                            if h != Formula::True && seen.insert(h.clone()) {
                                out.push(h);
                            }
                        }
                    }
                    other => {
                        if seen.insert(other.clone()) {
                            out.push(other);
                        }
                    }
                }
            }
            Formula::and(out)
        }
        Formula::Or(fs) => {
            let mut out: Vec<Formula> = Vec::new();
            let mut seen: BTreeSet<Formula> = BTreeSet::new();
            for g in fs {
                let g2 = simplify(g);
                match g2 {
                    Formula::False => {}
                    Formula::True => return Formula::True,
                    Formula::Or(inner) => {
                        for h in inner {
                            if h == Formula::True {
                                return Formula::True;
                            }
                            if h != Formula::False && seen.insert(h.clone()) {
                                out.push(h);
                            }
                        }
                    }
                    other => {
                        if seen.insert(other.clone()) {
                            out.push(other);
                        }
                    }
                }
            }
            Formula::or(out)
        }
        Formula::Implies(a, b) => {
            let a2 = simplify(a);
            let b2 = simplify(b);
            match (&a2, &b2) {
                (Formula::True, _) => b2,
                (Formula::False, _) => Formula::True,
                (_, Formula::True) => Formula::True,
                (_, Formula::False) => simplify(&Formula::not(a2)),
                _ => Formula::implies(a2, b2),
            }
        }
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let b2 = simplify(body);
            match b2 {
                Formula::True => Formula::True,
                Formula::False => Formula::False,
                other => {
                    if !free_vars(&other).contains(v) {
                        other
                    } else if matches!(f, Formula::Exists(..)) {
                        Formula::exists(v.clone(), other)
                    } else {
                        Formula::forall(v.clone(), other)
                    }
                }
            }
        }
    }
}
