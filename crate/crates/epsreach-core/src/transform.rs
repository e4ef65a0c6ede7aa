//! Radius-indexed approximation transforms on formulas.
//!
//! All operations here perturb a designated vector of *approximated
//! variables* by a positive rational radius `ε`, measured in euclidean
//! distance. Free variables outside that vector are parameters: they are
//! never perturbed, and every transform commutes with substituting a
//! constant for them.
//!
//! * [`expand`] grows the described set by `ε` (the open dilation): a point
//!   satisfies the result iff some point within distance `ε` satisfies the
//!   input.
//! * [`filled_ball`] keeps only the part of the set coverable by open
//!   `ε`-balls (the opening): the union of all open `ε`-balls contained in
//!   the set.
//! * [`contract`] is the structural under-approximation: atoms and negated
//!   subformulas are replaced by their filled-ball interior, conjunctions
//!   and universal quantifiers are interiorised after recursing, and
//!   disjunctions and existential quantifiers distribute.
//! * [`sphere`] is the structural mixed approximation: atoms are expanded,
//!   while conjunctions, universal quantifiers, and negations (after
//!   recursing into the negated subformula) are interiorised.
//!
//! Both structural transforms treat a quantifier-bound variable as a
//! parameter inside its scope, even if it names an approximated variable.
//! Subformulas in which no approximated variable occurs free describe
//! cylinders over the perturbed coordinates; dilation and opening leave
//! cylinders unchanged, so such subformulas pass through verbatim.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::formula::Formula;
use crate::ops;
use crate::reach::FreshBlocks;
use crate::term::{Rational, Term, Var, VarVector};
use num_traits::Zero;

/// Shared configuration for the approximation transforms: the perturbation
/// radius and the vector of variables it applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformConfig {
    epsilon: Rational,
    approx_vars: VarVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformError {
    /// The radius must be strictly positive.
    NonPositiveRadius,
}

impl core::fmt::Display for TransformError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TransformError::NonPositiveRadius => {
                write!(f, "approximation radius must be strictly positive")
            }
        }
    }
}

impl TransformConfig {
    /// Builds a configuration; fails unless `epsilon > 0`. Non-emptiness and
    /// distinctness of the approximated variables are guaranteed by
    /// [`VarVector`] itself.
    pub fn new(
        epsilon: Rational,
        approx_vars: VarVector,
    ) -> Result<TransformConfig, TransformError> {
        if epsilon <= Rational::zero() {
            return Err(TransformError::NonPositiveRadius);
        }
        Ok(TransformConfig {
            epsilon,
            approx_vars,
        })
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    pub fn approx_vars(&self) -> &VarVector {
        &self.approx_vars
    }

    /// Same radius, different approximated variables.
    pub fn with_vars(&self, approx_vars: VarVector) -> TransformConfig {
        TransformConfig {
            epsilon: self.epsilon.clone(),
            approx_vars,
        }
    }
}

/// Grows the set described by `f` by the radius: the result holds at a point
/// exactly when `f` holds somewhere within open distance `ε` of it.
///
/// Shape: `∃C (f[C/approx] ∧ dist(C, approx) < ε)` over a fresh copy `C` of
/// the approximated vector. Approximated variables that do not occur in `f`
/// are fine; `f` is then unconstrained in those coordinates and remains so.
pub fn expand(f: &Formula, cfg: &TransformConfig) -> Formula {
    ops::simplify(&expand_raw(f, &cfg.epsilon, cfg.approx_vars.vars()))
}

/// Keeps exactly the union of the open `ε`-balls contained in the set
/// described by `f` (its morphological opening).
///
/// Shape: `∃C (dist(C, approx) < ε ∧ ∀Y (dist(Y, C) < ε → f[Y/approx]))`
/// over fresh copies `C` (ball centers) and `Y` (probe points).
pub fn filled_ball(f: &Formula, cfg: &TransformConfig) -> Formula {
    ops::simplify(&filled_ball_raw(f, &cfg.epsilon, cfg.approx_vars.vars()))
}

/// Structural under-approximation of `f`. Every model of the result is a
/// model of `f`, and the described set is a union of open `ε`-balls at each
/// interiorised node. Negated subformulas keep their ordinary meaning (the
/// transform does not recurse into them) and are interiorised from outside.
pub fn contract(f: &Formula, cfg: &TransformConfig) -> Formula {
    let prepared = ops::eliminate_implies(f);
    ops::simplify(&contract_rec(
        &prepared,
        &cfg.epsilon,
        cfg.approx_vars.vars(),
    ))
}

/// Structural mixed approximation of `f`: atoms are dilated by `ε`, while
/// conjunctions, universal quantifiers, and negations are interiorised after
/// recursing (negation recurses into its subformula, unlike [`contract`]).
pub fn sphere(f: &Formula, cfg: &TransformConfig) -> Formula {
    let prepared = ops::eliminate_implies(f);
    ops::simplify(&sphere_rec(&prepared, &cfg.epsilon, cfg.approx_vars.vars()))
}

/// True when at least one approximated variable occurs free in `f`; when
/// none does, the described set is a cylinder over the perturbed coordinates
/// and every transform acts as the identity on it.
fn perturbs(f: &Formula, approx: &[Var]) -> bool {
    let free = ops::free_vars(f);
    approx.iter().any(|v| free.contains(v))
}

/// Fresh block counter covering every name in `f` and the approximated
/// variables, so copies never collide with existing `name@k` names.
fn fresh_scan(f: &Formula, approx: &[Var]) -> FreshBlocks {
    let mut names = ops::all_var_names(f);
    for v in approx {
        names.insert(String::from(v.name()));
    }
    FreshBlocks::scanning(names.iter().map(String::as_str))
}

/// A copy `x@k` of every approximated variable, sharing one block index.
fn block_copy(approx: &[Var], block: u64) -> Vec<Var> {
    approx
        .iter()
        .map(|v| Var::new(format!("{}@{}", v.name(), block)))
        .collect()
}

fn rename_map(from: &[Var], to: &[Var]) -> BTreeMap<Var, Term> {
    from.iter()
        .cloned()
        .zip(to.iter().cloned().map(Term::var))
        .collect()
}

fn expand_raw(f: &Formula, eps: &Rational, approx: &[Var]) -> Formula {
    if !perturbs(f, approx) {
        return f.clone();
    }
    let mut blocks = fresh_scan(f, approx);
    let centers = block_copy(approx, blocks.alloc());
    let moved = ops::substitute(f, &rename_map(approx, &centers));
    let center_vec = VarVector::new(centers.clone()).expect("fresh copies stay distinct");
    let approx_vec = VarVector::new(approx.to_vec()).expect("approximated variables are distinct");
    let ball = ops::ball_atom(&center_vec, &approx_vec, eps)
        .expect("radius is positive and dimensions match");
    Formula::exists_many(&centers, Formula::and(vec![moved, ball]))
}

fn filled_ball_raw(f: &Formula, eps: &Rational, approx: &[Var]) -> Formula {
    if !perturbs(f, approx) {
        return f.clone();
    }
    let mut blocks = fresh_scan(f, approx);
    let centers = block_copy(approx, blocks.alloc());
    let probes = block_copy(approx, blocks.alloc());
    let center_vec = VarVector::new(centers.clone()).expect("fresh copies stay distinct");
    let probe_vec = VarVector::new(probes.clone()).expect("fresh copies stay distinct");
    let approx_vec = VarVector::new(approx.to_vec()).expect("approximated variables are distinct");
    let center_near = ops::ball_atom(&center_vec, &approx_vec, eps)
        .expect("radius is positive and dimensions match");
    let probe_near = ops::ball_atom(&probe_vec, &center_vec, eps)
        .expect("radius is positive and dimensions match");
    let moved = ops::substitute(f, &rename_map(approx, &probes));
    Formula::exists_many(
        &centers,
        Formula::and(vec![
            center_near,
            Formula::forall_many(&probes, Formula::implies(probe_near, moved)),
        ]),
    )
}

/// Drops a quantifier-bound variable from the approximated vector for the
/// duration of its scope: inside, it is a parameter.
fn demote(approx: &[Var], bound: &Var) -> Vec<Var> {
    approx.iter().filter(|v| *v != bound).cloned().collect()
}

fn contract_rec(f: &Formula, eps: &Rational, approx: &[Var]) -> Formula {
    if !perturbs(f, approx) {
        return f.clone();
    }
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => filled_ball_raw(f, eps, approx),
        Formula::And(parts) => {
            let inner = Formula::and(
                parts
                    .iter()
                    .map(|p| contract_rec(p, eps, approx))
                    .collect(),
            );
            filled_ball_raw(&inner, eps, approx)
        }
        Formula::Or(parts) => Formula::or(
            parts
                .iter()
                .map(|p| contract_rec(p, eps, approx))
                .collect(),
        ),
        // The negated subformula keeps its ordinary meaning.
        Formula::Not(_) => filled_ball_raw(f, eps, approx),
        Formula::Implies(..) => contract_rec(&ops::eliminate_implies(f), eps, approx),
        Formula::Exists(x, body) => {
            Formula::exists(x.clone(), contract_rec(body, eps, &demote(approx, x)))
        }
        Formula::Forall(x, body) => {
            let inner = Formula::forall(x.clone(), contract_rec(body, eps, &demote(approx, x)));
            filled_ball_raw(&inner, eps, approx)
        }
    }
}

fn sphere_rec(f: &Formula, eps: &Rational, approx: &[Var]) -> Formula {
    if !perturbs(f, approx) {
        return f.clone();
    }
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => expand_raw(f, eps, approx),
        Formula::And(parts) => {
            let inner =
                Formula::and(parts.iter().map(|p| sphere_rec(p, eps, approx)).collect());
            filled_ball_raw(&inner, eps, approx)
        }
        Formula::Or(parts) => {
            Formula::or(parts.iter().map(|p| sphere_rec(p, eps, approx)).collect())
        }
        // Unlike `contract`, the transform recurses into the negation.
        Formula::Not(body) => {
            let inner = Formula::not(sphere_rec(body, eps, approx));
            filled_ball_raw(&inner, eps, approx)
        }
        Formula::Implies(..) => sphere_rec(&ops::eliminate_implies(f), eps, approx),
        Formula::Exists(x, body) => {
            Formula::exists(x.clone(), sphere_rec(body, eps, &demote(approx, x)))
        }
        Formula::Forall(x, body) => {
            let inner = Formula::forall(x.clone(), sphere_rec(body, eps, &demote(approx, x)));
            filled_ball_raw(&inner, eps, approx)
        }
    }
}
