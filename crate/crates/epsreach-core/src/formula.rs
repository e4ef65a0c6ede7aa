//! First-order formulas over the reals: polynomial atoms with `=`, `<`, `≤`,
//! boolean connectives, and real-valued quantifiers.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::term::{Term, Var};

/// Atom comparison operator. `≤` is primitive (not expanded into `< ∨ =`) so
/// formulas stay small; the decision engine treats it natively.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Cmp {
    Eq,
    Lt,
    Le,
}

/// A first-order formula. `True`/`False` are primitive constants (standing
/// for the closed atoms `1 = 1` and `0 = 1`). `And`/`Or` are n-ary to keep
/// iterated reachability formulas shallow.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Atom { lhs: Term, op: Cmp, rhs: Term },
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    pub fn atom(lhs: Term, op: Cmp, rhs: Term) -> Formula {
        Formula::Atom { lhs, op, rhs }
    }

    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::atom(lhs, Cmp::Eq, rhs)
    }

    pub fn lt(lhs: Term, rhs: Term) -> Formula {
        Formula::atom(lhs, Cmp::Lt, rhs)
    }

    pub fn le(lhs: Term, rhs: Term) -> Formula {
        Formula::atom(lhs, Cmp::Le, rhs)
    }

    /// `lhs > rhs`, stored as `rhs < lhs`.
    pub fn gt(lhs: Term, rhs: Term) -> Formula {
        Formula::lt(rhs, lhs)
    }

    /// `lhs ≥ rhs`, stored as `rhs ≤ lhs`.
    pub fn ge(lhs: Term, rhs: Term) -> Formula {
        Formula::le(rhs, lhs)
    }

    /// `lo ≤ t ∧ t ≤ hi`.
    pub fn between(lo: Term, t: Term, hi: Term) -> Formula {
        Formula::and(alloc::vec![
            Formula::le(lo, t.clone()),
            Formula::le(t, hi),
        ])
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// n-ary conjunction; empty is `⊤` and a single conjunct is unwrapped.
    pub fn and(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::True,
            1 => fs.pop().unwrap(),
            _ => Formula::And(fs),
        }
    }

    /// n-ary disjunction; empty is `⊥` and a single disjunct is unwrapped.
    pub fn or(mut fs: Vec<Formula>) -> Formula {
        match fs.len() {
            0 => Formula::False,
            1 => fs.pop().unwrap(),
            _ => Formula::Or(fs),
        }
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    /// `lhs ↔ rhs`, expressed as the conjunction of the two implications.
    pub fn iff(lhs: Formula, rhs: Formula) -> Formula {
        Formula::and(alloc::vec![
            Formula::implies(lhs.clone(), rhs.clone()),
            Formula::implies(rhs, lhs),
        ])
    }

    pub fn exists(v: impl Into<Var>, body: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: impl Into<Var>, body: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(body))
    }

    /// `∃ v_1 … ∃ v_n. body`, nesting left to right.
    pub fn exists_many(vs: &[Var], body: Formula) -> Formula {
        vs.iter()
            .rev()
            .fold(body, |acc, v| Formula::exists(v.clone(), acc))
    }

    /// `∀ v_1 … ∀ v_n. body`, nesting left to right.
    pub fn forall_many(vs: &[Var], body: Formula) -> Formula {
        vs.iter()
            .rev()
            .fold(body, |acc, v| Formula::forall(v.clone(), acc))
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom { .. } => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Implies(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }
}
