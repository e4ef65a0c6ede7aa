//! Polynomial atoms (`p ⋄ 0`) and the exact linearization of single-square
//! quadratic atoms, the normal form the elimination engine works on.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::formula::{Cmp, Formula};
use crate::poly::Poly;
use crate::term::{Int, Rational, Term};

/// Relation of a polynomial against zero.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Rel {
    Eq,
    Lt,
    Le,
}

/// The constraint `poly ⋄ 0`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PolyAtom {
    pub poly: Poly,
    pub rel: Rel,
}

impl PolyAtom {
    pub fn new(poly: Poly, rel: Rel) -> PolyAtom {
        PolyAtom { poly, rel }
    }

    /// Converts a formula atom `lhs op rhs` into `lhs − rhs ⋄ 0`.
    pub fn from_parts(lhs: &Term, op: Cmp, rhs: &Term) -> PolyAtom {
        let poly = Poly::from_term(lhs).sub(&Poly::from_term(rhs));
        let rel = match op {
            Cmp::Eq => Rel::Eq,
            Cmp::Lt => Rel::Lt,
            Cmp::Le => Rel::Le,
        };
        PolyAtom { poly, rel }
    }

    /// Truth value when the polynomial is constant.
    pub fn eval_ground(&self) -> Option<bool> {
        let c = self.poly.as_constant()?;
        Some(match self.rel {
            Rel::Eq => c.is_zero(),
            Rel::Lt => c < Rational::zero(),
            Rel::Le => c <= Rational::zero(),
        })
    }

    /// Renders the atom with the constant moved to the right-hand side:
    /// `p = q + c` becomes `q ⋄ −c`.
    pub fn to_formula(&self) -> Formula {
        if let Some(value) = self.eval_ground() {
            return if value { Formula::True } else { Formula::False };
        }
        let c = self.poly.constant_part();
        let q = self.poly.sub(&Poly::constant(c.clone()));
        let rhs = Term::constant(-c);
        let lhs = q.to_term();
        match self.rel {
            Rel::Eq => Formula::eq(lhs, rhs),
            Rel::Lt => Formula::lt(lhs, rhs),
            Rel::Le => Formula::le(lhs, rhs),
        }
    }

    /// Canonical rescaling (positive factor) so syntactically different
    /// multiples of the same constraint compare equal; for equalities the
    /// sign is also normalized.
    pub fn normalized(&self) -> PolyAtom {
        let nonconst = self
            .poly
            .monomials()
            .find(|(m, _)| !m.is_one())
            .map(|(_, c)| c.clone());
        let Some(lead) = nonconst else {
            return self.clone();
        };
        let scale = lead.abs().recip();
        let mut poly = self.poly.scale(&scale);
        if self.rel == Rel::Eq && lead.is_negative() {
            poly = poly.neg();
        }
        PolyAtom { poly, rel: self.rel }
    }
}

/// `√r` when it is rational, using exact integer square roots of the reduced
/// numerator and denominator.
pub fn sqrt_rational(r: &Rational) -> Option<Rational> {
    if r.is_negative() {
        return None;
    }
    if r.is_zero() {
        return Some(Rational::zero());
    }
    let num = r.numer();
    let den = r.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(Rational::new(sn, sd))
    } else {
        None
    }
}

/// Decomposition of a quadratic polynomial as `λ·(M² − δ)` with `M` linear.
pub struct SingleSquare {
    pub positive_lambda: bool,
    pub m: Poly,
    pub delta: Rational,
}

/// Tries to write `p = λ·M² + ρ·M + c` with `M` linear and rational `λ ≠ 0`,
/// returning the completed-square form `λ·(M′² − δ)`.
pub fn single_square(p: &Poly) -> Option<SingleSquare> {
    if p.total_degree() != 2 {
        return None;
    }
    // Split into homogeneous parts.
    let mut quad = Poly::zero();
    let mut lin = Poly::zero();
    let mut c0 = Rational::zero();
    for (m, c) in p.monomials() {
        match m.degree() {
            2 => quad = quad.add(&Poly::from_term(&Term::product(alloc::vec![
                Term::constant(c.clone()),
                monomial_term(m),
            ]))),
            1 => lin = lin.add(&Poly::from_term(&Term::product(alloc::vec![
                Term::constant(c.clone()),
                monomial_term(m),
            ]))),
            0 => c0 = c.clone(),
            _ => return None,
        }
    }
    // Pick the pivot: the least variable appearing squared.
    let pivot = quad.vars().into_iter().find(|v| {
        quad.monomials()
            .any(|(m, _)| m.degree_in(v) == 2)
    })?;
    let lambda = quad.coeff_of(&pivot, 2).as_constant()?;
    if lambda.is_zero() {
        return None;
    }
    // Candidate linear form L0 with coefficient 1 on the pivot.
    let mut l0 = Poly::var(pivot.clone());
    let cross = quad.coeff_of(&pivot, 1); // linear polynomial in the other vars
    let half = Rational::new(Int::from(1), Int::from(2));
    l0 = l0.add(&cross.scale(&(half * lambda.recip())));
    // The quadratic part must be exactly λ·L0².
    if quad != l0.pow(2).scale(&lambda) {
        return None;
    }
    // The linear part must be a multiple of L0: ρ·L0.
    let rho = lin.coeff_of(&pivot, 1).as_constant()?;
    if lin != l0.scale(&rho) {
        return None;
    }
    // p = λ(L0 + ρ/(2λ))² + c0 − ρ²/(4λ) = λ(M² − δ)
    let shift = &rho / (&lambda * Rational::from_integer(2.into()));
    let m = l0.add(&Poly::constant(shift));
    let quarter = Rational::new(Int::from(1), Int::from(4));
    let delta = (&rho * &rho) * quarter / (&lambda * &lambda) - &c0 / &lambda;
    Some(SingleSquare {
        positive_lambda: lambda > Rational::zero(),
        m,
        delta,
    })
}

fn monomial_term(m: &crate::poly::Monomial) -> Term {
    let factors: Vec<Term> = m
        .exponents()
        .map(|(v, e)| Term::pow(Term::var(v.clone()), e.max(1)))
        .collect();
    Term::product(factors)
}

/// Relation of `M²` against `δ` after accounting for the sign of `λ`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum SquareRel {
    Lt,
    Le,
    Eq,
    Gt,
    Ge,
}

/// Rewrites the quadratic atom `p ⋄ 0` into an equivalent boolean
/// combination of linear atoms, or reports why it cannot.
pub fn linearize_quadratic_atom(atom: &PolyAtom) -> Result<Formula, String> {
    let Some(sq) = single_square(&atom.poly) else {
        return Err(format!(
            "atom `{}` is not linear and not a single-square quadratic",
            atom.to_formula()
        ));
    };
    let rel = match (atom.rel, sq.positive_lambda) {
        (Rel::Lt, true) => SquareRel::Lt,
        (Rel::Le, true) => SquareRel::Le,
        (Rel::Eq, _) => SquareRel::Eq,
        (Rel::Lt, false) => SquareRel::Gt,
        (Rel::Le, false) => SquareRel::Ge,
    };
    let m = &sq.m;
    let delta = &sq.delta;
    let zero = Rational::zero();
    let lt = |p: Poly| PolyAtom::new(p, Rel::Lt).to_formula();
    let le = |p: Poly| PolyAtom::new(p, Rel::Le).to_formula();
    let eq = |p: Poly| PolyAtom::new(p, Rel::Eq).to_formula();
    let root = || -> Result<Rational, String> {
        sqrt_rational(delta).ok_or_else(|| {
            format!(
                "quadratic atom boundary √({}) is irrational",
                crate::printer::DisplayRational(delta)
            )
        })
    };
    Ok(match rel {
        SquareRel::Lt => {
            if delta <= &zero {
                Formula::False
            } else {
                let s = root()?;
                // −s < M < s
                Formula::and(alloc::vec![
                    lt(m.neg().sub(&Poly::constant(s.clone()))),
                    lt(m.sub(&Poly::constant(s))),
                ])
            }
        }
        SquareRel::Le => {
            if delta < &zero {
                Formula::False
            } else if delta.is_zero() {
                eq(m.clone())
            } else {
                let s = root()?;
                Formula::and(alloc::vec![
                    le(m.neg().sub(&Poly::constant(s.clone()))),
                    le(m.sub(&Poly::constant(s))),
                ])
            }
        }
        SquareRel::Eq => {
            if delta < &zero {
                Formula::False
            } else if delta.is_zero() {
                eq(m.clone())
            } else {
                let s = root()?;
                Formula::or(alloc::vec![
                    eq(m.sub(&Poly::constant(s.clone()))),
                    eq(m.add(&Poly::constant(s))),
                ])
            }
        }
        SquareRel::Gt => {
            if delta < &zero {
                Formula::True
            } else if delta.is_zero() {
                // M ≠ 0
                Formula::or(alloc::vec![lt(m.clone()), lt(m.neg())])
            } else {
                let s = root()?;
                // M < −s ∨ s < M
                Formula::or(alloc::vec![
                    lt(m.add(&Poly::constant(s.clone()))),
                    lt(Poly::constant(s).sub(m)),
                ])
            }
        }
        SquareRel::Ge => {
            if delta <= &zero {
                Formula::True
            } else {
                let s = root()?;
                Formula::or(alloc::vec![
                    le(m.add(&Poly::constant(s.clone()))),
                    le(Poly::constant(s).sub(m)),
                ])
            }
        }
    })
}

/// Rewrites every atom of an implication-free, negation-normal formula into
/// linear polynomial atoms, exactly linearizing single-square quadratics.
/// Fails (with an explanatory message) on any other nonlinear atom.
pub fn linearize_formula(f: &Formula) -> Result<Formula, String> {
    match f {
        Formula::True | Formula::False => Ok(f.clone()),
        Formula::Atom { lhs, op, rhs } => {
            let atom = PolyAtom::from_parts(lhs, *op, rhs);
            if atom.poly.total_degree() <= 1 {
                Ok(atom.to_formula())
            } else {
                linearize_quadratic_atom(&atom)
            }
        }
        Formula::Not(g) => {
            // NNF input has no Not above atoms; tolerate atom negation by
            // resolving it first.
            let resolved = crate::ops::nnf(&Formula::not((**g).clone()));
            if matches!(resolved, Formula::Not(_)) {
                Err(String::from("unexpected negation after normal form"))
            } else {
                linearize_formula(&resolved)
            }
        }
        Formula::And(fs) => Ok(Formula::and(
            fs.iter()
                .map(linearize_formula)
                .collect::<Result<Vec<_>, _>>()?,
        )),
        Formula::Or(fs) => Ok(Formula::or(
            fs.iter()
                .map(linearize_formula)
                .collect::<Result<Vec<_>, _>>()?,
        )),
        Formula::Implies(..) => Err(String::from(
            "implication must be eliminated before linearization",
        )),
        Formula::Exists(v, b) => Ok(Formula::exists(v.clone(), linearize_formula(b)?)),
        Formula::Forall(v, b) => Ok(Formula::forall(v.clone(), linearize_formula(b)?)),
    }
}
