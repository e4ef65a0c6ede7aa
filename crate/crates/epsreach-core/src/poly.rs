//! Multivariate polynomials over the rationals in normal form: a map from
//! monomials to nonzero coefficients. This is the arithmetic core of the
//! decision engine — equality of polynomials is equality of the maps.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::ops::EvalError;
use crate::term::{Rational, Term, Var};

/// A power product `v1^e1 · … · vk^ek` with all exponents ≥ 1; the empty
/// product is the constant monomial `1`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(BTreeMap<Var, u32>);

impl Monomial {
    pub fn one() -> Monomial {
        Monomial(BTreeMap::new())
    }

    pub fn var(v: Var) -> Monomial {
        let mut m = BTreeMap::new();
        m.insert(v, 1);
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.0.get(v).copied().unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (v, e) in &other.0 {
            *out.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(out)
    }

    /// Removes `v` entirely (used when extracting coefficient polynomials).
    pub fn without(&self, v: &Var) -> Monomial {
        let mut out = self.0.clone();
        out.remove(v);
        Monomial(out)
    }

    pub fn vars(&self) -> impl Iterator<Item = &Var> {
        self.0.keys()
    }

    pub fn exponents(&self) -> impl Iterator<Item = (&Var, u32)> {
        self.0.iter().map(|(v, e)| (v, *e))
    }
}

/// A polynomial in normal form; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly(BTreeMap<Monomial, Rational>);

impl Poly {
    pub fn zero() -> Poly {
        Poly(BTreeMap::new())
    }

    pub fn constant(r: Rational) -> Poly {
        let mut p = Poly::zero();
        if !r.is_zero() {
            p.0.insert(Monomial::one(), r);
        }
        p
    }

    pub fn var(v: Var) -> Poly {
        let mut p = Poly::zero();
        p.0.insert(Monomial::var(v), Rational::one());
        p
    }

    pub fn from_term(t: &Term) -> Poly {
        match t {
            Term::Const(r) => Poly::constant(r.clone()),
            Term::Var(v) => Poly::var(v.clone()),
            Term::Sum(ts) => ts
                .iter()
                .fold(Poly::zero(), |acc, s| acc.add(&Poly::from_term(s))),
            Term::Product(ts) => ts
                .iter()
                .fold(Poly::constant(Rational::one()), |acc, s| {
                    acc.mul(&Poly::from_term(s))
                }),
            Term::Neg(s) => Poly::from_term(s).neg(),
            Term::Pow(s, k) => Poly::from_term(s).pow(*k),
        }
    }

    fn insert_add(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.0.get_mut(&m) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.0.remove(&m);
                }
            }
            None => {
                self.0.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.insert_add(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, c)| (m.clone(), c * k)).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &other.0 {
                out.insert_add(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut acc = Poly::constant(Rational::one());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.0.is_empty() {
            return Some(Rational::zero());
        }
        if self.0.len() == 1 {
            if let Some(c) = self.0.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    /// The coefficient of the constant monomial.
    pub fn constant_part(&self) -> Rational {
        self.0
            .get(&Monomial::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &Var) -> u32 {
        self.0.keys().map(|m| m.degree_in(v)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for m in self.0.keys() {
            out.extend(m.vars().cloned());
        }
        out
    }

    pub fn monomials(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.0.iter()
    }

    /// Writes `self = c·v + rest` where `c` is a rational constant and
    /// `rest` does not contain `v`; `None` if `v` occurs nonlinearly or with
    /// a non-constant coefficient.
    pub fn split_constant_linear(&self, v: &Var) -> Option<(Rational, Poly)> {
        let mut c = Rational::zero();
        let mut rest = Poly::zero();
        for (m, coeff) in &self.0 {
            match m.degree_in(v) {
                0 => rest.insert_add(m.clone(), coeff.clone()),
                1 => {
                    if m.degree() != 1 {
                        return None; // v multiplied by other variables
                    }
                    c += coeff;
                }
                _ => return None,
            }
        }
        Some((c, rest))
    }

    /// The polynomial coefficient of `v^k` (a polynomial in the remaining
    /// variables).
    pub fn coeff_of(&self, v: &Var, k: u32) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            if m.degree_in(v) == k {
                out.insert_add(m.without(v), c.clone());
            }
        }
        out
    }

    /// Substitutes a polynomial for a variable.
    pub fn subst(&self, v: &Var, replacement: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            let k = m.degree_in(v);
            let base = Poly(BTreeMap::from([(m.without(v), c.clone())]));
            let term = if k == 0 { base } else { base.mul(&replacement.pow(k)) };
            out = out.add(&term);
        }
        out
    }

    pub fn eval(&self, point: &BTreeMap<Var, Rational>) -> Result<Rational, EvalError> {
        let mut acc = Rational::zero();
        for (m, c) in &self.0 {
            let mut val = c.clone();
            for (v, e) in m.exponents() {
                let x = point
                    .get(v)
                    .ok_or_else(|| EvalError::UnboundVariable(v.clone()))?;
                for _ in 0..e {
                    val *= x;
                }
            }
            acc += val;
        }
        Ok(acc)
    }

    /// Deterministic term form: monomials in their natural order, each as
    /// `coeff * v1^e1 * …` with unit coefficients and exponents elided.
    pub fn to_term(&self) -> Term {
        if self.0.is_empty() {
            return Term::int(0);
        }
        let mut summands = Vec::new();
        for (m, c) in &self.0 {
            let mut factors: Vec<Term> = Vec::new();
            if !c.is_one() || m.is_one() {
                factors.push(Term::constant(c.clone()));
            }
            for (v, e) in m.exponents() {
                factors.push(Term::pow(Term::var(v.clone()), e.max(1)));
            }
            summands.push(Term::product(factors));
        }
        Term::sum(summands)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{int, rat};
    use alloc::vec;

    fn x() -> Var {
        Var::new("X")
    }

    fn y() -> Var {
        Var::new("Y")
    }

    #[test]
    fn from_term_normalizes_arithmetic() {
        // (X + Y)² = X² + 2XY + Y²
        let t = Term::var("X").add(Term::var("Y")).squared();
        let p = Poly::from_term(&t);
        let q = Poly::var(x())
            .pow(2)
            .add(&Poly::var(x()).mul(&Poly::var(y())).scale(&int(2)))
            .add(&Poly::var(y()).pow(2));
        assert_eq!(p, q);
        assert_eq!(p.total_degree(), 2);
    }

    #[test]
    fn cancellation_removes_monomials() {
        let p = Poly::var(x()).sub(&Poly::var(x()));
        assert!(p.is_zero());
        assert_eq!(p.as_constant(), Some(int(0)));
    }

    #[test]
    fn split_constant_linear_accepts_constant_coefficients_only() {
        // 2X + Y − 3 splits on X.
        let p = Poly::var(x())
            .scale(&int(2))
            .add(&Poly::var(y()))
            .add(&Poly::constant(int(-3)));
        let (c, rest) = p.split_constant_linear(&x()).unwrap();
        assert_eq!(c, int(2));
        assert_eq!(rest, Poly::var(y()).add(&Poly::constant(int(-3))));

        // XY has a non-constant coefficient of X.
        let q = Poly::var(x()).mul(&Poly::var(y()));
        assert_eq!(q.split_constant_linear(&x()), None);
        // X² is nonlinear in X.
        assert_eq!(Poly::var(x()).pow(2).split_constant_linear(&x()), None);
    }

    #[test]
    fn subst_replaces_with_polynomial() {
        // substitute X ↦ Y + 1 in X²: (Y+1)² = Y² + 2Y + 1
        let p = Poly::var(x()).pow(2);
        let r = Poly::var(y()).add(&Poly::constant(int(1)));
        let s = p.subst(&x(), &r);
        let expected = Poly::var(y())
            .pow(2)
            .add(&Poly::var(y()).scale(&int(2)))
            .add(&Poly::constant(int(1)));
        assert_eq!(s, expected);
    }

    #[test]
    fn eval_matches_term_evaluation() {
        let t = Term::product(vec![
            Term::rat(1, 2),
            Term::var("X").add(Term::var("Y")).squared(),
        ]);
        let p = Poly::from_term(&t);
        let mut point = BTreeMap::new();
        point.insert(x(), rat(3, 2));
        point.insert(y(), rat(-1, 2));
        let via_poly = p.eval(&point).unwrap();
        let via_term = crate::ops::eval_term(&t, &point).unwrap();
        assert_eq!(via_poly, via_term);
        assert_eq!(via_poly, rat(1, 2));
    }

    #[test]
    fn to_term_round_trips_through_from_term() {
        let p = Poly::var(x())
            .pow(2)
            .scale(&rat(-2, 3))
            .add(&Poly::var(y()).scale(&int(4)))
            .add(&Poly::constant(rat(7, 5)));
        assert_eq!(Poly::from_term(&p.to_term()), p);
    }

    #[test]
    fn coeff_of_extracts_polynomial_coefficients() {
        // p = (Y+1)·X² + 3X + Y
        let p = Poly::var(y())
            .add(&Poly::constant(int(1)))
            .mul(&Poly::var(x()).pow(2))
            .add(&Poly::var(x()).scale(&int(3)))
            .add(&Poly::var(y()));
        assert_eq!(
            p.coeff_of(&x(), 2),
            Poly::var(y()).add(&Poly::constant(int(1)))
        );
        assert_eq!(p.coeff_of(&x(), 1), Poly::constant(int(3)));
        assert_eq!(p.coeff_of(&x(), 0), Poly::var(y()));
    }
}
