//! Deterministic textual form of terms and formulas.
//!
//! The syntax is prefix s-expressions, the same language the model files and
//! the command line use:
//!
//! * terms: `(+ t…)`, `(* t…)`, `(- t)`, `(^ t k)`, rationals `p/q` or
//!   integers, variables as bare tokens;
//! * atoms: `(= t t)`, `(< t t)`, `(<= t t)`;
//! * connectives: `(and f…)`, `(or f…)`, `(not f)`, `(=> f f)`;
//! * quantifiers: `(exists (X) f)`, `(forall (X) f)`;
//! * constants: `true`, `false`.
//!
//! Printing is purely structural (no reordering or arithmetic), so equal
//! formulas print identically and the output can be compared byte-for-byte.

use core::fmt;

use crate::formula::{Cmp, Formula};
use crate::term::{Rational, Term};

/// Writes a rational as `p` or `p/q` (always in lowest terms, `q > 0`).
pub fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Display adapter for [`Rational`] using the same `p/q` syntax as terms.
pub struct DisplayRational<'a>(pub &'a Rational);

impl fmt::Display for DisplayRational<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(f, self.0)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(r) => write_rational(f, r),
            Term::Var(v) => write!(f, "{v}"),
            Term::Sum(ts) => {
                if ts.is_empty() {
                    return write!(f, "0");
                }
                write!(f, "(+")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                write!(f, ")")
            }
            Term::Product(ts) => {
                if ts.is_empty() {
                    return write!(f, "1");
                }
                write!(f, "(*")?;
                for t in ts {
                    write!(f, " {t}")?;
                }
                write!(f, ")")
            }
            Term::Neg(t) => write!(f, "(- {t})"),
            Term::Pow(t, k) => write!(f, "(^ {t} {k})"),
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cmp::Eq => write!(f, "="),
            Cmp::Lt => write!(f, "<"),
            Cmp::Le => write!(f, "<="),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom { lhs, op, rhs } => write!(f, "({op} {lhs} {rhs})"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(fs) => {
                if fs.is_empty() {
                    return write!(f, "true");
                }
                write!(f, "(and")?;
                for g in fs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Or(fs) => {
                if fs.is_empty() {
                    return write!(f, "false");
                }
                write!(f, "(or")?;
                for g in fs {
                    write!(f, " {g}")?;
                }
                write!(f, ")")
            }
            Formula::Implies(a, b) => write!(f, "(=> {a} {b})"),
            Formula::Exists(v, body) => write!(f, "(exists ({v}) {body})"),
            Formula::Forall(v, body) => write!(f, "(forall ({v}) {body})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::rat;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn rationals_print_reduced() {
        assert_eq!(Term::Const(rat(4, 2)).to_string(), "2");
        assert_eq!(Term::Const(rat(-1, 2)).to_string(), "-1/2");
        assert_eq!(Term::Const(rat(3, -9)).to_string(), "-1/3");
    }

    #[test]
    fn terms_print_in_prefix_syntax() {
        let t = Term::sum(vec![
            Term::product(vec![Term::int(2), Term::var("Z1'")]),
            Term::neg(Term::pow(Term::var("X"), 2)),
        ]);
        assert_eq!(t.to_string(), "(+ (* 2 Z1') (- (^ X 2)))");
    }

    #[test]
    fn formulas_print_in_prefix_syntax() {
        let f = Formula::exists(
            "T",
            Formula::and(vec![
                Formula::le(Term::int(0), Term::var("T")),
                Formula::lt(Term::var("Z1"), Term::product(vec![Term::int(2), Term::var("Z1'")])),
            ]),
        );
        assert_eq!(
            f.to_string(),
            "(exists (T) (and (<= 0 T) (< Z1 (* 2 Z1'))))"
        );
    }

    #[test]
    fn empty_connectives_print_as_constants() {
        assert_eq!(Formula::And(vec![]).to_string(), "true");
        assert_eq!(Formula::Or(vec![]).to_string(), "false");
        assert_eq!(Term::Sum(vec![]).to_string(), "0");
        assert_eq!(Term::Product(vec![]).to_string(), "1");
    }
}
