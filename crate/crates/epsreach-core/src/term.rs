//! Terms of the first-order language over the reals: exact rational
//! constants, variables, sums, products, negation, and natural powers.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

/// Exact rational number with arbitrary-precision numerator and denominator.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision integer.
pub type Int = num_bigint::BigInt;

/// Builds the rational `p/q`. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(Int::from(p), Int::from(q))
}

/// Builds the rational `n/1`.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(Int::from(n))
}

/// A variable name.
///
/// Names are plain tokens: letters, digits and underscores, optionally
/// followed by trailing prime marks (`'`). Machine-generated names may also
/// contain `@` and `.` (see the reachability constructors); user-supplied
/// models are rejected if they use those characters, so generated names can
/// never collide with model variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: impl AsRef<str>) -> Var {
        Var(Arc::from(name.as_ref()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// The same name with one more trailing prime mark.
    pub fn primed(&self) -> Var {
        let mut s = String::with_capacity(self.0.len() + 1);
        s.push_str(&self.0);
        s.push('\'');
        Var(Arc::from(s.as_str()))
    }

    pub fn is_primed(&self) -> bool {
        self.0.ends_with('\'')
    }

    /// The name with one trailing prime mark removed (unchanged if none).
    pub fn unprimed(&self) -> Var {
        match self.0.strip_suffix('\'') {
            Some(base) => Var(Arc::from(base)),
            None => self.clone(),
        }
    }
}

impl core::fmt::Debug for Var {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl core::fmt::Display for Var {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

/// A term: rational constants, variables, `+`, `*`, unary `-`, and natural
/// powers with exponent ≥ 1 (exponent 1 is normalized away by [`Term::pow`]).
///
/// Rational constants are kept in lowest terms with a positive denominator
/// (guaranteed by the underlying rational type).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Const(Rational),
    Var(Var),
    Sum(Vec<Term>),
    Product(Vec<Term>),
    Neg(Box<Term>),
    Pow(Box<Term>, u32),
}

impl Term {
    pub fn constant(r: Rational) -> Term {
        Term::Const(r)
    }

    pub fn int(n: i64) -> Term {
        Term::Const(int(n))
    }

    pub fn rat(p: i64, q: i64) -> Term {
        Term::Const(rat(p, q))
    }

    pub fn var(v: impl Into<Var>) -> Term {
        Term::Var(v.into())
    }

    /// n-ary sum; empty becomes `0` and a single summand is unwrapped.
    pub fn sum(mut ts: Vec<Term>) -> Term {
        match ts.len() {
            0 => Term::int(0),
            1 => ts.pop().unwrap(),
            _ => Term::Sum(ts),
        }
    }

    /// n-ary product; empty becomes `1` and a single factor is unwrapped.
    pub fn product(mut ts: Vec<Term>) -> Term {
        match ts.len() {
            0 => Term::int(1),
            1 => ts.pop().unwrap(),
            _ => Term::Product(ts),
        }
    }

    pub fn add(self, other: Term) -> Term {
        Term::Sum(alloc::vec![self, other])
    }

    pub fn sub(self, other: Term) -> Term {
        Term::Sum(alloc::vec![self, Term::neg(other)])
    }

    pub fn mul(self, other: Term) -> Term {
        Term::Product(alloc::vec![self, other])
    }

    pub fn neg(t: Term) -> Term {
        Term::Neg(Box::new(t))
    }

    /// Natural power; exponent must be ≥ 1 and exponent 1 returns the base.
    pub fn pow(t: Term, k: u32) -> Term {
        assert!(k >= 1, "natural power exponent must be at least 1");
        if k == 1 {
            t
        } else {
            Term::Pow(Box::new(t), k)
        }
    }

    pub fn squared(self) -> Term {
        Term::pow(self, 2)
    }
}

/// An ordered tuple of pairwise-distinct variables, dimension ≥ 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VarVector(Vec<Var>);

/// Violations of the [`VarVector`] invariants.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum VarVectorError {
    Empty,
    DuplicateName(Var),
}

impl core::fmt::Display for VarVectorError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            VarVectorError::Empty => write!(f, "variable vector must have dimension at least 1"),
            VarVectorError::DuplicateName(v) => {
                write!(f, "variable vector contains `{v}` more than once")
            }
        }
    }
}

impl VarVector {
    pub fn new(vars: Vec<Var>) -> Result<VarVector, VarVectorError> {
        if vars.is_empty() {
            return Err(VarVectorError::Empty);
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(VarVectorError::DuplicateName(v.clone()));
            }
        }
        Ok(VarVector(vars))
    }

    /// Convenience constructor from name strings; panics on invariant
    /// violations (intended for statically known vectors).
    pub fn of(names: &[&str]) -> VarVector {
        VarVector::new(names.iter().map(|n| Var::new(n)).collect())
            .expect("invalid variable vector literal")
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Var> {
        self.0.iter()
    }

    /// Component-wise primed copy of the vector.
    pub fn primed(&self) -> VarVector {
        VarVector(self.0.iter().map(Var::primed).collect())
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.0.contains(v)
    }
}

impl core::ops::Index<usize> for VarVector {
    type Output = Var;
    fn index(&self, i: usize) -> &Var {
        &self.0[i]
    }
}
