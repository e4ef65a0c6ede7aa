//! Exact unions of rational intervals with open/closed endpoints — the
//! carrier for one-dimensional set descriptions such as `(-3/16, 21/2)`.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::printer::DisplayRational;
use crate::term::Rational;

/// Lower endpoint of an interval.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum LowerBound {
    Unbounded,
    Closed(Rational),
    Open(Rational),
}

/// Upper endpoint of an interval.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum UpperBound {
    Open(Rational),
    Closed(Rational),
    Unbounded,
}

/// Orders lower bounds by the set of points they admit: an earlier bound
/// admits a superset. `Closed(a)` starts before `Open(a)`.
fn cmp_lower(a: &LowerBound, b: &LowerBound) -> Ordering {
    use LowerBound::*;
    match (a, b) {
        (Unbounded, Unbounded) => Ordering::Equal,
        (Unbounded, _) => Ordering::Less,
        (_, Unbounded) => Ordering::Greater,
        (Closed(x), Closed(y)) | (Open(x), Open(y)) => x.cmp(y),
        (Closed(x), Open(y)) => x.cmp(y).then(Ordering::Less),
        (Open(x), Closed(y)) => x.cmp(y).then(Ordering::Greater),
    }
}

/// Orders upper bounds by the set of points they admit: a later bound admits
/// a superset. `Open(a)` ends before `Closed(a)`.
fn cmp_upper(a: &UpperBound, b: &UpperBound) -> Ordering {
    use UpperBound::*;
    match (a, b) {
        (Unbounded, Unbounded) => Ordering::Equal,
        (Unbounded, _) => Ordering::Greater,
        (_, Unbounded) => Ordering::Less,
        (Closed(x), Closed(y)) | (Open(x), Open(y)) => x.cmp(y),
        (Open(x), Closed(y)) => x.cmp(y).then(Ordering::Less),
        (Closed(x), Open(y)) => x.cmp(y).then(Ordering::Greater),
    }
}

/// A nonempty interval of reals with rational (or unbounded) endpoints.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Interval {
    lo: LowerBound,
    hi: UpperBound,
}

impl Interval {
    /// Builds an interval, returning `None` when the bounds describe the
    /// empty set.
    pub fn new(lo: LowerBound, hi: UpperBound) -> Option<Interval> {
        let nonempty = match (&lo, &hi) {
            (LowerBound::Unbounded, _) | (_, UpperBound::Unbounded) => true,
            (LowerBound::Closed(a), UpperBound::Closed(b)) => a <= b,
            (LowerBound::Closed(a), UpperBound::Open(b))
            | (LowerBound::Open(a), UpperBound::Closed(b))
            | (LowerBound::Open(a), UpperBound::Open(b)) => a < b,
        };
        nonempty.then_some(Interval { lo, hi })
    }

    pub fn point(a: Rational) -> Interval {
        Interval {
            lo: LowerBound::Closed(a.clone()),
            hi: UpperBound::Closed(a),
        }
    }

    pub fn open(a: Rational, b: Rational) -> Option<Interval> {
        Interval::new(LowerBound::Open(a), UpperBound::Open(b))
    }

    pub fn closed(a: Rational, b: Rational) -> Option<Interval> {
        Interval::new(LowerBound::Closed(a), UpperBound::Closed(b))
    }

    pub fn open_closed(a: Rational, b: Rational) -> Option<Interval> {
        Interval::new(LowerBound::Open(a), UpperBound::Closed(b))
    }

    pub fn closed_open(a: Rational, b: Rational) -> Option<Interval> {
        Interval::new(LowerBound::Closed(a), UpperBound::Open(b))
    }

    pub fn all() -> Interval {
        Interval {
            lo: LowerBound::Unbounded,
            hi: UpperBound::Unbounded,
        }
    }

    pub fn lower(&self) -> &LowerBound {
        &self.lo
    }

    pub fn upper(&self) -> &UpperBound {
        &self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let lo_ok = match &self.lo {
            LowerBound::Unbounded => true,
            LowerBound::Closed(a) => a <= x,
            LowerBound::Open(a) => a < x,
        };
        let hi_ok = match &self.hi {
            UpperBound::Unbounded => true,
            UpperBound::Closed(b) => x <= b,
            UpperBound::Open(b) => x < b,
        };
        lo_ok && hi_ok
    }

    /// Whether `self ∪ other` is itself an interval (they overlap or touch),
    /// assuming `self` starts no later than `other`.
    fn merges_with(&self, other: &Interval) -> bool {
        match (&self.hi, &other.lo) {
            (UpperBound::Unbounded, _) => true,
            (_, LowerBound::Unbounded) => true,
            (UpperBound::Closed(h), LowerBound::Closed(l)) => l <= h,
            (UpperBound::Closed(h), LowerBound::Open(l))
            | (UpperBound::Open(h), LowerBound::Closed(l)) => l <= h,
            (UpperBound::Open(h), LowerBound::Open(l)) => l < h,
        }
    }

    fn is_point(&self) -> Option<&Rational> {
        match (&self.lo, &self.hi) {
            (LowerBound::Closed(a), UpperBound::Closed(b)) if a == b => Some(a),
            _ => None,
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(p) = self.is_point() {
            return write!(f, "{{{}}}", DisplayRational(p));
        }
        match &self.lo {
            LowerBound::Unbounded => write!(f, "(-inf, ")?,
            LowerBound::Closed(a) => write!(f, "[{}, ", DisplayRational(a))?,
            LowerBound::Open(a) => write!(f, "({}, ", DisplayRational(a))?,
        }
        match &self.hi {
            UpperBound::Unbounded => write!(f, "+inf)"),
            UpperBound::Closed(b) => write!(f, "{}]", DisplayRational(b)),
            UpperBound::Open(b) => write!(f, "{})", DisplayRational(b)),
        }
    }
}

/// A finite union of intervals, kept sorted, pairwise disjoint, and
/// maximally merged, so equal sets have equal representations.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct IntervalUnion(Vec<Interval>);

impl IntervalUnion {
    pub fn empty() -> IntervalUnion {
        IntervalUnion(Vec::new())
    }

    pub fn all() -> IntervalUnion {
        IntervalUnion(alloc::vec![Interval::all()])
    }

    /// Normalizes an arbitrary list of intervals into canonical form.
    pub fn from_intervals(mut pieces: Vec<Interval>) -> IntervalUnion {
        pieces.sort_by(|a, b| cmp_lower(&a.lo, &b.lo).then_with(|| cmp_upper(&a.hi, &b.hi)));
        let mut out: Vec<Interval> = Vec::new();
        for piece in pieces {
            match out.last_mut() {
                Some(last) if last.merges_with(&piece) => {
                    if cmp_upper(&piece.hi, &last.hi) == Ordering::Greater {
                        last.hi = piece.hi;
                    }
                }
                _ => out.push(piece),
            }
        }
        IntervalUnion(out)
    }

    pub fn singleton(piece: Interval) -> IntervalUnion {
        IntervalUnion(alloc::vec![piece])
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut pieces = self.0.clone();
        pieces.extend(other.0.iter().cloned());
        IntervalUnion::from_intervals(pieces)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.0
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.0.iter().any(|i| i.contains(x))
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "empty");
        }
        for (k, piece) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " U ")?;
            }
            write!(f, "{piece}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::rat;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn empty_intervals_are_rejected() {
        assert!(Interval::open(rat(1, 1), rat(1, 1)).is_none());
        assert!(Interval::open_closed(rat(2, 1), rat(1, 1)).is_none());
        assert!(Interval::closed(rat(1, 1), rat(1, 1)).is_some());
    }

    #[test]
    fn touching_intervals_merge_when_a_side_is_closed() {
        // (5, 10] ∪ (10, 12) = (5, 12)
        let u = IntervalUnion::from_intervals(vec![
            Interval::open_closed(rat(5, 1), rat(10, 1)).unwrap(),
            Interval::open(rat(10, 1), rat(12, 1)).unwrap(),
        ]);
        assert_eq!(
            u,
            IntervalUnion::singleton(Interval::open(rat(5, 1), rat(12, 1)).unwrap())
        );

        // (5, 10) ∪ (10, 12) keeps the hole at 10.
        let v = IntervalUnion::from_intervals(vec![
            Interval::open(rat(5, 1), rat(10, 1)).unwrap(),
            Interval::open(rat(10, 1), rat(12, 1)).unwrap(),
        ]);
        assert_eq!(v.pieces().len(), 2);
        assert!(!v.contains(&rat(10, 1)));
        assert!(v.contains(&rat(11, 1)));
    }

    #[test]
    fn point_absorbed_into_interval() {
        // {10} ∪ (5, 10) = (5, 10]
        let u = IntervalUnion::from_intervals(vec![
            Interval::point(rat(10, 1)),
            Interval::open(rat(5, 1), rat(10, 1)).unwrap(),
        ]);
        assert_eq!(
            u,
            IntervalUnion::singleton(Interval::open_closed(rat(5, 1), rat(10, 1)).unwrap())
        );
    }

    #[test]
    fn overlapping_intervals_merge_to_the_larger_upper_bound() {
        let u = IntervalUnion::from_intervals(vec![
            Interval::closed(rat(0, 1), rat(4, 1)).unwrap(),
            Interval::open(rat(2, 1), rat(6, 1)).unwrap(),
            Interval::open(rat(7, 1), rat(8, 1)).unwrap(),
        ]);
        assert_eq!(u.pieces().len(), 2);
        assert_eq!(u.to_string(), "[0, 6) U (7, 8)");
    }

    #[test]
    fn canonical_form_makes_equal_sets_equal() {
        let a = IntervalUnion::from_intervals(vec![
            Interval::open(rat(0, 1), rat(1, 1)).unwrap(),
            Interval::closed(rat(1, 1), rat(2, 1)).unwrap(),
        ]);
        let b = IntervalUnion::from_intervals(vec![
            Interval::open_closed(rat(0, 1), rat(2, 1)).unwrap(),
        ]);
        assert_eq!(a, b);
    }

    #[test]
    fn display_formats() {
        assert_eq!(IntervalUnion::empty().to_string(), "empty");
        assert_eq!(
            IntervalUnion::singleton(Interval::point(rat(21, 2))).to_string(),
            "{21/2}"
        );
        assert_eq!(
            IntervalUnion::singleton(
                Interval::new(LowerBound::Unbounded, UpperBound::Open(rat(-3, 16))).unwrap()
            )
            .to_string(),
            "(-inf, -3/16)"
        );
        assert_eq!(IntervalUnion::all().to_string(), "(-inf, +inf)");
    }

    #[test]
    fn containment_respects_endpoint_flags() {
        let u = IntervalUnion::singleton(
            Interval::open_closed(rat(5, 1), rat(10, 1)).unwrap(),
        );
        assert!(!u.contains(&rat(5, 1)));
        assert!(u.contains(&rat(10, 1)));
        assert!(u.contains(&rat(15, 2)));
        assert!(!u.contains(&rat(11, 1)));
    }
}
