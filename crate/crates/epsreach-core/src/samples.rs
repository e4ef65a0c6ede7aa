//! Small built-in automata used across tests and as demo models: a
//! one-dimensional shrinking system and a two-location drift/return system.

use alloc::string::String;
use alloc::vec;

use crate::automaton::{Edge, HybridAutomaton, Location};
use crate::formula::Formula;
use crate::term::{Term, Var, VarVector};

/// One location `v` over `⟨Z1⟩` with invariant `−100 ≤ Z1 ≤ 100`.
///
/// Continuous steps of positive duration may shrink the value by at most
/// half (`Z1 < 2·Z1' ≤ 2·Z1`), zero-duration steps are the identity; the
/// single self-loop jump shrinks strictly (`Z1 < 2·Z1' < 2·Z1`) under a
/// trivial guard. Starting from a positive point, every step keeps the
/// value positive and above half its previous value, so the system creeps
/// toward 0 without ever reaching it.
pub fn shrink() -> HybridAutomaton {
    let z1 = || Term::var("Z1");
    let z1p = || Term::var("Z1'");
    let two = |t: Term| Term::int(2).mul(t);
    let inv = Formula::between(Term::int(-100), z1(), Term::int(100));
    let flow = Formula::or(vec![
        Formula::and(vec![
            Formula::eq(Term::var("T"), Term::int(0)),
            Formula::eq(z1p(), z1()),
        ]),
        Formula::and(vec![
            Formula::lt(Term::int(0), Term::var("T")),
            Formula::lt(z1(), two(z1p())),
            Formula::le(two(z1p()), two(z1())),
        ]),
    ]);
    let res = Formula::and(vec![
        Formula::lt(z1(), two(z1p())),
        Formula::lt(two(z1p()), two(z1())),
    ]);
    HybridAutomaton::new(
        VarVector::of(&["Z1"]),
        Var::new("T"),
        vec![Location {
            name: String::from("v"),
            inv,
            flow,
        }],
        vec![Edge {
            from: String::from("v"),
            to: String::from("v"),
            act: Formula::True,
            res,
        }],
    )
    .expect("shrink model is structurally well-formed")
}

/// Two locations over `⟨Z1⟩`: in `a` the value rises with slope in `[1, 2]`
/// inside `0 ≤ Z1 ≤ 10`; a jump to `b` (guard `Z1 ≥ 5`, identity reset)
/// switches to falling with slope in `[−2, −1]` inside `0 ≤ Z1 ≤ 20`.
/// Both flows force `Z1' = Z1` at duration zero.
pub fn two_phase() -> HybridAutomaton {
    let z1 = || Term::var("Z1");
    let z1p = || Term::var("Z1'");
    let t = || Term::var("T");
    let delta = || z1p().sub(z1());
    let rise = Formula::and(vec![
        Formula::le(t(), delta()),
        Formula::le(delta(), Term::int(2).mul(t())),
    ]);
    let fall = Formula::and(vec![
        Formula::le(Term::int(-2).mul(t()), delta()),
        Formula::le(delta(), Term::int(-1).mul(t())),
    ]);
    HybridAutomaton::new(
        VarVector::of(&["Z1"]),
        Var::new("T"),
        vec![
            Location {
                name: String::from("a"),
                inv: Formula::between(Term::int(0), z1(), Term::int(10)),
                flow: rise,
            },
            Location {
                name: String::from("b"),
                inv: Formula::between(Term::int(0), z1(), Term::int(20)),
                flow: fall,
            },
        ],
        vec![Edge {
            from: String::from("a"),
            to: String::from("b"),
            act: Formula::ge(z1(), Term::int(5)),
            res: Formula::eq(z1p(), z1()),
        }],
    )
    .expect("two-phase model is structurally well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops;
    use crate::term::rat;
    use alloc::collections::BTreeMap;
    use crate::term::Rational;

    fn point(entries: &[(&str, Rational)]) -> BTreeMap<Var, Rational> {
        entries
            .iter()
            .map(|(n, r)| (Var::new(n), r.clone()))
            .collect()
    }

    #[test]
    fn shrink_flow_admits_half_shrink_only_with_positive_duration() {
        let h = shrink();
        let flow = &h.location("v").unwrap().flow;
        // duration 1: from 10 may move to 6 (within (5, 10]) …
        let ok = point(&[("Z1", rat(10, 1)), ("Z1'", rat(6, 1)), ("T", rat(1, 1))]);
        assert_eq!(ops::eval_qf(flow, &ok), Ok(true));
        // … but not to 5 (the open lower bound) or 11 (growth).
        let low = point(&[("Z1", rat(10, 1)), ("Z1'", rat(5, 1)), ("T", rat(1, 1))]);
        assert_eq!(ops::eval_qf(flow, &low), Ok(false));
        let high = point(&[("Z1", rat(10, 1)), ("Z1'", rat(11, 1)), ("T", rat(1, 1))]);
        assert_eq!(ops::eval_qf(flow, &high), Ok(false));
        // duration 0 forces identity.
        let id = point(&[("Z1", rat(10, 1)), ("Z1'", rat(10, 1)), ("T", rat(0, 1))]);
        assert_eq!(ops::eval_qf(flow, &id), Ok(true));
        let drift = point(&[("Z1", rat(10, 1)), ("Z1'", rat(9, 1)), ("T", rat(0, 1))]);
        assert_eq!(ops::eval_qf(flow, &drift), Ok(false));
    }

    #[test]
    fn shrink_reset_is_strict_on_both_sides() {
        let h = shrink();
        let res = &h.edges()[0].res;
        let interior = point(&[("Z1", rat(10, 1)), ("Z1'", rat(7, 1))]);
        assert_eq!(ops::eval_qf(res, &interior), Ok(true));
        for boundary in [rat(5, 1), rat(10, 1)] {
            let p = point(&[("Z1", rat(10, 1)), ("Z1'", boundary)]);
            assert_eq!(ops::eval_qf(res, &p), Ok(false));
        }
        // From a non-positive value no jump target exists (2·Z1' must lie
        // strictly between Z1 and 2·Z1, an empty band when Z1 ≤ 0).
        let stuck = point(&[("Z1", rat(0, 1)), ("Z1'", rat(0, 1))]);
        assert_eq!(ops::eval_qf(res, &stuck), Ok(false));
    }

    #[test]
    fn two_phase_flows_match_their_slopes() {
        let h = two_phase();
        let rise = &h.location("a").unwrap().flow;
        let fall = &h.location("b").unwrap().flow;
        let up = point(&[("Z1", rat(1, 1)), ("Z1'", rat(4, 1)), ("T", rat(2, 1))]);
        assert_eq!(ops::eval_qf(rise, &up), Ok(true));
        let too_fast = point(&[("Z1", rat(1, 1)), ("Z1'", rat(6, 1)), ("T", rat(2, 1))]);
        assert_eq!(ops::eval_qf(rise, &too_fast), Ok(false));
        let down = point(&[("Z1", rat(8, 1)), ("Z1'", rat(5, 1)), ("T", rat(2, 1))]);
        assert_eq!(ops::eval_qf(fall, &down), Ok(true));
        let wrong_way = point(&[("Z1", rat(8, 1)), ("Z1'", rat(9, 1)), ("T", rat(2, 1))]);
        assert_eq!(ops::eval_qf(fall, &wrong_way), Ok(false));
    }
}
