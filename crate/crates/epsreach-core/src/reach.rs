//! Symbolic reachability formulas: the time-progress condition, the
//! zero-jump relation, and the `i`-jump relations (per location pair, over
//! all pairs, and cumulatively).
//!
//! All intermediate variables drawn during construction come from a single
//! threaded block counter ([`FreshBlocks`]), so every formula here is a pure,
//! byte-reproducible function of its inputs: the `k`-th allocated block
//! contributes a time variable `T@k` and/or a state-vector copy
//! `Z@k.1 … Z@k.d`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::automaton::{AutomatonError, HybridAutomaton, Location};
use crate::formula::Formula;
use crate::ops;
use crate::term::{Term, Var, VarVector};

/// Allocator for fresh-variable blocks. Starts past every block index
/// already mentioned in the scanned formulas, so generated names never
/// collide even when formulas are fed back into further constructions.
#[derive(Clone, Debug)]
pub struct FreshBlocks {
    next: u64,
}

impl FreshBlocks {
    pub fn new(next: u64) -> FreshBlocks {
        FreshBlocks { next }
    }

    /// Scans variable names of the form `…@k` or `…@k.j` and starts after
    /// the largest `k` seen.
    pub fn scanning<'a>(names: impl IntoIterator<Item = &'a str>) -> FreshBlocks {
        let mut max = 0u64;
        for name in names {
            if let Some(block) = block_index(name) {
                max = max.max(block);
            }
        }
        FreshBlocks { next: max + 1 }
    }

    /// Scan of every formula and declared variable of an automaton.
    pub fn for_automaton(h: &HybridAutomaton) -> FreshBlocks {
        let mut names: alloc::collections::BTreeSet<String> = alloc::collections::BTreeSet::new();
        for loc in h.locations() {
            names.extend(ops::all_var_names(&loc.inv));
            names.extend(ops::all_var_names(&loc.flow));
        }
        for e in h.edges() {
            names.extend(ops::all_var_names(&e.act));
            names.extend(ops::all_var_names(&e.res));
        }
        for v in h.vars().iter().chain(h.primed().iter()) {
            names.insert(String::from(v.name()));
        }
        names.insert(String::from(h.time().name()));
        FreshBlocks::scanning(names.iter().map(String::as_str))
    }

    /// The next unused block index.
    pub fn alloc(&mut self) -> u64 {
        let k = self.next;
        self.next += 1;
        k
    }

    /// The time variable of block `k`.
    pub fn time_var(k: u64) -> Var {
        Var::new(format!("T@{k}"))
    }

    /// The `d`-component state-vector copy of block `k`.
    pub fn state_vector(k: u64, d: usize) -> VarVector {
        VarVector::new((1..=d).map(|j| Var::new(format!("Z@{k}.{j}"))).collect())
            .expect("generated fresh names are distinct and nonempty")
    }
}

/// Parses the block index out of a generated name (`T@7` → 7, `Z@3.2` → 3).
fn block_index(name: &str) -> Option<u64> {
    let (_, suffix) = name.rsplit_once('@')?;
    let digits = match suffix.split_once('.') {
        Some((block, _)) => block,
        None => suffix,
    };
    digits.parse().ok()
}

/// Substitution map sending each variable of `from` to the matching
/// variable of `to`.
pub fn vector_map(from: &VarVector, to: &VarVector) -> BTreeMap<Var, Term> {
    from.iter()
        .zip(to.iter())
        .map(|(a, b)| (a.clone(), Term::var(b.clone())))
        .collect()
}

/// Time-progress condition of a location: over the whole duration `T`, the
/// flow can stay inside the invariant —
/// `∀T''(0 ≤ T'' ∧ T'' ≤ T → ∃Z''(flow[Z, Z'', T''] ∧ inv[Z'']))`
/// with fresh `T''`/`Z''` drawn from the block counter.
pub fn tp_formula(h: &HybridAutomaton, v: &str) -> Result<Formula, AutomatonError> {
    let loc = h.location(v)?;
    let mut blocks = FreshBlocks::for_automaton(h);
    Ok(tp_with(h, loc, &mut blocks))
}

pub(crate) fn tp_with(h: &HybridAutomaton, loc: &Location, blocks: &mut FreshBlocks) -> Formula {
    let k = blocks.alloc();
    let t_mid = FreshBlocks::time_var(k);
    let z_mid = FreshBlocks::state_vector(k, h.dim());
    let mut flow_map = vector_map(h.primed(), &z_mid);
    flow_map.insert(h.time().clone(), Term::var(t_mid.clone()));
    let flow_mid = ops::substitute(&loc.flow, &flow_map);
    let inv_mid = ops::substitute(&loc.inv, &vector_map(h.vars(), &z_mid));
    let range = Formula::and(alloc::vec![
        Formula::le(Term::int(0), Term::var(t_mid.clone())),
        Formula::le(Term::var(t_mid.clone()), Term::var(h.time().clone())),
    ]);
    let target = Formula::exists_many(
        z_mid.vars(),
        Formula::and(alloc::vec![flow_mid, inv_mid]),
    );
    Formula::forall(t_mid, Formula::implies(range, target))
}

/// Zero-jump reachability between locations:
/// `⊥` when `v ≠ v'`, otherwise
/// `∃T(0 ≤ T ∧ flow[Z,Z',T] ∧ tp[Z,T]) ∧ inv[Z] ∧ inv[Z']`.
pub fn reach0(h: &HybridAutomaton, v: &str, v2: &str) -> Result<Formula, AutomatonError> {
    h.location(v)?;
    h.location(v2)?;
    let mut blocks = FreshBlocks::for_automaton(h);
    Ok(reach0_with(h, v, v2, &mut blocks))
}

fn reach0_with(
    h: &HybridAutomaton,
    v: &str,
    v2: &str,
    blocks: &mut FreshBlocks,
) -> Formula {
    if v != v2 {
        return Formula::False;
    }
    let loc = h.location(v).expect("caller verified the location");
    let k = blocks.alloc();
    let t = FreshBlocks::time_var(k);
    let rename_t: BTreeMap<Var, Term> =
        core::iter::once((h.time().clone(), Term::var(t.clone()))).collect();
    let flow_t = ops::substitute(&loc.flow, &rename_t);
    let tp_t = ops::substitute(&tp_with(h, loc, blocks), &rename_t);
    let step = Formula::exists(
        t.clone(),
        Formula::and(alloc::vec![
            Formula::le(Term::int(0), Term::var(t)),
            flow_t,
            tp_t,
        ]),
    );
    let inv_pre = loc.inv.clone();
    let inv_post = ops::substitute(&loc.inv, &vector_map(h.vars(), h.primed()));
    Formula::and(alloc::vec![step, inv_pre, inv_post])
}

/// Reachability in exactly `i` jumps from location `v` to `v'` (with
/// arbitrary continuous steps around each jump): the inductive relation
/// composing `reach_i(v, ṽ, i−1)`, one edge `ṽ → v'`, and a trailing
/// zero-jump phase in `v'`, for every location `ṽ` with such an edge.
pub fn reach_i(
    h: &HybridAutomaton,
    v: &str,
    v2: &str,
    i: u32,
) -> Result<Formula, AutomatonError> {
    h.location(v)?;
    h.location(v2)?;
    let mut blocks = FreshBlocks::for_automaton(h);
    Ok(reach_i_with(h, v, v2, i, &mut blocks))
}

fn reach_i_with(
    h: &HybridAutomaton,
    v: &str,
    v2: &str,
    i: u32,
    blocks: &mut FreshBlocks,
) -> Formula {
    if i == 0 {
        return reach0_with(h, v, v2, blocks);
    }
    let mut disjuncts = Vec::new();
    for mid in h.locations() {
        for edge in h.edges_from(&mid.name) {
            if edge.to != v2 {
                continue;
            }
            let prefix = reach_i_with(h, v, &mid.name, i - 1, blocks);
            if prefix == Formula::False {
                // No (i−1)-jump path reaches this edge's source; the whole
                // disjunct is ⊥ and is dropped without allocating blocks.
                continue;
            }
            let z1 = FreshBlocks::state_vector(blocks.alloc(), h.dim());
            let z2 = FreshBlocks::state_vector(blocks.alloc(), h.dim());
            let prefix_sub = ops::substitute(&prefix, &vector_map(h.primed(), &z1));
            let act_sub = ops::substitute(&edge.act, &vector_map(h.vars(), &z1));
            let mut res_map = vector_map(h.vars(), &z1);
            res_map.extend(vector_map(h.primed(), &z2));
            let res_sub = ops::substitute(&edge.res, &res_map);
            let tail = reach0_with(h, v2, v2, blocks);
            let tail_sub = ops::substitute(&tail, &vector_map(h.vars(), &z2));
            let mut bound: Vec<Var> = z1.vars().to_vec();
            bound.extend(z2.vars().iter().cloned());
            disjuncts.push(Formula::exists_many(
                &bound,
                Formula::and(alloc::vec![prefix_sub, act_sub, res_sub, tail_sub]),
            ));
        }
    }
    Formula::or(disjuncts)
}

/// Reachability in exactly `i` jumps between any pair of locations.
pub fn reach_all(h: &HybridAutomaton, i: u32) -> Formula {
    let mut blocks = FreshBlocks::for_automaton(h);
    reach_all_with(h, i, &mut blocks)
}

fn reach_all_with(h: &HybridAutomaton, i: u32, blocks: &mut FreshBlocks) -> Formula {
    let mut disjuncts = Vec::new();
    for v in h.locations() {
        for v2 in h.locations() {
            disjuncts.push(reach_i_with(h, &v.name, &v2.name, i, blocks));
        }
    }
    Formula::or(disjuncts)
}

/// Reachability in at most `i` jumps: `⋁_{j ≤ i} reach_all(h, j)`.
pub fn reach_le(h: &HybridAutomaton, i: u32) -> Formula {
    let mut blocks = FreshBlocks::for_automaton(h);
    Formula::or((0..=i).map(|j| reach_all_with(h, j, &mut blocks)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Backend;
    use crate::engine::BuiltinBackend;
    use crate::interval::{Interval, IntervalUnion};
    use crate::samples;
    use crate::term::rat;
    use alloc::string::ToString;
    use alloc::vec;

    fn valid(f: &Formula) -> bool {
        match BuiltinBackend::with_budget(30_000_000)
            .check_valid(f)
            .unwrap()
        {
            crate::backend::Validity::Valid => true,
            crate::backend::Validity::Invalid(_) => false,
            crate::backend::Validity::Unknown(r) => panic!("validity left undecided: {r}"),
        }
    }

    fn equivalent(a: &Formula, b: &Formula) -> bool {
        valid(&Formula::iff(a.clone(), b.clone()))
    }

    #[test]
    fn block_index_parsing() {
        assert_eq!(block_index("Z1"), None);
        assert_eq!(block_index("T@7"), Some(7));
        assert_eq!(block_index("Z@3.2"), Some(3));
        assert_eq!(block_index("Z1'@12"), Some(12));
        let blocks = FreshBlocks::scanning(["Z1", "Z@4.1", "T@9"]);
        assert_eq!(blocks.next, 10);
    }

    #[test]
    fn shrink_time_progress_exact_form() {
        let h = samples::shrink();
        let tp = tp_formula(&h, "v").unwrap();
        // Free variables: Z1 and the time variable only.
        let free = ops::free_vars(&tp);
        assert!(free.contains(&Var::new("Z1")));
        assert!(free.contains(&Var::new("T")));
        assert_eq!(free.len(), 2);
        // Exact closed form: vacuous for negative durations; for
        // non-negative durations the invariant must hold and any strictly
        // positive duration additionally forces a positive value.
        let t = || Term::var("T");
        let z1 = || Term::var("Z1");
        let exact = Formula::or(vec![
            Formula::lt(t(), Term::int(0)),
            Formula::and(vec![
                Formula::le(Term::int(0), t()),
                Formula::between(Term::int(-100), z1(), Term::int(100)),
                Formula::implies(
                    Formula::lt(Term::int(0), t()),
                    Formula::lt(Term::int(0), z1()),
                ),
            ]),
        ]);
        assert!(equivalent(&tp, &exact));
        // Restricted to positive durations and positive values, this is
        // exactly the invariant box.
        let restricted = Formula::implies(
            Formula::and(vec![
                Formula::le(Term::int(0), t()),
                Formula::lt(Term::int(0), z1()),
            ]),
            Formula::iff(
                tp.clone(),
                Formula::between(Term::int(-100), z1(), Term::int(100)),
            ),
        );
        assert!(valid(&restricted));
    }

    #[test]
    fn identity_flow_time_progress_is_trivial() {
        let h = crate::automaton::HybridAutomaton::new(
            VarVector::of(&["Z1"]),
            Var::new("T"),
            vec![crate::automaton::Location {
                name: String::from("v"),
                inv: Formula::True,
                flow: Formula::eq(Term::var("Z1'"), Term::var("Z1")),
            }],
            vec![],
        )
        .unwrap();
        let tp = tp_formula(&h, "v").unwrap();
        assert!(equivalent(&tp, &Formula::True));
    }

    #[test]
    fn reach0_exact_form_on_shrink() {
        let h = samples::shrink();
        let r0 = reach0(&h, "v", "v").unwrap();
        let free = ops::free_vars(&r0);
        assert_eq!(
            free.into_iter().collect::<Vec<_>>(),
            vec![Var::new("Z1"), Var::new("Z1'")]
        );
        let z1 = || Term::var("Z1");
        let z1p = || Term::var("Z1'");
        let inv = |t: Term| Formula::between(Term::int(-100), t, Term::int(100));
        // Exact: both invariants, and either the identity (zero duration) or
        // a positive-duration half-shrink from a positive value.
        let exact = Formula::and(vec![
            inv(z1()),
            inv(z1p()),
            Formula::or(vec![
                Formula::eq(z1p(), z1()),
                Formula::and(vec![
                    Formula::lt(Term::int(0), z1()),
                    Formula::lt(z1(), Term::int(2).mul(z1p())),
                    Formula::le(z1p(), z1()),
                ]),
            ]),
        ]);
        assert!(equivalent(&r0, &exact));
        // On positive values this collapses to the half-open band.
        let band = Formula::and(vec![
            inv(z1()),
            inv(z1p()),
            Formula::lt(z1(), Term::int(2).mul(z1p())),
            Formula::le(z1p(), z1()),
        ]);
        let restricted = Formula::implies(
            Formula::lt(Term::int(0), z1()),
            Formula::iff(r0.clone(), band),
        );
        assert!(valid(&restricted));
    }

    #[test]
    fn reach0_is_false_across_locations() {
        let h = samples::two_phase();
        assert_eq!(reach0(&h, "a", "b").unwrap(), Formula::False);
        assert!(matches!(
            reach0(&h, "a", "nowhere"),
            Err(AutomatonError::UnknownLocation(_))
        ));
    }

    #[test]
    fn reach0_membership_at_sample_points() {
        let h = samples::shrink();
        let r0 = reach0(&h, "v", "v").unwrap();
        let mut backend = BuiltinBackend::new();
        for (target, expected) in [(rat(7, 1), true), (rat(4, 1), false)] {
            let pinned = Formula::and(vec![
                Formula::eq(Term::var("Z1"), Term::int(10)),
                Formula::eq(Term::var("Z1'"), Term::constant(target.clone())),
                r0.clone(),
            ]);
            assert_eq!(
                backend.check_sat(&pinned).unwrap().is_sat(),
                expected,
                "target {target}"
            );
        }
    }

    #[test]
    fn one_jump_image_from_ten_is_the_expected_band() {
        let h = samples::shrink();
        let r1 = reach_i(&h, "v", "v", 1).unwrap();
        let at_ten = ops::substitute(
            &r1,
            &core::iter::once((Var::new("Z1"), Term::int(10))).collect(),
        );
        let u = BuiltinBackend::new()
            .describe_1d(&at_ten, &Var::new("Z1'"))
            .unwrap();
        assert_eq!(
            u,
            IntervalUnion::singleton(Interval::open(rat(5, 4), rat(10, 1)).unwrap())
        );
    }

    #[test]
    fn jump_counts_respect_the_edge_graph() {
        let h = samples::two_phase();
        // No edge ends in `a`, so no positive jump count reaches it.
        assert_eq!(reach_i(&h, "a", "a", 1).unwrap(), Formula::False);
        assert_eq!(reach_i(&h, "a", "a", 2).unwrap(), Formula::False);
        // One jump a→b exists …
        assert_ne!(reach_i(&h, "a", "b", 1).unwrap(), Formula::False);
        // … but a second jump would need an edge out of `b`.
        assert_eq!(reach_i(&h, "a", "b", 2).unwrap(), Formula::False);
    }

    #[test]
    fn cumulative_reach_is_monotone() {
        for h in [samples::shrink(), samples::two_phase()] {
            for i in 0..=2u32 {
                let smaller = reach_le(&h, i);
                let larger = reach_le(&h, i + 1);
                assert!(
                    valid(&Formula::implies(smaller, larger)),
                    "reach_le({i}) ⊆ reach_le({}) failed",
                    i + 1
                );
            }
        }
    }

    #[test]
    fn single_location_cumulative_base_case() {
        let h = samples::shrink();
        assert_eq!(reach_le(&h, 0), reach0(&h, "v", "v").unwrap());
    }

    #[test]
    fn constructed_formulas_stay_in_scope() {
        let h = samples::two_phase();
        let zz: Vec<Var> = h
            .vars()
            .iter()
            .chain(h.primed().iter())
            .cloned()
            .collect();
        for i in 0..=2u32 {
            for v in ["a", "b"] {
                for v2 in ["a", "b"] {
                    let f = reach_i(&h, v, v2, i).unwrap();
                    for fv in ops::free_vars(&f) {
                        assert!(zz.contains(&fv), "{fv} escaped in reach_{i}({v},{v2})");
                    }
                }
            }
        }
    }

    #[test]
    fn printed_forms_are_reproducible() {
        // Byte-level golden outputs: these pin the fresh-naming scheme
        // (`T@k`, `Z@k.j`, threaded in construction order) so that formula
        // output is stable across runs and platforms.
        let h = samples::shrink();
        let tp = tp_formula(&h, "v").unwrap().to_string();
        assert_eq!(
            tp,
            "(forall (T@1) (=> (and (<= 0 T@1) (<= T@1 T)) (exists (Z@1.1) (and \
             (or (and (= T@1 0) (= Z@1.1 Z1)) (and (< 0 T@1) (< Z1 (* 2 Z@1.1)) \
             (<= (* 2 Z@1.1) (* 2 Z1)))) (and (<= -100 Z@1.1) (<= Z@1.1 100))))))"
        );
        let tp_again = tp_formula(&h, "v").unwrap().to_string();
        assert_eq!(tp, tp_again);
        let r1 = reach_i(&h, "v", "v", 1).unwrap().to_string();
        let r1_again = reach_i(&h, "v", "v", 1).unwrap().to_string();
        assert_eq!(r1, r1_again);
        // Block numbering in construction order: the leading zero-jump
        // phase takes T@1 (and T@2/Z@2.1 for its time-progress part), the
        // jump's intermediate vectors are Z@3/Z@4, the trailing zero-jump
        // phase takes T@5/T@6.
        assert!(r1.starts_with("(exists (Z@3.1) (exists (Z@4.1)"), "{r1}");
        assert!(r1.contains("T@1"), "{r1}");
        assert!(r1.contains("T@6"), "{r1}");
    }
}
