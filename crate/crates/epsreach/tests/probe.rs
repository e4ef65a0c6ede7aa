//! TEMPORARY measurement probe — not part of the suite; will be removed.

use epsreach::smt::ExternalBackend;
use epsreach_core::backend::Backend;
use epsreach_core::formula::Formula;
use epsreach_core::ops;
use epsreach_core::prep::prune_quantifiers;
use epsreach_core::railroad::{build_psi_safe, build_psi_unsafe, build_railroad, RailParams};
use epsreach_core::term::{rat, Term, Var, VarVector};
use epsreach_core::transform::{contract, expand, TransformConfig};
use std::collections::BTreeMap;
use std::time::Instant;

#[test]
#[ignore]
fn probe_railroad_queries() {
    let h = build_railroad(&RailParams::default()).unwrap();
    let psi_un = build_psi_unsafe(&h).unwrap();
    let psi_sf = build_psi_safe(&h).unwrap();
    let plane = VarVector::of(&["Z_t", "V_t", "V_c", "A_c"]);
    let cfg = TransformConfig::new(rat(1, 20), plane).unwrap();

    let t0 = Instant::now();
    let expanded = prune_quantifiers(&expand(&psi_un, &cfg));
    let contracted = prune_quantifiers(&contract(&psi_sf, &cfg));
    eprintln!("prune+transform took {:?}", t0.elapsed());
    eprintln!(
        "expanded: quantified={} size={}",
        has_q(&expanded),
        size(&expanded)
    );
    eprintln!(
        "contracted: quantified={} size={}",
        has_q(&contracted),
        size(&contracted)
    );

    // Fig-3 plane, a mid-grid point.
    let point: BTreeMap<Var, Term> = [
        (Var::new("Z_t"), Term::constant(rat(-20, 1))),
        (Var::new("V_t"), Term::constant(rat(2, 1))),
        (Var::new("V_c"), Term::constant(rat(11, 4))),
        (Var::new("A_c"), Term::constant(rat(1, 20))),
    ]
    .into_iter()
    .collect();

    for (name, f) in [("unsafe", &expanded), ("safe", &contracted)] {
        let ground = ops::substitute(f, &point);
        let script = epsreach::smt::debug_script(&ground);
        std::fs::write(format!("/root/notes/query_{name}.smt2"), script).unwrap();
        eprintln!("{name}: wrote script, size={}", size(&ground));
    }
}

fn has_q(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => false,
        Formula::Not(g) => has_q(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().any(has_q),
        Formula::Implies(a, b) => has_q(a) || has_q(b),
        Formula::Exists(..) | Formula::Forall(..) => true,
    }
}

fn size(f: &Formula) -> usize {
    match f {
        Formula::True | Formula::False => 1,
        Formula::Atom { .. } => 1,
        Formula::Not(g) => 1 + size(g),
        Formula::And(gs) | Formula::Or(gs) => 1 + gs.iter().map(size).sum::<usize>(),
        Formula::Implies(a, b) => 1 + size(a) + size(b),
        Formula::Exists(_, g) | Formula::Forall(_, g) => 1 + size(g),
    }
}

#[test]
#[ignore]
fn probe_basic_external() {
    let mut ext = ExternalBackend::discover().unwrap();
    let t = Instant::now();
    let f = Formula::eq(Term::int(0), Term::int(1));
    eprintln!("0=1: {:?} in {:?}", ext.check_sat(&f), t.elapsed());

    let t = Instant::now();
    let g = Formula::and(vec![
        Formula::lt(Term::int(0), Term::var("X")),
        Formula::lt(Term::var("X"), Term::int(1)),
    ]);
    eprintln!("0<X<1: {:?} in {:?}", ext.check_sat(&g), t.elapsed());

    let t = Instant::now();
    let q = Formula::exists(
        "Y",
        Formula::and(vec![
            Formula::lt(Term::var("X"), Term::var("Y")),
            Formula::lt(Term::var("Y"), Term::var("X").add(Term::int(1))),
        ]),
    );
    eprintln!("exists-linear: {:?} in {:?}", ext.check_sat(&q), t.elapsed());
}
