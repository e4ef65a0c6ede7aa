//! Automaton model files.
//!
//! A model is a single s-expression:
//!
//! ```text
//! (automaton
//!   (dim 1)
//!   (vars Z1)
//!   (location v
//!     (inv (and (<= -100 Z1) (<= Z1 100)))
//!     (dyn (or (and (= T 0) (= Z1' Z1)) (< 0 T))))
//!   (edge v v
//!     (act true)
//!     (res (< Z1' Z1))))
//! ```
//!
//! Formulas use the syntax of [`crate::syntax`]. Primed state variables are
//! written with a trailing `'` and the time variable is always `T`. The
//! loader rejects names reserved for machine use (`@` or `.` inside a name,
//! trailing primes, `T` itself) and any formula that mentions a variable
//! outside its allowed scope.

use crate::syntax::{
    self, is_user_variable_token, parse_formula, parse_sexprs, print_formula, SExpr, SyntaxError,
};
use epsreach_core::automaton::{
    time_zero_check, AutomatonError, Edge, HybridAutomaton, Location, TimeZeroVerdict, Violation,
};
use epsreach_core::backend::{Backend, BackendError};
use epsreach_core::term::{Var, VarVector};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Clone, PartialEq, Debug, Error)]
pub enum ModelError {
    #[error("syntax error: {0}")]
    Syntax(#[from] SyntaxError),
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("declared dimension {declared} but {actual} variable(s)")]
    DimensionMismatch { declared: usize, actual: usize },
    #[error("variable name `{0}` is reserved (primes, `T`, `@`, and `.` are machine-assigned)")]
    ReservedName(String),
    #[error("{0}")]
    Structure(AutomatonError),
    #[error("scoping violations:{}", .0.iter().fold(String::new(), |mut s, v| { let _ = write!(s, "\n  {v}"); s }))]
    Scope(Vec<Violation>),
}

fn shape(msg: impl Into<String>) -> ModelError {
    ModelError::Malformed(msg.into())
}

/// Parses a model file and checks variable scoping. Zero-time behaviour is
/// *not* checked here; see [`model_warnings`].
pub fn parse_model(input: &str) -> Result<HybridAutomaton, ModelError> {
    let exprs = parse_sexprs(input)?;
    let [root] = exprs.as_slice() else {
        return Err(shape(format!(
            "expected one `(automaton …)` expression, found {}",
            exprs.len()
        )));
    };
    let items = root
        .list()
        .filter(|items| items.first().and_then(SExpr::atom) == Some("automaton"))
        .ok_or_else(|| shape("top-level expression must be `(automaton …)`"))?;

    let mut dim: Option<usize> = None;
    let mut vars: Option<Vec<String>> = None;
    let mut locations: Vec<Location> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();

    for section in &items[1..] {
        let parts = section
            .list()
            .ok_or_else(|| shape(format!("unexpected `{}`", syntax::render_sexpr(section))))?;
        let head = parts
            .first()
            .and_then(SExpr::atom)
            .ok_or_else(|| shape("each section must start with a keyword"))?;
        match head {
            "dim" => {
                if dim.is_some() {
                    return Err(shape("duplicate `dim` section"));
                }
                let [_, SExpr::Atom(n)] = parts else {
                    return Err(shape("`dim` takes a single integer"));
                };
                dim = Some(
                    n.parse()
                        .map_err(|_| shape(format!("bad dimension `{n}`")))?,
                );
            }
            "vars" => {
                if vars.is_some() {
                    return Err(shape("duplicate `vars` section"));
                }
                let mut names = Vec::new();
                for v in &parts[1..] {
                    let name = v
                        .atom()
                        .ok_or_else(|| shape("`vars` takes variable names"))?;
                    if !is_user_variable_token(name) || name.ends_with('\'') || name == "T" {
                        return Err(ModelError::ReservedName(name.to_string()));
                    }
                    names.push(name.to_string());
                }
                if names.is_empty() {
                    return Err(shape("`vars` must declare at least one variable"));
                }
                vars = Some(names);
            }
            "location" => {
                let name = parts
                    .get(1)
                    .and_then(SExpr::atom)
                    .ok_or_else(|| shape("`location` needs a name"))?;
                let (inv, flow) = labeled_pair(&parts[2..], "inv", "dyn")
                    .map_err(|m| shape(format!("location `{name}`: {m}")))?;
                locations.push(Location {
                    name: name.to_string(),
                    inv,
                    flow,
                });
            }
            "edge" => {
                let (from, to) = match (
                    parts.get(1).and_then(SExpr::atom),
                    parts.get(2).and_then(SExpr::atom),
                ) {
                    (Some(f), Some(t)) => (f, t),
                    _ => return Err(shape("`edge` needs source and target location names")),
                };
                let (act, res) = labeled_pair(&parts[3..], "act", "res")
                    .map_err(|m| shape(format!("edge `{from}` → `{to}`: {m}")))?;
                edges.push(Edge {
                    from: from.to_string(),
                    to: to.to_string(),
                    act,
                    res,
                });
            }
            other => return Err(shape(format!("unknown section `{other}`"))),
        }
    }

    let names = vars.ok_or_else(|| shape("missing `vars` section"))?;
    if let Some(declared) = dim {
        if declared != names.len() {
            return Err(ModelError::DimensionMismatch {
                declared,
                actual: names.len(),
            });
        }
    } else {
        return Err(shape("missing `dim` section"));
    }
    let vector = VarVector::new(names.iter().map(Var::new).collect())
        .map_err(|e| shape(format!("bad variable vector: {e:?}")))?;
    let automaton = HybridAutomaton::new(vector, Var::new("T"), locations, edges)
        .map_err(ModelError::Structure)?;
    let violations = automaton.validate();
    if !violations.is_empty() {
        return Err(ModelError::Scope(violations));
    }
    Ok(automaton)
}

/// Extracts `(label₁ F)` and `(label₂ F)` from the given slice, in either
/// order, each exactly once.
fn labeled_pair(
    sections: &[SExpr],
    first: &str,
    second: &str,
) -> Result<(epsreach_core::formula::Formula, epsreach_core::formula::Formula), String> {
    let mut a = None;
    let mut b = None;
    for s in sections {
        let parts = s
            .list()
            .filter(|p| p.len() == 2)
            .ok_or_else(|| format!("expected `({first} F)` and `({second} F)` parts"))?;
        let label = parts
            .first()
            .and_then(SExpr::atom)
            .ok_or_else(|| "part label must be a keyword".to_string())?;
        let formula =
            parse_formula(&parts[1]).map_err(|e| format!("in `({label} …)`: {e}"))?;
        let slot = if label == first {
            &mut a
        } else if label == second {
            &mut b
        } else {
            return Err(format!("unknown part `{label}`"));
        };
        if slot.replace(formula).is_some() {
            return Err(format!("duplicate `{label}` part"));
        }
    }
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        (None, _) => Err(format!("missing `({first} F)` part")),
        (_, None) => Err(format!("missing `({second} F)` part")),
    }
}

/// Prints an automaton in the model file format. The automaton's time
/// variable is rewritten to the reserved token `T`; fails (with a message)
/// only if `T` is already a state variable of an automaton whose time
/// variable is named something else.
pub fn print_model(h: &HybridAutomaton) -> Result<String, ModelError> {
    let time_token = Var::new("T");
    let rename = if *h.time() == time_token {
        None
    } else {
        if h.vars().contains(&time_token) || h.primed().contains(&time_token) {
            return Err(shape(
                "cannot print: the reserved time token `T` is a state variable",
            ));
        }
        let map: std::collections::BTreeMap<_, _> = std::iter::once((
            h.time().clone(),
            epsreach_core::term::Term::var(time_token),
        ))
        .collect();
        Some(map)
    };
    let fix = |f: &epsreach_core::formula::Formula| match &rename {
        Some(map) => print_formula(&epsreach_core::ops::substitute(f, map)),
        None => print_formula(f),
    };

    let mut out = String::from("(automaton\n");
    let _ = writeln!(out, "  (dim {})", h.dim());
    let names: Vec<&str> = h.vars().iter().map(|v| v.name()).collect();
    let _ = writeln!(out, "  (vars {})", names.join(" "));
    for loc in h.locations() {
        let _ = writeln!(out, "  (location {}", loc.name);
        let _ = writeln!(out, "    (inv {})", fix(&loc.inv));
        let _ = writeln!(out, "    (dyn {}))", fix(&loc.flow));
    }
    for e in h.edges() {
        let _ = writeln!(out, "  (edge {} {}", e.from, e.to);
        let _ = writeln!(out, "    (act {})", fix(&e.act));
        let _ = writeln!(out, "    (res {}))", fix(&e.res));
    }
    out.push(')');
    out.push('\n');
    Ok(out)
}

/// Runs the zero-time sanity check and renders anything short of a clean
/// pass as a human-readable warning. These are advisory: a model that
/// drifts at time zero is still loadable.
pub fn model_warnings(
    h: &HybridAutomaton,
    backend: &mut dyn Backend,
) -> Result<Vec<String>, BackendError> {
    let mut warnings = Vec::new();
    for (name, verdict) in time_zero_check(h, backend)? {
        match verdict {
            TimeZeroVerdict::Holds => {}
            TimeZeroVerdict::Fails(failure, witness) => {
                let mut msg = format!("location `{name}`: {failure}");
                if let Some(w) = witness {
                    let parts: Vec<String> =
                        w.iter().map(|(v, r)| format!("{} = {}", v.name(), r)).collect();
                    let _ = write!(msg, " (example: {})", parts.join(", "));
                }
                warnings.push(msg);
            }
            TimeZeroVerdict::Unknown(reason) => {
                warnings.push(format!("location `{name}`: zero-time check undecided: {reason}"));
            }
        }
    }
    Ok(warnings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use epsreach_core::engine::BuiltinBackend;
    use epsreach_core::samples;

    const SHRINK_TEXT: &str = r#"
        (automaton
          (dim 1)
          (vars Z1)
          (location v
            (inv (and (<= -100 Z1) (<= Z1 100)))
            (dyn (or (and (= T 0) (= Z1' Z1))
                     (and (< 0 T) (and (< Z1 (* 2 Z1')) (<= (* 2 Z1') (* 2 Z1)))))))
          (edge v v
            (act true)
            (res (and (< Z1 (* 2 Z1')) (< (* 2 Z1') (* 2 Z1))))))
    "#;

    #[test]
    fn a_model_file_parses_into_an_automaton() {
        let h = parse_model(SHRINK_TEXT).unwrap();
        assert_eq!(h.dim(), 1);
        assert_eq!(h.locations().len(), 1);
        assert_eq!(h.edges().len(), 1);
        assert_eq!(h.vars().vars()[0].name(), "Z1");
    }

    #[test]
    fn printing_and_reparsing_is_the_identity_on_samples() {
        for h in [samples::shrink(), samples::two_phase()] {
            let text = print_model(&h).unwrap();
            let back = parse_model(&text).unwrap();
            assert_eq!(h, back, "round trip changed the automaton:\n{text}");
        }
    }

    #[test]
    fn scoping_violations_are_load_errors() {
        let bad = SHRINK_TEXT.replace("(act true)", "(act (< W 1))");
        match parse_model(&bad) {
            Err(ModelError::Scope(violations)) => {
                assert_eq!(violations.len(), 1);
            }
            other => panic!("expected a scope error, got {other:?}"),
        }
    }

    #[test]
    fn reserved_names_are_rejected() {
        for name in ["T", "Z1'", "a@b"] {
            let bad = SHRINK_TEXT.replace("(vars Z1)", &format!("(vars {name})"));
            assert!(
                matches!(parse_model(&bad), Err(ModelError::ReservedName(_))),
                "`{name}` should be reserved"
            );
        }
    }

    #[test]
    fn shape_problems_are_reported() {
        assert!(matches!(
            parse_model("(automaton (dim 2) (vars Z1))"),
            Err(ModelError::DimensionMismatch {
                declared: 2,
                actual: 1
            })
        ));
        let missing = "(automaton (dim 1) (vars Z1) (location v (inv true)))";
        assert!(matches!(parse_model(missing), Err(ModelError::Malformed(_))));
        let unknown = "(automaton (dim 1) (vars Z1) (location v (inv true) (dyn true)) (foo))";
        assert!(matches!(parse_model(unknown), Err(ModelError::Malformed(_))));
        let dup = "(automaton (dim 1) (dim 1) (vars Z1) (location v (inv true) (dyn true)))";
        assert!(matches!(parse_model(dup), Err(ModelError::Malformed(_))));
    }

    #[test]
    fn zero_time_drift_becomes_a_warning_not_an_error() {
        let h = parse_model(SHRINK_TEXT).unwrap();
        let mut backend = BuiltinBackend::with_budget(50_000_000);
        let warnings = model_warnings(&h, &mut backend).unwrap();
        // SHRINK's flow pins Z1' = Z1 at T = 0, so it passes cleanly.
        assert!(warnings.is_empty(), "unexpected warnings: {warnings:?}");
    }

    #[test]
    fn a_drifting_model_warns_on_every_drifting_location() {
        let text = SHRINK_TEXT.replace(
            "(dyn (or (and (= T 0) (= Z1' Z1))\n                     (and (< 0 T) (and (< Z1 (* 2 Z1')) (<= (* 2 Z1') (* 2 Z1)))))))",
            "(dyn true))",
        );
        let h = parse_model(&text).unwrap();
        let mut backend = BuiltinBackend::with_budget(50_000_000);
        let warnings = model_warnings(&h, &mut backend).unwrap();
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("location `v`"), "{warnings:?}");
    }
}
