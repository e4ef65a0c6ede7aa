//! Text syntax for terms and formulas: prefix s-expressions.
//!
//! Grammar (also produced by the printers): terms `(+ t…)`, `(* t…)`,
//! `(- t t)`, `(^ t k)`, rational literals `p/q`, integers, or decimals
//! (parsed exactly); atoms `(= t t)`, `(< t t)`, `(<= t t)`; connectives
//! `(and f…)`, `(or f…)`, `(not f)`, `(=> f f)`; quantifiers
//! `(exists (X…) f)` and `(forall (X…) f)`; constants `true`/`false`.
//! Variable tokens are letters/digits/underscores with an optional trailing
//! prime. The parser is slightly lenient (unary `(- t)`, `>`/`>=` sugar,
//! internal `@`/`.` in identifiers, `|…|` quoting) so solver output can be
//! read back, but the printers stay inside the grammar above.

use epsreach_core::formula::{Cmp, Formula};
use epsreach_core::term::{Rational, Term, Var};
use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use std::fmt::Write as _;
use thiserror::Error;

/// A parsed s-expression: a bare token or a parenthesized list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

impl SExpr {
    pub fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s) => Some(s),
            SExpr::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::Atom(_) => None,
            SExpr::List(items) => Some(items),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum SyntaxError {
    #[error("unbalanced parentheses")]
    Unbalanced,
    #[error("unterminated `|…|` symbol")]
    UnterminatedBar,
    #[error("expected a single expression, found {0}")]
    ExpectedSingle(usize),
    #[error("expected {expected}, found `{found}`")]
    Unexpected { expected: &'static str, found: String },
    #[error("malformed number `{0}`")]
    BadNumber(String),
    #[error("`{0}` is not a valid variable name")]
    BadVariable(String),
    #[error("operator `{op}` needs {needs} argument(s), found {found}")]
    Arity {
        op: String,
        needs: &'static str,
        found: usize,
    },
}

/// Splits the input into top-level s-expressions. `;` starts a line
/// comment; `|…|` quotes an atom verbatim.
pub fn parse_sexprs(input: &str) -> Result<Vec<SExpr>, SyntaxError> {
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let mut chars = input.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            '(' => stack.push(Vec::new()),
            ')' => {
                let done = stack.pop().ok_or(SyntaxError::Unbalanced)?;
                let parent = stack.last_mut().ok_or(SyntaxError::Unbalanced)?;
                parent.push(SExpr::List(done));
            }
            '|' => {
                let mut name = String::new();
                let mut closed = false;
                for c in chars.by_ref() {
                    if c == '|' {
                        closed = true;
                        break;
                    }
                    name.push(c);
                }
                if !closed {
                    return Err(SyntaxError::UnterminatedBar);
                }
                stack
                    .last_mut()
                    .ok_or(SyntaxError::Unbalanced)?
                    .push(SExpr::Atom(name));
            }
            c if c.is_whitespace() => {}
            c => {
                let mut token = String::new();
                token.push(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' || n == '|' {
                        break;
                    }
                    token.push(n);
                    chars.next();
                }
                stack
                    .last_mut()
                    .ok_or(SyntaxError::Unbalanced)?
                    .push(SExpr::Atom(token));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SyntaxError::Unbalanced);
    }
    Ok(stack.pop().unwrap())
}

/// Parses exactly one expression.
pub fn parse_single(input: &str) -> Result<SExpr, SyntaxError> {
    let mut all = parse_sexprs(input)?;
    if all.len() != 1 {
        return Err(SyntaxError::ExpectedSingle(all.len()));
    }
    Ok(all.pop().unwrap())
}

/// Parses a formula from text.
pub fn parse_formula_text(input: &str) -> Result<Formula, SyntaxError> {
    parse_formula(&parse_single(input)?)
}

/// `p/q`, integer, or decimal — all exact.
pub fn parse_rational(token: &str) -> Result<Rational, SyntaxError> {
    let bad = || SyntaxError::BadNumber(token.to_string());
    let (negative, body) = match token.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, token),
    };
    if body.is_empty() {
        return Err(bad());
    }
    let value = if let Some((p, q)) = body.split_once('/') {
        let num: BigInt = p.parse().map_err(|_| bad())?;
        let den: BigInt = q.parse().map_err(|_| bad())?;
        if den.is_zero() || p.is_empty() || q.is_empty() {
            return Err(bad());
        }
        Rational::new(num, den)
    } else if let Some((whole, frac)) = body.split_once('.') {
        if !whole.chars().all(|c| c.is_ascii_digit())
            || !frac.chars().all(|c| c.is_ascii_digit())
            || (whole.is_empty() && frac.is_empty())
        {
            return Err(bad());
        }
        let digits: BigInt = format!("{whole}{frac}").parse().map_err(|_| bad())?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        Rational::new(digits, scale)
    } else {
        let num: BigInt = body.parse().map_err(|_| bad())?;
        Rational::from_integer(num)
    };
    Ok(if negative { -value } else { value })
}

fn looks_numeric(token: &str) -> bool {
    let body = token.strip_prefix('-').unwrap_or(token);
    body.chars().next().is_some_and(|c| c.is_ascii_digit())
}

/// Letters/digits/underscores, optional trailing prime; internal `@`/`.`
/// accepted for machine-generated names.
pub fn is_variable_token(token: &str) -> bool {
    let body = token.strip_suffix('\'').unwrap_or(token);
    !body.is_empty()
        && body.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && body
            .chars()
            .all(|c| c.is_alphanumeric() || c == '_' || c == '@' || c == '.')
}

/// A variable token without the machine-reserved characters — what model
/// files may declare.
pub fn is_user_variable_token(token: &str) -> bool {
    is_variable_token(token) && !token.contains('@') && !token.contains('.')
}

pub fn parse_term(s: &SExpr) -> Result<Term, SyntaxError> {
    match s {
        SExpr::Atom(tok) if looks_numeric(tok) => Ok(Term::constant(parse_rational(tok)?)),
        SExpr::Atom(tok) => {
            if is_variable_token(tok) {
                Ok(Term::var(Var::new(tok)))
            } else {
                Err(SyntaxError::BadVariable(tok.clone()))
            }
        }
        SExpr::List(items) => {
            let (op, args) = split_op(items, "a term operator")?;
            match op {
                "+" => Ok(Term::sum(
                    args.iter().map(parse_term).collect::<Result<_, _>>()?,
                )),
                "*" => Ok(Term::product(
                    args.iter().map(parse_term).collect::<Result<_, _>>()?,
                )),
                "-" => match args {
                    [a] => Ok(Term::neg(parse_term(a)?)),
                    [a, b] => {
                        let lhs = parse_term(a)?;
                        let rhs = parse_term(b)?;
                        // `(- 0 t)` is how the printer spells negation.
                        if constant_of(&lhs).is_some_and(|r| r.is_zero()) {
                            Ok(Term::neg(rhs))
                        } else {
                            Ok(lhs.sub(rhs))
                        }
                    }
                    _ => Err(SyntaxError::Arity {
                        op: op.to_string(),
                        needs: "1 or 2",
                        found: args.len(),
                    }),
                },
                "/" => match args {
                    // Constant division only — the term language is polynomial.
                    [a, b] => {
                        let num = parse_term(a)?;
                        let den = parse_term(b)?;
                        match (constant_of(&num), constant_of(&den)) {
                            (Some(n), Some(d)) if !d.is_zero() => {
                                Ok(Term::constant(n / d))
                            }
                            _ => Err(SyntaxError::Unexpected {
                                expected: "a constant division",
                                found: render_sexpr(s),
                            }),
                        }
                    }
                    _ => Err(SyntaxError::Arity {
                        op: op.to_string(),
                        needs: "2",
                        found: args.len(),
                    }),
                },
                "^" => match args {
                    [base, SExpr::Atom(k)] => {
                        let exp: u32 = k.parse().map_err(|_| SyntaxError::BadNumber(k.clone()))?;
                        if exp == 0 {
                            return Ok(Term::int(1));
                        }
                        Ok(Term::pow(parse_term(base)?, exp))
                    }
                    _ => Err(SyntaxError::Arity {
                        op: op.to_string(),
                        needs: "a base and a literal exponent",
                        found: args.len(),
                    }),
                },
                other => Err(SyntaxError::Unexpected {
                    expected: "one of + * - / ^",
                    found: other.to_string(),
                }),
            }
        }
    }
}

fn constant_of(t: &Term) -> Option<Rational> {
    match t {
        Term::Const(r) => Some(r.clone()),
        Term::Neg(inner) => constant_of(inner).map(|r| -r),
        _ => None,
    }
}

pub fn parse_formula(s: &SExpr) -> Result<Formula, SyntaxError> {
    match s {
        SExpr::Atom(tok) if tok == "true" => Ok(Formula::True),
        SExpr::Atom(tok) if tok == "false" => Ok(Formula::False),
        SExpr::Atom(tok) => Err(SyntaxError::Unexpected {
            expected: "a formula",
            found: tok.clone(),
        }),
        SExpr::List(items) => {
            let (op, args) = split_op(items, "a formula operator")?;
            let two = |args: &[SExpr]| -> Result<(Term, Term), SyntaxError> {
                match args {
                    [a, b] => Ok((parse_term(a)?, parse_term(b)?)),
                    _ => Err(SyntaxError::Arity {
                        op: op.to_string(),
                        needs: "2",
                        found: args.len(),
                    }),
                }
            };
            match op {
                "=" => two(args).map(|(a, b)| Formula::eq(a, b)),
                "<" => two(args).map(|(a, b)| Formula::lt(a, b)),
                "<=" => two(args).map(|(a, b)| Formula::le(a, b)),
                ">" => two(args).map(|(a, b)| Formula::lt(b, a)),
                ">=" => two(args).map(|(a, b)| Formula::le(b, a)),
                "and" => Ok(Formula::and(
                    args.iter().map(parse_formula).collect::<Result<_, _>>()?,
                )),
                "or" => Ok(Formula::or(
                    args.iter().map(parse_formula).collect::<Result<_, _>>()?,
                )),
                "not" => match args {
                    [f] => Ok(Formula::not(parse_formula(f)?)),
                    _ => Err(SyntaxError::Arity {
                        op: op.to_string(),
                        needs: "1",
                        found: args.len(),
                    }),
                },
                "=>" => match args {
                    [a, b] => Ok(Formula::implies(parse_formula(a)?, parse_formula(b)?)),
                    _ => Err(SyntaxError::Arity {
                        op: op.to_string(),
                        needs: "2",
                        found: args.len(),
                    }),
                },
                "exists" | "forall" => match args {
                    [binders, body] => {
                        let vars = parse_binders(binders)?;
                        let mut out = parse_formula(body)?;
                        for v in vars.into_iter().rev() {
                            out = if op == "exists" {
                                Formula::exists(v, out)
                            } else {
                                Formula::forall(v, out)
                            };
                        }
                        Ok(out)
                    }
                    _ => Err(SyntaxError::Arity {
                        op: op.to_string(),
                        needs: "a binder list and a body",
                        found: args.len(),
                    }),
                },
                other => Err(SyntaxError::Unexpected {
                    expected: "a formula operator",
                    found: other.to_string(),
                }),
            }
        }
    }
}

fn parse_binders(s: &SExpr) -> Result<Vec<Var>, SyntaxError> {
    let items = s.list().ok_or_else(|| SyntaxError::Unexpected {
        expected: "a binder list",
        found: render_sexpr(s),
    })?;
    items
        .iter()
        .map(|b| match b {
            SExpr::Atom(name) if is_variable_token(name) => Ok(Var::new(name)),
            // SMT-LIB style `(X Real)` pairs are tolerated.
            SExpr::List(pair) => match pair.first().and_then(SExpr::atom) {
                Some(name) if is_variable_token(name) => Ok(Var::new(name)),
                _ => Err(SyntaxError::Unexpected {
                    expected: "a variable",
                    found: render_sexpr(b),
                }),
            },
            SExpr::Atom(other) => Err(SyntaxError::BadVariable(other.clone())),
        })
        .collect()
}

fn split_op<'a>(
    items: &'a [SExpr],
    expected: &'static str,
) -> Result<(&'a str, &'a [SExpr]), SyntaxError> {
    match items.split_first() {
        Some((SExpr::Atom(op), rest)) => Ok((op.as_str(), rest)),
        _ => Err(SyntaxError::Unexpected {
            expected,
            found: render_sexpr(&SExpr::List(items.to_vec())),
        }),
    }
}

pub fn render_sexpr(s: &SExpr) -> String {
    match s {
        SExpr::Atom(a) => a.clone(),
        SExpr::List(items) => {
            let mut out = String::from("(");
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&render_sexpr(item));
            }
            out.push(')');
            out
        }
    }
}

/// Renders a rational inside the grammar: `n` or `p/q` (sign leading).
pub fn print_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Const(r) => print_rational(r),
        Term::Var(v) => v.name().to_string(),
        Term::Sum(ts) => print_nary("+", ts),
        Term::Product(ts) => print_nary("*", ts),
        Term::Neg(inner) => format!("(- 0 {})", print_term(inner)),
        Term::Pow(base, k) => format!("(^ {} {k})", print_term(base)),
    }
}

fn print_nary(op: &str, ts: &[Term]) -> String {
    let mut out = String::from("(");
    out.push_str(op);
    for t in ts {
        let _ = write!(out, " {}", print_term(t));
    }
    out.push(')');
    out
}

pub fn print_formula(f: &Formula) -> String {
    match f {
        Formula::True => "true".to_string(),
        Formula::False => "false".to_string(),
        Formula::Atom { lhs, op, rhs } => {
            let sym = match op {
                Cmp::Eq => "=",
                Cmp::Lt => "<",
                Cmp::Le => "<=",
            };
            format!("({sym} {} {})", print_term(lhs), print_term(rhs))
        }
        Formula::Not(g) => format!("(not {})", print_formula(g)),
        Formula::And(gs) => print_connective("and", gs),
        Formula::Or(gs) => print_connective("or", gs),
        Formula::Implies(a, b) => {
            format!("(=> {} {})", print_formula(a), print_formula(b))
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            let (kw, vars, body) = collect_binders(f);
            let names: Vec<&str> = vars.iter().map(|v| v.name()).collect();
            format!("({kw} ({}) {})", names.join(" "), print_formula(body))
        }
    }
}

fn print_connective(op: &str, gs: &[Formula]) -> String {
    let mut out = String::from("(");
    out.push_str(op);
    for g in gs {
        let _ = write!(out, " {}", print_formula(g));
    }
    out.push(')');
    out
}

/// Groups a maximal run of same-kind quantifiers into one binder list.
fn collect_binders(f: &Formula) -> (&'static str, Vec<&Var>, &Formula) {
    match f {
        Formula::Exists(v, body) => {
            let mut vars = vec![v];
            let mut inner: &Formula = body;
            while let Formula::Exists(v2, body2) = inner {
                vars.push(v2);
                inner = body2;
            }
            ("exists", vars, inner)
        }
        Formula::Forall(v, body) => {
            let mut vars = vec![v];
            let mut inner: &Formula = body;
            while let Formula::Forall(v2, body2) = inner {
                vars.push(v2);
                inner = body2;
            }
            ("forall", vars, inner)
        }
        _ => unreachable!("only called on quantifiers"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use epsreach_core::ops;
    use epsreach_core::term::rat;
    use std::collections::BTreeMap;

    #[test]
    fn numbers_parse_exactly() {
        assert_eq!(parse_rational("10").unwrap(), rat(10, 1));
        assert_eq!(parse_rational("-20").unwrap(), rat(-20, 1));
        assert_eq!(parse_rational("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-3/16").unwrap(), rat(-3, 16));
        assert_eq!(parse_rational("0.2").unwrap(), rat(1, 5));
        assert_eq!(parse_rational("2.50").unwrap(), rat(5, 2));
        assert_eq!(parse_rational("-0.19").unwrap(), rat(-19, 100));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formulas_round_trip_through_the_printer() {
        let texts = [
            "(and (< Z1 10) (<= -1/2 Z1))",
            "(exists (X Y) (or (= X Y) (not (< (+ X (* 2 Y)) 3))))",
            "(forall (W) (=> (< 0 W) (< 0 (^ W 2))))",
            "(= (- (* 2 Z1') (* 1/2 T)) 0.25)",
            "true",
            "(or false (= 0 1))",
        ];
        for text in texts {
            let parsed = parse_formula_text(text).unwrap();
            let printed = print_formula(&parsed);
            let reparsed = parse_formula_text(&printed).unwrap();
            assert_eq!(parsed, reparsed, "printing `{text}` lost structure");
        }
    }

    #[test]
    fn parsing_and_printing_preserve_evaluation() {
        let f = parse_formula_text("(< (- (* 2 Z1) (^ Z1 2)) 3/4)").unwrap();
        let g = parse_formula_text(&print_formula(&f)).unwrap();
        for z in [rat(0, 1), rat(1, 2), rat(3, 2), rat(-1, 1)] {
            let point: BTreeMap<_, _> = [(Var::new("Z1"), z)].into_iter().collect();
            assert_eq!(
                ops::eval_qf(&f, &point).unwrap(),
                ops::eval_qf(&g, &point).unwrap()
            );
        }
    }

    #[test]
    fn lenient_forms_are_accepted_but_not_printed() {
        let unary = parse_formula_text("(< (- Z1) 0)").unwrap();
        assert_eq!(unary, Formula::lt(Term::neg(Term::var("Z1")), Term::int(0)));
        let ge = parse_formula_text("(>= Z1 2)").unwrap();
        assert_eq!(ge, Formula::le(Term::int(2), Term::var("Z1")));
        let bar = parse_formula_text("(= |Z_t'| 0)").unwrap();
        assert_eq!(bar, Formula::eq(Term::var("Z_t'"), Term::int(0)));
        let pair = parse_formula_text("(exists ((X Real)) (= X 0))").unwrap();
        assert_eq!(
            pair,
            Formula::exists("X", Formula::eq(Term::var("X"), Term::int(0)))
        );
    }

    #[test]
    fn variable_tokens_are_validated() {
        assert!(is_variable_token("Z_t'"));
        assert!(is_variable_token("Z1"));
        assert!(is_variable_token("Z@3.1"));
        assert!(!is_variable_token("2Z"));
        assert!(!is_variable_token(""));
        assert!(is_user_variable_token("Z_t'"));
        assert!(!is_user_variable_token("Z@3.1"));
    }

    #[test]
    fn comments_and_whitespace_are_ignored()  {
        let all = parse_sexprs("; heading\n(= a b) ; tail\n(< c d)").unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn malformed_input_is_rejected() {
        assert!(parse_sexprs("(= a").is_err());
        assert!(parse_sexprs(")").is_err());
        assert!(parse_formula_text("(% a b)").is_err());
        assert!(parse_formula_text("(exists Z1 (= Z1 0))").is_err());
        assert!(parse_formula_text("(< 1)").is_err());
    }
}
