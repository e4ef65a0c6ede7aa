//! External SMT solver client.
//!
//! Talks SMT-LIB 2 over a pipe to a long-lived solver process. The solver is
//! chosen at construction: the `EPSREACH_SMT_SOLVER` environment variable
//! (a whitespace-split command line) if set, a `z3` binary on the `PATH`,
//! or the bundled Node-based solver under `tools/smt-shim/`.
//!
//! Every query is self-contained: `(reset)`, declarations, one assertion,
//! one check command, and an `(echo …)` synchronization token. Quantified
//! goals are run through the `qsat` tactic; quantifier-free goals use plain
//! `(check-sat)`. A query that exceeds the wall-clock timeout kills the
//! process (it is respawned lazily) and comes back as an honest `Unknown`,
//! never as a guess.

use crate::syntax::{parse_rational, parse_sexprs, SExpr};
use epsreach_core::backend::{
    Backend, BackendError, DecisionOutcome, UnknownReason, Witness,
};
use epsreach_core::formula::{Cmp, Formula};
use epsreach_core::interval::IntervalUnion;
use epsreach_core::ops;
use epsreach_core::term::{Rational, Term, Var};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write as _};
use std::path::{Path, PathBuf};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

/// Default per-query wall-clock budget.
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

struct SolverProcess {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl SolverProcess {
    fn spawn(command: &[String]) -> Result<SolverProcess, BackendError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| BackendError::BackendUnavailable("empty solver command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| {
                BackendError::BackendUnavailable(format!("cannot start `{program}`: {e}"))
            })?;
        let stdin = child.stdin.take().expect("stdin was piped");
        let stdout = child.stdout.take().expect("stdout was piped");
        let (tx, rx) = std::sync::mpsc::channel();
        std::thread::spawn(move || {
            let mut reader = BufReader::new(stdout);
            loop {
                let mut line = String::new();
                match reader.read_line(&mut line) {
                    Ok(0) => break,
                    Ok(_) => {
                        while line.ends_with('\n') || line.ends_with('\r') {
                            line.pop();
                        }
                        if tx.send(Ok(line)).is_err() {
                            break;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(e));
                        break;
                    }
                }
            }
        });
        Ok(SolverProcess {
            child,
            stdin,
            lines: rx,
        })
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// What a round of solver output amounted to.
enum Round {
    Lines(Vec<String>),
    TimedOut,
}

/// A [`Backend`] served by an external SMT solver process.
pub struct ExternalBackend {
    command: Vec<String>,
    process: Option<SolverProcess>,
    timeout: Duration,
    next_id: u64,
    elapsed: Duration,
}

impl ExternalBackend {
    /// Finds a solver: `EPSREACH_SMT_SOLVER`, then `z3 -in`, then the
    /// bundled Node solver.
    pub fn discover() -> Result<ExternalBackend, BackendError> {
        if let Ok(spec) = std::env::var("EPSREACH_SMT_SOLVER") {
            let command: Vec<String> = spec.split_whitespace().map(String::from).collect();
            if !command.is_empty() {
                return Ok(ExternalBackend::with_command(command));
            }
        }
        if program_works("z3", &["-version"]) {
            return Ok(ExternalBackend::with_command(vec![
                "z3".into(),
                "-in".into(),
            ]));
        }
        if let Some(shim) = find_shim() {
            if program_works("node", &["--version"]) {
                return Ok(ExternalBackend::with_command(vec![
                    "node".into(),
                    shim.to_string_lossy().into_owned(),
                ]));
            }
        }
        Err(BackendError::BackendUnavailable(
            "no SMT solver found: set EPSREACH_SMT_SOLVER, install z3, \
             or provide tools/smt-shim (requires node)"
                .into(),
        ))
    }

    /// Uses the given command line (program plus arguments) as the solver.
    pub fn with_command(command: Vec<String>) -> ExternalBackend {
        ExternalBackend {
            command,
            process: None,
            timeout: DEFAULT_TIMEOUT,
            next_id: 0,
            elapsed: Duration::ZERO,
        }
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    fn process(&mut self) -> Result<&mut SolverProcess, BackendError> {
        if self.process.is_none() {
            self.process = Some(SolverProcess::spawn(&self.command)?);
        }
        Ok(self.process.as_mut().expect("just spawned"))
    }

    fn drop_process(&mut self) {
        if let Some(p) = self.process.take() {
            p.kill();
        }
    }

    /// Sends a script followed by an echo token and collects output lines
    /// until the token appears or the deadline passes.
    fn round(&mut self, script: &str, deadline: Instant) -> Result<Round, BackendError> {
        self.next_id += 1;
        let token = format!("DONE:{}", self.next_id);
        let proc = self.process()?;
        let payload = format!("{script}\n(echo \"{token}\")\n");
        if let Err(e) = proc.stdin.write_all(payload.as_bytes()).and_then(|()| proc.stdin.flush())
        {
            self.drop_process();
            return Err(BackendError::Io(format!("write to solver failed: {e}")));
        }
        let mut lines = Vec::new();
        loop {
            let now = Instant::now();
            if now >= deadline {
                self.drop_process();
                return Ok(Round::TimedOut);
            }
            match proc.lines.recv_timeout(deadline - now) {
                Ok(Ok(line)) if line == token => return Ok(Round::Lines(lines)),
                Ok(Ok(line)) => {
                    if !line.is_empty() {
                        lines.push(line);
                    }
                }
                Ok(Err(e)) => {
                    self.drop_process();
                    return Err(BackendError::Io(format!("read from solver failed: {e}")));
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.drop_process();
                    return Ok(Round::TimedOut);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.drop_process();
                    return Err(BackendError::Io(
                        "solver process closed its output".into(),
                    ));
                }
            }
        }
    }
}

fn program_works(program: &str, args: &[&str]) -> bool {
    Command::new(program)
        .args(args)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .status()
        .map(|s| s.success())
        .unwrap_or(false)
}

fn find_shim() -> Option<PathBuf> {
    let candidates = [
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../tools/smt-shim/shim.mjs"),
        PathBuf::from("tools/smt-shim/shim.mjs"),
    ];
    candidates.into_iter().find(|p| p.is_file())
}

/// `|…|`-quotes a symbol; primes in variable names demand it.
fn sym(v: &Var) -> String {
    format!("|{}|", v.name())
}

fn smt_rational(r: &Rational) -> String {
    let (numer, denom) = (r.numer(), r.denom());
    let magnitude = if denom == &1.into() {
        numer.magnitude().to_string()
    } else {
        format!("(/ {} {})", numer.magnitude(), denom)
    };
    if numer.sign() == num_bigint::Sign::Minus {
        format!("(- {magnitude})")
    } else {
        magnitude
    }
}

fn smt_term(t: &Term, out: &mut String) {
    match t {
        Term::Const(r) => out.push_str(&smt_rational(r)),
        Term::Var(v) => out.push_str(&sym(v)),
        Term::Sum(ts) => smt_nary("+", ts, out),
        Term::Product(ts) => smt_nary("*", ts, out),
        Term::Neg(inner) => {
            out.push_str("(- ");
            smt_term(inner, out);
            out.push(')');
        }
        Term::Pow(base, k) => {
            // Expanded to a product: the polynomial fragment keeps
            // exponents small.
            out.push_str("(* ");
            for i in 0..*k {
                if i > 0 {
                    out.push(' ');
                }
                smt_term(base, out);
            }
            out.push(')');
        }
    }
}

fn smt_nary(op: &str, ts: &[Term], out: &mut String) {
    match ts {
        [] => out.push_str(if op == "+" { "0" } else { "1" }),
        [single] => smt_term(single, out),
        many => {
            out.push('(');
            out.push_str(op);
            for t in many {
                out.push(' ');
                smt_term(t, out);
            }
            out.push(')');
        }
    }
}

fn smt_formula(f: &Formula, out: &mut String) {
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Atom { lhs, op, rhs } => {
            out.push('(');
            out.push_str(match op {
                Cmp::Eq => "=",
                Cmp::Lt => "<",
                Cmp::Le => "<=",
            });
            out.push(' ');
            smt_term(lhs, out);
            out.push(' ');
            smt_term(rhs, out);
            out.push(')');
        }
        Formula::Not(g) => {
            out.push_str("(not ");
            smt_formula(g, out);
            out.push(')');
        }
        Formula::And(gs) => smt_connective("and", gs, out),
        Formula::Or(gs) => smt_connective("or", gs, out),
        Formula::Implies(a, b) => {
            out.push_str("(=> ");
            smt_formula(a, out);
            out.push(' ');
            smt_formula(b, out);
            out.push(')');
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            let (kw, vars, body) = gather_binders(f);
            out.push('(');
            out.push_str(kw);
            out.push_str(" (");
            for (i, v) in vars.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({} Real)", sym(v));
            }
            out.push_str(") ");
            smt_formula(body, out);
            out.push(')');
        }
    }
}

fn smt_connective(op: &str, gs: &[Formula], out: &mut String) {
    match gs {
        [] => out.push_str(if op == "and" { "true" } else { "false" }),
        [single] => smt_formula(single, out),
        many => {
            out.push('(');
            out.push_str(op);
            for g in many {
                out.push(' ');
                smt_formula(g, out);
            }
            out.push(')');
        }
    }
}

fn gather_binders(f: &Formula) -> (&'static str, Vec<&Var>, &Formula) {
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

fn is_quantified(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => false,
        Formula::Not(g) => is_quantified(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().any(is_quantified),
        Formula::Implies(a, b) => is_quantified(a) || is_quantified(b),
        Formula::Exists(..) | Formula::Forall(..) => true,
    }
}

/// Renders declarations plus assertion without a check command — for
/// inspecting queries offline.
pub fn debug_script(f: &Formula) -> String {
    let mut script = String::new();
    for v in &ops::free_vars(f) {
        let _ = writeln!(script, "(declare-const {} Real)", sym(v));
    }
    script.push_str("(assert ");
    smt_formula(f, &mut script);
    script.push_str(")\n");
    script
}

/// Builds the full query script (sans echo token) for one formula.
fn query_script(f: &Formula, free: &BTreeSet<Var>, check: &str) -> String {
    let mut script = String::from("(reset)\n(set-logic ALL)\n");
    for v in free {
        let _ = writeln!(script, "(declare-const {} Real)", sym(v));
    }
    script.push_str("(assert ");
    smt_formula(f, &mut script);
    script.push_str(")\n");
    script.push_str(check);
    script
}

/// Reads a rational out of a solver model value: integer, decimal,
/// `(/ a b)`, or `(- v)` around any of those.
fn value_rational(s: &SExpr) -> Option<Rational> {
    match s {
        SExpr::Atom(tok) => parse_rational(tok).ok(),
        SExpr::List(items) => match items.split_first() {
            Some((SExpr::Atom(op), [inner])) if op == "-" => {
                value_rational(inner).map(|r| -r)
            }
            Some((SExpr::Atom(op), [a, b])) if op == "/" => {
                let num = value_rational(a)?;
                let den = value_rational(b)?;
                if den == Rational::from_integer(0.into()) {
                    None
                } else {
                    Some(num / den)
                }
            }
            _ => None,
        },
    }
}

/// Pulls `define-fun NAME () Real VALUE` entries out of `(get-model)`
/// output; returns `None` when any free variable is missing or has a value
/// outside the rationals (e.g. an algebraic root object).
fn parse_model_witness(text: &str, free: &BTreeSet<Var>) -> Option<Witness> {
    let exprs = parse_sexprs(text).ok()?;
    let mut defs: Vec<&[SExpr]> = Vec::new();
    for e in &exprs {
        let items = e.list()?;
        // Either `(model (define-fun …) …)` or `((define-fun …) …)`.
        let body = match items.first() {
            Some(SExpr::Atom(head)) if head == "model" => &items[1..],
            _ => items,
        };
        for d in body {
            defs.push(d.list()?);
        }
    }
    let mut witness = Witness::new();
    for def in defs {
        if let [SExpr::Atom(kw), SExpr::Atom(name), SExpr::List(args), _, value] = def {
            if kw == "define-fun" && args.is_empty() {
                let var = Var::new(name);
                if free.contains(&var) {
                    witness.insert(var, value_rational(value)?);
                }
            }
        }
    }
    if free.iter().all(|v| witness.contains_key(v)) {
        Some(witness)
    } else {
        None
    }
}

fn classify_answer(lines: &[String]) -> Result<&'static str, BackendError> {
    let mut answer = None;
    for line in lines {
        match line.as_str() {
            "sat" => answer = Some("sat"),
            "unsat" => answer = Some("unsat"),
            "unknown" => answer = Some("unknown"),
            other if other.starts_with("(error") => {
                return Err(BackendError::Io(format!("solver error: {other}")));
            }
            _ => {}
        }
    }
    answer.ok_or_else(|| {
        BackendError::Io(format!(
            "solver produced no verdict (output: {:?})",
            lines
        ))
    })
}

impl Backend for ExternalBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn check_sat(&mut self, f: &Formula) -> Result<DecisionOutcome, BackendError> {
        let started = Instant::now();
        let result = self.check_sat_inner(f, started + self.timeout);
        self.elapsed += started.elapsed();
        result
    }

    fn qe(&mut self, _f: &Formula) -> Result<Formula, BackendError> {
        Err(BackendError::UnsupportedFragment(
            "the external backend does not produce quantifier-free equivalents".into(),
        ))
    }

    fn describe_1d(&mut self, _f: &Formula, _var: &Var) -> Result<IntervalUnion, BackendError> {
        Err(BackendError::UnsupportedFragment(
            "the external backend does not produce interval descriptions".into(),
        ))
    }

    fn elapsed_millis(&self) -> Option<u64> {
        Some(self.elapsed.as_millis() as u64)
    }
}

impl ExternalBackend {
    fn check_sat_inner(
        &mut self,
        f: &Formula,
        deadline: Instant,
    ) -> Result<DecisionOutcome, BackendError> {
        let free = ops::free_vars(f);
        // The default engine also handles quantified goals; the `qsat`
        // tactic is a second opinion for quantified goals it gives up on
        // (it is complete for the mixed-quantifier linear fragment but can
        // diverge on some nonlinear goals, so it never goes first).
        let attempts: &[&str] = if is_quantified(f) {
            &["(check-sat)", "(check-sat-using qsat)"]
        } else {
            &["(check-sat)"]
        };
        let mut last_unknown = UnknownReason::SolverGaveUp("solver answered `unknown`".into());
        for (i, check) in attempts.iter().enumerate() {
            let script = query_script(f, &free, check);
            let lines = match self.round(&script, deadline)? {
                Round::TimedOut => {
                    return Ok(DecisionOutcome::Unknown(UnknownReason::Timeout(format!(
                        "solver exceeded {} ms",
                        self.timeout.as_millis()
                    ))));
                }
                Round::Lines(lines) => lines,
            };
            match classify_answer(&lines)? {
                "unsat" => return Ok(DecisionOutcome::Unsat),
                "unknown" => {
                    last_unknown = UnknownReason::SolverGaveUp(format!(
                        "solver answered `unknown` to `{check}`"
                    ));
                    if i + 1 < attempts.len() {
                        continue;
                    }
                }
                _sat => {
                    if free.is_empty() {
                        return Ok(DecisionOutcome::Sat(None));
                    }
                    let witness = match self.round("(get-model)", deadline)? {
                        Round::TimedOut => None,
                        Round::Lines(lines) => parse_model_witness(&lines.join("\n"), &free),
                    };
                    return Ok(DecisionOutcome::Sat(witness));
                }
            }
        }
        Ok(DecisionOutcome::Unknown(last_unknown))
    }
}

impl Drop for ExternalBackend {
    fn drop(&mut self) {
        if let Some(p) = self.process.take() {
            // A polite exit first; kill if the pipe is already gone.
            let mut p = p;
            let _ = p.stdin.write_all(b"(exit)\n");
            let _ = p.stdin.flush();
            p.kill();
        }
    }
}
