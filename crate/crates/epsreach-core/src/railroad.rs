//! The railroad-crossing case study: a train and a car approach an
//! unguarded crossing, the car picks a fixed acceleration when its sensors
//! first see the train, and we ask which accelerations are provably safe.
//!
//! [`build_railroad`] constructs the five-variable hybrid automaton
//! (`Z_t`, `Z_c`: train/car distance to the crossing; `V_t`, `V_c`: speeds;
//! `A_c`: the chosen car acceleration). [`build_psi_unsafe`] and
//! [`build_psi_safe`] derive the two sensor-line formulas whose approximate
//! semantics drive the analysis, and [`classify_grid`] evaluates them over
//! a plane of car speeds and accelerations.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::automaton::{AutomatonError, Edge, HybridAutomaton, Location};
use crate::backend::{Backend, BackendError, DecisionOutcome, UnknownReason};
use crate::formula::Formula;
use crate::ops;
use crate::prep;
use crate::reach::{vector_map, FreshBlocks};
use crate::term::{Rational, Term, Var, VarVector};
use crate::transform::{self, TransformConfig, TransformError};

/// Constants of the crossing scenario, all exact rationals.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RailParams {
    /// Minimal admitted car speed (`c_m`).
    pub car_speed_min: Rational,
    /// Maximal admitted car speed (`c_M`).
    pub car_speed_max: Rational,
    /// Minimal admitted train speed (`t_m`).
    pub train_speed_min: Rational,
    /// Maximal admitted train speed (`t_M`).
    pub train_speed_max: Rational,
    /// Minimal admitted car acceleration (`E_m`).
    pub accel_min: Rational,
    /// Maximal admitted car acceleration (`E_M`).
    pub accel_max: Rational,
    /// Half-extent of the collision box along the train axis (`x_u`).
    pub unsafe_x: Rational,
    /// Half-extent of the collision box along the car axis (`y_u`).
    pub unsafe_y: Rational,
    /// Disturbance constant of the controlled car dynamics (`d`).
    pub disturbance: Rational,
    /// Car position of the sensor line (`S`), strictly below the box.
    pub sensor_line: Rational,
}

impl Default for RailParams {
    fn default() -> RailParams {
        RailParams {
            car_speed_min: int(1),
            car_speed_max: int(3),
            train_speed_min: int(1),
            train_speed_max: int(3),
            accel_min: int(0),
            accel_max: int(10),
            unsafe_x: int(4),
            unsafe_y: int(2),
            disturbance: Rational::new(1.into(), 5.into()),
            sensor_line: int(-10),
        }
    }
}

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

impl RailParams {
    /// Checks the scenario invariants; [`build_railroad`] calls this.
    pub fn validate(&self) -> Result<(), RailError> {
        if self.car_speed_min >= self.car_speed_max {
            return Err(RailError::InvalidParams(
                "car speed bounds must satisfy min < max",
            ));
        }
        if self.train_speed_min >= self.train_speed_max {
            return Err(RailError::InvalidParams(
                "train speed bounds must satisfy min < max",
            ));
        }
        if self.accel_min > self.accel_max {
            return Err(RailError::InvalidParams(
                "acceleration bounds must satisfy min ≤ max",
            ));
        }
        let zero = int(0);
        if self.unsafe_x <= zero || self.unsafe_y <= zero || self.disturbance <= zero {
            return Err(RailError::InvalidParams(
                "box half-extents and the disturbance must be positive",
            ));
        }
        if self.sensor_line >= -self.unsafe_y.clone() {
            return Err(RailError::InvalidParams(
                "the sensor line must lie strictly below the collision box",
            ));
        }
        Ok(())
    }
}

/// Everything that can go wrong while building or analysing the scenario.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RailError {
    InvalidParams(&'static str),
    MissingLocation(String),
    MissingEdge { from: String, to: String },
    MissingVariable(String),
    /// Grid axis with a nonpositive step or an empty range.
    BadGrid(&'static str),
    Automaton(AutomatonError),
    Transform(TransformError),
    Backend(BackendError),
    /// The backend could not decide a grid point.
    Undecided(UnknownReason),
}

impl core::fmt::Display for RailError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RailError::InvalidParams(msg) => write!(f, "invalid scenario parameters: {msg}"),
            RailError::MissingLocation(n) => write!(f, "the automaton has no location `{n}`"),
            RailError::MissingEdge { from, to } => {
                write!(f, "the automaton has no edge `{from}` → `{to}`")
            }
            RailError::MissingVariable(n) => write!(f, "expected state variable `{n}`"),
            RailError::BadGrid(msg) => write!(f, "bad grid: {msg}"),
            RailError::Automaton(e) => write!(f, "automaton error: {e}"),
            RailError::Transform(e) => write!(f, "transform error: {e}"),
            RailError::Backend(e) => write!(f, "backend error: {e}"),
            RailError::Undecided(r) => write!(f, "backend could not decide a grid point: {r}"),
        }
    }
}

/// The four grid-point classes, a pure function of the two booleans.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PointClass {
    SafeOnly,
    Both,
    UnsafeOnly,
    Neither,
}

impl PointClass {
    pub fn from_flags(in_safe: bool, in_unsafe: bool) -> PointClass {
        match (in_safe, in_unsafe) {
            (true, false) => PointClass::SafeOnly,
            (true, true) => PointClass::Both,
            (false, true) => PointClass::UnsafeOnly,
            (false, false) => PointClass::Neither,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PointClass::SafeOnly => "safe-only",
            PointClass::Both => "both",
            PointClass::UnsafeOnly => "unsafe-only",
            PointClass::Neither => "neither",
        }
    }
}

/// Inclusive sampled axis: `lo, lo+step, …` while the point stays ≤ `hi`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridAxis {
    pub lo: Rational,
    pub hi: Rational,
    pub step: Rational,
}

impl GridAxis {
    /// An axis with exactly `count` evenly spaced points from `lo` to `hi`.
    pub fn with_points(lo: Rational, hi: Rational, count: usize) -> Result<GridAxis, RailError> {
        if count < 2 || lo >= hi {
            return Err(RailError::BadGrid(
                "an axis needs at least two points and lo < hi",
            ));
        }
        let step = (&hi - &lo) / int(count as i64 - 1);
        Ok(GridAxis { lo, hi, step })
    }

    pub fn points(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut p = self.lo.clone();
        while p <= self.hi {
            out.push(p.clone());
            p += &self.step;
        }
        out
    }

    fn validate(&self) -> Result<(), RailError> {
        if self.step <= int(0) {
            return Err(RailError::BadGrid("axis step must be positive"));
        }
        if self.lo > self.hi {
            return Err(RailError::BadGrid("axis range is empty"));
        }
        Ok(())
    }
}

/// What to classify: the fixed train plane, the car grid, and the radius.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClassifyRequest {
    /// Fixed train speed (`V_t`) of the plane.
    pub train_speed: Rational,
    /// Fixed train position (`Z_t`) of the plane.
    pub train_position: Rational,
    /// Sampled car speeds (`V_c`).
    pub car_speed: GridAxis,
    /// Sampled car accelerations (`A_c`).
    pub car_accel: GridAxis,
    /// Approximation radius for both semantics.
    pub epsilon: Rational,
}

/// One classified grid point; the class is derived, never stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridRow {
    pub car_speed: Rational,
    pub car_accel: Rational,
    /// The point satisfies the under-approximated safe-run formula.
    pub in_safe: bool,
    /// The point satisfies the over-approximated collision-run formula.
    pub in_unsafe: bool,
}

impl GridRow {
    pub fn class(&self) -> PointClass {
        PointClass::from_flags(self.in_safe, self.in_unsafe)
    }
}

/// Result of [`classify_grid`]: the rows in row-major order (car speed
/// outer, acceleration inner) plus the formulas that were actually
/// evaluated and whether per-point queries replaced quantifier elimination.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridClassification {
    pub request: ClassifyRequest,
    pub rows: Vec<GridRow>,
    /// The evaluated under-approximation of the safe-run formula.
    pub safe_formula: Formula,
    /// The evaluated over-approximation of the collision-run formula.
    pub unsafe_formula: Formula,
    /// True when quantifier elimination was unavailable and grid points
    /// were decided by per-point satisfiability queries instead.
    pub fallback_used: bool,
}

/// State variables of the crossing automaton, in order.
pub const RAIL_VARS: [&str; 5] = ["Z_t", "Z_c", "V_t", "V_c", "A_c"];

/// Builds the crossing automaton: location `q_0` (both vehicles far away),
/// `q_c` (car past the sensor line, acceleration committed), `q_u`
/// (simultaneous crossing — collision) and `q_s` (one vehicle safely
/// through), with the sensor jump `q_0 → q_c` and the two outcome jumps
/// out of `q_c`.
pub fn build_railroad(params: &RailParams) -> Result<HybridAutomaton, RailError> {
    params.validate()?;
    let p = params;
    let v = |n: &str| Term::var(n);
    let c = |r: &Rational| Term::constant(r.clone());
    let neg = |r: &Rational| Term::constant(-r.clone());

    // Speed windows shared by every invariant.
    let speed_box = || {
        vec![
            Formula::between(c(&p.car_speed_min), v("V_c"), c(&p.car_speed_max)),
            Formula::between(c(&p.train_speed_min), v("V_t"), c(&p.train_speed_max)),
        ]
    };

    // Drift dynamics `x' − x ∈ [a,b]·T`, used wherever nothing is controlled.
    let drift = |x: &str, a: &Rational, b: &Rational| {
        let delta = v(&alloc::format!("{x}'")).sub(v(x));
        Formula::and(vec![
            Formula::le(c(a).mul(v("T")), delta.clone()),
            Formula::le(delta, c(b).mul(v("T"))),
        ])
    };
    let drift_flow = || {
        Formula::and(vec![
            drift("Z_t", &p.train_speed_min, &p.train_speed_max),
            drift("Z_c", &p.car_speed_min, &p.car_speed_max),
        ])
    };

    // Controlled car dynamics with a ±d disturbance on every component.
    let slack = |t: Term| Formula::between(neg(&p.disturbance), t, c(&p.disturbance));
    let controlled_flow = Formula::and(vec![
        slack(v("V_c'").sub(v("A_c").mul(v("T"))).sub(v("V_c"))),
        slack(
            Term::int(2)
                .mul(v("Z_c'"))
                .sub(v("A_c").mul(v("T").squared()))
                .sub(Term::int(2).mul(v("V_c")).mul(v("T")))
                .sub(Term::int(2).mul(v("Z_c"))),
        ),
        slack(v("Z_t'").sub(v("V_t").mul(v("T"))).sub(v("Z_t"))),
    ]);

    let mut inv_q0 = vec![Formula::le(v("Z_c"), c(&p.sensor_line))];
    inv_q0.extend(speed_box());
    let mut inv_qc = vec![Formula::or(vec![
        Formula::and(vec![
            Formula::between(c(&p.sensor_line), v("Z_c"), c(&p.unsafe_y)),
            Formula::le(v("Z_t"), neg(&p.unsafe_x)),
        ]),
        Formula::and(vec![
            Formula::between(c(&p.sensor_line), v("Z_c"), neg(&p.unsafe_y)),
            Formula::between(neg(&p.unsafe_x), v("Z_t"), c(&p.unsafe_x)),
        ]),
    ])];
    inv_qc.extend(speed_box());
    let mut inv_qu = vec![
        Formula::between(neg(&p.unsafe_y), v("Z_c"), c(&p.unsafe_y)),
        Formula::between(neg(&p.unsafe_x), v("Z_t"), c(&p.unsafe_x)),
    ];
    inv_qu.extend(speed_box());
    let mut inv_qs = vec![Formula::or(vec![
        Formula::le(c(&p.unsafe_y), v("Z_c")),
        Formula::le(c(&p.unsafe_x), v("Z_t")),
    ])];
    inv_qs.extend(speed_box());

    let locations = vec![
        Location {
            name: "q_0".into(),
            inv: Formula::and(inv_q0),
            flow: drift_flow(),
        },
        Location {
            name: "q_c".into(),
            inv: Formula::and(inv_qc),
            flow: controlled_flow,
        },
        Location {
            name: "q_u".into(),
            inv: Formula::and(inv_qu),
            flow: drift_flow(),
        },
        Location {
            name: "q_s".into(),
            inv: Formula::and(inv_qs),
            flow: drift_flow(),
        },
    ];

    // A vehicle within `d` of the box while the other is inside it.
    let collision_guard = Formula::or(vec![
        Formula::and(vec![
            Formula::le(neg(&p.unsafe_y).sub(c(&p.disturbance)), v("Z_c")),
            Formula::between(neg(&p.unsafe_x), v("Z_t"), c(&p.unsafe_x)),
        ]),
        Formula::and(vec![
            Formula::le(neg(&p.unsafe_x).sub(c(&p.disturbance)), v("Z_t")),
            Formula::between(neg(&p.unsafe_y), v("Z_c"), c(&p.unsafe_y)),
        ]),
    ]);
    // One vehicle exactly at the box exit while the other is still short.
    let safe_guard = Formula::or(vec![
        Formula::and(vec![
            Formula::eq(v("Z_c"), c(&p.unsafe_y)),
            Formula::lt(v("Z_t"), neg(&p.unsafe_x)),
        ]),
        Formula::and(vec![
            Formula::eq(v("Z_t"), c(&p.unsafe_x)),
            Formula::lt(v("Z_c"), neg(&p.unsafe_y)),
        ]),
    ]);
    let pick_accel = Formula::between(c(&p.accel_min), v("A_c'"), c(&p.accel_max));
    let outcome_reset = Formula::and(vec![
        pick_accel.clone(),
        Formula::between(c(&p.car_speed_min), v("V_c'"), c(&p.car_speed_max)),
        Formula::between(c(&p.train_speed_min), v("V_t'"), c(&p.train_speed_max)),
    ]);

    let edges = vec![
        Edge {
            from: "q_0".into(),
            to: "q_c".into(),
            act: Formula::eq(v("Z_c"), c(&p.sensor_line)),
            res: pick_accel,
        },
        Edge {
            from: "q_c".into(),
            to: "q_u".into(),
            act: collision_guard,
            res: outcome_reset.clone(),
        },
        Edge {
            from: "q_c".into(),
            to: "q_s".into(),
            act: safe_guard,
            res: outcome_reset,
        },
    ];

    HybridAutomaton::new(
        VarVector::of(&RAIL_VARS),
        Var::new("T"),
        locations,
        edges,
    )
    .map_err(RailError::Automaton)
}

/// The collision-run formula: the car is at the sensor line with a freshly
/// chosen acceleration, and one admissible continuous phase in `q_c` ends
/// inside the collision guard. Free variables: `Z_t`, `V_t`, `V_c`, `A_c`
/// (the car position is pinned to the sensor line and bound).
pub fn build_psi_unsafe(h: &HybridAutomaton) -> Result<Formula, RailError> {
    sensor_run(h, "q_u")
}

/// The safe-run formula: same shape, but the phase ends on the safe-exit
/// guard.
pub fn build_psi_safe(h: &HybridAutomaton) -> Result<Formula, RailError> {
    sensor_run(h, "q_s")
}

/// `∃Z_c ∃Z'' ∃T (sensor guard ∧ chosen reset ∧ Inv(q_c) ∧ 0 ≤ T ∧
/// flow(q_c)[Z,Z'',T] ∧ time-progress(q_c) ∧ outcome guard[Z''])` — the
/// post-jump state keeps the four free variables and pins the car position
/// through the sensor guard.
fn sensor_run(h: &HybridAutomaton, outcome: &str) -> Result<Formula, RailError> {
    let sensor = find_edge(h, "q_0", "q_c")?;
    let target = find_edge(h, "q_c", outcome)?;
    let control = h
        .location("q_c")
        .map_err(|_| RailError::MissingLocation("q_c".into()))?;
    let car_pos = h
        .vars()
        .iter()
        .find(|v| v.name() == "Z_c")
        .cloned()
        .ok_or_else(|| RailError::MissingVariable("Z_c".into()))?;

    let mut blocks = FreshBlocks::for_automaton(h);
    let k = blocks.alloc();
    let t = FreshBlocks::time_var(k);
    let landing = FreshBlocks::state_vector(k, h.dim());

    // The chosen-at-jump state is the plain vector itself: rename the reset's
    // primed variables down to plain ones.
    let chosen = ops::substitute(&sensor.res, &vector_map(h.primed(), h.vars()));
    let mut flow_map = vector_map(h.primed(), &landing);
    flow_map.insert(h.time().clone(), Term::var(t.clone()));
    let flow = ops::substitute(&control.flow, &flow_map);
    let rename_t: BTreeMap<Var, Term> =
        core::iter::once((h.time().clone(), Term::var(t.clone()))).collect();
    let progress = ops::substitute(
        &crate::reach::tp_with(h, control, &mut blocks),
        &rename_t,
    );
    let outcome_guard = ops::substitute(&target.act, &vector_map(h.vars(), &landing));

    let body = Formula::and(vec![
        sensor.act.clone(),
        chosen,
        control.inv.clone(),
        Formula::le(Term::int(0), Term::var(t.clone())),
        flow,
        progress,
        outcome_guard,
    ]);
    Ok(Formula::exists(
        car_pos,
        Formula::exists_many(landing.vars(), Formula::exists(t, body)),
    ))
}

fn find_edge<'h>(h: &'h HybridAutomaton, from: &str, to: &str) -> Result<&'h Edge, RailError> {
    h.edges()
        .iter()
        .find(|e| e.from == from && e.to == to)
        .ok_or_else(|| RailError::MissingEdge {
            from: from.into(),
            to: to.into(),
        })
}

/// Classifies every grid point of the request against the contracted
/// safe-run formula and the expanded collision-run formula.
///
/// Both approximations range over the four free variables. The formulas are
/// pruned and offered to the backend's quantifier elimination once; when
/// that is unavailable for the fragment, each grid point is decided by a
/// ground satisfiability query instead (`fallback_used` reports which).
pub fn classify_grid(
    h: &HybridAutomaton,
    request: &ClassifyRequest,
    backend: &mut dyn Backend,
) -> Result<GridClassification, RailError> {
    request.car_speed.validate()?;
    request.car_accel.validate()?;

    let psi_unsafe = build_psi_unsafe(h)?;
    let psi_safe = build_psi_safe(h)?;
    let free: VarVector = plane_vars(h)?;
    let cfg = TransformConfig::new(request.epsilon.clone(), free)
        .map_err(RailError::Transform)?;

    let expanded = prep::prune_quantifiers(&transform::expand(&psi_unsafe, &cfg));
    let contracted = prep::prune_quantifiers(&transform::contract(&psi_safe, &cfg));
    let (unsafe_formula, fb_unsafe) = eliminate_or_keep(backend, &expanded)?;
    let (safe_formula, fb_safe) = eliminate_or_keep(backend, &contracted)?;

    let speeds = request.car_speed.points();
    let accels = request.car_accel.points();
    let mut rows = Vec::with_capacity(speeds.len() * accels.len());
    let mut point: BTreeMap<Var, Rational> = BTreeMap::new();
    point.insert(Var::new("Z_t"), request.train_position.clone());
    point.insert(Var::new("V_t"), request.train_speed.clone());
    for vc in &speeds {
        point.insert(Var::new("V_c"), vc.clone());
        for ac in &accels {
            point.insert(Var::new("A_c"), ac.clone());
            let in_unsafe = decide_point(backend, &unsafe_formula, &point)?;
            let in_safe = decide_point(backend, &safe_formula, &point)?;
            rows.push(GridRow {
                car_speed: vc.clone(),
                car_accel: ac.clone(),
                in_safe,
                in_unsafe,
            });
        }
    }
    Ok(GridClassification {
        request: request.clone(),
        rows,
        safe_formula,
        unsafe_formula,
        fallback_used: fb_unsafe || fb_safe,
    })
}

/// The four plane variables in state order: everything but the car position.
fn plane_vars(h: &HybridAutomaton) -> Result<VarVector, RailError> {
    let kept: Vec<Var> = h
        .vars()
        .iter()
        .filter(|v| v.name() != "Z_c")
        .cloned()
        .collect();
    VarVector::new(kept).map_err(|_| RailError::MissingVariable("Z_c".into()))
}

fn eliminate_or_keep(
    backend: &mut dyn Backend,
    f: &Formula,
) -> Result<(Formula, bool), RailError> {
    match backend.qe(f) {
        Ok(q) => Ok((q, false)),
        Err(BackendError::UnsupportedFragment(_)) => Ok((f.clone(), true)),
        Err(e) => Err(RailError::Backend(e)),
    }
}

fn decide_point(
    backend: &mut dyn Backend,
    f: &Formula,
    point: &BTreeMap<Var, Rational>,
) -> Result<bool, RailError> {
    if is_quantifier_free(f) {
        return ops::eval_qf(f, point)
            .map_err(|_| RailError::MissingVariable("grid point is missing a variable".into()));
    }
    let map: BTreeMap<Var, Term> = point
        .iter()
        .map(|(v, r)| (v.clone(), Term::constant(r.clone())))
        .collect();
    let ground = ops::substitute(f, &map);
    match backend.check_sat(&ground) {
        Ok(DecisionOutcome::Sat(_)) => Ok(true),
        Ok(DecisionOutcome::Unsat) => Ok(false),
        Ok(DecisionOutcome::Unknown(r)) => Err(RailError::Undecided(r)),
        Err(e) => Err(RailError::Backend(e)),
    }
}

fn is_quantifier_free(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => true,
        Formula::Not(g) => is_quantifier_free(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().all(is_quantifier_free),
        Formula::Implies(a, b) => is_quantifier_free(a) && is_quantifier_free(b),
        Formula::Exists(..) | Formula::Forall(..) => false,
    }
}
