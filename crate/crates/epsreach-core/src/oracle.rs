//! Brute-force grid oracle for the `ε`-semantics, independent of the
//! symbolic transforms.
//!
//! [`oracle_region`] samples a quantifier-free formula on a dense sub-grid
//! (one tenth of the requested resolution) over one or two approximation
//! variables and computes the chosen semantics *set-theoretically*: open
//! `ε`-ball dilation and erosion are carried out with an exact integer
//! squared Euclidean distance transform, and the semantics definitions are
//! applied by direct recursion on the formula (atoms, conjunction,
//! disjunction, negation) — no code is shared with the formula-to-formula
//! transforms, so agreement between the two is meaningful evidence.
//!
//! The sampled box is extended internally by `ε` plus one cell so every
//! reported cell sees a fully sampled ball; the formula is assumed to keep
//! its edge value beyond the extension (callers choose boxes with margin).

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::formula::Formula;
use crate::ops;
use crate::term::{Rational, Var};
use crate::transform::TransformConfig;

/// Which set semantics the oracle computes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GridSemantics {
    /// The ordinary denotation, sampled.
    Standard,
    /// Open `ε`-dilation of the ordinary denotation.
    Tilde,
    /// The under-approximating structural semantics.
    Bottom,
    /// The mixed structural semantics.
    Sphere,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OracleError {
    /// More approximation variables than the grid supports.
    UnsupportedArity(usize),
    /// The formula must be quantifier-free.
    QuantifiedInput,
    /// A free variable of the formula is not an approximation variable.
    FreeParameter(Var),
    /// One bound pair per approximation variable is required.
    BoundsMismatch { expected: usize, actual: usize },
    /// Lower bound above upper bound.
    EmptyBox,
    /// The resolution must be positive.
    NonPositiveResolution,
    /// The requested box/resolution would need too many samples.
    GridTooLarge,
}

impl core::fmt::Display for OracleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OracleError::UnsupportedArity(d) => {
                write!(f, "the grid oracle supports 1 or 2 dimensions, got {d}")
            }
            OracleError::QuantifiedInput => write!(f, "the grid oracle needs a quantifier-free formula"),
            OracleError::FreeParameter(v) => {
                write!(f, "free variable `{}` is not an approximation variable", v.name())
            }
            OracleError::BoundsMismatch { expected, actual } => write!(
                f,
                "expected {expected} bound pairs (one per approximation variable), got {actual}"
            ),
            OracleError::EmptyBox => write!(f, "box lower bound exceeds upper bound"),
            OracleError::NonPositiveResolution => write!(f, "resolution must be positive"),
            OracleError::GridTooLarge => write!(f, "box/resolution combination needs too many samples"),
        }
    }
}

/// One sampled axis: points `lo + i·step` for `i < count`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Axis {
    pub var: Var,
    pub lo: Rational,
    pub step: Rational,
    pub count: usize,
}

impl Axis {
    pub fn point(&self, i: usize) -> Rational {
        &self.lo + &self.step * Rational::from_integer(BigInt::from(i))
    }
}

/// Row-major boolean classification of the requested box.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RegionGrid {
    axes: Vec<Axis>,
    cells: Vec<bool>,
}

impl RegionGrid {
    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    /// Cell value by per-axis indices.
    pub fn get(&self, idx: &[usize]) -> bool {
        assert_eq!(idx.len(), self.axes.len());
        let flat = match idx {
            [i] => *i,
            [i, j] => i * self.axes[1].count + j,
            _ => unreachable!("the oracle builds only 1-D and 2-D grids"),
        };
        self.cells[flat]
    }

    /// The sample point for the given indices.
    pub fn point(&self, idx: &[usize]) -> Vec<(Var, Rational)> {
        idx.iter()
            .zip(&self.axes)
            .map(|(i, ax)| (ax.var.clone(), ax.point(*i)))
            .collect()
    }

    pub fn count_true(&self) -> usize {
        self.cells.iter().filter(|c| **c).count()
    }
}

/// Total fine samples allowed (all axes multiplied, extension included).
const MAX_FINE_CELLS: usize = 20_000_000;

/// Classifies the grid points of `bounds` (one `(lo, hi)` pair per
/// approximation variable, sampled every `resolution`) as inside or outside
/// the chosen semantics of `f`, computed by dense sub-sampling at one tenth
/// of the resolution.
pub fn oracle_region(
    f: &Formula,
    cfg: &TransformConfig,
    bounds: &[(Rational, Rational)],
    resolution: &Rational,
    semantics: GridSemantics,
) -> Result<RegionGrid, OracleError> {
    let vars = cfg.approx_vars();
    let dim = vars.dim();
    if dim > 2 {
        return Err(OracleError::UnsupportedArity(dim));
    }
    if bounds.len() != dim {
        return Err(OracleError::BoundsMismatch {
            expected: dim,
            actual: bounds.len(),
        });
    }
    if resolution <= &Rational::from_integer(BigInt::from(0)) {
        return Err(OracleError::NonPositiveResolution);
    }
    let f = ops::eliminate_implies(f);
    if has_quantifier(&f) {
        return Err(OracleError::QuantifiedInput);
    }
    let approx: BTreeSet<&str> = vars.iter().map(Var::name).collect();
    for v in ops::free_vars(&f) {
        if !approx.contains(v.name()) {
            return Err(OracleError::FreeParameter(v));
        }
    }

    let fine_step = resolution / Rational::from_integer(BigInt::from(10));
    // Open balls of radius ε never see further than ceil(ε/step) cells.
    let margin = ceil_to_usize(&(cfg.epsilon() / &fine_step)) + 1;
    // Strict integer threshold: squared cell distance d² < (ε/step)²
    // ⟺ d² ≤ radius2_max.
    let radius2 = {
        let r = cfg.epsilon() / &fine_step;
        &r * &r
    };
    let radius2_max = if radius2.is_integer() {
        floor_to_i64(&radius2) - 1
    } else {
        floor_to_i64(&radius2)
    };

    let mut fine_axes = Vec::with_capacity(dim);
    let mut coarse_axes = Vec::with_capacity(dim);
    let mut total: usize = 1;
    for (v, (lo, hi)) in vars.iter().zip(bounds) {
        if lo > hi {
            return Err(OracleError::EmptyBox);
        }
        let coarse_count = floor_to_usize(&((hi - lo) / resolution)) + 1;
        let fine_count = (coarse_count - 1) * 10 + 1 + 2 * margin;
        total = total.saturating_mul(fine_count);
        fine_axes.push(Axis {
            var: v.clone(),
            lo: lo - &fine_step * Rational::from_integer(BigInt::from(margin)),
            step: fine_step.clone(),
            count: fine_count,
        });
        coarse_axes.push(Axis {
            var: v.clone(),
            lo: lo.clone(),
            step: resolution.clone(),
            count: coarse_count,
        });
    }
    if total > MAX_FINE_CELLS {
        return Err(OracleError::GridTooLarge);
    }

    let shape: Vec<usize> = fine_axes.iter().map(|a| a.count).collect();
    let fine = match semantics {
        GridSemantics::Standard => sample(&f, &fine_axes),
        GridSemantics::Tilde => dilate(&sample(&f, &fine_axes), &shape, radius2_max),
        GridSemantics::Bottom => bottom_region(&f, &fine_axes, &shape, radius2_max),
        GridSemantics::Sphere => sphere_region(&f, &fine_axes, &shape, radius2_max),
    };

    // Crop: coarse index i sits at fine index margin + 10·i.
    let cells = match dim {
        1 => (0..coarse_axes[0].count)
            .map(|i| fine[margin + 10 * i])
            .collect(),
        _ => {
            let nx = fine_axes[1].count;
            let mut out = Vec::with_capacity(coarse_axes[0].count * coarse_axes[1].count);
            for i in 0..coarse_axes[0].count {
                for j in 0..coarse_axes[1].count {
                    out.push(fine[(margin + 10 * i) * nx + (margin + 10 * j)]);
                }
            }
            out
        }
    };
    Ok(RegionGrid {
        axes: coarse_axes,
        cells,
    })
}

fn has_quantifier(f: &Formula) -> bool {
    match f {
        Formula::True | Formula::False | Formula::Atom { .. } => false,
        Formula::Not(g) => has_quantifier(g),
        Formula::And(gs) | Formula::Or(gs) => gs.iter().any(has_quantifier),
        Formula::Implies(a, b) => has_quantifier(a) || has_quantifier(b),
        Formula::Exists(..) | Formula::Forall(..) => true,
    }
}

fn ceil_to_usize(r: &Rational) -> usize {
    r.ceil()
        .to_integer()
        .to_usize()
        .expect("grid extents fit in usize")
}

fn floor_to_usize(r: &Rational) -> usize {
    r.floor()
        .to_integer()
        .to_usize()
        .expect("grid extents fit in usize")
}

fn floor_to_i64(r: &Rational) -> i64 {
    r.floor()
        .to_integer()
        .to_i64()
        .expect("squared radii fit in i64")
}

/// Pointwise standard denotation on the fine grid.
fn sample(f: &Formula, axes: &[Axis]) -> Vec<bool> {
    let mut point = alloc::collections::BTreeMap::new();
    match axes {
        [a] => {
            let mut out = Vec::with_capacity(a.count);
            for i in 0..a.count {
                point.insert(a.var.clone(), a.point(i));
                out.push(ops::eval_qf(f, &point).expect("free variables were checked"));
            }
            out
        }
        [a, b] => {
            let mut out = Vec::with_capacity(a.count * b.count);
            for i in 0..a.count {
                point.insert(a.var.clone(), a.point(i));
                for j in 0..b.count {
                    point.insert(b.var.clone(), b.point(j));
                    out.push(ops::eval_qf(f, &point).expect("free variables were checked"));
                }
            }
            out
        }
        _ => unreachable!("arity was checked"),
    }
}

/// The structural under-approximating semantics: atoms and conjunctions are
/// opened, disjunctions pass through, negation opens the complement of the
/// *standard* denotation.
fn bottom_region(f: &Formula, axes: &[Axis], shape: &[usize], r2: i64) -> Vec<bool> {
    match f {
        Formula::True => vec![true; cell_count(shape)],
        Formula::False => vec![false; cell_count(shape)],
        Formula::Atom { .. } => open(&sample(f, axes), shape, r2),
        Formula::And(gs) => {
            let mut acc = vec![true; cell_count(shape)];
            for g in gs {
                let part = bottom_region(g, axes, shape, r2);
                intersect(&mut acc, &part);
            }
            open(&acc, shape, r2)
        }
        Formula::Or(gs) => {
            let mut acc = vec![false; cell_count(shape)];
            for g in gs {
                let part = bottom_region(g, axes, shape, r2);
                unite(&mut acc, &part);
            }
            acc
        }
        Formula::Not(g) => {
            let mut inner = sample(g, axes);
            complement(&mut inner);
            open(&inner, shape, r2)
        }
        Formula::Implies(..) => unreachable!("implication is eliminated on entry"),
        Formula::Exists(..) | Formula::Forall(..) => unreachable!("input is quantifier-free"),
    }
}

/// The mixed semantics: atoms dilate, conjunctions open, negation opens the
/// complement of the *recursed* region.
fn sphere_region(f: &Formula, axes: &[Axis], shape: &[usize], r2: i64) -> Vec<bool> {
    match f {
        Formula::True => vec![true; cell_count(shape)],
        Formula::False => vec![false; cell_count(shape)],
        Formula::Atom { .. } => dilate(&sample(f, axes), shape, r2),
        Formula::And(gs) => {
            let mut acc = vec![true; cell_count(shape)];
            for g in gs {
                let part = sphere_region(g, axes, shape, r2);
                intersect(&mut acc, &part);
            }
            open(&acc, shape, r2)
        }
        Formula::Or(gs) => {
            let mut acc = vec![false; cell_count(shape)];
            for g in gs {
                let part = sphere_region(g, axes, shape, r2);
                unite(&mut acc, &part);
            }
            acc
        }
        Formula::Not(g) => {
            let mut inner = sphere_region(g, axes, shape, r2);
            complement(&mut inner);
            open(&inner, shape, r2)
        }
        Formula::Implies(..) => unreachable!("implication is eliminated on entry"),
        Formula::Exists(..) | Formula::Forall(..) => unreachable!("input is quantifier-free"),
    }
}

fn cell_count(shape: &[usize]) -> usize {
    shape.iter().product()
}

fn intersect(acc: &mut [bool], other: &[bool]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a = *a && *b;
    }
}

fn unite(acc: &mut [bool], other: &[bool]) {
    for (a, b) in acc.iter_mut().zip(other) {
        *a = *a || *b;
    }
}

fn complement(cells: &mut [bool]) {
    for c in cells.iter_mut() {
        *c = !*c;
    }
}

/// Open-ball dilation: true where some true cell lies at squared distance
/// ≤ `r2` (cell units).
fn dilate(cells: &[bool], shape: &[usize], r2: i64) -> Vec<bool> {
    let d2 = distance_transform(cells, shape);
    d2.iter().map(|d| *d <= r2).collect()
}

/// Open-ball erosion: true where every cell at squared distance ≤ `r2` is
/// true, i.e. the nearest false cell is strictly beyond the ball.
fn erode(cells: &[bool], shape: &[usize], r2: i64) -> Vec<bool> {
    let mut inverted: Vec<bool> = cells.iter().map(|c| !*c).collect();
    let d2 = distance_transform(&inverted, shape);
    inverted.clear();
    d2.iter().map(|d| *d > r2).collect()
}

/// Morphological opening: erosion then dilation — the union of all open
/// balls contained in the set.
fn open(cells: &[bool], shape: &[usize], r2: i64) -> Vec<bool> {
    dilate(&erode(cells, shape, r2), shape, r2)
}

/// Sentinel for "no seed anywhere" — small enough that adding a squared
/// offset cannot overflow.
const FAR: i64 = i64::MAX / 4;

/// Exact squared Euclidean distance (in cell units) from every cell to the
/// nearest true cell; separable lower-envelope passes, integer arithmetic
/// throughout.
fn distance_transform(cells: &[bool], shape: &[usize]) -> Vec<i64> {
    match shape {
        [_] => {
            let seed: Vec<i64> = cells.iter().map(|c| if *c { 0 } else { FAR }).collect();
            envelope(&seed)
        }
        [ny, nx] => {
            // Pass 1: along rows (contiguous).
            let mut rows = Vec::with_capacity(ny * nx);
            for y in 0..*ny {
                let seed: Vec<i64> = cells[y * nx..(y + 1) * nx]
                    .iter()
                    .map(|c| if *c { 0 } else { FAR })
                    .collect();
                rows.extend(envelope(&seed));
            }
            // Pass 2: along columns, seeded with the row distances.
            let mut out = vec![0_i64; ny * nx];
            let mut column = vec![0_i64; *ny];
            for x in 0..*nx {
                for y in 0..*ny {
                    column[y] = rows[y * nx + x];
                }
                for (y, d) in envelope(&column).into_iter().enumerate() {
                    out[y * nx + x] = d;
                }
            }
            out
        }
        _ => unreachable!("arity was checked"),
    }
}

/// One-dimensional squared-distance lower envelope of the parabolas
/// `i ↦ (i − j)² + seed[j]`; comparisons use exact cross-multiplied
/// fractions so no precision is lost.
fn envelope(seed: &[i64]) -> Vec<i64> {
    let n = seed.len();
    let mut out = vec![0_i64; n];
    // Vertex positions of the envelope parabolas and the fractional
    // boundaries (num/den, den > 0) between consecutive ones.
    let mut v = vec![0_usize; n];
    let mut z_num = vec![0_i128; n + 1];
    let mut z_den = vec![1_i128; n + 1];
    let mut k = 0_usize;
    z_num[0] = i128::MIN / 4;
    z_num[1] = i128::MAX / 4;
    for q in 1..n {
        loop {
            let p = v[k];
            // Intersection of parabolas at p and q (q > p):
            // s = (seed[q] + q² − seed[p] − p²) / (2q − 2p).
            let num = seed[q] as i128 + (q as i128) * (q as i128)
                - seed[p] as i128
                - (p as i128) * (p as i128);
            let den = 2 * (q as i128 - p as i128);
            // s ≤ z[k] ⟺ num·z_den[k] ≤ z_num[k]·den (both dens > 0).
            if k > 0 && num * z_den[k] <= z_num[k] * den {
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z_num[k] = num;
                z_den[k] = den;
                z_num[k + 1] = i128::MAX / 4;
                z_den[k + 1] = 1;
                break;
            }
        }
    }
    let mut k = 0_usize;
    for (q, slot) in out.iter_mut().enumerate() {
        // Advance while the next boundary is below q: z[k+1] < q.
        while z_num[k + 1] < (q as i128) * z_den[k + 1] {
            k += 1;
        }
        let p = v[k];
        let d = q as i64 - p as i64;
        *slot = d * d + seed[p];
    }
    out
}
