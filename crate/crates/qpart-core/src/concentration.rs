//! Concentration machinery: root solvers, isoperimetric verification, tail
//! bounds, self-bounding checks, and Monte Carlo sampling.
//!
//! The central quantity is the control distance
//! `f^s(A_1, ..., A_q; x)`: the smallest number of coordinates of `x` that
//! are covered fewer than `s` times by any choice of representatives
//! `y^i in A_i`. The isoperimetric inequality integrates an exponential of
//! this distance against the product measure and bounds it by a product of
//! the sets' probabilities:
//!
//! ```text
//!   integral of t^(f^s(A; x)) dP(x)  <=  prod_i P[A_i]^(-alpha)
//! ```
//!
//! where the base `t = t(alpha, q, s)` is the larger root of
//! `t + alpha*q*t^(-1/(alpha*s)) = alpha*q + 1`. This module solves for the
//! roots, evaluates `f^s` exactly by brute force, and verifies the
//! inequality by exhaustive integration over small product spaces, in four
//! variants: the general base, the `t^min` base valid for every positive
//! `alpha`, the `s = 1` base `z(q, alpha)`, and the `s = q - 1` base
//! `e^(tau/q)` with `tau` the positive root of `e^(tau/2) + e^(-tau) = 2`.
//!
//! Downstream of the inequality are computable tail bounds for
//! q-partitioning valuations of random sets, a median-to-mean conversion
//! with explicit constants, Chernoff and self-bounding baselines, and a
//! deterministic chunked Monte Carlo sampler for validating all of the
//! above empirically. Roots are binary64 bisections with fixed brackets;
//! everything downstream of sampling stays exact over rationals.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
// In the plain no_std graph the f64 math methods only exist through this
// trait (backed by libm). Dev-dependencies pull std into the test graph,
// whose inherent methods then win resolution and leave the import idle.
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::bits::bit_indices;
use crate::rng::StreamRng;
use crate::setfn::Valuation;
use crate::{Rat, rat_int};

/// Bisection iteration cap for every root solver.
const BISECT_MAX_ITERS: u32 = 200;

/// Absolute bracket tolerance for every root solver.
const ROOT_ATOL: f64 = 1e-12;

/// Largest representative-tuple count [`fs_sets`] will enumerate.
pub const TUPLE_BUDGET: u64 = 1_000_000;

/// Largest point-times-tuple workload [`verify_isoperimetric`] will accept.
pub const ISO_BUDGET: u64 = 10_000_000;

/// Coordinate cap for exhaustively integrated product spaces.
pub const ISO_MAX_DIMS: usize = 6;

/// Per-coordinate outcome cap for exhaustively integrated product spaces.
pub const ISO_MAX_OUTCOMES: usize = 4;

/// Samples drawn per RNG stream; chunk `c` of a run seeds its own stream as
/// `(seed, c)`, so results are independent of how chunks are scheduled.
pub const SAMPLE_CHUNK: u64 = 4096;

/// Errors from solvers, verifiers, and samplers.
#[derive(Clone, Debug, PartialEq)]
pub enum ConcentrationError {
    /// `alpha` must be at least `1/s` for this solver or variant.
    AlphaBelowFloor { alpha: f64, s: u32 },
    /// `alpha` must be positive and finite.
    AlphaNotPositive { alpha: f64 },
    /// `s` outside its valid range for the given `q`.
    SRange { s: u32, q: u32 },
    /// `q` too small.
    QRange { q: u32 },
    /// `solve_xi` needs `psi >= 1 + delta > 1`.
    XiDomain { psi: f64, delta: f64 },
    /// `delta` outside its valid range.
    DeltaRange { delta: f64 },
    /// A mean, threshold, or exceedance parameter is negative or not finite.
    ValueRange { what: &'static str, value: f64 },
    /// Tail parameters must satisfy `1 <= s < r <= log2 q`.
    TailParams { r: u32, s: u32, q: u64 },
    /// A probability lies outside `[0, 1]` or is not finite.
    ProbOutOfRange { index: usize, value: f64 },
    /// A coordinate's outcome probabilities do not sum to 1.
    ProbSum { index: usize, sum: f64 },
    /// Points of differing dimension were mixed.
    DimensionMismatch { expected: usize, found: usize },
    /// A point's coordinate value exceeds the outcome count.
    OutcomeRange { dim: usize, value: usize },
    /// A set of representatives is empty.
    EmptySet { index: usize },
    /// The exhaustive enumeration would exceed its budget.
    TupleBudget { size: u64, cap: u64 },
    /// The product space is too large for exhaustive integration.
    SpaceTooLarge { dims: usize, outcomes: usize },
    /// A sampler was asked for zero samples or given an empty histogram.
    EmptySample,
    /// The lower tail needs `t <= mean`.
    SideDomain { mean: f64, t: f64 },
    /// Marginals vector length disagrees with the ground set.
    MarginalsLength { expected: u32, found: usize },
}

impl fmt::Display for ConcentrationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConcentrationError::AlphaBelowFloor { alpha, s } => {
                write!(f, "alpha = {alpha} below the floor 1/s for s = {s}")
            }
            ConcentrationError::AlphaNotPositive { alpha } => {
                write!(f, "alpha = {alpha} must be positive and finite")
            }
            ConcentrationError::SRange { s, q } => write!(f, "s = {s} invalid for q = {q}"),
            ConcentrationError::QRange { q } => write!(f, "q = {q} too small"),
            ConcentrationError::XiDomain { psi, delta } => {
                write!(f, "need psi >= 1 + delta > 1, got psi = {psi}, delta = {delta}")
            }
            ConcentrationError::DeltaRange { delta } => {
                write!(f, "delta = {delta} outside its valid range")
            }
            ConcentrationError::ValueRange { what, value } => {
                write!(f, "{what} = {value} must be finite and nonnegative")
            }
            ConcentrationError::TailParams { r, s, q } => {
                write!(f, "need 1 <= s < r <= log2(q), got r = {r}, s = {s}, q = {q}")
            }
            ConcentrationError::ProbOutOfRange { index, value } => {
                write!(f, "probability {value} at index {index} outside [0, 1]")
            }
            ConcentrationError::ProbSum { index, sum } => {
                write!(f, "coordinate {index} probabilities sum to {sum}, not 1")
            }
            ConcentrationError::DimensionMismatch { expected, found } => {
                write!(f, "expected dimension {expected}, found {found}")
            }
            ConcentrationError::OutcomeRange { dim, value } => {
                write!(f, "outcome {value} out of range in coordinate {dim}")
            }
            ConcentrationError::EmptySet { index } => write!(f, "set {index} is empty"),
            ConcentrationError::TupleBudget { size, cap } => {
                write!(f, "enumeration of {size} tuples exceeds the budget {cap}")
            }
            ConcentrationError::SpaceTooLarge { dims, outcomes } => write!(
                f,
                "space with {dims} coordinates of up to {outcomes} outcomes is too large"
            ),
            ConcentrationError::EmptySample => write!(f, "need at least one sample"),
            ConcentrationError::SideDomain { mean, t } => {
                write!(f, "lower tail needs t <= mean, got t = {t}, mean = {mean}")
            }
            ConcentrationError::MarginalsLength { expected, found } => {
                write!(f, "expected {expected} marginals, found {found}")
            }
        }
    }
}

/// Parameters of the root equation `t + alpha*q*t^(-1/(alpha*s)) = alpha*q + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootParams {
    /// Exponent weight, positive ([`solve_t`] further requires `>= 1/s`).
    pub alpha: f64,
    /// Number of reference points, at least 2.
    pub q: u32,
    /// Cover multiplicity, in `1..q`.
    pub s: u32,
}

impl RootParams {
    fn validate(&self) -> Result<(), ConcentrationError> {
        if self.q < 2 {
            return Err(ConcentrationError::QRange { q: self.q });
        }
        if self.s < 1 || self.s >= self.q {
            return Err(ConcentrationError::SRange { s: self.s, q: self.q });
        }
        if !self.alpha.is_finite() || self.alpha <= 0.0 {
            return Err(ConcentrationError::AlphaNotPositive { alpha: self.alpha });
        }
        Ok(())
    }
}

/// The root greater than 1 of `x + a*x^(-b) = a + 1`, for `a*b > 1`.
///
/// `x = 1` always solves the equation; the derivative has a single zero at
/// `x0 = (a*b)^(1/(1+b)) > 1`, the function is negative there, and it grows
/// past zero before `a + 1`, so bisection on `[x0, a + 1]` finds the larger
/// root. For `b = 1` the equation is quadratic with roots 1 and `a`.
fn bracket_root(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0 && a * b > 1.0);
    if (b - 1.0).abs() < 1e-15 {
        return a;
    }
    let f = |x: f64| x + a * x.powf(-b) - a - 1.0;
    let mut lo = (a * b).powf(1.0 / (1.0 + b));
    let mut hi = a + 1.0;
    for _ in 0..BISECT_MAX_ITERS {
        if hi - lo <= ROOT_ATOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The larger root of `t + alpha*q*t^(-1/(alpha*s)) = alpha*q + 1`.
///
/// Requires `alpha >= 1/s`; at `alpha = 1/s` the equation is quadratic and
/// the root is exactly `q/s`.
pub fn solve_t(p: &RootParams) -> Result<f64, ConcentrationError> {
    p.validate()?;
    let alpha_s = p.alpha * f64::from(p.s);
    if alpha_s < 1.0 - 1e-12 {
        return Err(ConcentrationError::AlphaBelowFloor { alpha: p.alpha, s: p.s });
    }
    Ok(bracket_root(p.alpha * f64::from(p.q), 1.0 / alpha_s))
}

/// The smallest of the candidate roots `t_r` for `r = 0..s`, where `t_r`
/// solves the equation with `(q - r, s - r)` in place of `(q, s)`.
///
/// Valid for every positive `alpha`; when `alpha >= 1/s` it coincides with
/// [`solve_t`].
pub fn solve_t_min(p: &RootParams) -> Result<f64, ConcentrationError> {
    p.validate()?;
    let mut best = f64::INFINITY;
    for r in 0..p.s {
        let a = p.alpha * f64::from(p.q - r);
        let b = 1.0 / (p.alpha * f64::from(p.s - r));
        best = best.min(bracket_root(a, b));
    }
    Ok(best)
}

/// The base for the `s = 1` inequality: the larger root of
/// `z + alpha*q*z^(-1/alpha) = alpha*q + 1`, valid for every positive
/// `alpha`.
pub fn solve_z(q: u32, alpha: f64) -> Result<f64, ConcentrationError> {
    if q < 2 {
        return Err(ConcentrationError::QRange { q });
    }
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(ConcentrationError::AlphaNotPositive { alpha });
    }
    Ok(bracket_root(alpha * f64::from(q), 1.0 / alpha))
}

/// The positive root of `e^(tau/2) + e^(-tau) = 2`, roughly 0.96.
pub fn solve_tau() -> f64 {
    let f = |x: f64| (0.5 * x).exp() + (-x).exp() - 2.0;
    let mut lo = 0.5;
    let mut hi = 2.0;
    for _ in 0..BISECT_MAX_ITERS {
        if hi - lo <= ROOT_ATOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The larger root of `xi + psi*xi^(-(1+delta)/psi) = psi + 1`, for
/// `psi >= 1 + delta > 1`. At `psi = 1 + delta` the root is exactly
/// `1 + delta`.
pub fn solve_xi(psi: f64, delta: f64) -> Result<f64, ConcentrationError> {
    if !psi.is_finite() || !delta.is_finite() || delta <= 0.0 || psi < 1.0 + delta - 1e-12 {
        return Err(ConcentrationError::XiDomain { psi, delta });
    }
    Ok(bracket_root(psi, (1.0 + delta) / psi))
}

/// Slack in the pointwise inequality characterizing the root:
/// `min(t, min over s-subsets of prod x_i^(-alpha)) + alpha * sum x_i`
/// never exceeds `alpha*q + 1` for `x in [0, 1]^q`, and `t` is the largest
/// constant with that property (the slack vanishes at
/// `x == t^(-1/(alpha*s))` everywhere). Uses the convention
/// `0^(-alpha) = infinity`.
pub fn root_margin(p: &RootParams, xs: &[f64]) -> Result<f64, ConcentrationError> {
    let t = solve_t(p)?;
    if xs.len() != p.q as usize {
        return Err(ConcentrationError::DimensionMismatch {
            expected: p.q as usize,
            found: xs.len(),
        });
    }
    for (i, x) in xs.iter().enumerate() {
        if !x.is_finite() || *x < 0.0 || *x > 1.0 {
            return Err(ConcentrationError::ProbOutOfRange { index: i, value: *x });
        }
    }
    // The cheapest s-subset to exclude is the one with the largest product.
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let top_product: f64 = sorted.iter().take(p.s as usize).product();
    let subset_term = top_product.powf(-p.alpha);
    let lhs = t.min(subset_term) + p.alpha * xs.iter().sum::<f64>();
    Ok(p.alpha * f64::from(p.q) + 1.0 - lhs)
}

/// A finite product probability space: one outcome-probability vector per
/// coordinate. Points are coordinate-indexed outcome numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSpace {
    probs: Vec<Vec<f64>>,
}

impl ProductSpace {
    /// Validates that every coordinate has at least one outcome and a
    /// probability vector summing to 1.
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self, ConcentrationError> {
        if probs.is_empty() {
            return Err(ConcentrationError::DimensionMismatch { expected: 1, found: 0 });
        }
        for (i, coord) in probs.iter().enumerate() {
            if coord.is_empty() {
                return Err(ConcentrationError::OutcomeRange { dim: i, value: 0 });
            }
            for p in coord {
                if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                    return Err(ConcentrationError::ProbOutOfRange { index: i, value: *p });
                }
            }
            let sum: f64 = coord.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(ConcentrationError::ProbSum { index: i, sum });
            }
        }
        Ok(ProductSpace { probs })
    }

    /// Uniform two-outcome space on `dims` coordinates.
    pub fn uniform_bits(dims: usize) -> Self {
        ProductSpace { probs: vec![vec![0.5, 0.5]; dims] }
    }

    /// Number of coordinates.
    pub fn dims(&self) -> usize {
        self.probs.len()
    }

    /// Number of outcomes in one coordinate.
    pub fn outcomes(&self, dim: usize) -> usize {
        self.probs[dim].len()
    }

    /// Total number of points.
    pub fn size(&self) -> u64 {
        self.probs
            .iter()
            .fold(1u64, |acc, c| acc.saturating_mul(c.len() as u64))
    }

    /// Validates one point against the space's shape.
    pub fn check_point(&self, x: &[usize]) -> Result<(), ConcentrationError> {
        if x.len() != self.dims() {
            return Err(ConcentrationError::DimensionMismatch {
                expected: self.dims(),
                found: x.len(),
            });
        }
        for (i, v) in x.iter().enumerate() {
            if *v >= self.outcomes(i) {
                return Err(ConcentrationError::OutcomeRange { dim: i, value: *v });
            }
        }
        Ok(())
    }

    /// Probability of one (valid) point.
    pub fn point_prob(&self, x: &[usize]) -> f64 {
        x.iter().enumerate().map(|(i, v)| self.probs[i][*v]).product()
    }

    /// Probability of a set given as a list of distinct points.
    pub fn set_prob(&self, set: &[Vec<usize>]) -> f64 {
        set.iter().map(|x| self.point_prob(x)).sum()
    }

    /// Iterates every point of the space in odometer order.
    pub fn points(&self) -> ProductPoints {
        ProductPoints {
            counts: self.probs.iter().map(Vec::len).collect(),
            state: Some(vec![0; self.dims()]),
        }
    }
}

/// See [`ProductSpace::points`].
pub struct ProductPoints {
    counts: Vec<usize>,
    state: Option<Vec<usize>>,
}

impl Iterator for ProductPoints {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.state.clone()?;
        let state = self.state.as_mut().expect("checked above");
        let mut dim = state.len();
        loop {
            if dim == 0 {
                self.state = None;
                break;
            }
            dim -= 1;
            state[dim] += 1;
            if state[dim] < self.counts[dim] {
                break;
            }
            state[dim] = 0;
        }
        Some(current)
    }
}

/// Number of coordinates of `x` covered fewer than `s` times by the
/// reference points: `|{i : x_i appears < s times among y^1_i..y^q_i}|`.
pub fn fs_points(ys: &[Vec<usize>], x: &[usize], s: u32) -> Result<u32, ConcentrationError> {
    let q = ys.len() as u32;
    if s < 1 || s > q {
        return Err(ConcentrationError::SRange { s, q });
    }
    for y in ys {
        if y.len() != x.len() {
            return Err(ConcentrationError::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
    }
    let mut under = 0;
    for (i, xi) in x.iter().enumerate() {
        let hits = ys.iter().filter(|y| y[i] == *xi).count() as u32;
        if hits < s {
            under += 1;
        }
    }
    Ok(under)
}

/// The infimum of [`fs_points`] over all choices of one representative per
/// set, computed by exhaustive tuple enumeration (the canonical control
/// distance `f^s(A_1, ..., A_q; x)`).
pub fn fs_sets(sets: &[Vec<Vec<usize>>], x: &[usize], s: u32) -> Result<u32, ConcentrationError> {
    let q = sets.len() as u32;
    if s < 1 || s > q {
        return Err(ConcentrationError::SRange { s, q });
    }
    let mut tuples = 1u64;
    for (i, a) in sets.iter().enumerate() {
        if a.is_empty() {
            return Err(ConcentrationError::EmptySet { index: i });
        }
        for y in a {
            if y.len() != x.len() {
                return Err(ConcentrationError::DimensionMismatch {
                    expected: x.len(),
                    found: y.len(),
                });
            }
        }
        tuples = tuples.saturating_mul(a.len() as u64);
    }
    if tuples > TUPLE_BUDGET {
        return Err(ConcentrationError::TupleBudget { size: tuples, cap: TUPLE_BUDGET });
    }

    let mut idx = vec![0usize; sets.len()];
    let mut best = u32::MAX;
    loop {
        let mut under = 0;
        for (i, xi) in x.iter().enumerate() {
            let hits = idx
                .iter()
                .enumerate()
                .filter(|(j, &yj)| sets[*j][yj][i] == *xi)
                .count() as u32;
            if hits < s {
                under += 1;
            }
        }
        best = best.min(under);
        if best == 0 {
            return Ok(0);
        }
        let mut dim = idx.len();
        loop {
            if dim == 0 {
                return Ok(best);
            }
            dim -= 1;
            idx[dim] += 1;
            if idx[dim] < sets[dim].len() {
                break;
            }
            idx[dim] = 0;
        }
    }
}

/// Which base the isoperimetric verification uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoVariant {
    /// `t(alpha, q, s)`; requires `alpha >= 1/s`.
    General,
    /// `t_min(alpha, q, s)`; any positive `alpha`.
    TMin,
    /// `z(q, alpha)` with distance `f^1`; any positive `alpha`, `s` must be 1.
    S1,
    /// `e^(tau/q)` with distance `f^(q-1)` and right side
    /// `prod P[A_i]^(-1/q)`; `s` must be `q - 1` and `alpha` is ignored.
    Tau,
}

/// Outcome of one exhaustive isoperimetric check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoReport {
    /// The integral of `base^(f^s)` over the space.
    pub lhs: f64,
    /// The probability product bound.
    pub rhs: f64,
    /// The exponential base used.
    pub base: f64,
    /// `lhs <= rhs` up to root tolerance.
    pub holds: bool,
}

/// Exhaustively integrates `base^(f^s(A; x))` over a small product space and
/// compares against `prod_i P[A_i]^(-alpha)` (or `-1/q` for [`IsoVariant::Tau`]).
///
/// Sets are lists of points; duplicates are merged before probabilities are
/// computed.
pub fn verify_isoperimetric(
    sp: &ProductSpace,
    sets: &[Vec<Vec<usize>>],
    alpha: f64,
    s: u32,
    variant: IsoVariant,
) -> Result<IsoReport, ConcentrationError> {
    if sp.dims() > ISO_MAX_DIMS || (0..sp.dims()).any(|i| sp.outcomes(i) > ISO_MAX_OUTCOMES) {
        let worst = (0..sp.dims()).map(|i| sp.outcomes(i)).max().unwrap_or(0);
        return Err(ConcentrationError::SpaceTooLarge { dims: sp.dims(), outcomes: worst });
    }
    let q = sets.len() as u32;
    if q < 2 {
        return Err(ConcentrationError::QRange { q });
    }

    let mut clean: Vec<Vec<Vec<usize>>> = Vec::with_capacity(sets.len());
    let mut tuples = 1u64;
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(ConcentrationError::EmptySet { index: i });
        }
        for x in set {
            sp.check_point(x)?;
        }
        let mut unique = set.clone();
        unique.sort();
        unique.dedup();
        tuples = tuples.saturating_mul(unique.len() as u64);
        clean.push(unique);
    }
    if sp.size().saturating_mul(tuples) > ISO_BUDGET {
        return Err(ConcentrationError::TupleBudget {
            size: sp.size().saturating_mul(tuples),
            cap: ISO_BUDGET,
        });
    }

    let (base, eff_s, rhs_exp) = match variant {
        IsoVariant::General => {
            let t = solve_t(&RootParams { alpha, q, s })?;
            (t, s, alpha)
        }
        IsoVariant::TMin => {
            let t = solve_t_min(&RootParams { alpha, q, s })?;
            (t, s, alpha)
        }
        IsoVariant::S1 => {
            if s != 1 {
                return Err(ConcentrationError::SRange { s, q });
            }
            (solve_z(q, alpha)?, 1, alpha)
        }
        IsoVariant::Tau => {
            if s != q - 1 {
                return Err(ConcentrationError::SRange { s, q });
            }
            ((solve_tau() / f64::from(q)).exp(), q - 1, 1.0 / f64::from(q))
        }
    };

    let mut lhs = 0.0;
    for x in sp.points() {
        let p = sp.point_prob(&x);
        if p == 0.0 {
            continue;
        }
        let dist = fs_sets(&clean, &x, eff_s)?;
        lhs += p * base.powi(dist as i32);
    }
    let mut rhs = 1.0;
    for set in &clean {
        rhs *= sp.set_prob(set).powf(-rhs_exp);
    }
    let holds = lhs <= rhs * (1.0 + 1e-9) + 1e-12;
    Ok(IsoReport { lhs, rhs, base, holds })
}

/// Tail bound for a q-partitioning valuation of a random set at exceedance
/// `k` past `r/s` times a reference level `a`:
/// `P[v(S) >= (r/s)a + k] <= t(alpha, r, s)^(-k) * P[v(S) <= a]^(-alpha*r)`.
///
/// `p_below` is the caller's lower-bound probability `P[v(S) <= a]`; `None`
/// applies the median convention `1/2`. Requires `1 <= s < r <= log2 q` and
/// `alpha >= 1/s`.
pub fn tail_bound_qpart(
    k: f64,
    r: u32,
    s: u32,
    q: u64,
    alpha: f64,
    p_below: Option<f64>,
) -> Result<f64, ConcentrationError> {
    if s < 1 || s >= r || r >= 64 || (1u64 << r) > q {
        return Err(ConcentrationError::TailParams { r, s, q });
    }
    if !k.is_finite() || k < 0.0 {
        return Err(ConcentrationError::ValueRange { what: "k", value: k });
    }
    let p = p_below.unwrap_or(0.5);
    if !p.is_finite() || p <= 0.0 || p > 1.0 {
        return Err(ConcentrationError::ProbOutOfRange { index: 0, value: p });
    }
    let t = solve_t(&RootParams { alpha, q: r, s })?;
    Ok(t.powf(-k) * p.powf(-alpha * f64::from(r)))
}

/// Median-convention special case of [`tail_bound_qpart`] at `alpha = 1/s`:
/// `P[v(S) >= (r/s) * median + k] <= (r/s)^(-k) * 2^(r/s)`.
pub fn tail_bound_qpart_median(
    k: f64,
    r: u32,
    s: u32,
    q: u64,
) -> Result<f64, ConcentrationError> {
    if s < 1 || s >= r || r >= 64 || (1u64 << r) > q {
        return Err(ConcentrationError::TailParams { r, s, q });
    }
    if !k.is_finite() || k < 0.0 {
        return Err(ConcentrationError::ValueRange { what: "k", value: k });
    }
    let ratio = f64::from(r) / f64::from(s);
    Ok(ratio.powf(-k) * 2.0f64.powf(ratio))
}

/// The subadditive baseline tail bound
/// `P[v(S) >= q * median + k] <= q^(-k) * 2^q`.
pub fn tail_bound_schechtman(k: f64, q: u32) -> Result<f64, ConcentrationError> {
    if q < 2 {
        return Err(ConcentrationError::QRange { q });
    }
    if !k.is_finite() || k < 0.0 {
        return Err(ConcentrationError::ValueRange { what: "k", value: k });
    }
    Ok(f64::from(q).powf(-k) * 2.0f64.powf(f64::from(q)))
}

/// Which tail of the distribution a bound covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailSide {
    /// `P[v >= mean + t]`.
    Upper,
    /// `P[v <= mean - t]`.
    Lower,
}

/// Self-bounding tail bounds for a 1-Lipschitz q-partitioning valuation of
/// an independent random set, with `a = ceil(m/q)` and `c = (3a - 1)/6`:
/// `exp(-t^2 / (2(a*mean + c*t)))` above the mean and
/// `exp(-t^2 / (2*a*mean))` below it (the latter requires `t <= mean`).
pub fn tail_bound_selfbounding(
    mean: f64,
    t: f64,
    m: u32,
    q: u32,
    side: TailSide,
) -> Result<f64, ConcentrationError> {
    if m < 1 || q < 1 {
        return Err(ConcentrationError::QRange { q: q.min(m) });
    }
    if !mean.is_finite() || mean < 0.0 {
        return Err(ConcentrationError::ValueRange { what: "mean", value: mean });
    }
    if !t.is_finite() || t < 0.0 {
        return Err(ConcentrationError::ValueRange { what: "t", value: t });
    }
    if matches!(side, TailSide::Lower) && t > mean {
        return Err(ConcentrationError::SideDomain { mean, t });
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let a = f64::from(m.div_ceil(q));
    match side {
        TailSide::Upper => {
            let c = (3.0 * a - 1.0) / 6.0;
            Ok((-t * t / (2.0 * (a * mean + c * t))).exp())
        }
        TailSide::Lower => Ok((-t * t / (2.0 * a * mean)).exp()),
    }
}

/// Multiplicative Chernoff bound for a sum of independent indicators with
/// mean `mu`: `P[X >= (1 + delta) * mu] <= (e^delta / (1+delta)^(1+delta))^mu`.
pub fn chernoff_bound(mu: f64, delta: f64) -> Result<f64, ConcentrationError> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(ConcentrationError::ValueRange { what: "mu", value: mu });
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(ConcentrationError::DeltaRange { delta });
    }
    Ok((delta.exp() / (1.0 + delta).powf(1.0 + delta)).powf(mu))
}

/// Explicit median-to-mean conversion: for `0 < delta <= 1`,
/// `mean <= (1+delta)*median + k_delta + 2^(1+delta)*(1+delta)^(-k_delta)/ln(1+delta)`
/// with `k_delta = 1/ln(1+delta)`.
pub fn median_mean_bound(med: f64, delta: f64) -> Result<f64, ConcentrationError> {
    if !med.is_finite() || med < 0.0 {
        return Err(ConcentrationError::ValueRange { what: "median", value: med });
    }
    if !delta.is_finite() || delta <= 0.0 || delta > 1.0 {
        return Err(ConcentrationError::DeltaRange { delta });
    }
    let log1d = (1.0 + delta).ln();
    let kd = 1.0 / log1d;
    Ok((1.0 + delta) * med + kd + 2.0f64.powf(1.0 + delta) * (1.0 + delta).powf(-kd) / log1d)
}

/// [`median_mean_bound`] at `delta = 1/ceil(log2 q)`, the instantiation for
/// q-partitioning valuations.
pub fn median_mean_bound_qpart(med: f64, q: u32) -> Result<f64, ConcentrationError> {
    if q < 2 {
        return Err(ConcentrationError::QRange { q });
    }
    let log2_ceil = 32 - (q - 1).leading_zeros();
    median_mean_bound(med, 1.0 / f64::from(log2_ceil))
}

/// [`median_mean_bound`] at `delta = min(1, 1/sqrt(median))`, the
/// instantiation for fractionally subadditive valuations.
pub fn median_mean_bound_xos(med: f64) -> Result<f64, ConcentrationError> {
    if !med.is_finite() || med < 0.0 {
        return Err(ConcentrationError::ValueRange { what: "median", value: med });
    }
    let delta = if med > 1.0 { 1.0 / med.sqrt() } else { 1.0 };
    median_mean_bound(med, delta)
}

/// Why a self-bounding check failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SelfBoundingFailure {
    /// A marginal `v(S) - v(S \ {i})` escapes `[0, 1]`.
    Marginal {
        /// The set at which the marginal is taken.
        subset: u32,
        /// The removed item.
        item: u32,
        /// The offending marginal value.
        delta: Rat,
    },
    /// The marginal total at `subset` exceeds `a * v(subset) + b`.
    Budget {
        /// The witnessing set.
        subset: u32,
        /// Sum of the marginals at that set.
        total: Rat,
        /// The allowed budget `a * v(subset) + b`.
        allowed: Rat,
    },
}

/// Exhaustively checks that `v` is `(a, b)`-self-bounding with the
/// canonical coordinate functions `f_i(x) = v(S \ {i})`: every marginal
/// `v(S) - v(S \ {i})` lies in `[0, 1]`, and their sum over `i in S` is at
/// most `a * v(S) + b` for every `S`.
pub fn check_self_bounding(v: &Valuation, a: &Rat, b: &Rat) -> Result<(), SelfBoundingFailure> {
    for subset in 1..=v.ground_set() {
        let here = v.value(subset);
        let mut total = Rat::zero();
        for item in bit_indices(subset) {
            let delta = here - v.value(subset & !(1 << item));
            if delta < Rat::zero() || delta > rat_int(1) {
                return Err(SelfBoundingFailure::Marginal { subset, item, delta });
            }
            total += delta;
        }
        let allowed = a * here + b;
        if total > allowed {
            return Err(SelfBoundingFailure::Budget { subset, total, allowed });
        }
    }
    Ok(())
}

/// Independent per-item inclusion probabilities for random sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ItemMarginals {
    pi: Vec<f64>,
}

impl ItemMarginals {
    /// Validates that every probability lies in `[0, 1]`.
    pub fn new(pi: Vec<f64>) -> Result<Self, ConcentrationError> {
        for (i, p) in pi.iter().enumerate() {
            if !p.is_finite() || *p < 0.0 || *p > 1.0 {
                return Err(ConcentrationError::ProbOutOfRange { index: i, value: *p });
            }
        }
        Ok(ItemMarginals { pi })
    }

    /// The same probability for every item.
    pub fn uniform(m: u32, p: f64) -> Result<Self, ConcentrationError> {
        Self::new(vec![p; m as usize])
    }

    /// Number of items.
    pub fn len(&self) -> usize {
        self.pi.len()
    }

    /// Whether there are no items.
    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    /// The probabilities.
    pub fn values(&self) -> &[f64] {
        &self.pi
    }
}

/// An empirical distribution of exact rational sample values, stored as
/// ascending distinct values with multiplicities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalDist {
    values: Vec<Rat>,
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalDist {
    /// Number of samples.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Distinct sample values, ascending.
    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    /// Multiplicities aligned with [`values`](Self::values).
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// The lower-middle order statistic (rank `(n-1)/2`, zero-based).
    pub fn median(&self) -> &Rat {
        let target = (self.n - 1) / 2;
        let mut seen = 0u64;
        for (value, count) in self.values.iter().zip(&self.counts) {
            seen += count;
            if seen > target {
                return value;
            }
        }
        self.values.last().expect("nonempty by construction")
    }

    /// Exact sample mean.
    pub fn mean(&self) -> Rat {
        let mut total = Rat::zero();
        for (value, count) in self.values.iter().zip(&self.counts) {
            total += value * Rat::from_integer(BigInt::from(*count));
        }
        total / Rat::from_integer(BigInt::from(self.n))
    }

    /// Exact empirical survival `P[sample >= x]`.
    pub fn survival(&self, x: &Rat) -> Rat {
        let hits: u64 = self
            .values
            .iter()
            .zip(&self.counts)
            .filter(|(value, _)| *value >= x)
            .map(|(_, count)| *count)
            .sum();
        Rat::new(BigInt::from(hits), BigInt::from(self.n))
    }

    /// Largest sample value.
    pub fn max(&self) -> &Rat {
        self.values.last().expect("nonempty by construction")
    }
}

/// Draws the samples of one chunk into a subset-indexed histogram.
///
/// Chunk `chunk` covers sample indices `[chunk * SAMPLE_CHUNK, ...)` up to
/// `n`, seeding its own RNG stream as `(seed, chunk)`, so any scheduling of
/// chunks yields the same histogram. `hist` must have `2^m` slots.
pub fn sample_chunk_into(
    v: &Valuation,
    pi: &ItemMarginals,
    seed: u64,
    chunk: u64,
    n: u64,
    hist: &mut [u64],
) {
    debug_assert_eq!(pi.len(), v.m() as usize);
    debug_assert_eq!(hist.len(), 1 << v.m());
    let start = chunk * SAMPLE_CHUNK;
    let len = SAMPLE_CHUNK.min(n.saturating_sub(start));
    let mut rng = StreamRng::split(seed, chunk);
    for _ in 0..len {
        let mut mask = 0u32;
        for (i, p) in pi.values().iter().enumerate() {
            if rng.next_f64() < *p {
                mask |= 1 << i;
            }
        }
        hist[mask as usize] += 1;
    }
}

/// Builds the empirical distribution of `v` over a subset histogram with
/// `n` total counts.
pub fn dist_from_histogram(
    v: &Valuation,
    hist: &[u64],
    n: u64,
) -> Result<EmpiricalDist, ConcentrationError> {
    if hist.len() != 1 << v.m() {
        return Err(ConcentrationError::DimensionMismatch {
            expected: 1 << v.m(),
            found: hist.len(),
        });
    }
    if n == 0 || hist.iter().sum::<u64>() != n {
        return Err(ConcentrationError::EmptySample);
    }
    let mut pairs: Vec<(Rat, u64)> = hist
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(mask, c)| (v.value(mask as u32).clone(), *c))
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let mut values = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for (value, count) in pairs {
        if values.last() == Some(&value) {
            *counts.last_mut().expect("aligned") += count;
        } else {
            values.push(value);
            counts.push(count);
        }
    }
    Ok(EmpiricalDist { values, counts, n })
}

/// Draws `n` independent random sets with the given item marginals and
/// returns the empirical distribution of `v` over them. Deterministic in
/// `(seed, n)`.
pub fn mc_tail(
    v: &Valuation,
    pi: &ItemMarginals,
    seed: u64,
    n: u64,
) -> Result<EmpiricalDist, ConcentrationError> {
    if pi.len() != v.m() as usize {
        return Err(ConcentrationError::MarginalsLength { expected: v.m(), found: pi.len() });
    }
    if n == 0 {
        return Err(ConcentrationError::EmptySample);
    }
    let mut hist = vec![0u64; 1 << v.m()];
    for chunk in 0..n.div_ceil(SAMPLE_CHUNK) {
        sample_chunk_into(v, pi, seed, chunk, n, &mut hist);
    }
    dist_from_histogram(v, &hist, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::{gen_threshold, gen_xos};
    use crate::{rat, to_f64};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn t_residual(p: &RootParams, t: f64) -> f64 {
        (t + p.alpha * f64::from(p.q) * t.powf(-1.0 / (p.alpha * f64::from(p.s)))
            - p.alpha * f64::from(p.q)
            - 1.0)
            .abs()
    }

    #[test]
    fn solve_t_quadratic_cases() {
        let t = solve_t(&RootParams { alpha: 1.0, q: 2, s: 1 }).unwrap();
        assert!(close(t, 2.0, 1e-12));
        let t = solve_t(&RootParams { alpha: 0.5, q: 4, s: 2 }).unwrap();
        assert!(close(t, 2.0, 1e-12));
    }

    #[test]
    fn solve_t_residuals_and_domain() {
        for (alpha, q, s) in [(1.0, 5, 2), (0.7, 9, 3), (2.5, 4, 1), (1.0 / 3.0, 10, 3)] {
            let p = RootParams { alpha, q, s };
            let t = solve_t(&p).unwrap();
            assert!(t > 1.0);
            assert!(t_residual(&p, t) <= 1e-10, "residual too large at {alpha} {q} {s}");
        }
        assert!(matches!(
            solve_t(&RootParams { alpha: 0.1, q: 5, s: 2 }),
            Err(ConcentrationError::AlphaBelowFloor { .. })
        ));
        assert!(matches!(
            solve_t(&RootParams { alpha: 1.0, q: 3, s: 3 }),
            Err(ConcentrationError::SRange { .. })
        ));
    }

    #[test]
    fn solve_t_min_takes_the_later_candidate() {
        let p = RootParams { alpha: 0.1, q: 5, s: 2 };
        let tmin = solve_t_min(&p).unwrap();
        assert!(close(tmin, 1.38, 0.01));
        // The r = 0 candidate is the larger 1.41.
        let t0 = bracket_root(0.1 * 5.0, 1.0 / (0.1 * 2.0));
        assert!(close(t0, 1.41, 0.01));
        assert!(tmin < t0);

        // Above the alpha floor the minimum is the plain root.
        let p = RootParams { alpha: 0.6, q: 5, s: 2 };
        assert_eq!(solve_t_min(&p).unwrap(), solve_t(&p).unwrap());

        // s = 1 has a single candidate.
        let p = RootParams { alpha: 0.3, q: 4, s: 1 };
        assert_eq!(solve_t_min(&p).unwrap(), solve_z(4, 0.3).unwrap());
    }

    #[test]
    fn solve_tau_bracket_and_residual() {
        let tau = solve_tau();
        assert!(tau > 0.9 && tau < 1.0);
        assert!(((0.5 * tau).exp() + (-tau).exp() - 2.0).abs() <= 1e-10);
    }

    #[test]
    fn solve_xi_fixed_point_and_substitution() {
        assert!(close(solve_xi(1.25, 0.25).unwrap(), 1.25, 1e-12));
        let xi = solve_xi(3.0, 0.5).unwrap();
        assert!((xi + 3.0 * xi.powf(-0.5) - 4.0).abs() <= 1e-10);
        // psi = alpha*r and 1 + delta = r/s reproduce the general root.
        let via_xi = solve_xi(2.0 * 5.0, 5.0 / 2.0 - 1.0).unwrap();
        let via_t = solve_t(&RootParams { alpha: 2.0, q: 5, s: 2 }).unwrap();
        assert!(close(via_xi, via_t, 1e-10));
        assert!(matches!(
            solve_xi(1.2, 0.5),
            Err(ConcentrationError::XiDomain { .. })
        ));
    }

    #[test]
    fn root_margin_nonnegative_and_tight() {
        let p = RootParams { alpha: 1.0, q: 4, s: 2 };
        let t = solve_t(&p).unwrap();
        let mut rng = StreamRng::new(11);
        for _ in 0..2000 {
            let xs: Vec<f64> = (0..4).map(|_| rng.next_f64()).collect();
            assert!(root_margin(&p, &xs).unwrap() >= -1e-9);
        }
        // Zeros hit the 0^(-alpha) = infinity convention.
        assert!(root_margin(&p, &[0.0, 0.0, 0.0, 0.0]).unwrap() >= 0.0);
        let flat = t.powf(-1.0 / (p.alpha * 2.0));
        let margin = root_margin(&p, &[flat; 4]).unwrap();
        assert!(margin.abs() <= 1e-8);
    }

    #[test]
    fn fs_point_counts() {
        let ys = vec![vec![0, 0, 0], vec![0, 1, 1]];
        assert_eq!(fs_points(&ys, &[1, 1, 0], 1).unwrap(), 1);
        assert_eq!(fs_points(&ys, &[0, 0, 0], 1).unwrap(), 0);
        assert_eq!(fs_points(&ys, &[0, 1, 1], 2).unwrap(), 2);
        // s = q with disjoint values marks every coordinate.
        assert_eq!(fs_points(&ys, &[2, 2, 2], 2).unwrap(), 3);
        assert!(matches!(
            fs_points(&ys, &[0, 0, 0], 3),
            Err(ConcentrationError::SRange { .. })
        ));
    }

    #[test]
    fn fs_sets_inf_and_budget() {
        let a1 = vec![vec![0, 0], vec![1, 1]];
        let a2 = vec![vec![0, 1]];
        // x in every set gives 0.
        assert_eq!(fs_sets(&[vec![vec![0, 0]], vec![vec![0, 0]]], &[0, 0], 1).unwrap(), 0);
        // Singletons reduce to the point distance.
        assert_eq!(
            fs_sets(&[vec![vec![0, 0, 0]], vec![vec![0, 1, 1]]], &[1, 1, 0], 1).unwrap(),
            fs_points(&[vec![0, 0, 0], vec![0, 1, 1]], &[1, 1, 0], 1).unwrap()
        );
        // Enlarging a set never increases the distance.
        let small = fs_sets(&[a2.clone(), a2.clone()], &[1, 0], 1).unwrap();
        let large = fs_sets(&[a1.clone(), a2.clone()], &[1, 0], 1).unwrap();
        assert!(large <= small);
        let huge: Vec<Vec<usize>> = (0..1024).map(|i| vec![i, i]).collect();
        assert!(matches!(
            fs_sets(&[huge.clone(), huge.clone()], &[0, 0], 1),
            Err(ConcentrationError::TupleBudget { .. })
        ));
    }

    #[test]
    fn isoperimetric_full_space_is_tight() {
        let sp = ProductSpace::uniform_bits(2);
        let all: Vec<Vec<usize>> = sp.points().collect();
        let report =
            verify_isoperimetric(&sp, &[all.clone(), all.clone()], 1.0, 1, IsoVariant::General)
                .unwrap();
        assert!(close(report.lhs, 1.0, 1e-9));
        assert!(close(report.rhs, 1.0, 1e-9));
        assert!(report.holds);
    }

    #[test]
    fn isoperimetric_corner_example() {
        let sp = ProductSpace::uniform_bits(2);
        let corner = vec![vec![0, 0]];
        let report =
            verify_isoperimetric(&sp, &[corner.clone(), corner.clone()], 1.0, 1, IsoVariant::General)
                .unwrap();
        assert!(close(report.base, 2.0, 1e-9));
        assert!(close(report.lhs, 2.25, 1e-9));
        assert!(close(report.rhs, 16.0, 1e-9));
        assert!(report.holds);
    }

    #[test]
    fn isoperimetric_other_variants_hold() {
        let sp = ProductSpace::uniform_bits(3);
        let a = vec![vec![0, 0, 0], vec![1, 0, 0]];
        let b = vec![vec![0, 0, 0], vec![0, 1, 1]];
        let c = vec![vec![0, 0, 1]];
        for (variant, s, alpha) in [
            (IsoVariant::TMin, 2, 0.2),
            (IsoVariant::S1, 1, 0.4),
            (IsoVariant::Tau, 2, 1.0),
        ] {
            let report =
                verify_isoperimetric(&sp, &[a.clone(), b.clone(), c.clone()], alpha, s, variant)
                    .unwrap();
            assert!(report.holds, "{variant:?} failed: {report:?}");
        }
        assert!(matches!(
            verify_isoperimetric(&sp, &[a.clone(), b.clone()], 1.0, 2, IsoVariant::Tau),
            Err(ConcentrationError::SRange { .. })
        ));
    }

    #[test]
    fn isoperimetric_random_sweep_holds() {
        let mut rng = StreamRng::new(23);
        for trial in 0..60 {
            let dims = 1 + (rng.below(3) as usize);
            let sp = ProductSpace::uniform_bits(dims);
            let all: Vec<Vec<usize>> = sp.points().collect();
            let q = 2 + rng.below(2) as u32;
            let s = 1 + rng.below(q as u64 - 1) as u32;
            let alpha = 1.0 / f64::from(s) + rng.next_f64();
            let sets: Vec<Vec<Vec<usize>>> = (0..q)
                .map(|_| {
                    let mut set: Vec<Vec<usize>> = all
                        .iter()
                        .filter(|_| rng.next_f64() < 0.5)
                        .cloned()
                        .collect();
                    if set.is_empty() {
                        set.push(all[rng.below(all.len() as u64) as usize].clone());
                    }
                    set
                })
                .collect();
            let report = verify_isoperimetric(&sp, &sets, alpha, s, IsoVariant::General).unwrap();
            assert!(report.holds, "trial {trial} failed: {report:?}");
        }
    }

    #[test]
    fn tail_bound_values() {
        assert!(close(tail_bound_qpart_median(3.0, 2, 1, 4).unwrap(), 0.5, 1e-12));
        assert!(close(tail_bound_qpart_median(0.0, 2, 1, 4).unwrap(), 4.0, 1e-12));
        let general = tail_bound_qpart(3.0, 2, 1, 4, 1.0, Some(0.5)).unwrap();
        assert!(close(general, 0.5, 1e-10));
        assert!(matches!(
            tail_bound_qpart(1.0, 3, 1, 4, 1.0, None),
            Err(ConcentrationError::TailParams { .. })
        ));

        assert!(close(tail_bound_schechtman(0.0, 2).unwrap(), 4.0, 1e-12));
        assert!(close(tail_bound_schechtman(3.0, 2).unwrap(), 0.5, 1e-12));
        assert!(close(tail_bound_schechtman(5.0, 3).unwrap(), 8.0 / 243.0, 1e-12));
    }

    #[test]
    fn self_bounding_tail_values() {
        assert_eq!(
            tail_bound_selfbounding(5.0, 0.0, 6, 3, TailSide::Upper).unwrap(),
            1.0
        );
        let lower = tail_bound_selfbounding(8.0, 4.0, 4, 4, TailSide::Lower).unwrap();
        assert!(close(lower, (-1.0f64).exp(), 1e-12));
        assert!(matches!(
            tail_bound_selfbounding(1.0, 2.0, 4, 2, TailSide::Lower),
            Err(ConcentrationError::SideDomain { .. })
        ));
    }

    #[test]
    fn chernoff_values() {
        assert_eq!(chernoff_bound(0.0, 0.5).unwrap(), 1.0);
        assert!(close(chernoff_bound(1.0, 1e-9).unwrap(), 1.0, 1e-6));
        let e = core::f64::consts::E;
        assert!(close(chernoff_bound(1.0, e - 1.0).unwrap(), (-1.0f64).exp(), 1e-12));
    }

    #[test]
    fn median_mean_values() {
        let at_one = median_mean_bound(10.0, 1.0).unwrap();
        let ln2 = core::f64::consts::LN_2;
        let expected = 20.0 + 1.0 / ln2 + 4.0 * 2.0f64.powf(-1.0 / ln2) / ln2;
        assert!(close(at_one, expected, 1e-12));
        assert!(median_mean_bound(0.0, 0.5).unwrap() > 0.0);
        // The overhead terms shrink as delta grows.
        let mut last = f64::INFINITY;
        for i in 1..=20 {
            let bound = median_mean_bound(0.0, f64::from(i) * 0.05).unwrap();
            assert!(bound < last);
            last = bound;
        }
        assert!(matches!(
            median_mean_bound(1.0, 1.5),
            Err(ConcentrationError::DeltaRange { .. })
        ));
        assert!(median_mean_bound_qpart(3.0, 4).is_ok());
        assert!(median_mean_bound_xos(0.5).is_ok());
    }

    #[test]
    fn self_bounding_checks() {
        let v = gen_threshold(6, &rat(3, 2)).unwrap();
        check_self_bounding(&v, &rat_int(2), &Rat::zero()).unwrap();
        let err = check_self_bounding(&v, &rat_int(1), &Rat::zero()).unwrap_err();
        assert_eq!(
            err,
            SelfBoundingFailure::Budget {
                subset: 0b111111,
                total: rat_int(3),
                allowed: rat(3, 2),
            }
        );

        let xos = gen_xos(
            3,
            &[
                vec![rat_int(1), rat(1, 2), Rat::zero()],
                vec![Rat::zero(), rat(1, 2), rat_int(1)],
            ],
        )
        .unwrap();
        check_self_bounding(&xos, &rat_int(1), &Rat::zero()).unwrap();

        let steep = gen_xos(2, &[vec![rat_int(2), rat_int(0)]]).unwrap();
        assert!(matches!(
            check_self_bounding(&steep, &rat_int(1), &Rat::zero()),
            Err(SelfBoundingFailure::Marginal { delta, .. }) if delta == rat_int(2)
        ));
    }

    #[test]
    fn mc_degenerate_marginals() {
        let v = gen_threshold(4, &rat(3, 2)).unwrap();
        let ones = ItemMarginals::uniform(4, 1.0).unwrap();
        let dist = mc_tail(&v, &ones, 5, 1000).unwrap();
        assert_eq!(dist.values(), &[rat(3, 2)]);
        assert_eq!(dist.counts(), &[1000]);
        assert_eq!(dist.median(), &rat(3, 2));

        let zeros = ItemMarginals::uniform(4, 0.0).unwrap();
        let dist = mc_tail(&v, &zeros, 5, 100).unwrap();
        assert_eq!(dist.values(), &[Rat::zero()]);
        assert_eq!(dist.mean(), Rat::zero());
    }

    #[test]
    fn mc_additive_mean_within_four_standard_errors() {
        let v = gen_xos(3, &[vec![rat_int(1), rat_int(2), rat_int(4)]]).unwrap();
        let pi = ItemMarginals::uniform(3, 0.5).unwrap();
        let n = 20_000u64;
        let dist = mc_tail(&v, &pi, 97, n).unwrap();
        let mean = to_f64(&dist.mean());
        // Var = sum of w_i^2 / 4 = 21/4.
        let se = (21.0f64 / 4.0 / n as f64).sqrt();
        assert!(close(mean, 3.5, 4.0 * se), "mean {mean} strays from 3.5");
    }

    #[test]
    fn mc_deterministic_and_chunk_stable() {
        let v = gen_threshold(5, &rat(3, 2)).unwrap();
        let pi = ItemMarginals::uniform(5, 0.3).unwrap();
        let a = mc_tail(&v, &pi, 42, 9001).unwrap();
        let b = mc_tail(&v, &pi, 42, 9001).unwrap();
        assert_eq!(a, b);
        let c = mc_tail(&v, &pi, 43, 9001).unwrap();
        assert_ne!(a, c);

        // Summing chunk histograms in any order matches the sequential run.
        let mut hist = vec![0u64; 32];
        let n = 9001u64;
        let chunks: Vec<u64> = (0..n.div_ceil(SAMPLE_CHUNK)).rev().collect();
        for chunk in chunks {
            sample_chunk_into(&v, &pi, 42, chunk, n, &mut hist);
        }
        let d = dist_from_histogram(&v, &hist, n).unwrap();
        assert_eq!(a, d);
    }

    #[test]
    fn median_is_the_lower_middle() {
        let v = gen_xos(1, &[vec![rat_int(1)]]).unwrap();
        // One zero sample and one unit sample: the lower middle is 0.
        let dist = dist_from_histogram(&v, &[1, 1], 2).unwrap();
        assert_eq!(dist.median(), &Rat::zero());
        assert_eq!(dist.survival(&rat(1, 2)), rat(1, 2));
        assert_eq!(dist.survival(&rat_int(0)), rat_int(1));
        assert_eq!(dist.max(), &rat_int(1));
    }

    #[test]
    fn sampler_validations() {
        let v = gen_threshold(4, &rat(3, 2)).unwrap();
        let pi = ItemMarginals::uniform(3, 0.5).unwrap();
        assert!(matches!(
            mc_tail(&v, &pi, 1, 10),
            Err(ConcentrationError::MarginalsLength { .. })
        ));
        let pi4 = ItemMarginals::uniform(4, 0.5).unwrap();
        assert!(matches!(
            mc_tail(&v, &pi4, 1, 0),
            Err(ConcentrationError::EmptySample)
        ));
        assert!(ItemMarginals::new(vec![0.5, 1.2]).is_err());
    }
}
