//! Posted-price min-max quantities and mechanism simulation.
//!
//! For a valuation `v` and a cap `p`, `Δ(p)` is the polytope of distributions
//! over subsets whose per-item inclusion marginals stay at or below `p`. Two
//! quantities drive the posted-price analysis:
//!
//! ```text
//!   f(p) = max over λ in Δ(p) of E[v(S)],          S drawn from λ
//!   g(p) = max over λ in Δ(p) of
//!            min over μ in Δ(p) of E[v(S \ T)],    T drawn from μ
//! ```
//!
//! `f` is a single LP. `g` is a bilinear game; for fixed `λ` the inner
//! minimization is an LP, so dualizing it and merging the dual variables
//! with the outer maximization gives one exact LP for the game value. The
//! step inequality `g(p) >= (f(p) - f(p^(r/2))) / 8` (with `r = log2 q`, for
//! q-partitioning `v` and `p <= 1/16`) is evaluated and reported by
//! [`verify_minimax_step`], along with the telescoped lower bound it chains
//! into.
//!
//! The second half of the module runs the sequential mechanism itself:
//! buyers arrive in a fixed order, face item prices, and take an exact
//! utility-maximizing bundle of whatever is still available. Everything is
//! rational arithmetic except where an irrational cap power forces one
//! binary64 step, which is then converted back to the exact rational it
//! denotes.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

// In the plain no_std graph the f64 math methods only exist through this
// trait (backed by libm). Dev-dependencies pull std into the test graph,
// whose inherent methods then win resolution and leave the import idle.
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{Signed, Zero};

use crate::bits::{bit_indices, submasks};
use crate::classify::{is_q_partitioning, ClassifyError};
use crate::lp::{LinearProgram, LpError, Relation, Sense};
use crate::setfn::Valuation;
use crate::{rat, rat_int, Rat};

/// Ground-set cap for the min-max LPs (variables scale as `2^m`).
pub const MAX_MINIMAX: u32 = 4;

/// Ground-set cap for the vertex-enumeration oracle.
pub const MAX_ORACLE: u32 = 3;

/// Buyer cap for the optimal-welfare subset DP.
pub const MAX_OPT_BUYERS: usize = 5;

/// Item cap for the optimal-welfare subset DP.
pub const MAX_OPT_ITEMS: u32 = 8;

/// Buyer cap for exhaustive arrival-order search.
pub const MAX_ORDER_BUYERS: usize = 6;

/// Errors from min-max evaluation and market validation.
#[derive(Clone, Debug, PartialEq)]
pub enum PostedError {
    /// An instance exceeds a hard size cap.
    TooLarge {
        /// Which dimension overflowed.
        what: &'static str,
        /// Offending size.
        got: u32,
        /// The cap.
        cap: u32,
    },
    /// The cap `p` must lie in `[0, 1]`.
    CapRange {
        /// Offending cap.
        cap: Rat,
    },
    /// A probability table fails the distribution axioms.
    DistributionInvalid {
        /// Which axiom failed.
        what: &'static str,
        /// Offending quantity.
        value: Rat,
    },
    /// The step inequality requires `p <= 1/16`.
    CapAboveStep {
        /// Offending cap.
        cap: Rat,
    },
    /// The step inequality requires `q` to be a power of two.
    QNotPowerOfTwo {
        /// Offending `q`.
        q: u32,
    },
    /// The valuation is not q-partitioning at the requested level.
    NotQPartitioning {
        /// The level that failed.
        q: u32,
    },
    /// A market needs at least one buyer.
    NoBuyers,
    /// Buyers disagree on the ground set.
    MixedGroundSets {
        /// Ground-set size of the first buyer.
        expected: u32,
        /// Conflicting size.
        found: u32,
    },
    /// Price vector length disagrees with the ground set.
    PricesLength {
        /// Expected length `m`.
        expected: u32,
        /// Actual length.
        found: usize,
    },
    /// A price is negative.
    PriceNegative {
        /// Offending item.
        index: usize,
    },
    /// The arrival order is not a permutation of the buyers.
    OrderInvalid,
    /// The underlying LP failed.
    Lp(LpError),
    /// Membership checking failed.
    Classify(ClassifyError),
}

impl fmt::Display for PostedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PostedError::TooLarge { what, got, cap } => {
                write!(f, "{what} = {got} exceeds the cap {cap}")
            }
            PostedError::CapRange { cap } => write!(f, "cap {cap} outside [0, 1]"),
            PostedError::DistributionInvalid { what, value } => {
                write!(f, "invalid distribution: {what} = {value}")
            }
            PostedError::CapAboveStep { cap } => {
                write!(f, "step inequality needs cap <= 1/16, got {cap}")
            }
            PostedError::QNotPowerOfTwo { q } => write!(f, "q = {q} is not a power of two"),
            PostedError::NotQPartitioning { q } => {
                write!(f, "valuation is not {q}-partitioning")
            }
            PostedError::NoBuyers => write!(f, "market has no buyers"),
            PostedError::MixedGroundSets { expected, found } => {
                write!(f, "buyers mix ground sets of {expected} and {found} items")
            }
            PostedError::PricesLength { expected, found } => {
                write!(f, "expected {expected} prices, found {found}")
            }
            PostedError::PriceNegative { index } => write!(f, "price {index} is negative"),
            PostedError::OrderInvalid => write!(f, "arrival order is not a permutation"),
            PostedError::Lp(e) => write!(f, "linear program failed: {e}"),
            PostedError::Classify(e) => write!(f, "classification failed: {e}"),
        }
    }
}

impl From<LpError> for PostedError {
    fn from(e: LpError) -> Self {
        PostedError::Lp(e)
    }
}

impl From<ClassifyError> for PostedError {
    fn from(e: ClassifyError) -> Self {
        PostedError::Classify(e)
    }
}

/// A distribution over subsets of `[m]` whose per-item marginals respect a
/// cap (a member of `Δ(cap)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CappedDistribution {
    /// The marginal cap.
    pub cap: Rat,
    /// Probability per subset, indexed by bitmask; length `2^m`.
    pub probabilities: Vec<Rat>,
}

impl CappedDistribution {
    /// Ground-set size implied by the table length.
    pub fn m(&self) -> u32 {
        self.probabilities.len().trailing_zeros()
    }

    /// Exact membership check: table length a power of two, entries
    /// nonnegative and summing to 1, every item marginal at most the cap.
    pub fn validate(&self) -> Result<(), PostedError> {
        if !self.probabilities.len().is_power_of_two() {
            return Err(PostedError::DistributionInvalid {
                what: "table length",
                value: rat_int(self.probabilities.len() as i64),
            });
        }
        if self.cap.is_negative() || self.cap > rat_int(1) {
            return Err(PostedError::CapRange { cap: self.cap.clone() });
        }
        let mut total = Rat::zero();
        for prob in &self.probabilities {
            if prob.is_negative() {
                return Err(PostedError::DistributionInvalid {
                    what: "negative probability",
                    value: prob.clone(),
                });
            }
            total += prob;
        }
        if total != rat_int(1) {
            return Err(PostedError::DistributionInvalid { what: "total probability", value: total });
        }
        for i in 0..self.m() {
            if self.item_marginal(i) > self.cap {
                return Err(PostedError::DistributionInvalid {
                    what: "item marginal",
                    value: self.item_marginal(i),
                });
            }
        }
        Ok(())
    }

    /// Probability that item `i` lands in the drawn subset.
    pub fn item_marginal(&self, i: u32) -> Rat {
        let mut total = Rat::zero();
        for (mask, prob) in self.probabilities.iter().enumerate() {
            if mask as u32 & (1 << i) != 0 {
                total += prob;
            }
        }
        total
    }

    /// Expected valuation of the drawn subset.
    pub fn expected_value(&self, v: &Valuation) -> Rat {
        let mut total = Rat::zero();
        for (mask, prob) in self.probabilities.iter().enumerate() {
            if !prob.is_zero() {
                total += prob * v.value(mask as u32);
            }
        }
        total
    }
}

fn check_minimax_instance(v: &Valuation, p: &Rat) -> Result<(), PostedError> {
    if v.m() > MAX_MINIMAX {
        return Err(PostedError::TooLarge { what: "ground set", got: v.m(), cap: MAX_MINIMAX });
    }
    if p.is_negative() || *p > rat_int(1) {
        return Err(PostedError::CapRange { cap: p.clone() });
    }
    Ok(())
}

/// The chooser's best expected value under the cap:
/// `f(p) = max over λ in Δ(p) of E[v(S)]`, with a maximizing distribution.
pub fn f_value(v: &Valuation, p: &Rat) -> Result<(Rat, CappedDistribution), PostedError> {
    check_minimax_instance(v, p)?;
    let n = 1usize << v.m();
    let objective: Vec<Rat> = (0..n).map(|mask| v.value(mask as u32).clone()).collect();
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    lp.push(vec![rat_int(1); n], Relation::Eq, rat_int(1));
    for i in 0..v.m() {
        let row: Vec<Rat> = (0..n)
            .map(|mask| if mask as u32 & (1 << i) != 0 { rat_int(1) } else { Rat::zero() })
            .collect();
        lp.push(row, Relation::Le, p.clone());
    }
    let sol = lp.solve()?;
    let dist = CappedDistribution { cap: p.clone(), probabilities: sol.point };
    dist.validate().expect("LP point satisfies its own constraints");
    Ok((sol.value, dist))
}

/// The game value `g(p) = max over λ in Δ(p) of min over μ in Δ(p) of
/// E[v(S \ T)]`, via one LP.
///
/// The inner minimization over `μ` is dualized: its dual maximizes
/// `ν - p * sum(w)` subject to `ν - sum of w over T <= E_λ[v(S \ T)]` for
/// every `T`, with `w >= 0` and `ν` free. Those dual variables join `λ` in
/// a single maximization (ν split into two nonnegative parts).
pub fn g_value(v: &Valuation, p: &Rat) -> Result<Rat, PostedError> {
    check_minimax_instance(v, p)?;
    let n = 1usize << v.m();
    let m = v.m() as usize;
    // Variable layout: λ over subsets, then w per item, then ν+ and ν-.
    let width = n + m + 2;
    let mut objective = vec![Rat::zero(); width];
    for i in 0..m {
        objective[n + i] = -p;
    }
    objective[n + m] = rat_int(1);
    objective[n + m + 1] = rat_int(-1);
    let mut lp = LinearProgram::new(Sense::Maximize, objective);

    let mut simplex_row = vec![Rat::zero(); width];
    for entry in simplex_row.iter_mut().take(n) {
        *entry = rat_int(1);
    }
    lp.push(simplex_row, Relation::Eq, rat_int(1));
    for i in 0..v.m() {
        let mut row = vec![Rat::zero(); width];
        for (mask, entry) in row.iter_mut().enumerate().take(n) {
            if mask as u32 & (1 << i) != 0 {
                *entry = rat_int(1);
            }
        }
        lp.push(row, Relation::Le, p.clone());
    }
    for remove in 0..n as u32 {
        let mut row = vec![Rat::zero(); width];
        for (mask, entry) in row.iter_mut().enumerate().take(n) {
            *entry = -v.value(mask as u32 & !remove);
        }
        for i in bit_indices(remove) {
            row[n + i as usize] = rat_int(-1);
        }
        row[n + m] = rat_int(1);
        row[n + m + 1] = rat_int(-1);
        lp.push(row, Relation::Le, Rat::zero());
    }
    Ok(lp.solve()?.value)
}

/// Solves a square rational linear system by Gaussian elimination; `None`
/// if singular.
fn solve_square(mut mat: Vec<Vec<Rat>>, mut rhs: Vec<Rat>) -> Option<Vec<Rat>> {
    let n = mat.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !mat[r][col].is_zero())?;
        mat.swap(col, pivot);
        rhs.swap(col, pivot);
        let div = mat[col][col].clone();
        for x in mat[col].iter_mut() {
            *x /= &div;
        }
        rhs[col] /= &div;
        for r in 0..n {
            if r == col || mat[r][col].is_zero() {
                continue;
            }
            let factor = mat[r][col].clone();
            for c in 0..n {
                let d = &mat[r][c] - &factor * &mat[col][c];
                mat[r][c] = d;
            }
            let d = &rhs[r] - &factor * &rhs[col];
            rhs[r] = d;
        }
    }
    Some(rhs)
}

/// Enumerates the vertices of `Δ(p)` over subsets of `[m]` by trying every
/// basis: the simplex equality plus `2^m - 1` further tight constraints
/// drawn from the item caps and the nonnegativity facets.
fn delta_vertices(m: u32, p: &Rat) -> Vec<Vec<Rat>> {
    let n = 1usize << m;
    let candidates = m as usize + n;
    let mut vertices: Vec<Vec<Rat>> = Vec::new();
    let mut choice: Vec<usize> = (0..n - 1).collect();
    loop {
        let mut mat: Vec<Vec<Rat>> = Vec::with_capacity(n);
        let mut rhs: Vec<Rat> = Vec::with_capacity(n);
        mat.push(vec![rat_int(1); n]);
        rhs.push(rat_int(1));
        for &c in &choice {
            if c < m as usize {
                let row: Vec<Rat> = (0..n)
                    .map(|mask| {
                        if mask as u32 & (1 << c) != 0 { rat_int(1) } else { Rat::zero() }
                    })
                    .collect();
                mat.push(row);
                rhs.push(p.clone());
            } else {
                let mut row = vec![Rat::zero(); n];
                row[c - m as usize] = rat_int(1);
                mat.push(row);
                rhs.push(Rat::zero());
            }
        }
        if let Some(point) = solve_square(mat, rhs) {
            let feasible = point.iter().all(|x| !x.is_negative())
                && (0..m).all(|i| {
                    let marginal: Rat = point
                        .iter()
                        .enumerate()
                        .filter(|(mask, _)| *mask as u32 & (1 << i) != 0)
                        .map(|(_, x)| x.clone())
                        .sum();
                    marginal <= *p
                });
            if feasible && !vertices.contains(&point) {
                vertices.push(point);
            }
        }

        // Advance the lexicographic combination of tight constraints.
        let k = choice.len();
        let mut i = k;
        loop {
            if i == 0 {
                return vertices;
            }
            i -= 1;
            if choice[i] < candidates - (k - i) {
                choice[i] += 1;
                for j in i + 1..k {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Brute-force cross-check of [`g_value`]: enumerates the vertices of the
/// remover's polytope (the inner minimum of a linear function is attained
/// at one of them) and maximizes the worst case over the chooser's polytope
/// with one LP row per vertex.
pub fn g_value_oracle(v: &Valuation, p: &Rat) -> Result<Rat, PostedError> {
    check_minimax_instance(v, p)?;
    if v.m() > MAX_ORACLE {
        return Err(PostedError::TooLarge { what: "ground set", got: v.m(), cap: MAX_ORACLE });
    }
    let n = 1usize << v.m();
    let vertices = delta_vertices(v.m(), p);

    // Variable layout: λ over subsets, then the game value.
    let mut objective = vec![Rat::zero(); n + 1];
    objective[n] = rat_int(1);
    let mut lp = LinearProgram::new(Sense::Maximize, objective);
    let mut simplex_row = vec![Rat::zero(); n + 1];
    for entry in simplex_row.iter_mut().take(n) {
        *entry = rat_int(1);
    }
    lp.push(simplex_row, Relation::Eq, rat_int(1));
    for i in 0..v.m() {
        let mut row = vec![Rat::zero(); n + 1];
        for (mask, entry) in row.iter_mut().enumerate().take(n) {
            if mask as u32 & (1 << i) != 0 {
                *entry = rat_int(1);
            }
        }
        lp.push(row, Relation::Le, p.clone());
    }
    for vertex in &vertices {
        let mut row = vec![Rat::zero(); n + 1];
        for (mask, entry) in row.iter_mut().enumerate().take(n) {
            let mut payoff = Rat::zero();
            for (remove, weight) in vertex.iter().enumerate() {
                if !weight.is_zero() {
                    payoff += weight * v.value(mask as u32 & !(remove as u32));
                }
            }
            *entry = -payoff;
        }
        row[n] = rat_int(1);
        lp.push(row, Relation::Le, Rat::zero());
    }
    Ok(lp.solve()?.value)
}

/// Everything [`verify_minimax_step`] measures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimaxStepReport {
    /// The game value `g(p)`.
    pub g_p: Rat,
    /// The chooser value `f(p)`.
    pub f_p: Rat,
    /// The chooser value at the shrunken cap, `f(p^(r/2))`.
    pub f_shrunk: Rat,
    /// The rational cap actually used for `p^(r/2)` (exact for even `r`,
    /// otherwise the exact rational denoted by the binary64 power).
    pub cap_shrunk: Rat,
    /// Right side of the step inequality, `(f(p) - f(p^(r/2))) / 8`.
    pub step_rhs: Rat,
    /// Whether `g(p) >= step_rhs` (minus a `1e-9` slack when the shrunken
    /// cap went through binary64).
    pub step_holds: bool,
    /// Number of telescope stages at this scale.
    pub telescope_steps: u32,
    /// Sum of `g` over the telescope caps `16^(-(r/2)^i)`.
    pub telescope_lhs: Rat,
    /// The telescoped target `(1/16 - 1/m) * v([m]) / 8`.
    pub telescope_rhs: Rat,
    /// Whether the telescoped sum meets its target.
    pub telescope_holds: bool,
}

/// Evaluates the step inequality `g(p) >= (f(p) - f(p^(r/2))) / 8` with
/// `r = log2 q` for a q-partitioning valuation at cap `p <= 1/16`, plus the
/// telescoped chain it feeds.
///
/// Membership is checked at level `min(q, m)`: partitions of `[m]` never
/// have more than `m` blocks, so larger `q` impose the same constraints.
/// The number of telescope stages is the smallest `s` with
/// `(r/2)^s >= log_16(m^2)`; below `m = 16` the telescoped target is
/// negative and the chain holds vacuously, which the report states rather
/// than hides.
pub fn verify_minimax_step(
    v: &Valuation,
    p: &Rat,
    q: u32,
) -> Result<MinimaxStepReport, PostedError> {
    check_minimax_instance(v, p)?;
    if *p > rat(1, 16) {
        return Err(PostedError::CapAboveStep { cap: p.clone() });
    }
    if q < 2 || !q.is_power_of_two() {
        return Err(PostedError::QNotPowerOfTwo { q });
    }
    let level = q.min(v.m());
    if !is_q_partitioning(v, level)? {
        return Err(PostedError::NotQPartitioning { q: level });
    }
    let r = q.trailing_zeros();

    let (f_p, _) = f_value(v, p)?;
    let g_p = g_value(v, p)?;
    let (cap_shrunk, exact) = rational_power(p, f64::from(r) / 2.0, r % 2 == 0, r / 2);
    let (f_shrunk, _) = f_value(v, &cap_shrunk)?;
    let step_rhs = (&f_p - &f_shrunk) / rat_int(8);
    let slack = if exact { Rat::zero() } else { rat(1, 1_000_000_000) };
    let step_holds = g_p >= &step_rhs - &slack;

    let m_rat = rat_int(i64::from(v.m()));
    let telescope_rhs = (rat(1, 16) - rat_int(1) / &m_rat) * v.value(v.ground_set()) / rat_int(8);
    let ratio = f64::from(r) / 2.0;
    let target = (f64::from(v.m()) * f64::from(v.m())).ln() / 16f64.ln();
    let mut telescope_steps = 0u32;
    if target > 1.0 && ratio > 1.0 {
        let mut reach = 1.0;
        while reach < target && telescope_steps < 8 {
            reach *= ratio;
            telescope_steps += 1;
        }
    }
    let mut telescope_lhs = Rat::zero();
    for i in 0..telescope_steps {
        let exponent = ratio.powi(i as i32);
        let rounded = exponent as u32;
        let exact_stage = (rounded as f64 - exponent).abs() < 1e-12;
        let (stage_cap, _) =
            rational_power(&rat(1, 16), exponent, exact_stage, rounded);
        telescope_lhs += g_value(v, &stage_cap)?;
    }
    let telescope_holds = telescope_lhs >= telescope_rhs;

    Ok(MinimaxStepReport {
        g_p,
        f_p,
        f_shrunk,
        cap_shrunk,
        step_rhs,
        step_holds,
        telescope_steps,
        telescope_lhs,
        telescope_rhs,
        telescope_holds,
    })
}

/// `base^exponent` as an exact rational when the exponent is the integer
/// `int_exp`, otherwise the exact rational denoted by the binary64 power.
/// Returns the value and whether it is exact.
fn rational_power(base: &Rat, exponent: f64, exact: bool, int_exp: u32) -> (Rat, bool) {
    if exact {
        (base.pow(int_exp as i32), true)
    } else {
        let approx = crate::to_f64(base).powf(exponent);
        (Rat::from_float(approx).unwrap_or_else(Rat::zero), false)
    }
}

/// A posted-price market: buyers over a shared ground set, item prices, and
/// an arrival order.
#[derive(Clone, Debug)]
pub struct MarketInstance {
    buyers: Vec<Valuation>,
    prices: Vec<Rat>,
    order: Vec<u32>,
}

impl MarketInstance {
    /// Validates that the buyers share one ground set, prices are
    /// nonnegative with one entry per item, and the order is a permutation
    /// of the buyers.
    pub fn new(
        buyers: Vec<Valuation>,
        prices: Vec<Rat>,
        order: Vec<u32>,
    ) -> Result<Self, PostedError> {
        let Some(first) = buyers.first() else {
            return Err(PostedError::NoBuyers);
        };
        let m = first.m();
        for b in &buyers {
            if b.m() != m {
                return Err(PostedError::MixedGroundSets { expected: m, found: b.m() });
            }
        }
        if prices.len() != m as usize {
            return Err(PostedError::PricesLength { expected: m, found: prices.len() });
        }
        for (i, price) in prices.iter().enumerate() {
            if price.is_negative() {
                return Err(PostedError::PriceNegative { index: i });
            }
        }
        let mut seen = vec![false; buyers.len()];
        if order.len() != buyers.len() {
            return Err(PostedError::OrderInvalid);
        }
        for &b in &order {
            if b as usize >= buyers.len() || seen[b as usize] {
                return Err(PostedError::OrderInvalid);
            }
            seen[b as usize] = true;
        }
        Ok(MarketInstance { buyers, prices, order })
    }

    /// The buyers.
    pub fn buyers(&self) -> &[Valuation] {
        &self.buyers
    }

    /// Item prices.
    pub fn prices(&self) -> &[Rat] {
        &self.prices
    }

    /// Arrival order (buyer indices).
    pub fn order(&self) -> &[u32] {
        &self.order
    }
}

/// One mechanism run: who got what, and the exact money flows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismOutcome {
    /// Bundle per buyer, indexed by buyer (not by arrival position).
    pub allocation: Vec<u32>,
    /// Total value of the allocation, `sum of v_i(S_i)`.
    pub welfare: Rat,
    /// Total price paid.
    pub revenue: Rat,
    /// Utility per buyer, `v_i(S_i) - price(S_i)`.
    pub utilities: Vec<Rat>,
    /// Items left over.
    pub unsold: u32,
}

fn price_of(prices: &[Rat], bundle: u32) -> Rat {
    bit_indices(bundle).map(|i| prices[i as usize].clone()).sum()
}

fn run_mechanism(buyers: &[Valuation], prices: &[Rat], order: &[u32]) -> MechanismOutcome {
    let m = buyers[0].m();
    let mut available = (1u32 << m) - 1;
    let mut allocation = vec![0u32; buyers.len()];
    let mut utilities = vec![Rat::zero(); buyers.len()];
    for &b in order {
        let v = &buyers[b as usize];
        let mut best_bundle = 0u32;
        let mut best_utility = Rat::zero();
        for bundle in submasks(available) {
            let utility = v.value(bundle) - price_of(prices, bundle);
            let better = utility > best_utility
                || (utility == best_utility
                    && (bundle.count_ones() < best_bundle.count_ones()
                        || (bundle.count_ones() == best_bundle.count_ones()
                            && bundle < best_bundle)));
            if better {
                best_bundle = bundle;
                best_utility = utility;
            }
        }
        allocation[b as usize] = best_bundle;
        utilities[b as usize] = best_utility;
        available &= !best_bundle;
    }
    let welfare: Rat = buyers
        .iter()
        .zip(&allocation)
        .map(|(v, bundle)| v.value(*bundle).clone())
        .sum();
    let revenue: Rat = allocation.iter().map(|bundle| price_of(prices, *bundle)).sum();
    MechanismOutcome { allocation, welfare, revenue, utilities, unsold: available }
}

/// Runs the sequential mechanism: each buyer, in arrival order, takes an
/// exact utility-maximizing bundle of the remaining items (ties: higher
/// utility, then fewer items, then smallest bitmask; the empty bundle is
/// always available at utility 0). The accounting identity
/// `welfare = revenue + sum of utilities` holds exactly.
pub fn simulate_mechanism(inst: &MarketInstance) -> MechanismOutcome {
    run_mechanism(&inst.buyers, &inst.prices, &inst.order)
}

/// An optimal partition of the items among buyers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OptimalAllocation {
    /// Bundle per buyer.
    pub bundles: Vec<u32>,
    /// The optimal welfare.
    pub value: Rat,
}

/// The welfare optimum `max over partitions of sum of v_i(S_i)`, by dynamic
/// programming over (buyer suffix, remaining item set).
pub fn brute_opt_welfare(buyers: &[Valuation]) -> Result<OptimalAllocation, PostedError> {
    let Some(first) = buyers.first() else {
        return Err(PostedError::NoBuyers);
    };
    let m = first.m();
    if buyers.len() > MAX_OPT_BUYERS {
        return Err(PostedError::TooLarge {
            what: "buyers",
            got: buyers.len() as u32,
            cap: MAX_OPT_BUYERS as u32,
        });
    }
    if m > MAX_OPT_ITEMS {
        return Err(PostedError::TooLarge { what: "ground set", got: m, cap: MAX_OPT_ITEMS });
    }
    for b in buyers {
        if b.m() != m {
            return Err(PostedError::MixedGroundSets { expected: m, found: b.m() });
        }
    }

    let n = buyers.len();
    let full = (1usize << m) - 1;
    // best[j][mask]: welfare achievable by buyers j.. from the items in mask.
    let mut best = vec![vec![Rat::zero(); full + 1]; n + 1];
    for j in (0..n).rev() {
        for mask in 0..=full as u32 {
            let mut top = Rat::zero();
            for bundle in submasks(mask) {
                let total = buyers[j].value(bundle) + &best[j + 1][(mask & !bundle) as usize];
                if total > top {
                    top = total;
                }
            }
            best[j][mask as usize] = top;
        }
    }

    let mut bundles = vec![0u32; n];
    let mut mask = full as u32;
    for j in 0..n {
        let mut pick = 0u32;
        let mut pick_value = buyers[j].value(0) + &best[j + 1][mask as usize];
        for bundle in submasks(mask) {
            let total = buyers[j].value(bundle) + &best[j + 1][(mask & !bundle) as usize];
            let better = total > pick_value
                || (total == pick_value
                    && (bundle.count_ones() < pick.count_ones()
                        || (bundle.count_ones() == pick.count_ones() && bundle < pick)));
            if better {
                pick = bundle;
                pick_value = total;
            }
        }
        bundles[j] = pick;
        mask &= !pick;
    }
    let value = best[0][full].clone();
    Ok(OptimalAllocation { bundles, value })
}

/// The arrival order minimizing mechanism welfare, with that welfare.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorstOrder {
    /// The minimizing order (first in lexicographic order on ties).
    pub order: Vec<u32>,
    /// Welfare under that order.
    pub welfare: Rat,
}

/// Minimizes mechanism welfare over every arrival order by exhaustive
/// permutation search.
pub fn worst_order_welfare(
    buyers: &[Valuation],
    prices: &[Rat],
) -> Result<WorstOrder, PostedError> {
    if buyers.len() > MAX_ORDER_BUYERS {
        return Err(PostedError::TooLarge {
            what: "buyers",
            got: buyers.len() as u32,
            cap: MAX_ORDER_BUYERS as u32,
        });
    }
    // Validation is shared with the single-run entry point.
    let probe = MarketInstance::new(
        buyers.to_vec(),
        prices.to_vec(),
        (0..buyers.len() as u32).collect(),
    )?;

    let mut order: Vec<u32> = probe.order.clone();
    let mut best: Option<WorstOrder> = None;
    loop {
        let welfare = run_mechanism(buyers, prices, &order).welfare;
        if best.as_ref().is_none_or(|b| welfare < b.welfare) {
            best = Some(WorstOrder { order: order.clone(), welfare });
        }
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(best.expect("at least the identity order was tried"))
}

/// Steps `perm` to its lexicographic successor; `false` at the last one.
fn next_permutation(perm: &mut [u32]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}
