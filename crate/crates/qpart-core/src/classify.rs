//! Membership tests, partition level, and closeness for the q-partitioning
//! chain.
//!
//! Fix a valuation `v`, a subset `S`, and a partition of `S` into blocks
//! `S_1, ..., S_k`. A fractional cover `alpha` assigns nonnegative weight to
//! subsets `T` of the block indices so that every index is covered with total
//! weight at least 1. The cover LP
//!
//! ```text
//!   min  sum_T alpha(T) * v(union of S_i for i in T)
//!   s.t. sum_{T containing j} alpha(T) >= 1   for every block index j
//!        alpha >= 0
//! ```
//!
//! always has optimum at most `v(S)` (the cover putting weight 1 on the full
//! index set achieves exactly `v(S)`), and `v` is q-partitioning when the
//! optimum equals `v(S)` for every subset and every partition into at most
//! `q` blocks. The LP dual prices the blocks:
//!
//! ```text
//!   max  sum_j p_j
//!   s.t. sum_{j in T} p_j <= v(union of S_i for i in T)   for every T
//!        p >= 0
//! ```
//!
//! Both sides are solved exactly, so primal/dual equality is asserted with
//! `==` in tests. Membership sweeps solve the primal (few rows, the witness
//! cover falls out of the solution); price extraction solves the dual.
//!
//! Sweeps over all `(S, partition)` pairs grow like the Bell numbers, so the
//! full classifier is capped at `m <= 8`. A cheap exact prune keeps the sweep
//! fast: `p_j = min over T containing j of v(union_T) / |T|` is always dual
//! feasible, so when `sum_j p_j >= v(S)` the LP optimum is pinned to `v(S)`
//! and the solver is skipped.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::bits::bit_indices;
use crate::lp::{LinearProgram, Relation, Sense};
use crate::setfn::Valuation;
use crate::{rat, rat_int, Rat};

/// Largest ground set accepted by the exhaustive classifier.
pub const MAX_CLASSIFY: u32 = 8;

/// Sentinel returned by [`partition_level`] when the valuation is not even
/// subadditive (membership starts at level 2).
pub const LEVEL_NOT_SUBADDITIVE: u32 = 1;

/// Errors from partition handling and classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassifyError {
    /// A partition block was empty.
    EmptyBlock { index: usize },
    /// Two partition blocks intersect.
    OverlappingBlocks { index: usize },
    /// A partition with no blocks.
    NoBlocks,
    /// Ground set too large for the exhaustive sweep.
    TooLarge { m: u32, cap: u32 },
    /// `q` outside `2..=m`.
    QOutOfRange { q: u32, m: u32 },
    /// Partition blocks reach outside the valuation's ground set.
    OutsideGroundSet { mask: u32, m: u32 },
    /// Too many blocks for the exponential-size cover LPs.
    TooManyBlocks { k: usize, cap: u32 },
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::EmptyBlock { index } => write!(f, "blocks[{index}] is empty"),
            ClassifyError::OverlappingBlocks { index } => {
                write!(f, "blocks[{index}] overlaps an earlier block")
            }
            ClassifyError::NoBlocks => write!(f, "partition has no blocks"),
            ClassifyError::TooLarge { m, cap } => {
                write!(f, "m={m} exceeds the classification cap {cap}")
            }
            ClassifyError::QOutOfRange { q, m } => write!(f, "q={q} outside 2..={m}"),
            ClassifyError::OutsideGroundSet { mask, m } => {
                write!(f, "block mask {mask} outside the ground set of size {m}")
            }
            ClassifyError::TooManyBlocks { k, cap } => {
                write!(f, "{k} blocks exceed the cover LP cap {cap}")
            }
        }
    }
}

/// A partition of a subset into pairwise disjoint nonempty blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    subset: u32,
    blocks: Vec<u32>,
}

impl Partition {
    /// Validates disjointness and non-emptiness; the subset is the union.
    pub fn new(blocks: Vec<u32>) -> Result<Self, ClassifyError> {
        if blocks.is_empty() {
            return Err(ClassifyError::NoBlocks);
        }
        let mut union = 0u32;
        for (i, b) in blocks.iter().enumerate() {
            if *b == 0 {
                return Err(ClassifyError::EmptyBlock { index: i });
            }
            if union & b != 0 {
                return Err(ClassifyError::OverlappingBlocks { index: i });
            }
            union |= b;
        }
        Ok(Partition { subset: union, blocks })
    }

    /// The partitioned subset (union of the blocks).
    pub fn subset(&self) -> u32 {
        self.subset
    }

    /// The blocks, in construction order.
    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }
}

/// Sparse fractional cover of the block index set `[k]`: weights on index
/// subsets, encoded as bitmasks over the block positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalCover {
    /// `(index subset, weight)` pairs with positive weight.
    pub weights: Vec<(u32, Rat)>,
}

impl FractionalCover {
    /// Checks that every index in `[k]` is covered with total weight >= 1.
    pub fn covers(&self, k: usize) -> bool {
        (0..k).all(|j| {
            let mut total = Rat::zero();
            for (t, w) in &self.weights {
                if t & (1 << j) != 0 {
                    total += w;
                }
            }
            total >= rat_int(1)
        })
    }

    /// The covered value `sum_T alpha(T) * v(union of blocks in T)`.
    pub fn value(&self, v: &Valuation, part: &Partition) -> Rat {
        let mut total = Rat::zero();
        for (t, w) in &self.weights {
            let mut union = 0u32;
            for j in bit_indices(*t) {
                union |= part.blocks()[j as usize];
            }
            total += w * v.value(union);
        }
        total
    }
}

/// A violated instance of the cover inequality: a cover whose value `lhs`
/// falls strictly below `rhs = v(subset)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationWitness {
    /// The subset whose value is under-covered.
    pub subset: u32,
    /// The partition at which the violation occurs.
    pub partition: Partition,
    /// The violating fractional cover.
    pub cover: FractionalCover,
    /// Cover value (strictly below `rhs`).
    pub lhs: Rat,
    /// `v(subset)`.
    pub rhs: Rat,
}

/// Cover LP artifacts for one `(valuation, partition)` pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverLp {
    /// Common optimum of the primal and dual LPs.
    pub value: Rat,
    /// Optimal fractional cover (primal solution), sparse.
    pub cover: FractionalCover,
    /// Optimal block prices (dual solution).
    pub prices: Vec<Rat>,
}

fn check_instance(v: &Valuation, part: &Partition) -> Result<(), ClassifyError> {
    if part.subset() > v.ground_set() {
        return Err(ClassifyError::OutsideGroundSet { mask: part.subset(), m: v.m() });
    }
    if part.k() > MAX_CLASSIFY as usize {
        return Err(ClassifyError::TooManyBlocks { k: part.k(), cap: MAX_CLASSIFY });
    }
    Ok(())
}

/// Values `v(union of blocks in T)` for all `2^k` index subsets `T`.
fn union_values(v: &Valuation, blocks: &[u32]) -> Vec<Rat> {
    let k = blocks.len();
    let mut unions = vec![0u32; 1 << k];
    let mut vals = vec![Rat::zero(); 1 << k];
    for t in 1..(1u32 << k) {
        let low = t.trailing_zeros();
        let u = unions[(t & (t - 1)) as usize] | blocks[low as usize];
        unions[t as usize] = u;
        vals[t as usize] = v.value(u).clone();
    }
    vals
}

/// Exact lower bound on the cover LP optimum from the always-feasible dual
/// point `p_j = min over T containing j of v(union_T)/|T|`.
fn dual_feasible_bound(vals: &[Rat], k: usize) -> Rat {
    let mut total = Rat::zero();
    for j in 0..k {
        let mut best: Option<Rat> = None;
        for t in 1..vals.len() {
            if t & (1 << j) == 0 {
                continue;
            }
            let candidate = &vals[t] / rat_int(t.count_ones() as i64);
            if best.as_ref().is_none_or(|b| &candidate < b) {
                best = Some(candidate);
            }
        }
        total += best.expect("k >= 1");
    }
    total
}

fn primal_program(vals: &[Rat], k: usize) -> LinearProgram {
    let n = vals.len() - 1;
    let objective: Vec<Rat> = (1..=n).map(|t| vals[t].clone()).collect();
    let mut lp = LinearProgram::new(Sense::Minimize, objective);
    for j in 0..k {
        let coeffs: Vec<Rat> = (1..=n)
            .map(|t| if t & (1 << j) != 0 { rat_int(1) } else { Rat::zero() })
            .collect();
        lp.push(coeffs, Relation::Ge, rat_int(1));
    }
    lp
}

fn dual_program(vals: &[Rat], k: usize) -> LinearProgram {
    let mut lp = LinearProgram::new(Sense::Maximize, vec![rat_int(1); k]);
    for t in 1..vals.len() {
        let coeffs: Vec<Rat> = (0..k)
            .map(|j| if t & (1 << j) != 0 { rat_int(1) } else { Rat::zero() })
            .collect();
        lp.push(coeffs, Relation::Le, vals[t].clone());
    }
    lp
}

fn sparse_cover(point: &[Rat]) -> FractionalCover {
    let weights = point
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_zero())
        .map(|(i, w)| ((i + 1) as u32, w.clone()))
        .collect();
    FractionalCover { weights }
}

/// Exact cover LP optimum for one partition (value only).
///
/// Skips the solver when the feasible-dual prune already pins the optimum to
/// `v(subset)`.
pub fn cover_value(v: &Valuation, part: &Partition) -> Result<Rat, ClassifyError> {
    check_instance(v, part)?;
    let vals = union_values(v, part.blocks());
    let target = v.value(part.subset());
    if &dual_feasible_bound(&vals, part.k()) >= target {
        return Ok(target.clone());
    }
    let sol = primal_program(&vals, part.k())
        .solve()
        .expect("cover LP is feasible and bounded");
    Ok(sol.value)
}

/// Solves both sides of the cover LP: the common optimum, an optimal cover,
/// and optimal block prices.
pub fn cover_lp_value(v: &Valuation, part: &Partition) -> Result<CoverLp, ClassifyError> {
    check_instance(v, part)?;
    let vals = union_values(v, part.blocks());
    let primal = primal_program(&vals, part.k())
        .solve()
        .expect("cover LP is feasible and bounded");
    let dual = dual_program(&vals, part.k())
        .solve()
        .expect("price LP is feasible and bounded");
    debug_assert_eq!(primal.value, dual.value);
    Ok(CoverLp {
        value: primal.value,
        cover: sparse_cover(&primal.point),
        prices: dual.point,
    })
}

/// Optimal block prices and their total (the dual side only).
pub fn dual_prices(v: &Valuation, part: &Partition) -> Result<(Rat, Vec<Rat>), ClassifyError> {
    check_instance(v, part)?;
    let vals = union_values(v, part.blocks());
    let sol = dual_program(&vals, part.k())
        .solve()
        .expect("price LP is feasible and bounded");
    Ok((sol.value, sol.point))
}

/// Cover LP optimum for a raw block list that may contain empty blocks.
///
/// Empty blocks are dropped before solving. They never change the optimum:
/// an empty block contributes nothing to any union, so covering its index
/// costs nothing extra, and any cover of the padded index set restricts to
/// an equal-value cover of the nonempty indices. Exposed for invariance
/// tests.
pub fn cover_value_for_blocks(v: &Valuation, blocks: &[u32]) -> Result<Rat, ClassifyError> {
    let nonempty: Vec<u32> = blocks.iter().copied().filter(|b| *b != 0).collect();
    cover_value(v, &Partition::new(nonempty)?)
}

/// Iterator over the partitions of `subset` into `2..=qmax` nonempty blocks,
/// in restricted-growth-string order, each partition exactly once.
///
/// The restricted growth string over the items of `subset` (ascending bit
/// order) assigns item `i` to block `a_i` with `a_0 = 0` and
/// `a_i <= max(a_0..a_{i-1}) + 1`; capping the alphabet at `qmax` symbols
/// caps the block count.
pub fn enumerate_partitions(subset: u32, qmax: u32) -> PartitionIter {
    let items: Vec<u32> = bit_indices(subset).collect();
    let n = items.len();
    PartitionIter {
        items,
        rgs: vec![0; n],
        qmax: qmax.max(1),
        fresh: true,
    }
}

/// See [`enumerate_partitions`].
pub struct PartitionIter {
    items: Vec<u32>,
    rgs: Vec<u8>,
    qmax: u32,
    fresh: bool,
}

impl PartitionIter {
    /// Advances `rgs` to its successor; false when exhausted.
    fn step(&mut self) -> bool {
        let n = self.rgs.len();
        if n == 0 {
            return false;
        }
        // Find the rightmost position that may still grow, reset the suffix.
        let mut prefix_max = vec![0u8; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(self.rgs[i - 1]);
        }
        for i in (1..n).rev() {
            let cap = (prefix_max[i] + 1).min(self.qmax as u8 - 1);
            if self.rgs[i] < cap {
                self.rgs[i] += 1;
                for j in i + 1..n {
                    self.rgs[j] = 0;
                }
                return true;
            }
        }
        false
    }

    fn current(&self) -> Option<Partition> {
        let k = usize::from(*self.rgs.iter().max()?) + 1;
        if k < 2 {
            return None;
        }
        let mut blocks = vec![0u32; k];
        for (i, &a) in self.rgs.iter().enumerate() {
            blocks[usize::from(a)] |= 1 << self.items[i];
        }
        Some(Partition { subset: blocks.iter().fold(0, |acc, b| acc | b), blocks })
    }
}

impl Iterator for PartitionIter {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        loop {
            if self.fresh {
                self.fresh = false;
            } else if !self.step() {
                return None;
            }
            if let Some(p) = self.current() {
                return Some(p);
            }
            if self.rgs.is_empty() {
                return None;
            }
        }
    }
}

fn check_vq(v: &Valuation, q: u32) -> Result<(), ClassifyError> {
    if v.m() > MAX_CLASSIFY {
        return Err(ClassifyError::TooLarge { m: v.m(), cap: MAX_CLASSIFY });
    }
    if q < 2 || q > v.m() {
        return Err(ClassifyError::QOutOfRange { q, m: v.m() });
    }
    Ok(())
}

/// Searches for a violated cover inequality over every subset and every
/// partition into at most `q` blocks. `None` means `v` is q-partitioning.
pub fn q_partitioning_witness(
    v: &Valuation,
    q: u32,
) -> Result<Option<ClassificationWitness>, ClassifyError> {
    check_vq(v, q)?;
    for subset in 1..=v.ground_set() {
        if subset.count_ones() < 2 || v.value(subset).is_zero() {
            // Partitions need two blocks, and a zero target can never be
            // under-covered by a nonnegative objective.
            continue;
        }
        let rhs = v.value(subset);
        for part in enumerate_partitions(subset, q) {
            let vals = union_values(v, part.blocks());
            if &dual_feasible_bound(&vals, part.k()) >= rhs {
                continue;
            }
            let sol = primal_program(&vals, part.k())
                .solve()
                .expect("cover LP is feasible and bounded");
            if &sol.value < rhs {
                return Ok(Some(ClassificationWitness {
                    subset,
                    cover: sparse_cover(&sol.point),
                    lhs: sol.value,
                    rhs: rhs.clone(),
                    partition: part,
                }));
            }
        }
    }
    Ok(None)
}

/// Whether `v` is q-partitioning, i.e. every cover of every partition into
/// at most `q` blocks recovers the full subset value.
pub fn is_q_partitioning(v: &Valuation, q: u32) -> Result<bool, ClassifyError> {
    Ok(q_partitioning_witness(v, q)?.is_none())
}

/// The largest `q` in `2..=m` for which `v` is q-partitioning, or
/// [`LEVEL_NOT_SUBADDITIVE`] when `v` is not subadditive (level 2 is exactly
/// subadditivity). Binary search down the chain `Q(2) ⊇ Q(3) ⊇ ...`.
pub fn partition_level(v: &Valuation) -> Result<u32, ClassifyError> {
    if v.m() > MAX_CLASSIFY {
        return Err(ClassifyError::TooLarge { m: v.m(), cap: MAX_CLASSIFY });
    }
    if v.m() < 2 || !is_q_partitioning(v, 2)? {
        return Ok(LEVEL_NOT_SUBADDITIVE);
    }
    let mut lo = 2;
    let mut hi = v.m();
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if is_q_partitioning(v, mid)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Linear-scan version of [`partition_level`], kept as a cross-check for the
/// binary search (the two must agree because membership is monotone in `q`).
pub fn partition_level_linear(v: &Valuation) -> Result<u32, ClassifyError> {
    if v.m() > MAX_CLASSIFY {
        return Err(ClassifyError::TooLarge { m: v.m(), cap: MAX_CLASSIFY });
    }
    let mut level = LEVEL_NOT_SUBADDITIVE;
    for q in 2..=v.m() {
        if !is_q_partitioning(v, q)? {
            break;
        }
        level = q;
    }
    Ok(level)
}

/// Worst-case recovered fraction over all covers of partitions into at most
/// `q` blocks:
/// `gamma = min over S with v(S) > 0 of (cover LP optimum) / v(S)`.
///
/// Always in `(0, 1]`, and equal to 1 exactly when `v` is q-partitioning.
pub fn closeness(v: &Valuation, q: u32) -> Result<Rat, ClassifyError> {
    check_vq(v, q)?;
    let mut gamma = rat_int(1);
    for subset in 1..=v.ground_set() {
        if subset.count_ones() < 2 || v.value(subset).is_zero() {
            continue;
        }
        let rhs = v.value(subset);
        for part in enumerate_partitions(subset, q) {
            let vals = union_values(v, part.blocks());
            if &dual_feasible_bound(&vals, part.k()) >= rhs {
                continue;
            }
            let sol = primal_program(&vals, part.k())
                .solve()
                .expect("cover LP is feasible and bounded");
            let ratio = sol.value / rhs;
            if ratio < gamma {
                gamma = ratio;
            }
        }
    }
    Ok(gamma)
}

/// One instance's row in a smoothness audit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessRow {
    /// Whether the instance is q-partitioning (the audit's precondition).
    pub in_class: bool,
    /// Measured `closeness(v, q + 1)`.
    pub gamma: Rat,
    /// `gamma >= (q - 1) / q`.
    pub holds: bool,
}

/// Result of [`audit_smoothness`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessAudit {
    /// The guaranteed fraction `(q - 1) / q`.
    pub bound: Rat,
    /// Per-instance measurements.
    pub rows: Vec<SmoothnessRow>,
    /// Smallest measured gamma across instances.
    pub min_gamma: Option<Rat>,
    /// All instances in class and above the bound.
    pub all_hold: bool,
}

/// Audits the chain's smoothness: each q-partitioning instance must satisfy
/// the level-(q+1) cover inequalities up to the factor `(q - 1)/q`, i.e.
/// `closeness(v, q + 1) >= (q - 1)/q`. Instances failing the q-partitioning
/// precondition are flagged rather than silently skipped.
pub fn audit_smoothness(
    instances: &[Valuation],
    q: u32,
) -> Result<SmoothnessAudit, ClassifyError> {
    let bound = rat(i64::from(q) - 1, i64::from(q));
    let mut rows = Vec::new();
    let mut min_gamma: Option<Rat> = None;
    let mut all_hold = true;
    for v in instances {
        if q + 1 > v.m() {
            return Err(ClassifyError::QOutOfRange { q: q + 1, m: v.m() });
        }
        let in_class = is_q_partitioning(v, q)?;
        let gamma = closeness(v, q + 1)?;
        let holds = in_class && gamma >= bound;
        all_hold &= holds;
        if min_gamma.as_ref().is_none_or(|g| &gamma < g) {
            min_gamma = Some(gamma.clone());
        }
        rows.push(SmoothnessRow { in_class, gamma, holds });
    }
    Ok(SmoothnessAudit { bound, rows, min_gamma, all_hold })
}

/// Result of [`audit_closeness_to_subadditive`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubadditiveClosenessAudit {
    /// Whether the instance is subadditive (the precondition).
    pub subadditive: bool,
    /// Measured `closeness(v, q)`.
    pub gamma: Rat,
    /// The guaranteed fraction `1 / H_{q-1}`.
    pub bound: Rat,
    /// Precondition and bound both hold.
    pub holds: bool,
}

/// Audits the harmonic closeness guarantee: every subadditive valuation
/// satisfies the level-q cover inequalities up to `1 / H_{q-1}`.
pub fn audit_closeness_to_subadditive(
    v: &Valuation,
    q: u32,
) -> Result<SubadditiveClosenessAudit, ClassifyError> {
    let subadditive = is_q_partitioning(v, 2)?;
    let gamma = closeness(v, q)?;
    let bound = rat_int(1) / crate::harmonic(q - 1);
    let holds = subadditive && gamma >= bound;
    Ok(SubadditiveClosenessAudit { subadditive, gamma, bound, holds })
}

/// Direct fractional-subadditivity (XOS) test: for every nonempty subset
/// `S`, the all-singleton dual LP must support the full value `v(S)` with an
/// additive price vector. Returns a subset with no supporting prices, or
/// `None` when `v` is XOS.
///
/// This is an independent oracle for `is_q_partitioning(v, m)`: it looks
/// only at singleton partitions and asks for dual optimality instead of
/// sweeping covers.
pub fn xos_witness(v: &Valuation) -> Result<Option<u32>, ClassifyError> {
    if v.m() > MAX_CLASSIFY {
        return Err(ClassifyError::TooLarge { m: v.m(), cap: MAX_CLASSIFY });
    }
    for subset in 1..=v.ground_set() {
        let singletons: Vec<u32> = bit_indices(subset).map(|i| 1 << i).collect();
        let part = Partition::new(singletons)?;
        let (total, _) = dual_prices(v, &part)?;
        if &total != v.value(subset) {
            return Ok(Some(subset));
        }
    }
    Ok(None)
}

/// Whether `v` is fractionally subadditive, via [`xos_witness`].
pub fn is_xos(v: &Valuation) -> Result<bool, ClassifyError> {
    Ok(xos_witness(v)?.is_none())
}
