//! Valuation storage, axiom checks, and instance generators.
//!
//! A [`Valuation`] is a dense table of `2^m` exact rationals indexed by
//! subset bitmask (bit `i` encodes item `i + 1`). Construction validates the
//! shape and non-negativity; the semantic axioms (normalization,
//! monotonicity, subadditivity, unit Lipschitz marginals) are checked
//! exhaustively by [`check_axioms`], which reports a witness for every
//! violated axiom instead of failing fast.
//!
//! Generators produce the instance families used across the crate:
//!
//! * [`gen_threshold`]: 0 on the empty set, 1 on proper nonempty subsets,
//!   `top` on the full set. With `top = q/(q-1)` this sits exactly at
//!   partition level `q`, which makes the family the canonical separator of
//!   the chain.
//! * [`gen_setcover_f2`]: minimum set cover over the parity sets of the
//!   vector space `F_2^a`; a subadditive function whose distance to higher
//!   levels shrinks like an inverse logarithm.
//! * [`gen_xos`]: pointwise maximum of nonnegative additive clauses.
//! * [`gen_binomial_floor`]: `max(C(|S|, k), C(m, k)/2)` on nonempty sets;
//!   subadditive and hypergraph-representable with rank `k`, yet not
//!   `q`-partitioning for `k = ceil(m/q)`, so it separates those properties.
//! * [`gen_random_subadditive`]: seeded random instances, repaired to be
//!   monotone and then closed under splitting, so the output is always
//!   subadditive.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_integer::binomial as int_binomial;
use num_bigint::BigInt;
use num_traits::Zero;

use crate::bits::{bit_indices, full_mask, submasks};
use crate::rng::StreamRng;
use crate::{rat, rat_int, Rat};

/// Largest supported ground set (the value table has `2^m` entries).
pub const MAX_GROUND_SET: u32 = 20;

/// Largest ground set for which exhaustive axiom checking is offered.
pub const MAX_EXHAUSTIVE: u32 = 12;

/// Largest ground set for the random subadditive generator (the closure pass
/// walks all ordered submask pairs, which is a `3^m` sweep).
pub const MAX_RANDOM: u32 = 12;

/// A set function `v : 2^[m] -> Q_{>=0}` stored densely by bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Valuation {
    m: u32,
    values: Vec<Rat>,
}

/// Errors from valuation construction and generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetFnError {
    /// Ground set size outside `1..=MAX_GROUND_SET`.
    GroundSetSize { m: u32 },
    /// Value table length differs from `2^m`.
    TableLength { expected: usize, got: usize },
    /// Negative entry in the value table.
    NegativeValue { mask: u32 },
    /// Subset mask has bits outside the ground set.
    MaskOutOfRange { mask: u32, m: u32 },
    /// Threshold generator needs `m >= 2` and `1 <= top <= 2`.
    ThresholdParameter { m: u32 },
    /// Parity set-cover generator needs `2 <= a <= 4`.
    SetcoverParameter { a: u32 },
    /// XOS clause has the wrong number of item weights.
    ClauseShape { clause: usize, expected: usize, got: usize },
    /// XOS clause contains a negative item weight.
    ClauseNegativeWeight { clause: usize, item: u32 },
    /// Binomial-floor generator needs `1 <= k <= m`.
    BinomialParameter { m: u32, k: u32 },
    /// Ground set too large for an exhaustive sweep.
    TooLargeForExhaustive { m: u32, cap: u32 },
}

impl fmt::Display for SetFnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetFnError::GroundSetSize { m } => {
                write!(f, "ground set size m={m} outside 1..={MAX_GROUND_SET}")
            }
            SetFnError::TableLength { expected, got } => {
                write!(f, "value table has {got} entries, expected {expected}")
            }
            SetFnError::NegativeValue { mask } => {
                write!(f, "negative value at subset mask {mask}")
            }
            SetFnError::MaskOutOfRange { mask, m } => {
                write!(f, "subset mask {mask} out of range for m={m}")
            }
            SetFnError::ThresholdParameter { m } => {
                write!(f, "threshold generator needs m>=2 and top in [1,2] (got m={m})")
            }
            SetFnError::SetcoverParameter { a } => {
                write!(f, "parity set-cover generator needs a in 2..=4 (got a={a})")
            }
            SetFnError::ClauseShape { clause, expected, got } => {
                write!(f, "clauses[{clause}] has {got} weights, expected {expected}")
            }
            SetFnError::ClauseNegativeWeight { clause, item } => {
                write!(f, "clauses[{clause}] has a negative weight for item {item}")
            }
            SetFnError::BinomialParameter { m, k } => {
                write!(f, "binomial-floor generator needs 1<=k<=m (got m={m}, k={k})")
            }
            SetFnError::TooLargeForExhaustive { m, cap } => {
                write!(f, "m={m} exceeds the exhaustive sweep cap {cap}")
            }
        }
    }
}

impl Valuation {
    /// Wraps a value table after validating its shape and non-negativity.
    ///
    /// Normalization and monotonicity are deliberately not enforced here so
    /// that [`check_axioms`] can be used to diagnose broken inputs; the
    /// generators in this module always produce normalized monotone tables.
    pub fn new(m: u32, values: Vec<Rat>) -> Result<Self, SetFnError> {
        if m < 1 || m > MAX_GROUND_SET {
            return Err(SetFnError::GroundSetSize { m });
        }
        let expected = 1usize << m;
        if values.len() != expected {
            return Err(SetFnError::TableLength { expected, got: values.len() });
        }
        if let Some(mask) = values.iter().position(|x| x < &Rat::zero()) {
            return Err(SetFnError::NegativeValue { mask: mask as u32 });
        }
        Ok(Valuation { m, values })
    }

    /// Ground set size.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Bitmask of the full ground set `[m]`.
    pub fn ground_set(&self) -> u32 {
        full_mask(self.m)
    }

    /// Value at a mask known to be in range. Panics otherwise.
    pub fn value(&self, mask: u32) -> &Rat {
        &self.values[mask as usize]
    }

    /// Value lookup with range checking.
    pub fn eval(&self, mask: u32) -> Result<&Rat, SetFnError> {
        if mask > self.ground_set() {
            return Err(SetFnError::MaskOutOfRange { mask, m: self.m });
        }
        Ok(&self.values[mask as usize])
    }

    /// The full value table, indexed by mask.
    pub fn values(&self) -> &[Rat] {
        &self.values
    }
}

/// Result of the exhaustive axiom sweep.
///
/// Each axiom gets a flag and, when violated, a smallest-index witness:
/// `monotone_witness` is a pair `(S, S + i)` with `v(S) > v(S + i)`,
/// `subadditive_witness` a pair `(S, T)` with `v(S u T) > v(S) + v(T)`, and
/// `lipschitz_witness` a pair `(S, i)` whose marginal lies outside `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomReport {
    /// `v(empty) == 0`.
    pub normalized: bool,
    /// `v(S) <= v(T)` whenever `S` is a subset of `T`.
    pub monotone: bool,
    /// Witness for a monotonicity violation.
    pub monotone_witness: Option<(u32, u32)>,
    /// `v(S u T) <= v(S) + v(T)` for all `S`, `T`.
    pub subadditive: bool,
    /// Witness for a subadditivity violation.
    pub subadditive_witness: Option<(u32, u32)>,
    /// All marginals `v(S + i) - v(S)` lie in `[0, 1]`.
    pub lipschitz: bool,
    /// Witness for a marginal outside `[0, 1]`.
    pub lipschitz_witness: Option<(u32, u32)>,
}

impl AxiomReport {
    /// True when every checked axiom except the Lipschitz bound holds.
    ///
    /// The unit Lipschitz bound is a scaling convention rather than part of
    /// the subadditive-valuation contract, so it is excluded here.
    pub fn is_valid_subadditive(&self) -> bool {
        self.normalized && self.monotone && self.subadditive
    }
}

/// Exhaustively checks normalization, monotonicity, subadditivity, and the
/// unit Lipschitz bound. Capped at `m <= 12`: the subadditivity sweep walks
/// every ordered disjoint pair, a `3^m` loop.
pub fn check_axioms(v: &Valuation) -> Result<AxiomReport, SetFnError> {
    if v.m() > MAX_EXHAUSTIVE {
        return Err(SetFnError::TooLargeForExhaustive { m: v.m(), cap: MAX_EXHAUSTIVE });
    }
    let normalized = v.value(0).is_zero();

    let mut monotone_witness = None;
    'mono: for mask in 0..=v.ground_set() {
        for i in 0..v.m() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let bigger = mask | (1 << i);
            if v.value(mask) > v.value(bigger) {
                monotone_witness = Some((mask, bigger));
                break 'mono;
            }
        }
    }
    let monotone = monotone_witness.is_none();

    // Under monotonicity, checking disjoint pairs suffices: for overlapping
    // S, T we have v(S u T) = v(S u (T \ S)) <= v(S) + v(T \ S) <= v(S) + v(T).
    // Without monotonicity there is no such reduction, so scan all pairs.
    let mut subadditive_witness = None;
    if monotone {
        'sub_disjoint: for union in 0..=v.ground_set() {
            for s in submasks(union) {
                if s == 0 || s == union {
                    continue;
                }
                let t = union & !s;
                if t < s {
                    continue;
                }
                if v.value(union) > &(v.value(s) + v.value(t)) {
                    subadditive_witness = Some((s, t));
                    break 'sub_disjoint;
                }
            }
        }
    } else {
        'sub_full: for s in 0..=v.ground_set() {
            for t in 0..=v.ground_set() {
                if v.value(s | t) > &(v.value(s) + v.value(t)) {
                    subadditive_witness = Some((s, t));
                    break 'sub_full;
                }
            }
        }
    }
    let subadditive = subadditive_witness.is_none();

    let one = rat_int(1);
    let mut lipschitz_witness = None;
    'lip: for mask in 0..=v.ground_set() {
        for i in 0..v.m() {
            if mask & (1 << i) != 0 {
                continue;
            }
            let marginal = v.value(mask | (1 << i)) - v.value(mask);
            if marginal < Rat::zero() || marginal > one {
                lipschitz_witness = Some((mask, i));
                break 'lip;
            }
        }
    }
    let lipschitz = lipschitz_witness.is_none();

    Ok(AxiomReport {
        normalized,
        monotone,
        monotone_witness,
        subadditive,
        subadditive_witness,
        lipschitz,
        lipschitz_witness,
    })
}

/// Parameters for the instance generators, one variant per family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// `gen_threshold(m, top)`.
    Threshold {
        /// Ground set size, at least 2.
        m: u32,
        /// Value of the full set, in `[1, 2]`.
        top: Rat,
    },
    /// `gen_setcover_f2(a)`.
    SetcoverF2 {
        /// Dimension of the vector space; the ground set has `2^a - 1` items.
        a: u32,
    },
    /// `gen_xos(m, clauses)`.
    XosClauses {
        /// Ground set size.
        m: u32,
        /// Additive clauses; each has one nonnegative weight per item.
        clauses: Vec<Vec<Rat>>,
    },
    /// `gen_binomial_floor(m, k)`.
    BinomialFloor {
        /// Ground set size.
        m: u32,
        /// Binomial rank.
        k: u32,
    },
    /// `gen_random_subadditive(m, seed)`.
    RandomSubadditive {
        /// Ground set size, at most 12.
        m: u32,
        /// Seed for the deterministic draw.
        seed: u64,
    },
}

/// Runs the generator described by `spec`.
pub fn generate(spec: &GeneratorSpec) -> Result<Valuation, SetFnError> {
    match spec {
        GeneratorSpec::Threshold { m, top } => gen_threshold(*m, top),
        GeneratorSpec::SetcoverF2 { a } => gen_setcover_f2(*a),
        GeneratorSpec::XosClauses { m, clauses } => gen_xos(*m, clauses),
        GeneratorSpec::BinomialFloor { m, k } => gen_binomial_floor(*m, *k),
        GeneratorSpec::RandomSubadditive { m, seed } => gen_random_subadditive(*m, *seed),
    }
}

/// Threshold valuation: 0 on the empty set, 1 on every proper nonempty
/// subset, `top` on the full set.
///
/// For `top = q/(q-1)` the partition level is exactly `q`: the largest full-set
/// value a q-partitioning valuation of this shape can carry is `q/(q-1)`, met
/// by the cover putting weight `1/(q-1)` on every `(q-1)`-subset of the block
/// indices.
pub fn gen_threshold(m: u32, top: &Rat) -> Result<Valuation, SetFnError> {
    if m < 2 || m > MAX_GROUND_SET || top < &rat_int(1) || top > &rat_int(2) {
        return Err(SetFnError::ThresholdParameter { m });
    }
    let full = full_mask(m);
    let one = rat_int(1);
    let mut values = vec![Rat::zero(); 1 << m];
    for mask in 1..full {
        values[mask as usize] = one.clone();
    }
    values[full as usize] = top.clone();
    Valuation::new(m, values)
}

/// Minimum set cover over the parity sets of `F_2^a`.
///
/// The ground set is the `2^a - 1` nonzero vectors; item `u` (as a bitmask of
/// coordinates) is encoded as bit `u - 1`. For each nonzero vector `w` the
/// covering set `S_w = { u : <u, w> = 1 }` holds the `2^(a-1)` vectors with
/// odd overlap, and `v(S)` is the least number of covering sets whose union
/// contains `S`. The result is normalized, monotone, integer valued, and
/// subadditive (unions of covers cover unions); covering the whole ground set
/// takes at least `a` sets.
pub fn gen_setcover_f2(a: u32) -> Result<Valuation, SetFnError> {
    if !(2..=4).contains(&a) {
        return Err(SetFnError::SetcoverParameter { a });
    }
    let m = (1u32 << a) - 1;
    let cover_masks: Vec<u32> = (1..=m)
        .map(|w| {
            let mut mask = 0u32;
            for u in 1..=m {
                if (u & w).count_ones() % 2 == 1 {
                    mask |= 1 << (u - 1);
                }
            }
            mask
        })
        .collect();

    let full = full_mask(m);
    let mut cover_count = vec![u32::MAX; 1 << m];
    cover_count[0] = 0;
    for mask in 1..=full {
        let mut best = u32::MAX;
        for cm in &cover_masks {
            if mask & cm != 0 {
                let rest = cover_count[(mask & !cm) as usize];
                best = best.min(rest.saturating_add(1));
            }
        }
        cover_count[mask as usize] = best;
    }

    let values = cover_count.into_iter().map(|c| rat_int(i64::from(c))).collect();
    Valuation::new(m, values)
}

/// Pointwise maximum of nonnegative additive clauses (an XOS valuation).
///
/// Each clause is a full vector of item weights; an empty clause list yields
/// the zero valuation.
pub fn gen_xos(m: u32, clauses: &[Vec<Rat>]) -> Result<Valuation, SetFnError> {
    if m < 1 || m > MAX_GROUND_SET {
        return Err(SetFnError::GroundSetSize { m });
    }
    for (ci, clause) in clauses.iter().enumerate() {
        if clause.len() != m as usize {
            return Err(SetFnError::ClauseShape {
                clause: ci,
                expected: m as usize,
                got: clause.len(),
            });
        }
        for (i, w) in clause.iter().enumerate() {
            if w < &Rat::zero() {
                return Err(SetFnError::ClauseNegativeWeight { clause: ci, item: i as u32 + 1 });
            }
        }
    }

    let size = 1usize << m;
    let mut values = vec![Rat::zero(); size];
    for clause in clauses {
        // Clause sums over all masks by peeling the lowest bit.
        let mut sums = vec![Rat::zero(); size];
        for mask in 1..size {
            let low = mask.trailing_zeros();
            sums[mask] = &sums[mask & (mask - 1)] + &clause[low as usize];
        }
        for mask in 1..size {
            if sums[mask] > values[mask] {
                values[mask] = sums[mask].clone();
            }
        }
    }
    Valuation::new(m, values)
}

/// Binomial rational `C(n, k)` (zero when `k > n`).
pub fn binomial(n: u32, k: u32) -> Rat {
    if k > n {
        return Rat::zero();
    }
    Rat::from_integer(int_binomial(BigInt::from(n), BigInt::from(k)))
}

/// `v(S) = max(C(|S|, k), C(m, k)/2)` on nonempty sets, 0 on the empty set.
///
/// Counting `k`-subsets is subadditive, and the constant floor keeps it so
/// while forcing every nonempty set to be worth at least half the full set's
/// count. The function is representable as a maximum over rank-`k` hypergraph
/// clauses (see `mph::binomial_floor_mph`), yet for `k = ceil(m/q)` it is not
/// q-partitioning: splitting the ground set into `q` blocks and covering the
/// block indices with weight `1/(q-1)` per `(q-1)`-subset recovers too little.
pub fn gen_binomial_floor(m: u32, k: u32) -> Result<Valuation, SetFnError> {
    if m < 1 || m > MAX_GROUND_SET || k < 1 || k > m {
        return Err(SetFnError::BinomialParameter { m, k });
    }
    let floor = binomial(m, k) / rat_int(2);
    let by_size: Vec<Rat> = (0..=m).map(|s| binomial(s, k)).collect();
    let mut values = vec![Rat::zero(); 1 << m];
    for mask in 1..(1u32 << m) {
        let count = &by_size[mask.count_ones() as usize];
        values[mask as usize] = if count > &floor { count.clone() } else { floor.clone() };
    }
    Valuation::new(m, values)
}

/// Largest pointwise subadditive function below `v`.
///
/// Computed by the split dynamic program
/// `v*(S) = min(v(S), min over proper nonempty T of S of v*(T) + v*(S \ T))`,
/// which equals the minimum of `sum v(block)` over all partitions of `S`.
/// Preserves normalization and monotonicity, and is idempotent.
pub fn subadditive_closure(v: &Valuation) -> Valuation {
    let mut out: Vec<Rat> = v.values().to_vec();
    for mask in 1..=(v.ground_set()) {
        let mut best = out[mask as usize].clone();
        for t in submasks(mask) {
            if t == 0 || t == mask {
                continue;
            }
            let rest = mask & !t;
            if rest < t {
                continue;
            }
            let candidate = &out[t as usize] + &out[rest as usize];
            if candidate < best {
                best = candidate;
            }
        }
        out[mask as usize] = best;
    }
    Valuation { m: v.m(), values: out }
}

/// Seeded random subadditive instance.
///
/// Draws 2 to 4 additive clauses with weights `k/8` (`k` uniform in `0..=8`),
/// takes their maximum, adds independent noise `k/16` (`k` uniform in
/// `0..=4`) to every nonempty set, repairs monotonicity by an upward sweep,
/// and finally applies [`subadditive_closure`]. Deterministic for a fixed
/// seed; the output always passes [`check_axioms`] with `subadditive` set.
pub fn gen_random_subadditive(m: u32, seed: u64) -> Result<Valuation, SetFnError> {
    if m < 1 || m > MAX_RANDOM {
        return Err(SetFnError::TooLargeForExhaustive { m, cap: MAX_RANDOM });
    }
    let mut rng = StreamRng::split(seed, 0);
    let n_clauses = 2 + rng.below(3);
    let clauses: Vec<Vec<Rat>> = (0..n_clauses)
        .map(|_| (0..m).map(|_| rat(rng.below(9) as i64, 8)).collect())
        .collect();
    let base = gen_xos(m, &clauses)?;

    let mut values: Vec<Rat> = base.values().to_vec();
    for mask in 1..(1u32 << m) {
        values[mask as usize] += rat(rng.below(5) as i64, 16);
    }
    // Monotone repair: every strict submask is numerically smaller, so a
    // single ascending pass sees repaired predecessors.
    for mask in 1..(1u32 << m) {
        for i in bit_indices(mask) {
            let below = values[(mask & !(1 << i)) as usize].clone();
            if below > values[mask as usize] {
                values[mask as usize] = below;
            }
        }
    }
    Ok(subadditive_closure(&Valuation::new(m, values)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{rat, rat_int};

    fn additive_half(m: u32) -> Valuation {
        let clause = vec![rat(1, 2); m as usize];
        gen_xos(m, &[clause]).unwrap()
    }

    #[test]
    fn eval_additive_and_range_check() {
        let v = additive_half(2);
        assert_eq!(v.eval(0b11).unwrap(), &rat_int(1));
        assert_eq!(v.eval(0b01).unwrap(), &rat(1, 2));
        assert!(matches!(v.eval(0b100), Err(SetFnError::MaskOutOfRange { .. })));
    }

    #[test]
    fn axioms_additive_all_hold() {
        let report = check_axioms(&additive_half(3)).unwrap();
        assert!(report.normalized && report.monotone && report.subadditive && report.lipschitz);
    }

    #[test]
    fn axioms_flag_non_monotone_with_witness() {
        let v = Valuation::new(2, vec![rat_int(0), rat_int(2), rat_int(1), rat_int(1)]).unwrap();
        let report = check_axioms(&v).unwrap();
        assert!(!report.monotone);
        assert_eq!(report.monotone_witness, Some((0b01, 0b11)));
    }

    #[test]
    fn axioms_binomial_floor_subadditive_not_lipschitz() {
        let v = gen_binomial_floor(6, 2).unwrap();
        let report = check_axioms(&v).unwrap();
        assert!(report.normalized && report.monotone && report.subadditive);
        // The jump from C(6,2)/2 = 15/2 at size 4 to C(5,2) = 10 at size 5
        // is a marginal of 5/2.
        assert!(!report.lipschitz);
    }

    #[test]
    fn axioms_cap() {
        let v = additive_half(3);
        assert!(check_axioms(&v).is_ok());
        let big = gen_threshold(13, &rat_int(1)).unwrap();
        assert!(matches!(
            check_axioms(&big),
            Err(SetFnError::TooLargeForExhaustive { .. })
        ));
    }

    #[test]
    fn threshold_table_shape() {
        let v = gen_threshold(5, &rat(3, 2)).unwrap();
        assert_eq!(v.value(0), &rat_int(0));
        assert_eq!(v.value(0b10110), &rat_int(1));
        assert_eq!(v.value(0b11111), &rat(3, 2));
        let report = check_axioms(&v).unwrap();
        assert!(report.is_valid_subadditive() && report.lipschitz);
    }

    #[test]
    fn threshold_rejects_bad_parameters() {
        assert!(gen_threshold(1, &rat_int(1)).is_err());
        assert!(gen_threshold(4, &rat(5, 2)).is_err());
        assert!(gen_threshold(4, &rat(1, 2)).is_err());
    }

    #[test]
    fn setcover_f2_small_instance() {
        let v = gen_setcover_f2(2).unwrap();
        assert_eq!(v.m(), 3);
        // Each covering set has 2^(a-1) = 2 of the 3 items, every singleton
        // is covered by one set, and the whole space needs two sets.
        for i in 0..3 {
            assert_eq!(v.value(1 << i), &rat_int(1));
        }
        assert_eq!(v.value(0b111), &rat_int(2));
        let report = check_axioms(&v).unwrap();
        assert!(report.is_valid_subadditive() && report.lipschitz);
    }

    #[test]
    fn setcover_f2_full_cover_needs_at_least_a() {
        for a in 2..=4 {
            let v = gen_setcover_f2(a).unwrap();
            let full = v.ground_set();
            assert!(v.value(full) >= &rat_int(i64::from(a)));
            // a = 4 means m = 15, past the exhaustive-sweep cap.
            if v.m() <= MAX_EXHAUSTIVE {
                assert!(check_axioms(&v).unwrap().is_valid_subadditive());
            }
        }
    }

    #[test]
    fn xos_unit_demand() {
        let clauses = [vec![rat_int(1), rat_int(0)], vec![rat_int(0), rat_int(1)]];
        let v = gen_xos(2, &clauses).unwrap();
        assert_eq!(v.value(0b11), &rat_int(1));
        assert_eq!(v.value(0b01), &rat_int(1));
        assert_eq!(v.value(0), &rat_int(0));
    }

    #[test]
    fn xos_rejects_bad_clauses() {
        assert!(matches!(
            gen_xos(2, &[vec![rat_int(1)]]),
            Err(SetFnError::ClauseShape { .. })
        ));
        assert!(matches!(
            gen_xos(1, &[vec![rat_int(-1)]]),
            Err(SetFnError::ClauseNegativeWeight { .. })
        ));
    }

    #[test]
    fn binomial_floor_values() {
        let v = gen_binomial_floor(6, 2).unwrap();
        assert_eq!(v.value(0b000001), &rat(15, 2));
        assert_eq!(v.value(0b001111), &rat(15, 2));
        assert_eq!(v.value(0b011111), &rat_int(10));
        assert_eq!(v.value(0b111111), &rat_int(15));
    }

    #[test]
    fn closure_squares_example() {
        // v(S) = |S|^2 on m = 2: the closure splits {1,2} into singletons.
        let v = Valuation::new(2, vec![rat_int(0), rat_int(1), rat_int(1), rat_int(4)]).unwrap();
        let closed = subadditive_closure(&v);
        assert_eq!(closed.value(0b11), &rat_int(2));
        assert!(check_axioms(&closed).unwrap().subadditive);
    }

    #[test]
    fn closure_fixes_nothing_on_subadditive_input() {
        let v = gen_threshold(4, &rat(4, 3)).unwrap();
        assert_eq!(subadditive_closure(&v), v);
        let w = gen_random_subadditive(5, 11).unwrap();
        assert_eq!(subadditive_closure(&w), w);
    }

    #[test]
    fn random_subadditive_deterministic_and_sound() {
        for seed in [0u64, 1, 7, 1234] {
            let a = gen_random_subadditive(6, seed).unwrap();
            let b = gen_random_subadditive(6, seed).unwrap();
            assert_eq!(a, b);
            let report = check_axioms(&a).unwrap();
            assert!(report.is_valid_subadditive(), "seed {seed}");
        }
    }

    #[test]
    fn generate_dispatches() {
        let spec = GeneratorSpec::Threshold { m: 4, top: rat(4, 3) };
        assert_eq!(generate(&spec).unwrap(), gen_threshold(4, &rat(4, 3)).unwrap());
    }
}
