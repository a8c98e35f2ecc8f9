//! Hypergraph representations with bounded hyperedge rank.
//!
//! A positive-hypergraph clause of rank `k` assigns nonnegative weights to
//! hyperedges of at most `k` items and evaluates at `S` as the total weight
//! of hyperedges inside `S`. A rank-`k` representation is a finite list of
//! such clauses evaluated as their pointwise maximum; rank 1 is exactly the
//! fractionally subadditive (XOS) class.
//!
//! Every q-partitioning valuation admits such a representation with rank
//! `ceil(m / q)`: for each subset `S`, partition `S` canonically into at
//! most `q` blocks of size at most `ceil(m / q)` and turn the optimal dual
//! block prices into one clause weighting each block with its price. The
//! clause reaches `v(S)` at `S` because the dual optimum does, and it never
//! exceeds `v` elsewhere because for any `T` the blocks inside `T` form a
//! coalition whose dual constraint bounds their total price by the value of
//! their union, which monotonicity bounds by `v(T)`.
//!
//! The converse fails: [`binomial_floor_mph`] exhibits rank-`k`
//! representations of the subadditive floor family, which the classifier
//! places strictly below the corresponding partition level.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::bits::bit_indices;
use crate::classify::{dual_prices, ClassifyError, Partition, MAX_CLASSIFY};
use crate::setfn::{binomial, Valuation, MAX_EXHAUSTIVE};
use crate::{rat, Rat};

/// Errors from representation construction and validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MphError {
    /// A hyperedge exceeds the clause rank.
    EdgeTooLarge { mask: u32, k: u32 },
    /// A hyperedge carries negative weight.
    NegativeWeight { mask: u32 },
    /// Clauses with differing ranks in one representation.
    MixedRanks { expected: u32, found: u32 },
    /// Parameter or size problem, forwarded from the classifier.
    Classify(ClassifyError),
    /// Witness construction found a subset whose canonical dual prices fall
    /// short of its value, certifying the valuation is not q-partitioning.
    NotQPartitioning { subset: u32, covered: Rat, target: Rat },
    /// Bad parameters for the binomial floor representation.
    FloorParameter { m: u32, k: u32 },
}

impl fmt::Display for MphError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MphError::EdgeTooLarge { mask, k } => {
                write!(f, "hyperedge {mask} has more than {k} items")
            }
            MphError::NegativeWeight { mask } => {
                write!(f, "hyperedge {mask} has negative weight")
            }
            MphError::MixedRanks { expected, found } => {
                write!(f, "clause of rank {found} in a rank-{expected} representation")
            }
            MphError::Classify(e) => e.fmt(f),
            MphError::NotQPartitioning { subset, covered, target } => write!(
                f,
                "subset {subset} only covers {covered} of {target}; not q-partitioning"
            ),
            MphError::FloorParameter { m, k } => {
                write!(f, "binomial floor parameters m={m}, k={k} out of range")
            }
        }
    }
}

impl From<ClassifyError> for MphError {
    fn from(e: ClassifyError) -> Self {
        MphError::Classify(e)
    }
}

/// One positive-hypergraph clause: nonnegative weights on hyperedges of at
/// most `k` items, evaluated as the total weight inside the argument.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhClause {
    k: u32,
    weights: BTreeMap<u32, Rat>,
}

impl PhClause {
    /// Validates hyperedge sizes and weight signs; zero weights are dropped.
    pub fn new(
        k: u32,
        weights: impl IntoIterator<Item = (u32, Rat)>,
    ) -> Result<Self, MphError> {
        let mut map = BTreeMap::new();
        for (mask, w) in weights {
            if mask.count_ones() > k {
                return Err(MphError::EdgeTooLarge { mask, k });
            }
            if w < Rat::zero() {
                return Err(MphError::NegativeWeight { mask });
            }
            if !w.is_zero() {
                map.insert(mask, w);
            }
        }
        Ok(PhClause { k, weights: map })
    }

    /// The clause rank.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// The hyperedge weights, keyed by item bitmask.
    pub fn weights(&self) -> &BTreeMap<u32, Rat> {
        &self.weights
    }

    /// Total weight of hyperedges contained in `subset`.
    pub fn eval(&self, subset: u32) -> Rat {
        let mut total = Rat::zero();
        for (edge, w) in &self.weights {
            if edge & !subset == 0 {
                total += w;
            }
        }
        total
    }
}

/// A maximum over positive-hypergraph clauses of a common rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MphRepresentation {
    k: u32,
    clauses: Vec<PhClause>,
}

impl MphRepresentation {
    /// Validates that every clause shares the declared rank.
    pub fn new(k: u32, clauses: Vec<PhClause>) -> Result<Self, MphError> {
        for c in &clauses {
            if c.k() != k {
                return Err(MphError::MixedRanks { expected: k, found: c.k() });
            }
        }
        Ok(MphRepresentation { k, clauses })
    }

    /// The common clause rank.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// The clauses.
    pub fn clauses(&self) -> &[PhClause] {
        &self.clauses
    }
}

/// Evaluates the representation at `subset`: the maximum clause value, with
/// the empty representation worth 0 everywhere.
pub fn eval_mph(rep: &MphRepresentation, subset: u32) -> Rat {
    rep.clauses
        .iter()
        .map(|c| c.eval(subset))
        .max()
        .unwrap_or_else(Rat::zero)
}

/// A point where a representation disagrees with the valuation it should
/// reproduce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MphCounterexample {
    /// The disagreeing subset.
    pub subset: u32,
    /// What the representation evaluates to there.
    pub represented: Rat,
    /// What the valuation requires.
    pub expected: Rat,
}

/// Checks `eval_mph(rep, T) == v(T)` for every subset `T`, returning the
/// first disagreement.
pub fn verify_mph(rep: &MphRepresentation, v: &Valuation) -> Result<(), MphCounterexample> {
    for subset in 0..=v.ground_set() {
        let represented = eval_mph(rep, subset);
        if &represented != v.value(subset) {
            return Err(MphCounterexample {
                subset,
                represented,
                expected: v.value(subset).clone(),
            });
        }
    }
    Ok(())
}

/// The canonical near-equal partition: items in ascending order, dealt
/// round-robin into `min(q, |subset|)` blocks.
fn canonical_blocks(subset: u32, q: u32) -> Vec<u32> {
    let items: Vec<u32> = bit_indices(subset).collect();
    let b = items.len().min(q as usize).max(1);
    let mut blocks = vec![0u32; b];
    for (j, item) in items.iter().enumerate() {
        blocks[j % b] |= 1 << item;
    }
    blocks
}

/// Builds a rank-`ceil(m/q)` representation of a q-partitioning valuation:
/// one clause per nonempty subset `S`, weighting each block of the canonical
/// partition of `S` with its optimal dual price.
///
/// Construction fails with a deficit certificate as soon as some subset's
/// canonical dual prices cannot reach its value, which proves the valuation
/// is not q-partitioning. Subsets of value 0 contribute no clause.
pub fn mph_witness(v: &Valuation, q: u32) -> Result<MphRepresentation, MphError> {
    if v.m() > MAX_CLASSIFY {
        return Err(MphError::Classify(ClassifyError::TooLarge {
            m: v.m(),
            cap: MAX_CLASSIFY,
        }));
    }
    if q < 2 || q > v.m() {
        return Err(MphError::Classify(ClassifyError::QOutOfRange { q, m: v.m() }));
    }
    let k = v.m().div_ceil(q);
    let mut clauses = Vec::new();
    for subset in 1..=v.ground_set() {
        let target = v.value(subset);
        if target.is_zero() {
            continue;
        }
        let part = Partition::new(canonical_blocks(subset, q))?;
        let (covered, prices) = dual_prices(v, &part)?;
        if &covered < target {
            return Err(MphError::NotQPartitioning {
                subset,
                covered,
                target: target.clone(),
            });
        }
        let weights = part
            .blocks()
            .iter()
            .zip(prices)
            .map(|(block, p)| (*block, p));
        clauses.push(PhClause::new(k, weights)?);
    }
    MphRepresentation::new(k, clauses)
}

/// Explicit rank-`k` representation of the binomial floor family: one clause
/// counting the `k`-subsets of the ground set, plus one constant clause per
/// nonempty subset `S` carrying the floor `C(m, k)/2` on the lowest
/// `min(k, |S|)`-subset of `S`.
///
/// Together with the classifier this separates representability from
/// partition level: the represented valuation is subadditive and rank-`k`
/// representable, yet not q-partitioning for `k = ceil(m/q)`.
pub fn binomial_floor_mph(m: u32, k: u32) -> Result<MphRepresentation, MphError> {
    if m < 2 || m > MAX_EXHAUSTIVE || k < 1 || k > m {
        return Err(MphError::FloorParameter { m, k });
    }
    let floor = binomial(m, k) * rat(1, 2);
    let mut clauses = Vec::new();

    let full = crate::bits::full_mask(m);
    let mut count_weights = Vec::new();
    for edge in 0..=full {
        if edge.count_ones() == k {
            count_weights.push((edge, rat(1, 1)));
        }
    }
    clauses.push(PhClause::new(k, count_weights)?);

    for subset in 1..=full {
        let take = subset.count_ones().min(k);
        let mut edge = 0u32;
        for item in bit_indices(subset).take(take as usize) {
            edge |= 1 << item;
        }
        clauses.push(PhClause::new(k, [(edge, floor.clone())])?);
    }
    MphRepresentation::new(k, clauses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::is_q_partitioning;
    use crate::setfn::{check_axioms, gen_binomial_floor, gen_threshold, gen_xos};
    use crate::{rat, rat_int};

    #[test]
    fn clause_validation_and_eval() {
        let c = PhClause::new(2, [(0b011, rat_int(2)), (0b100, rat_int(1)), (0b001, rat_int(0))])
            .unwrap();
        assert_eq!(c.eval(0b011), rat_int(2));
        assert_eq!(c.eval(0b111), rat_int(3));
        assert_eq!(c.eval(0b100), rat_int(1));
        assert_eq!(c.eval(0), rat_int(0));
        assert_eq!(c.weights().len(), 2);
        assert!(matches!(
            PhClause::new(1, [(0b011, rat_int(1))]),
            Err(MphError::EdgeTooLarge { .. })
        ));
        assert!(matches!(
            PhClause::new(2, [(0b01, rat(-1, 2))]),
            Err(MphError::NegativeWeight { .. })
        ));
    }

    #[test]
    fn rank_one_clause_is_additive_and_empty_rep_is_zero() {
        let c = PhClause::new(1, [(0b001, rat_int(1)), (0b010, rat_int(2)), (0b100, rat_int(4))])
            .unwrap();
        let rep = MphRepresentation::new(1, vec![c]).unwrap();
        for subset in 0..8u32 {
            let additive: i64 = [1, 2, 4]
                .iter()
                .enumerate()
                .filter(|(i, _)| subset & (1 << i) != 0)
                .map(|(_, w)| w)
                .sum();
            assert_eq!(eval_mph(&rep, subset), rat_int(additive));
        }
        let empty = MphRepresentation::new(3, vec![]).unwrap();
        assert_eq!(eval_mph(&empty, 0b101), rat_int(0));
    }

    #[test]
    fn representation_rejects_mixed_ranks() {
        let a = PhClause::new(1, [(0b1, rat_int(1))]).unwrap();
        let b = PhClause::new(2, [(0b11, rat_int(1))]).unwrap();
        assert!(matches!(
            MphRepresentation::new(1, vec![a, b]),
            Err(MphError::MixedRanks { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn witness_of_threshold_verifies_at_rank_two() {
        let v = gen_threshold(5, &rat(3, 2)).unwrap();
        let rep = mph_witness(&v, 3).unwrap();
        assert_eq!(rep.k(), 2);
        verify_mph(&rep, &v).unwrap();
        for clause in rep.clauses() {
            for edge in clause.weights().keys() {
                assert!(edge.count_ones() <= 2);
            }
        }
    }

    #[test]
    fn witness_of_xos_has_rank_one() {
        let v = gen_xos(
            3,
            &[vec![rat_int(1), rat_int(0), rat_int(1)], vec![rat_int(0), rat_int(2), rat_int(0)]],
        )
        .unwrap();
        let rep = mph_witness(&v, 3).unwrap();
        assert_eq!(rep.k(), 1);
        verify_mph(&rep, &v).unwrap();
    }

    #[test]
    fn clause_subevaluations_never_exceed_the_valuation() {
        let v = gen_threshold(4, &rat(4, 3)).unwrap();
        let rep = mph_witness(&v, 4).unwrap();
        for clause in rep.clauses() {
            for subset in 0..=v.ground_set() {
                assert!(&clause.eval(subset) <= v.value(subset));
            }
        }
    }

    #[test]
    fn witness_rejects_with_a_deficit_certificate() {
        let v = gen_binomial_floor(6, 2).unwrap();
        let err = mph_witness(&v, 3).unwrap_err();
        assert_eq!(
            err,
            MphError::NotQPartitioning {
                subset: 0b111111,
                covered: rat(45, 4),
                target: rat_int(15),
            }
        );
    }

    #[test]
    fn tampered_weight_fails_verification() {
        let v = gen_threshold(4, &rat(4, 3)).unwrap();
        let rep = mph_witness(&v, 3).unwrap();
        let mut clauses: Vec<PhClause> = rep.clauses().to_vec();
        let first = &clauses[0];
        let (&edge, w) = first.weights().iter().next().unwrap();
        let mut bumped: Vec<(u32, Rat)> =
            first.weights().iter().map(|(e, w)| (*e, w.clone())).collect();
        let slot = bumped.iter_mut().find(|(e, _)| *e == edge).unwrap();
        slot.1 = w + rat_int(1);
        clauses[0] = PhClause::new(rep.k(), bumped).unwrap();
        let tampered = MphRepresentation::new(rep.k(), clauses).unwrap();
        let cex = verify_mph(&tampered, &v).unwrap_err();
        assert!(cex.represented > cex.expected);
    }

    #[test]
    fn floor_family_separates_rank_from_level() {
        let v = gen_binomial_floor(6, 2).unwrap();
        let rep = binomial_floor_mph(6, 2).unwrap();
        assert_eq!(rep.k(), 2);
        verify_mph(&rep, &v).unwrap();
        assert!(check_axioms(&v).unwrap().subadditive);
        assert!(!is_q_partitioning(&v, 3).unwrap());
    }

    #[test]
    fn parameter_validation() {
        let v = gen_threshold(4, &rat(4, 3)).unwrap();
        assert!(matches!(
            mph_witness(&v, 1),
            Err(MphError::Classify(ClassifyError::QOutOfRange { .. }))
        ));
        assert!(matches!(
            mph_witness(&v, 5),
            Err(MphError::Classify(ClassifyError::QOutOfRange { .. }))
        ));
        let big = gen_threshold(9, &rat(3, 2)).unwrap();
        assert!(matches!(
            mph_witness(&big, 3),
            Err(MphError::Classify(ClassifyError::TooLarge { .. }))
        ));
        assert!(matches!(
            binomial_floor_mph(1, 1),
            Err(MphError::FloorParameter { .. })
        ));
        assert!(matches!(
            binomial_floor_mph(6, 7),
            Err(MphError::FloorParameter { .. })
        ));
    }
}
