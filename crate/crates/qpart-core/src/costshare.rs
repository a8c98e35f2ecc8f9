//! Cost sharing across the blocks of a partition.
//!
//! A cost function `c` and a partition of `S` into cities `S_1, ..., S_q`
//! induce a cooperative game: a price vector `p` charges city `j` the amount
//! `p_j`, and a coalition `T` of cities accepts the prices only when
//! `sum_{j in T} p_j <= c(union of S_j for j in T)`. The core asks for
//! acceptable prices recovering the full cost `c(S)`; the gamma-relaxed core
//! asks only for a `gamma` fraction of it.
//!
//! Both are exactly the dual side of the cover LP from [`crate::classify`]:
//! the dual optimum is the largest total any acceptable price vector can
//! reach, and the full-coalition constraint pins it at or below `c(S)`. So
//! the core is nonempty exactly when the optimum equals `c(S)`, which holds
//! for every partition into at most `q` cities exactly when `c` is
//! q-partitioning, and the gamma core is nonempty exactly when the optimum
//! reaches `gamma * c(S)`.
//!
//! [`greedy_prices`] trades exactness for a solver-free construction: it
//! repeatedly buys the cheapest uncovered coalition at its per-new-city
//! rate, discounted by the harmonic number `H_{q-1}`. On subadditive costs
//! the result respects every proper coalition constraint and still collects
//! at least `c(S) / H_{q-1}`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::bits::bit_indices;
use crate::classify::{dual_prices, ClassifyError, Partition};
use crate::setfn::{check_axioms, SetFnError, Valuation};
use crate::{harmonic, rat_int, Rat};

/// Errors from the cost-sharing constructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostShareError {
    /// Partition or size problem, forwarded from the classifier.
    Classify(ClassifyError),
    /// `gamma` outside `(0, 1]`.
    GammaOutOfRange,
    /// The greedy allocator requires at least two cities.
    TooFewCities { k: usize },
    /// The greedy allocator's subadditivity precondition failed; the masks
    /// witness `g(s | t) > g(s) + g(t)`.
    NotSubadditive { s: u32, t: u32 },
    /// Ground set too large to verify the subadditivity precondition.
    TooLarge(SetFnError),
}

impl fmt::Display for CostShareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostShareError::Classify(e) => e.fmt(f),
            CostShareError::GammaOutOfRange => write!(f, "gamma must lie in (0, 1]"),
            CostShareError::TooFewCities { k } => {
                write!(f, "greedy pricing needs at least 2 cities, got {k}")
            }
            CostShareError::NotSubadditive { s, t } => {
                write!(f, "cost function is not subadditive at masks {s} and {t}")
            }
            CostShareError::TooLarge(e) => e.fmt(f),
        }
    }
}

impl From<ClassifyError> for CostShareError {
    fn from(e: ClassifyError) -> Self {
        CostShareError::Classify(e)
    }
}

/// Per-city prices with their total and a feasibility verdict.
///
/// When `feasible` is true every coalition constraint holds and the total
/// meets the construction's target; when false the vector is the best
/// acceptable one found and `total` certifies the shortfall.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PriceVector {
    /// Price charged to each city, indexed like the partition blocks.
    pub prices: Vec<Rat>,
    /// Sum of the prices.
    pub total: Rat,
    /// Whether the construction met its target.
    pub feasible: bool,
}

impl PriceVector {
    fn new(prices: Vec<Rat>, feasible: bool) -> Self {
        let total = prices.iter().cloned().sum();
        PriceVector { prices, total, feasible }
    }
}

/// First violated coalition constraint, if any: the block index set `T`
/// with `sum_{j in T} p_j > c(union of blocks in T)`, with both sides.
pub fn coalition_violation(
    c: &Valuation,
    part: &Partition,
    prices: &[Rat],
) -> Option<(u32, Rat, Rat)> {
    let k = part.k().min(prices.len());
    for t in 1..(1u32 << k) {
        let mut charged = Rat::zero();
        let mut union = 0u32;
        for j in bit_indices(t) {
            charged += &prices[j as usize];
            union |= part.blocks()[j as usize];
        }
        let cost = c.value(union);
        if &charged > cost {
            return Some((t, charged, cost.clone()));
        }
    }
    None
}

fn floor_prices(c: &Valuation, part: &Partition, floor: &Rat) -> Result<PriceVector, CostShareError> {
    let (value, prices) = dual_prices(c, part)?;
    let feasible = &value >= floor;
    Ok(PriceVector { prices, total: value, feasible })
}

/// Core prices: acceptable to every coalition and recovering `c(S)` in
/// full. The dual LP's full-coalition row caps its optimum at `c(S)`, so a
/// feasible result has total exactly `c(S)`; otherwise `feasible` is false
/// and `total` is the LP optimum, certifying that no acceptable vector
/// collects more.
pub fn citycore_prices(c: &Valuation, part: &Partition) -> Result<PriceVector, CostShareError> {
    floor_prices(c, part, c.value(part.subset()))
}

/// Relaxed core prices: acceptable to every coalition and recovering at
/// least `gamma * c(S)`. Feasible for every partition into at most `q`
/// cities exactly when `closeness(c, q) >= gamma`.
pub fn gamma_citycore_prices(
    c: &Valuation,
    part: &Partition,
    gamma: &Rat,
) -> Result<PriceVector, CostShareError> {
    if gamma <= &Rat::zero() || gamma > &rat_int(1) {
        return Err(CostShareError::GammaOutOfRange);
    }
    floor_prices(c, part, &(gamma * c.value(part.subset())))
}

/// Solver-free price construction for subadditive costs.
///
/// Repeatedly selects the coalition `A` minimizing
/// `g(union of S_i for i in A) / |A \ C|` over coalitions adding at least
/// one new city to the covered set `C` (ties: fewest new cities, then
/// smallest bitmask), prices each new city at the selected rate discounted
/// by `H_{q-1}`, and finally scales everything down if the total exceeds
/// `g(S)`. Each city is priced exactly once and never repriced.
///
/// The result satisfies every proper coalition constraint, the final
/// scaling enforces the full-coalition one, and the total is at least
/// `g(S) / H_{q-1}`.
pub fn greedy_prices(g: &Valuation, part: &Partition) -> Result<PriceVector, CostShareError> {
    let q = part.k();
    if q < 2 {
        return Err(CostShareError::TooFewCities { k: q });
    }
    if part.subset() > g.ground_set() {
        return Err(CostShareError::Classify(ClassifyError::OutsideGroundSet {
            mask: part.subset(),
            m: g.m(),
        }));
    }
    let report = check_axioms(g).map_err(CostShareError::TooLarge)?;
    if !report.subadditive {
        let (s, t) = report.subadditive_witness.expect("witness accompanies failure");
        return Err(CostShareError::NotSubadditive { s, t });
    }

    let discount = harmonic(q as u32 - 1);
    let mut prices = vec![Rat::zero(); q];
    let mut covered = 0u32;
    let full = (1u32 << q) - 1;
    while covered != full {
        let mut best: Option<(Rat, u32, u32)> = None;
        for a in 1..=full {
            let new = a & !covered;
            if new == 0 {
                continue;
            }
            let mut union = 0u32;
            for j in bit_indices(a) {
                union |= part.blocks()[j as usize];
            }
            let ratio = g.value(union) / rat_int(i64::from(new.count_ones()));
            let candidate = (ratio, new.count_ones(), a);
            let better = match &best {
                None => true,
                Some((r, n, m)) => {
                    (&candidate.0, &candidate.1, &candidate.2) < (r, n, m)
                }
            };
            if better {
                best = Some(candidate);
            }
        }
        let (_, _, a) = best.expect("an uncovered coalition always exists");
        let new = a & !covered;
        let mut union = 0u32;
        for j in bit_indices(a) {
            union |= part.blocks()[j as usize];
        }
        let rate = g.value(union) / (rat_int(i64::from(new.count_ones())) * &discount);
        for j in bit_indices(new) {
            prices[j as usize] = rate.clone();
        }
        covered |= a;
    }

    let cost = g.value(part.subset());
    let total: Rat = prices.iter().cloned().sum();
    if &total > cost && !total.is_zero() {
        let scale = cost / &total;
        for p in &mut prices {
            *p *= &scale;
        }
    }
    Ok(PriceVector::new(prices, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfn::{gen_binomial_floor, gen_setcover_f2, gen_threshold};
    use crate::{rat, rat_int};

    fn additive(weights: &[i64]) -> Valuation {
        let clause: Vec<Rat> = weights.iter().map(|w| rat_int(*w)).collect();
        crate::setfn::gen_xos(weights.len() as u32, &[clause]).unwrap()
    }

    #[test]
    fn citycore_additive_prices_each_city_at_cost() {
        let c = additive(&[1, 2, 4, 8]);
        let part = Partition::new(vec![0b0011, 0b0100, 0b1000]).unwrap();
        let pv = citycore_prices(&c, &part).unwrap();
        assert!(pv.feasible);
        assert_eq!(pv.prices, vec![rat_int(3), rat_int(4), rat_int(8)]);
        assert_eq!(pv.total, rat_int(15));
        assert!(coalition_violation(&c, &part, &pv.prices).is_none());
    }

    #[test]
    fn citycore_detects_the_deficit() {
        let c = gen_binomial_floor(6, 2).unwrap();
        let part = Partition::new(vec![0b000011, 0b001100, 0b110000]).unwrap();
        let pv = citycore_prices(&c, &part).unwrap();
        assert!(!pv.feasible);
        assert_eq!(pv.total, rat(45, 4));
        assert_eq!(*c.value(0b111111), rat_int(15));
        assert!(coalition_violation(&c, &part, &pv.prices).is_none());
    }

    #[test]
    fn citycore_feasible_inside_the_class() {
        let c = gen_threshold(5, &rat(3, 2)).unwrap();
        for blocks in [
            vec![0b00011u32, 0b00100, 0b11000],
            vec![0b00001, 0b11110],
            vec![0b10101, 0b01010],
        ] {
            let part = Partition::new(blocks).unwrap();
            let pv = citycore_prices(&c, &part).unwrap();
            assert!(pv.feasible);
            assert_eq!(&pv.total, c.value(part.subset()));
            assert!(coalition_violation(&c, &part, &pv.prices).is_none());
        }
    }

    #[test]
    fn gamma_relaxation_tracks_closeness() {
        let c = gen_threshold(5, &rat_int(2)).unwrap();
        let part = Partition::new(vec![0b00011, 0b01100, 0b10000]).unwrap();
        // closeness(c, 3) = 3/4, so the relaxed core is tight at 3/4.
        let at_closeness = gamma_citycore_prices(&c, &part, &rat(3, 4)).unwrap();
        assert!(at_closeness.feasible);
        assert_eq!(at_closeness.total, rat(3, 2));
        let at_one = gamma_citycore_prices(&c, &part, &rat_int(1)).unwrap();
        assert!(!at_one.feasible);
        let tiny = gamma_citycore_prices(&c, &part, &rat(1, 1000)).unwrap();
        assert!(tiny.feasible);
    }

    #[test]
    fn gamma_parameter_is_validated() {
        let c = gen_threshold(4, &rat(4, 3)).unwrap();
        let part = Partition::new(vec![0b0011, 0b1100]).unwrap();
        for bad in [rat_int(0), rat(-1, 2), rat(3, 2)] {
            assert_eq!(
                gamma_citycore_prices(&c, &part, &bad),
                Err(CostShareError::GammaOutOfRange)
            );
        }
    }

    #[test]
    fn greedy_buys_the_pair_on_the_unit_cost() {
        let g = gen_threshold(2, &rat_int(1)).unwrap();
        let part = Partition::new(vec![0b01, 0b10]).unwrap();
        let pv = greedy_prices(&g, &part).unwrap();
        assert_eq!(pv.prices, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(pv.total, rat_int(1));
        assert!(coalition_violation(&g, &part, &pv.prices).is_none());
    }

    #[test]
    fn greedy_additive_two_cities_is_exact() {
        let g = additive(&[1, 2, 4]);
        let part = Partition::new(vec![0b011, 0b100]).unwrap();
        let pv = greedy_prices(&g, &part).unwrap();
        assert_eq!(pv.prices, vec![rat_int(3), rat_int(4)]);
        assert_eq!(pv.total, rat_int(7));
    }

    #[test]
    fn greedy_parity_setcover_trace() {
        let g = gen_setcover_f2(2).unwrap();
        let part = Partition::new(vec![0b001, 0b010, 0b100]).unwrap();
        let pv = greedy_prices(&g, &part).unwrap();
        // First round buys the lexicographically first pair at rate
        // 1/(2 * H_2), second round buys the last singleton at 1/H_2.
        assert_eq!(pv.prices, vec![rat(1, 3), rat(1, 3), rat(2, 3)]);
        assert_eq!(pv.total, rat(4, 3));
        assert_eq!(pv.total, g.value(0b111) / harmonic(2));
        assert!(coalition_violation(&g, &part, &pv.prices).is_none());
    }

    #[test]
    fn greedy_caps_an_overshooting_total() {
        // Singleton picks would collect 1 + 10 = 11 > g(S) = 10.
        let g = Valuation::new(2, vec![rat_int(0), rat_int(1), rat_int(10), rat_int(10)])
            .unwrap();
        let part = Partition::new(vec![0b01, 0b10]).unwrap();
        let pv = greedy_prices(&g, &part).unwrap();
        assert_eq!(pv.total, rat_int(10));
        assert_eq!(pv.prices, vec![rat(10, 11), rat(100, 11)]);
        assert!(coalition_violation(&g, &part, &pv.prices).is_none());
        assert!(pv.total >= g.value(0b11) / harmonic(1));
    }

    #[test]
    fn greedy_rejects_bad_inputs() {
        let bumpy = Valuation::new(2, vec![rat_int(0), rat_int(1), rat_int(1), rat_int(3)])
            .unwrap();
        let part = Partition::new(vec![0b01, 0b10]).unwrap();
        assert!(matches!(
            greedy_prices(&bumpy, &part),
            Err(CostShareError::NotSubadditive { .. })
        ));
        let g = gen_threshold(3, &rat(3, 2)).unwrap();
        let single = Partition::new(vec![0b111]).unwrap();
        assert_eq!(
            greedy_prices(&g, &single),
            Err(CostShareError::TooFewCities { k: 1 })
        );
    }

    #[test]
    fn greedy_meets_the_harmonic_floor_on_small_instances() {
        for v in [
            gen_threshold(4, &rat(3, 2)).unwrap(),
            gen_threshold(5, &rat_int(2)).unwrap(),
            gen_setcover_f2(2).unwrap(),
        ] {
            let full = v.ground_set();
            for part in crate::classify::enumerate_partitions(full, 3) {
                let pv = greedy_prices(&v, &part).unwrap();
                let floor = v.value(full) / harmonic(part.k() as u32 - 1);
                assert!(pv.total >= floor, "total {} below floor {}", pv.total, floor);
                assert!(coalition_violation(&v, &part, &pv.prices).is_none());
            }
        }
    }
}
