//! Exact tooling for q-partitioning valuations.
//!
//! A valuation is a set function `v : 2^[m] -> Q_{>=0}` with `v(empty) = 0`,
//! stored as a dense table of exact rationals indexed by bitmask. The
//! q-partitioning classes interpolate between the two classical complement-free
//! hierarchies: `Q(2)` is exactly the subadditive valuations, `Q(m)` is exactly
//! the fractionally subadditive (XOS) valuations, and the chain
//! `Q(m) ⊂ Q(m-1) ⊂ ... ⊂ Q(2)` is strict. Membership in `Q(q)` asks that for
//! every subset `S`, every partition of `S` into at most `q` blocks, and every
//! fractional cover `alpha` of the block indices,
//! `sum_T alpha(T) * v(union of blocks in T) >= v(S)`.
//!
//! The crate provides:
//!
//! * [`setfn`]: valuation storage, axiom checking, and instance generators;
//! * [`lp`]: an exact rational simplex solver (the only LP kernel used here);
//! * [`classify`]: cover LPs, partition enumeration, membership tests, the
//!   partition level, and closeness measurements;
//! * [`costshare`]: cost-sharing price vectors (city core, relaxed core, and a
//!   greedy scheme with a harmonic-number guarantee);
//! * [`mph`]: maximum-over-positive-hypergraphs representations and the
//!   witness construction for q-partitioning valuations;
//! * [`concentration`]: root solvers for isoperimetric base constants,
//!   exhaustive isoperimetric verification on small product spaces, tail
//!   bounds, self-bounding checks, and seeded Monte Carlo sampling;
//! * [`posted`]: posted-price min-max quantities and a take-it-or-leave-it
//!   mechanism simulator.
//!
//! Everything that feeds a classification or pricing decision is computed in
//! exact rational arithmetic; floating point appears only where values are
//! genuinely transcendental (root solving, tail bounds, Monte Carlo summaries).
//!
//! The core is `no_std` (with `alloc`); file formats and the command line live
//! in the companion `qpart` binary crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod classify;
pub mod concentration;
pub mod costshare;
pub mod lp;
pub mod mph;
pub mod posted;
pub mod rng;
pub mod setfn;

mod bits;

use num_bigint::BigInt;

/// Exact rational scalar used throughout the crate.
pub type Rat = num_rational::BigRational;

/// Builds the rational `n / d`. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer rational `n / 1`.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `n`-th harmonic number `H_n = 1 + 1/2 + ... + 1/n` (with `H_0 = 0`).
pub fn harmonic(n: u32) -> Rat {
    let mut h = rat_int(0);
    for i in 1..=n {
        h += rat(1, i64::from(i));
    }
    h
}

/// Nearest binary64 value of a rational (NaN if it overflows conversion).
pub fn to_f64(r: &Rat) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}
