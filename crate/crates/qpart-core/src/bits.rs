//! Bitmask helpers for subsets of the ground set.
//!
//! Item `i` (1-based) is encoded as bit `i - 1`, so the mask for `{1, 3}` is
//! `0b101`. Little-endian throughout: the numerically smallest mask containing
//! a given item set is the canonical encoding.

/// Mask with the lowest `m` bits set, i.e. the full ground set `[m]`.
pub(crate) fn full_mask(m: u32) -> u32 {
    debug_assert!(m <= 31);
    (1u32 << m) - 1
}

/// Iterator over the set bit positions of a mask, ascending.
pub(crate) fn bit_indices(mask: u32) -> BitIndices {
    BitIndices(mask)
}

pub(crate) struct BitIndices(u32);

impl Iterator for BitIndices {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(i)
    }
}

/// Iterator over all submasks of `universe` (including 0 and `universe`
/// itself), in increasing numeric order.
pub(crate) fn submasks(universe: u32) -> Submasks {
    Submasks {
        universe,
        next: Some(0),
    }
}

pub(crate) struct Submasks {
    universe: u32,
    next: Option<u32>,
}

impl Iterator for Submasks {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        let cur = self.next?;
        self.next = if cur == self.universe {
            None
        } else {
            // Standard trick: adding the complement's low bits carries into
            // the next-larger submask.
            Some((cur.wrapping_sub(self.universe)) & self.universe)
        };
        Some(cur)
    }
}
