//! Class and selector identities.
//!
//! Every class and generic receives a 24-bit identity drawn from a full-period
//! linear congruential generator over `Z/2^24`. Because the generator visits
//! every residue exactly once per period, identities are unique until the
//! period is exhausted, and their low bits are uniformly distributed, which
//! is what makes `id & (table_size - 1)` usable as a direct table index.
//!
//! Class identities additionally carry the class rank (inheritance depth)
//! in the high 8 bits of the 32-bit word.

use std::fmt;

use crate::error::DefineError;

pub const IDENTITY_BITS: u32 = 24;
pub const IDENTITY_MASK: u32 = (1 << IDENTITY_BITS) - 1;

pub const LCG_MULTIPLIER: u32 = 1_664_525;
pub const LCG_INCREMENT: u32 = 1_013_904_223;

/// Number of identities that can be issued before the generator wraps.
pub const ID_CAPACITY: u32 = IDENTITY_MASK;

/// One step of the identity generator, modulo 2^24.
#[inline]
pub fn lcg_step(state: u32) -> u32 {
    LCG_MULTIPLIER
        .wrapping_mul(state)
        .wrapping_add(LCG_INCREMENT)
        & IDENTITY_MASK
}

/// 32-bit class identity word: `rank << 24 | identity`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassId(u32);

impl ClassId {
    pub const NIL: ClassId = ClassId(0);

    pub fn new(identity: u32, rank: u32) -> ClassId {
        debug_assert!(identity & !IDENTITY_MASK == 0);
        ClassId((rank.min(255) << IDENTITY_BITS) | (identity & IDENTITY_MASK))
    }

    #[inline]
    pub fn from_word(word: u32) -> ClassId {
        ClassId(word)
    }

    #[inline]
    pub fn word(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn identity(self) -> u32 {
        self.0 & IDENTITY_MASK
    }

    #[inline]
    pub fn rank_bits(self) -> u32 {
        self.0 >> IDENTITY_BITS
    }

    #[inline]
    pub fn is_nil(self) -> bool {
        self.identity() == 0
    }
}

impl fmt::Debug for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassId({:#08x}, rank {})", self.identity(), self.rank_bits())
    }
}

/// Issues identities from the LCG stream, skipping the reserved value 0.
#[derive(Debug, Clone)]
pub struct IdGenerator {
    state: u32,
    issued: u32,
}

impl Default for IdGenerator {
    fn default() -> Self {
        IdGenerator::with_seed(0)
    }
}

impl IdGenerator {
    pub fn with_seed(seed: u32) -> Self {
        IdGenerator {
            state: seed & IDENTITY_MASK,
            issued: 0,
        }
    }

    pub fn issued(&self) -> u32 {
        self.issued
    }

    /// Next raw 24-bit identity, never 0 and never repeated.
    pub fn next_identity(&mut self) -> Result<u32, DefineError> {
        if self.issued >= ID_CAPACITY {
            return Err(DefineError::CapacityExhausted);
        }
        loop {
            self.state = lcg_step(self.state);
            if self.state != 0 {
                break;
            }
        }
        self.issued += 1;
        Ok(self.state)
    }

    pub fn allocate_class_id(&mut self, rank: u32) -> Result<ClassId, DefineError> {
        Ok(ClassId::new(self.next_identity()?, rank))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    // Brute-force: iterate from the given state until the low-k-bit value
    // repeats the starting low-k-bit *state*; the period of `x mod 2^k` under
    // the LCG is the smallest p with step^p(x) == x (mod 2^k).
    fn low_bit_period(k: u32, start: u32) -> u32 {
        let mask = (1u32 << k) - 1;
        let mut x = start & mask;
        let first = x;
        for p in 1..=(1u32 << k) + 1 {
            x = LCG_MULTIPLIER.wrapping_mul(x).wrapping_add(LCG_INCREMENT) & mask;
            if x == first {
                return p;
            }
        }
        u32::MAX
    }

    #[test]
    fn low_eight_bit_period_is_256() {
        assert_eq!(low_bit_period(8, 12345), 256);
        assert_eq!(low_bit_period(8, 0), 256);
    }

    #[test]
    fn rank_zero_has_empty_rank_bits() {
        let mut gen = IdGenerator::default();
        let id = gen.allocate_class_id(0).unwrap();
        assert_eq!(id.rank_bits(), 0);
        assert_ne!(id.identity(), 0);
    }

    #[test]
    fn rank_bits_saturate() {
        let id = ClassId::new(7, 1000);
        assert_eq!(id.rank_bits(), 255);
        assert_eq!(id.identity(), 7);
    }

    #[test]
    fn first_hundred_thousand_ids_distinct() {
        let mut gen = IdGenerator::default();
        let mut seen = HashSet::new();
        for _ in 0..100_000 {
            let id = gen.next_identity().unwrap();
            assert_ne!(id, 0);
            assert!(seen.insert(id));
        }
    }

    #[test]
    fn capacity_exhaustion_is_reported() {
        let mut gen = IdGenerator::default();
        for _ in 0..ID_CAPACITY {
            gen.next_identity().unwrap();
        }
        assert!(matches!(
            gen.next_identity(),
            Err(DefineError::CapacityExhausted)
        ));
    }
}
