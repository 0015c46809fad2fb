//! Vectors over GF(2) of length at most 64 and the bases used to build
//! invariant Markov bases. Bit `k` stands for component `Γ_{k+2}`.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gf2Vector {
    bits: u64,
    len: u32,
}

impl Gf2Vector {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(len <= 64, "GF(2) vectors hold at most 64 coordinates");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        Gf2Vector { bits: bits & mask, len: len as u32 }
    }

    pub fn zero(len: usize) -> Self {
        Gf2Vector::new(0, len)
    }

    pub fn unit(k: usize, len: usize) -> Self {
        assert!(k < len);
        Gf2Vector::new(1 << k, len)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.len == 0
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn get(self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    pub fn xor(self, other: Self) -> Self {
        debug_assert_eq!(self.len, other.len);
        Gf2Vector { bits: self.bits ^ other.bits, len: self.len }
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len() {
            f.write_str(if self.get(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Rank over GF(2) by Gaussian elimination.
pub fn rank(vectors: &[Gf2Vector]) -> usize {
    let mut pivots: Vec<u64> = Vec::new();
    for v in vectors {
        let mut x = v.bits;
        for &p in &pivots {
            x = x.min(x ^ p);
        }
        if x != 0 {
            pivots.push(x);
            pivots.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    pivots.len()
}

pub fn is_basis(vectors: &[Gf2Vector], len: usize) -> bool {
    vectors.len() == len && vectors.iter().all(|v| v.len() == len) && rank(vectors) == len
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Flavor {
    /// `v_k` has ones in every coordinate from `k-2` on.
    #[default]
    Staircase,
    /// Unit vectors.
    Standard,
}

/// The basis `v_2..v_c` of `GF(2)^{c-1}` for the given flavor.
pub fn default_basis(c: usize, flavor: Flavor) -> Vec<Gf2Vector> {
    let len = c.saturating_sub(1);
    (0..len)
        .map(|k| match flavor {
            Flavor::Standard => Gf2Vector::unit(k, len),
            Flavor::Staircase => {
                let ones = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
                Gf2Vector::new(ones & !((1u64 << k) - 1), len)
            }
        })
        .collect()
}

/// A uniformly drawn invertible basis of `GF(2)^{len}`.
pub fn random_basis<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<Gf2Vector> {
    loop {
        let vs: Vec<Gf2Vector> = (0..len).map(|_| Gf2Vector::new(rng.gen(), len)).collect();
        if rank(&vs) == len {
            return vs;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use rand::SeedableRng;

    #[test]
    fn staircase_for_four_components() {
        let b = default_basis(4, Flavor::Staircase);
        let bits: Vec<u64> = b.iter().map(|v| v.bits()).collect();
        assert_eq!(bits, vec![0b111, 0b110, 0b100]);
        assert_eq!(alloc::format!("{:?}", b[1]), "011");
        assert!(is_basis(&b, 3));
    }

    #[test]
    fn standard_is_identity() {
        let b = default_basis(3, Flavor::Standard);
        assert_eq!(b.iter().map(|v| v.bits()).collect::<Vec<_>>(), vec![1, 2]);
        assert!(default_basis(1, Flavor::Standard).is_empty());
    }

    #[test]
    fn rank_detects_dependence() {
        let vs = [Gf2Vector::new(0b011, 3), Gf2Vector::new(0b110, 3), Gf2Vector::new(0b101, 3)];
        assert_eq!(rank(&vs), 2);
        assert!(!is_basis(&vs, 3));
    }

    proptest! {
        #[test]
        fn defaults_are_bases(c in 1usize..40) {
            prop_assert!(is_basis(&default_basis(c, Flavor::Staircase), c - 1));
            prop_assert!(is_basis(&default_basis(c, Flavor::Standard), c - 1));
        }

        #[test]
        fn random_bases_have_full_rank(len in 0usize..20, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            prop_assert!(is_basis(&random_basis(len, &mut rng), len));
        }
    }
}
