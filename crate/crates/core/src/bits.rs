//! Packed literal vectors.
//!
//! An input with `n` binary features expands into `2n` literals. Literal `k`
//! is the feature `x_k` and literal `n + k` is its negation. Clause include
//! masks use the same layout, so a clause matches an input exactly when
//! `include & !literals` is zero in every word.

const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literals {
    words: Vec<u64>,
    num_features: usize,
}

impl Literals {
    /// Builds literals from a 0/1 feature vector. Any nonzero byte counts as 1.
    pub fn from_bits(bits: &[u8]) -> Self {
        Self::from_fn(bits.len(), |k| bits[k] != 0)
    }

    pub fn from_fn(num_features: usize, mut feature: impl FnMut(usize) -> bool) -> Self {
        let mut words = vec![0u64; words_for(2 * num_features)];
        for k in 0..num_features {
            let lit = if feature(k) { k } else { num_features + k };
            words[lit / WORD] |= 1 << (lit % WORD);
        }
        Self { words, num_features }
    }

    #[inline]
    pub fn num_features(&self) -> usize {
        self.num_features
    }

    #[inline]
    pub fn num_literals(&self) -> usize {
        2 * self.num_features
    }

    #[inline]
    pub fn get(&self, literal: usize) -> bool {
        (self.words[literal / WORD] >> (literal % WORD)) & 1 == 1
    }

    /// Value of the underlying feature (not the literal).
    #[inline]
    pub fn feature(&self, k: usize) -> bool {
        self.get(k)
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Sets or clears bit `index` in a packed word slice.
#[inline]
pub(crate) fn set_bit(words: &mut [u64], index: usize, on: bool) {
    let mask = 1u64 << (index % WORD);
    if on {
        words[index / WORD] |= mask;
    } else {
        words[index / WORD] &= !mask;
    }
}
