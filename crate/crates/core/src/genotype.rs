//! Search-space elements: fixed-length bitstrings and permutations of `[n]`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

const WORD: usize = 64;

/// Which kind of genotype a problem is defined over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Representation {
    Bits,
    Perm,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Representation::Bits => f.write_str("bits"),
            Representation::Perm => f.write_str("perm"),
        }
    }
}

/// A bitstring of length `n`, packed little-endian into 64-bit words.
///
/// Bits past `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = BitString {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        s.clear_tail();
        s
    }

    /// `ones` leading one-bits followed by zeros.
    pub fn prefix_ones(len: usize, ones: usize) -> Self {
        let mut s = BitString::zeros(len);
        for i in 0..ones.min(len) {
            s.set(i, true);
        }
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = BitString::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            s.set(i, b);
        }
        s
    }

    /// Builds a bitstring from the low `len` bits of `value`, bit 0 first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut s = BitString {
            words: vec![value; words_for(len)],
            len,
        };
        s.clear_tail();
        s
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut s = BitString {
            words: (0..words_for(len)).map(|_| rng.gen::<u64>()).collect(),
            len,
        };
        s.clear_tail();
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Length of the maximal all-ones prefix.
    pub fn leading_ones(&self) -> usize {
        let mut total = 0;
        for &w in &self.words {
            let run = w.trailing_ones() as usize;
            total += run;
            if run < WORD {
                break;
            }
        }
        total.min(self.len)
    }

    pub fn complement(&self) -> Self {
        let mut s = BitString {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        s.clear_tail();
        s
    }

    pub fn hamming(&self, other: &BitString) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Positions taken from `self` where `mask` is set, from `other` elsewhere.
    pub fn blend(&self, other: &BitString, mask: &BitString) -> Self {
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .zip(&mask.words)
            .map(|((a, b), m)| (a & m) | (b & !m))
            .collect();
        BitString {
            words,
            len: self.len,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(input_err(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BitString::from_bools(&bits))
    }
}

/// A permutation of `{0, .., n-1}`; displayed and parsed one-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<u32>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u32).collect())
    }

    pub fn reversed(n: usize) -> Self {
        Permutation((0..n as u32).rev().collect())
    }

    /// Validates that `values` contains each of `0..n` exactly once.
    pub fn from_zero_based(values: Vec<u32>) -> Result<Self> {
        let n = values.len();
        let mut seen = vec![false; n];
        for &v in &values {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(input_err(format!(
                    "{values:?} is not a permutation of 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Permutation(values))
    }

    pub fn from_one_based(values: &[u32]) -> Result<Self> {
        if values.contains(&0) {
            return Err(input_err("one-based permutation contains 0"));
        }
        Self::from_zero_based(values.iter().map(|v| v - 1).collect())
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut p = Permutation::identity(n);
        p.0.shuffle(rng);
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn swap(&mut self, i: usize, j: usize) {
        self.0.swap(i, j);
    }

    pub fn is_valid(&self) -> bool {
        Self::from_zero_based(self.0.clone()).is_ok()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", v + 1)?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{self}")
    }
}

/// An element of the search space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Genotype {
    Bits(BitString),
    Perm(Permutation),
}

impl Genotype {
    pub fn representation(&self) -> Representation {
        match self {
            Genotype::Bits(_) => Representation::Bits,
            Genotype::Perm(_) => Representation::Perm,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Genotype::Bits(b) => b.len(),
            Genotype::Perm(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Uniform sample from the `n`-element space of the given representation.
    pub fn random<R: Rng + ?Sized>(repr: Representation, n: usize, rng: &mut R) -> Self {
        match repr {
            Representation::Bits => Genotype::Bits(BitString::random(n, rng)),
            Representation::Perm => Genotype::Perm(Permutation::random(n, rng)),
        }
    }

    pub fn as_bits(&self) -> Result<&BitString> {
        match self {
            Genotype::Bits(b) => Ok(b),
            Genotype::Perm(_) => Err(Error::Representation(
                "expected a bitstring, found a permutation".into(),
            )),
        }
    }

    pub fn as_perm(&self) -> Result<&Permutation> {
        match self {
            Genotype::Perm(p) => Ok(p),
            Genotype::Bits(_) => Err(Error::Representation(
                "expected a permutation, found a bitstring".into(),
            )),
        }
    }
}

impl fmt::Display for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Genotype::Bits(b) => b.fmt(f),
            Genotype::Perm(p) => p.fmt(f),
        }
    }
}

impl fmt::Debug for Genotype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Genotype::Bits(b) => b.fmt(f),
            Genotype::Perm(p) => p.fmt(f),
        }
    }
}

impl From<BitString> for Genotype {
    fn from(b: BitString) -> Self {
        Genotype::Bits(b)
    }
}

impl From<Permutation> for Genotype {
    fn from(p: Permutation) -> Self {
        Genotype::Perm(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bitstring_counts() {
        let b: BitString = "1101".parse().unwrap();
        assert_eq!(b.count_ones(), 3);
        assert_eq!(b.leading_ones(), 2);
        assert_eq!(b.to_string(), "1101");
        assert_eq!(BitString::ones(130).leading_ones(), 130);
        assert_eq!(BitString::ones(130).count_ones(), 130);
        assert_eq!(BitString::zeros(3).leading_ones(), 0);
    }

    #[test]
    fn long_prefix_crosses_words() {
        let b = BitString::prefix_ones(200, 70);
        assert_eq!(b.leading_ones(), 70);
        assert_eq!(b.count_ones(), 70);
        assert_eq!(b.complement().count_ones(), 130);
    }

    #[test]
    fn random_bits_respect_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1, 5, 63, 64, 65, 100] {
            let b = BitString::random(n, &mut rng);
            assert_eq!(b.len(), n);
            assert!(b.count_ones() <= n);
            assert_eq!(b.complement().complement(), b);
        }
    }

    #[test]
    fn blend_takes_masked_positions() {
        let u: BitString = "1100".parse().unwrap();
        let v: BitString = "0011".parse().unwrap();
        let m: BitString = "1010".parse().unwrap();
        assert_eq!(u.blend(&v, &m).to_string(), "1001");
    }

    #[test]
    fn permutation_validation() {
        assert!(Permutation::from_zero_based(vec![2, 0, 1]).is_ok());
        assert!(Permutation::from_zero_based(vec![0, 0, 1]).is_err());
        assert!(Permutation::from_zero_based(vec![0, 3, 1]).is_err());
        let p = Permutation::from_one_based(&[2, 1, 3]).unwrap();
        assert_eq!(p.to_string(), "(2,1,3)");
        assert!(Permutation::random(9, &mut ChaCha8Rng::seed_from_u64(3)).is_valid());
    }
}
