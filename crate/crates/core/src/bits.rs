//! Fixed-length bit vectors.
//!
//! [`Mask`] selects rows or columns of a domain and backs every rectangle.
//! [`Pattern`] is a subset of a small witness universe (at most 64 indices).
//!
//! Both order lexicographically from the highest index down, which is the
//! numeric order of the vector read as a binary number with bit `i` worth
//! `2^i`. So `∅ < {0} < {1} < {0,1} < {2}`. This is the canonical order used
//! for every tie-break.

use std::cmp::Ordering;
use std::fmt;

const WORD: usize = 64;

/// A bit vector of fixed length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mask {
    len: usize,
    words: Vec<u64>,
}

impl Mask {
    pub fn zeros(len: usize) -> Self {
        Mask { len, words: vec![0; len.div_ceil(WORD)] }
    }

    pub fn ones(len: usize) -> Self {
        let mut m = Mask { len, words: vec![u64::MAX; len.div_ceil(WORD)] };
        m.clear_tail();
        m
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Mask::zeros(len);
        for i in indices {
            m.set(i, true);
        }
        m
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut m = Mask::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            m.set(i, b);
        }
        m
    }

    /// Parses a string of `0`/`1` characters, index 0 first.
    pub fn parse(s: &str) -> Option<Self> {
        let mut m = Mask::zeros(s.len());
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => m.set(i, true),
                _ => return None,
            }
        }
        Some(m)
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

    /// True when the vector has length zero.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// True when no bit is set.
    pub fn none(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn any(&self) -> bool {
        !self.none()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for mask of length {}", self.len);
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit {i} out of range for mask of length {}", self.len);
        let bit = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= bit;
        } else {
            self.words[i / WORD] &= !bit;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    fn check_len(&self, other: &Mask) {
        assert_eq!(self.len, other.len, "mask length mismatch");
    }

    pub fn and(&self, other: &Mask) -> Mask {
        self.check_len(other);
        Mask { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub fn or(&self, other: &Mask) -> Mask {
        self.check_len(other);
        Mask { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect() }
    }

    /// `self \ other`
    pub fn and_not(&self, other: &Mask) -> Mask {
        self.check_len(other);
        Mask { len: self.len, words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect() }
    }

    pub fn not(&self) -> Mask {
        let mut m = Mask { len: self.len, words: self.words.iter().map(|w| !w).collect() };
        m.clear_tail();
        m
    }

    pub fn intersects(&self, other: &Mask) -> bool {
        self.check_len(other);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &Mask) -> bool {
        self.check_len(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }
}

impl Ord for Mask {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then_with(|| {
            for (a, b) in self.words.iter().zip(&other.words).rev() {
                match a.cmp(b) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Mask {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mask({})", self.to_bitstring())
    }
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bitstring())
    }
}

/// Largest witness universe a [`Pattern`] can index.
pub const MAX_PATTERN_UNIVERSE: usize = 64;

/// A subset of `{0..m-1}` for `m <= 64`.
#[derive(Copy, Clone, PartialEq, Eq, Hash, Default)]
pub struct Pattern(u64);

impl Pattern {
    pub const EMPTY: Pattern = Pattern(0);

    pub fn from_bits(bits: u64) -> Self {
        Pattern(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Pattern(indices.into_iter().fold(0, |acc, i| {
            assert!(i < MAX_PATTERN_UNIVERSE);
            acc | 1 << i
        }))
    }

    /// The full set `{0..m-1}`.
    pub fn full(m: usize) -> Self {
        assert!(m <= MAX_PATTERN_UNIVERSE);
        if m == MAX_PATTERN_UNIVERSE {
            Pattern(u64::MAX)
        } else {
            Pattern((1u64 << m) - 1)
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        if s.len() > MAX_PATTERN_UNIVERSE {
            return None;
        }
        let mut bits = 0u64;
        for (i, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => bits |= 1 << i,
                _ => return None,
            }
        }
        Some(Pattern(bits))
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        i < MAX_PATTERN_UNIVERSE && self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn intersect(self, other: Pattern) -> Pattern {
        Pattern(self.0 & other.0)
    }

    #[inline]
    pub fn union(self, other: Pattern) -> Pattern {
        Pattern(self.0 | other.0)
    }

    #[inline]
    pub fn with(self, i: usize) -> Pattern {
        Pattern(self.0 | 1 << i)
    }

    pub fn is_subset(self, other: Pattern) -> bool {
        self.0 & !other.0 == 0
    }

    /// Highest index plus one, i.e. the smallest universe containing the set.
    pub fn span(self) -> usize {
        MAX_PATTERN_UNIVERSE - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut w = self.0;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let tz = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(tz)
        })
    }

    pub fn min(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn to_bitstring(self, universe: usize) -> String {
        (0..universe).map(|i| if self.contains(i) { '1' } else { '0' }).collect()
    }
}

impl Ord for Pattern {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Pattern {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// `ceil(log2(max(n, 2)))`, the width of an index into a list of `n` items
/// with the one-bit floor used for declared costs.
pub fn index_width(n: usize) -> u32 {
    let n = n.max(2);
    usize::BITS - (n - 1).leading_zeros()
}

/// `ceil(log2(n))` for `n >= 1`; zero for `n <= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// `floor(log2(n))` for `n >= 1`.
pub fn floor_log2(n: usize) -> u32 {
    assert!(n >= 1);
    usize::BITS - 1 - n.leading_zeros()
}

/// Smallest `k >= 0` with `(3/2)^k >= n`, computed exactly.
pub fn ceil_log_three_halves(n: usize) -> u32 {
    let n = n as u128;
    let (mut pow3, mut pow2, mut k) = (1u128, 1u128, 0u32);
    while pow3 < n * pow2 {
        pow3 *= 3;
        pow2 *= 2;
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_order_is_numeric() {
        let a = Mask::parse("1000").unwrap();
        let b = Mask::parse("0100").unwrap();
        let c = Mask::parse("1100").unwrap();
        assert!(a < b && b < c);
        let mut strs = vec!["1010", "0011", "1001", "0000", "1111", "0100"];
        let mut masks: Vec<Mask> = strs.iter().map(|s| Mask::parse(s).unwrap()).collect();
        let reversed = |s: &&str| s.chars().rev().collect::<String>();
        strs.sort_by_key(reversed);
        masks.sort();
        let back: Vec<String> = masks.iter().map(Mask::to_bitstring).collect();
        assert_eq!(back, strs);
    }

    #[test]
    fn mask_order_across_word_boundary() {
        let mut a = Mask::zeros(130);
        let mut b = Mask::zeros(130);
        a.set(129, true);
        b.set(64, true);
        b.set(0, true);
        assert!(b < a);
    }

    #[test]
    fn mask_set_algebra() {
        let a = Mask::parse("1100").unwrap();
        let b = Mask::parse("1010").unwrap();
        assert_eq!(a.and(&b).to_bitstring(), "1000");
        assert_eq!(a.or(&b).to_bitstring(), "1110");
        assert_eq!(a.and_not(&b).to_bitstring(), "0100");
        assert_eq!(a.not().to_bitstring(), "0011");
        assert_eq!(Mask::ones(70).count_ones(), 70);
        assert_eq!(Mask::ones(70).not().count_ones(), 0);
        assert_eq!(a.iter_ones().collect::<Vec<_>>(), vec![0, 1]);
        assert!(Mask::parse("0100").unwrap().is_subset(&a));
    }

    #[test]
    fn pattern_order_and_format() {
        let p = Pattern::from_indices([0, 2]);
        assert_eq!(p.to_bitstring(4), "1010");
        assert_eq!(Pattern::parse("1010").unwrap(), p);
        assert!(Pattern::from_indices([0]) < Pattern::from_indices([1]));
        assert!(Pattern::from_indices([0, 1]) < Pattern::from_indices([2]));
        assert!(Pattern::EMPTY < Pattern::from_indices([5]));
        assert_eq!(p.iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(p.min(), Some(0));
        assert_eq!(p.span(), 3);
    }

    #[test]
    fn log_helpers() {
        assert_eq!(index_width(0), 1);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(3), 2);
        assert_eq!(index_width(4), 2);
        assert_eq!(index_width(5), 3);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(floor_log2(5), 2);
        assert_eq!(ceil_log_three_halves(1), 0);
        assert_eq!(ceil_log_three_halves(2), 2); // 1.5 < 2 <= 2.25
        assert_eq!(ceil_log_three_halves(3), 3); // 2.25 < 3 <= 3.375
        for n in 1..200usize {
            let k = ceil_log_three_halves(n);
            let want = ((n as f64).ln() / 1.5f64.ln() - 1e-12).ceil().max(0.0) as u32;
            assert_eq!(k, want, "n = {n}");
        }
    }
}
