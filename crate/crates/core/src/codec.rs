//! The insertion bijection between tree permutations of length `n` and
//! bit strings of length `n - 2`.
//!
//! Bit `j` of a [`TreeCode`] records how letter `j + 3` was inserted:
//! `1` for [`insert_i1`], `0` for [`insert_i2`]. Bits are packed
//! little-endian into `u64` words, so the codes of a fixed `n` are exactly
//! the integers `0..2^(n-2)`.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{is_tree_permutation, Permutation};

/// Default upper bound on `n` for exhaustive enumeration.
pub const DEFAULT_ENUM_CAP: usize = 30;

/// Environment variable overriding [`DEFAULT_ENUM_CAP`].
pub const ENUM_CAP_ENV: &str = "PERMTREE_ENUM_CAP";

/// Enumeration cap, honouring `PERMTREE_ENUM_CAP` when it parses.
pub fn enum_cap() -> usize {
    std::env::var(ENUM_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_ENUM_CAP)
}

/// Insertion history of a tree permutation.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "CodeRepr", into = "CodeRepr")]
pub struct TreeCode {
    n: usize,
    words: Vec<u64>,
}

fn code_len(n: usize) -> usize {
    n.saturating_sub(2)
}

impl TreeCode {
    /// Packed constructor; rejects set bits beyond `n - 2`.
    pub fn from_words(n: usize, mut words: Vec<u64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCode("n must be at least 1".into()));
        }
        let len = code_len(n);
        let need = len.div_ceil(64);
        if words.len() > need {
            if words[need..].iter().any(|&w| w != 0) {
                return Err(Error::InvalidCode(format!("bits set beyond length {len}")));
            }
            words.truncate(need);
        }
        words.resize(need, 0);
        if !len.is_multiple_of(64) {
            if let Some(&top) = words.last() {
                if top >> (len % 64) != 0 {
                    return Err(Error::InvalidCode(format!("bits set beyond length {len}")));
                }
            }
        }
        Ok(Self { n, words })
    }

    /// Code whose packed value is `value`; needs `value < 2^(n-2)`.
    pub fn from_index(n: usize, value: u64) -> Result<Self> {
        Self::from_words(n, vec![value])
    }

    /// `bits[j]` drives letter `j + 3`; `true` means I1.
    pub fn from_bits(n: usize, bits: &[bool]) -> Result<Self> {
        if bits.len() != code_len(n) {
            return Err(Error::InvalidCode(format!(
                "expected {} bits for n = {n}, got {}",
                code_len(n),
                bits.len()
            )));
        }
        let mut words = vec![0u64; bits.len().div_ceil(64)];
        for (j, &b) in bits.iter().enumerate() {
            if b {
                words[j / 64] |= 1 << (j % 64);
            }
        }
        Self::from_words(n, words)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of bits, `max(n - 2, 0)`.
    pub fn len(&self) -> usize {
        code_len(self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// True when letter `j + 3` was inserted by I1.
    pub fn bit(&self, j: usize) -> bool {
        assert!(j < self.len(), "bit {j} out of range");
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(|j| self.bit(j))
    }

    /// Packed value when it fits a `u64`.
    pub fn index(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Lowercase hex of the packed integer, `0x`-prefixed, no leading zeros.
    pub fn to_hex(&self) -> String {
        let mut iter = self.words.iter().rev().skip_while(|&&w| w == 0);
        match iter.next() {
            None => "0x0".to_string(),
            Some(top) => {
                let mut s = format!("0x{top:x}");
                for w in iter {
                    s.push_str(&format!("{w:016x}"));
                }
                s
            }
        }
    }

    pub fn from_hex(n: usize, hex: &str) -> Result<Self> {
        let digits = hex
            .strip_prefix("0x")
            .or_else(|| hex.strip_prefix("0X"))
            .ok_or_else(|| Error::InvalidCode(format!("missing 0x prefix: {hex:?}")))?;
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::InvalidCode(format!("bad hex digits: {hex:?}")));
        }
        let bytes = digits.as_bytes();
        let mut words = Vec::new();
        let mut end = bytes.len();
        while end > 0 {
            let start = end.saturating_sub(16);
            let chunk = std::str::from_utf8(&bytes[start..end]).expect("ascii");
            words.push(u64::from_str_radix(chunk, 16).expect("validated hex"));
            end = start;
        }
        Self::from_words(n, words)
    }
}

impl fmt::Debug for TreeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeCode {{ n: {}, code: {} }}", self.n, self.to_hex())
    }
}

/// Wire form: `{"n":12,"code":"0x2a7"}`.
#[derive(Serialize, Deserialize)]
struct CodeRepr {
    n: usize,
    code: String,
}

impl TryFrom<CodeRepr> for TreeCode {
    type Error = Error;
    fn try_from(r: CodeRepr) -> Result<Self> {
        TreeCode::from_hex(r.n, &r.code)
    }
}

impl From<TreeCode> for CodeRepr {
    fn from(c: TreeCode) -> Self {
        CodeRepr { code: c.to_hex(), n: c.n }
    }
}

fn require_tree(perm: &Permutation, op: &'static str) -> Result<()> {
    if perm.len() < 2 {
        return Err(Error::TooSmall { op, n: perm.len(), min: 2 });
    }
    if !is_tree_permutation(perm) {
        return Err(Error::NotATree);
    }
    Ok(())
}

/// I1: insert `n + 1` between `w_{n-1}` and `w_n`.
pub fn insert_i1(perm: &Permutation) -> Result<Permutation> {
    require_tree(perm, "insert_i1")?;
    let w = perm.values();
    let n = w.len() as u32;
    let mut out = Vec::with_capacity(w.len() + 1);
    out.extend_from_slice(&w[..w.len() - 1]);
    out.push(n + 1);
    out.push(w[w.len() - 1]);
    Ok(Permutation::from_vec_unchecked(out))
}

/// I2: replace letter `n` by `n + 1` and append `n`.
pub fn insert_i2(perm: &Permutation) -> Result<Permutation> {
    require_tree(perm, "insert_i2")?;
    let n = perm.len() as u32;
    let mut out: Vec<u32> = perm.values().iter().map(|&v| if v == n { n + 1 } else { v }).collect();
    out.push(n);
    Ok(Permutation::from_vec_unchecked(out))
}

/// Replays the insertion history from `2,1` in `O(n)`.
pub fn decode(code: &TreeCode) -> Permutation {
    let n = code.n();
    if n == 1 {
        return Permutation::identity(1);
    }
    // Everything but the final letter lives in `body`; `pos[v]` is the index
    // of letter v in `body`.
    let mut body: Vec<u32> = Vec::with_capacity(n);
    let mut pos = vec![0usize; n + 1];
    body.push(2);
    let mut last = 1u32;
    for j in 0..code.len() {
        let m = j as u32 + 2;
        let new = m + 1;
        if code.bit(j) {
            pos[new as usize] = body.len();
            body.push(new);
        } else {
            let p = pos[m as usize];
            body[p] = new;
            pos[new as usize] = p;
            pos[last as usize] = body.len();
            body.push(last);
            last = m;
        }
    }
    body.push(last);
    Permutation::from_vec_unchecked(body)
}

/// Recovers the insertion history by peeling letters `n, n-1, ..., 3`.
pub fn encode(perm: &Permutation) -> Result<TreeCode> {
    let n = perm.len();
    if !is_tree_permutation(perm) {
        return Err(Error::NotATree);
    }
    let mut bits = vec![false; code_len(n)];
    if n <= 2 {
        return TreeCode::from_bits(n, &bits);
    }
    let w = perm.values();
    let mut body: Vec<u32> = w[..n - 1].to_vec();
    let mut last = w[n - 1];
    let mut pos = vec![0usize; n + 1];
    for (i, &v) in body.iter().enumerate() {
        pos[v as usize] = i;
    }
    for len in (3..=n as u32).rev() {
        if len - last > 1 {
            // reverse I1: letter `len` sits just before the last letter
            bits[len as usize - 3] = true;
            if body.pop() != Some(len) {
                return Err(Error::NotATree);
            }
        } else {
            // reverse I2: last letter is len - 1; rename len -> len - 1
            let p = pos[len as usize];
            body[p] = len - 1;
            pos[len as usize - 1] = p;
            last = body.pop().ok_or(Error::NotATree)?;
        }
    }
    TreeCode::from_bits(n, &bits)
}

/// `t_1 = 1`, `t_n = 2^(n-2)` for `n >= 2`.
pub fn count_trees(n: usize) -> BigUint {
    assert!(n >= 1, "count_trees needs n >= 1");
    if n <= 2 {
        BigUint::one()
    } else {
        BigUint::one() << (n - 2)
    }
}

/// Every tree permutation of length `n` in code order, with the default cap.
pub fn enumerate_trees(n: usize) -> Result<TreeEnumeration> {
    enumerate_trees_capped(n, enum_cap())
}

pub fn enumerate_trees_capped(n: usize, cap: usize) -> Result<TreeEnumeration> {
    if n == 0 {
        return Err(Error::TooSmall { op: "enumerate_trees", n, min: 1 });
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if code_len(n) >= 64 {
        return Err(Error::CapExceeded { n, cap: 65 });
    }
    Ok(TreeEnumeration::range(n, 0, 1u64 << code_len(n)))
}

/// Iterator over `decode(code)` for packed codes in `start..end`.
///
/// Ranges split freely, so sweeps can be partitioned across workers.
#[derive(Clone, Debug)]
pub struct TreeEnumeration {
    n: usize,
    next: u64,
    end: u64,
}

impl TreeEnumeration {
    pub fn range(n: usize, start: u64, end: u64) -> Self {
        Self { n, next: start, end }
    }

    /// Yields `(code, permutation)` pairs instead of bare permutations.
    pub fn with_codes(self) -> impl Iterator<Item = (TreeCode, Permutation)> {
        let n = self.n;
        (self.next..self.end).map(move |i| {
            let code = TreeCode::from_index(n, i).expect("index within range");
            let perm = decode(&code);
            (code, perm)
        })
    }
}

impl Iterator for TreeEnumeration {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.next >= self.end {
            return None;
        }
        let code = TreeCode::from_index(self.n, self.next).expect("index within range");
        self.next += 1;
        Some(decode(&code))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for TreeEnumeration {}

/// `n - 2` independent fair bits.
pub fn sample_code<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TreeCode {
    assert!(n >= 1, "sample_code needs n >= 1");
    let len = code_len(n);
    let mut words: Vec<u64> = (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect();
    if !len.is_multiple_of(64) {
        if let Some(top) = words.last_mut() {
            *top &= (1u64 << (len % 64)) - 1;
        }
    }
    TreeCode::from_words(n, words).expect("masked words")
}

/// Uniform tree permutation of length `n`.
pub fn sample_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    decode(&sample_code(n, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{build_graph, permutations};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn p(v: &[u32]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn code(n: usize, bits: &[u8]) -> TreeCode {
        TreeCode::from_bits(n, &bits.iter().map(|&b| b == 1).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn insertion_examples() {
        assert_eq!(insert_i1(&p(&[2, 1])).unwrap(), p(&[2, 3, 1]));
        assert_eq!(insert_i1(&p(&[2, 3, 1])).unwrap(), p(&[2, 3, 4, 1]));
        assert_eq!(insert_i1(&p(&[3, 1, 2])).unwrap(), p(&[3, 1, 4, 2]));
        assert_eq!(insert_i2(&p(&[2, 1])).unwrap(), p(&[3, 1, 2]));
        assert_eq!(insert_i2(&p(&[2, 3, 1])).unwrap(), p(&[2, 4, 1, 3]));
        assert_eq!(insert_i2(&p(&[3, 1, 2])).unwrap(), p(&[4, 1, 2, 3]));
    }

    #[test]
    fn insertion_rejects_non_trees() {
        assert_eq!(insert_i1(&p(&[1, 2])), Err(Error::NotATree));
        assert_eq!(insert_i2(&p(&[3, 2, 1])), Err(Error::NotATree));
        assert!(matches!(insert_i1(&p(&[1])), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn insertion_effects_on_m_and_edges() {
        for w in enumerate_trees(7).unwrap() {
            let a = insert_i1(&w).unwrap();
            assert_eq!(a.m(), w.m() + 1);
            let g = build_graph(&a);
            let n1 = w.len() as u32 + 1;
            assert_eq!(g.neighbors(n1), &[*w.values().last().unwrap()]);

            let b = insert_i2(&w).unwrap();
            assert_eq!(b.m(), 1);
            assert!(build_graph(&b).neighbors(n1).contains(&(n1 - 1)));
        }
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode(&code(1, &[])), p(&[1]));
        assert_eq!(decode(&code(2, &[])), p(&[2, 1]));
        assert_eq!(decode(&code(3, &[1])), p(&[2, 3, 1]));
        assert_eq!(decode(&code(3, &[0])), p(&[3, 1, 2]));
        assert_eq!(decode(&code(4, &[1, 0])), p(&[2, 4, 1, 3]));
    }

    #[test]
    fn encode_examples() {
        assert!(encode(&p(&[2, 1])).unwrap().is_empty());
        assert_eq!(encode(&p(&[2, 4, 1, 3])).unwrap(), code(4, &[1, 0]));
        assert_eq!(encode(&p(&[3, 1, 4, 2])).unwrap(), code(4, &[0, 1]));
        assert_eq!(encode(&p(&[3, 2, 1])), Err(Error::NotATree));
        assert_eq!(encode(&p(&[1, 2])), Err(Error::NotATree));
    }

    #[test]
    fn decode_matches_repeated_insertion() {
        for n in 2..=10 {
            for (c, w) in enumerate_trees(n).unwrap().with_codes() {
                let mut slow = p(&[2, 1]);
                for bit in c.bits() {
                    slow = if bit { insert_i1(&slow) } else { insert_i2(&slow) }.unwrap();
                }
                assert_eq!(slow, w);
            }
        }
    }

    #[test]
    fn counts() {
        assert_eq!(count_trees(1), BigUint::from(1u32));
        assert_eq!(count_trees(2), BigUint::from(1u32));
        assert_eq!(count_trees(10), BigUint::from(256u32));
        let census = permutations(8).filter(is_tree_permutation).count();
        assert_eq!(BigUint::from(census), count_trees(8));
        assert_eq!(census, 64);
    }

    #[test]
    fn enumeration_examples_and_cap() {
        let e3: BTreeSet<_> = enumerate_trees(3).unwrap().collect();
        assert_eq!(e3, [p(&[2, 3, 1]), p(&[3, 1, 2])].into_iter().collect());
        let e4: BTreeSet<_> = enumerate_trees(4).unwrap().collect();
        let want: BTreeSet<_> =
            [p(&[2, 3, 4, 1]), p(&[2, 4, 1, 3]), p(&[3, 1, 4, 2]), p(&[4, 1, 2, 3])].into();
        assert_eq!(e4, want);
        assert!(e4.iter().all(is_tree_permutation));
        assert_eq!(enumerate_trees(1).unwrap().collect::<Vec<_>>(), vec![p(&[1])]);
        assert_eq!(
            enumerate_trees_capped(12, 10).unwrap_err(),
            Error::CapExceeded { n: 12, cap: 10 }
        );
    }

    #[test]
    fn exhaustive_roundtrip_and_image() {
        for n in 1..=18 {
            for (c, w) in enumerate_trees(n).unwrap().with_codes() {
                assert_eq!(encode(&w).unwrap(), c);
            }
        }
        for n in 1..=8 {
            let image: BTreeSet<_> = enumerate_trees(n).unwrap().collect();
            let brute: BTreeSet<_> = permutations(n).filter(is_tree_permutation).collect();
            assert_eq!(image, brute);
        }
    }

    #[test]
    fn tail_shape_and_leaf_alternative() {
        for n in 3..=12 {
            for w in enumerate_trees(n).unwrap() {
                let m = w.m();
                let tail: Vec<u32> = w.values()[n - m..].to_vec();
                let mut want: Vec<u32> = ((n - m + 2) as u32..=n as u32).collect();
                want.push((n - m) as u32);
                assert_eq!(tail, want, "{w}");
                let g = build_graph(&w);
                let last = *w.values().last().unwrap();
                let leaves = [g.degree(n as u32) == 1, g.degree(last) == 1];
                assert_eq!(leaves.iter().filter(|&&b| b).count(), 1, "{w}");
            }
        }
    }

    #[test]
    fn hex_serialization() {
        let c = TreeCode::from_index(12, 0x2a7).unwrap();
        assert_eq!(serde_json::to_string(&c).unwrap(), r#"{"n":12,"code":"0x2a7"}"#);
        let back: TreeCode = serde_json::from_str(r#"{"n":12,"code":"0x2a7"}"#).unwrap();
        assert_eq!(back, c);
        assert_eq!(TreeCode::from_index(5, 0).unwrap().to_hex(), "0x0");
        assert!(TreeCode::from_index(4, 4).is_err());
        assert!(TreeCode::from_hex(4, "12").is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let big = sample_code(200, &mut rng);
        assert_eq!(TreeCode::from_hex(200, &big.to_hex()).unwrap(), big);
    }

    #[test]
    fn sampling_is_uniform_at_n3() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        assert_eq!(sample_tree(2, &mut rng), p(&[2, 1]));
        let trials = 100_000;
        let ones = (0..trials).filter(|_| sample_tree(3, &mut rng) == p(&[2, 3, 1])).count();
        let freq = ones as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "{freq}");
    }

    #[test]
    fn large_random_roundtrips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [100, 1_000, 100_000, 1_000_000] {
            let c = sample_code(n, &mut rng);
            let w = decode(&c);
            assert_eq!(w.len(), n);
            assert_eq!(encode(&w).unwrap(), c);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn code_roundtrip(n in 1usize..300, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let c = sample_code(n, &mut rng);
                let w = decode(&c);
                prop_assert!(is_tree_permutation(&w));
                prop_assert_eq!(encode(&w).unwrap(), c.clone());
                let json = serde_json::to_string(&c).unwrap();
                prop_assert_eq!(serde_json::from_str::<TreeCode>(&json).unwrap(), c);
            }
        }
    }
}
