//! Permutations and their inversion graphs.
//!
//! Positions and letters are both 1-based in every public signature. A
//! [`Permutation`] stores its one-line notation; a [`PermGraph`] is keyed by
//! letter (vertex value), never by position.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A permutation of `1..=n` in one-line notation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Permutation {
    values: Vec<u32>,
}

impl Permutation {
    /// Validates that `values` is a bijection onto `1..=len`.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidPermutation("empty sequence".into()));
        }
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &v in &values {
            let v = v as usize;
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation(format!(
                    "letter {v} outside 1..={n}"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidPermutation(format!("letter {v} repeated")));
            }
            seen[v] = true;
        }
        Ok(Self { values })
    }

    /// Caller guarantees the bijection invariant.
    pub(crate) fn from_vec_unchecked(values: Vec<u32>) -> Self {
        debug_assert!(Self::new(values.clone()).is_ok());
        Self { values }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "identity of length 0");
        Self { values: (1..=n as u32).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; a permutation has at least one letter.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One-line notation as a 0-indexed slice.
    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<u32> {
        self.values
    }

    /// Letter at 1-based position `pos`.
    pub fn at(&self, pos: usize) -> u32 {
        self.values[pos - 1]
    }

    /// `m(w) = n - w_n`.
    pub fn m(&self) -> usize {
        self.len() - *self.values.last().expect("non-empty") as usize
    }

    /// `inverse()[v - 1]` is the 1-based position of letter `v`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut pos = vec![0usize; self.len()];
        for (i, &v) in self.values.iter().enumerate() {
            pos[v as usize - 1] = i + 1;
        }
        pos
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.values)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.values {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
            first = false;
        }
        Ok(())
    }
}

impl TryFrom<Vec<u32>> for Permutation {
    type Error = Error;
    fn try_from(values: Vec<u32>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<Permutation> for Vec<u32> {
    fn from(p: Permutation) -> Self {
        p.values
    }
}

impl std::str::FromStr for Permutation {
    type Err = Error;

    /// Accepts comma- or whitespace-separated letters.
    fn from_str(s: &str) -> Result<Self> {
        let values = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::InvalidPermutation(format!("bad letter {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }
}

/// Inversion graph: vertices `1..=n`, one edge per inversion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermGraph {
    n: usize,
    /// `adjacency[v - 1]` holds the sorted neighbours of vertex `v`.
    adjacency: Vec<Vec<u32>>,
}

impl PermGraph {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize - 1]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adjacency[v as usize - 1].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, nb) in self.adjacency.iter().enumerate() {
            let u = i as u32 + 1;
            out.extend(nb.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    /// Degree of each vertex, indexed by `v - 1`.
    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<u32>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out: Vec<Vec<u32>> = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = Vec::new();
            comp[start] = id;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                members.push(u as u32 + 1);
                for &v in &self.adjacency[u] {
                    let v = v as usize - 1;
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.connected_components().len() == 1
    }

    /// Cycle-free test by edge/component counting.
    pub fn is_acyclic(&self) -> bool {
        self.edge_count() + self.connected_components().len() == self.n
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count() + 1 == self.n && self.is_connected()
    }

    /// Distances (in edges) from `source`; `usize::MAX` marks unreachable.
    pub fn bfs_distances(&self, source: u32) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[source as usize - 1] = 0;
        queue.push_back(source as usize - 1);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                let v = v as usize - 1;
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// All inversions `(w_a, w_b)` with `a < b` and `w_a > w_b`, ordered by `(a, b)`.
pub fn inversions(perm: &Permutation) -> Vec<(u32, u32)> {
    let w = perm.values();
    let mut out = Vec::new();
    for a in 0..w.len() {
        for b in a + 1..w.len() {
            if w[a] > w[b] {
                out.push((w[a], w[b]));
            }
        }
    }
    out
}

/// Number of inversions, stopping early once the count exceeds `limit`.
pub(crate) fn inversion_count_capped(perm: &Permutation, limit: usize) -> usize {
    // Fenwick tree over letters seen so far.
    let n = perm.len();
    let mut tree = vec![0u32; n + 1];
    let mut count = 0usize;
    for (seen, &v) in perm.values().iter().enumerate() {
        let mut i = v as usize;
        let mut below = 0usize;
        while i > 0 {
            below += tree[i] as usize;
            i &= i - 1;
        }
        count += seen - below;
        if count > limit {
            return count;
        }
        let mut i = v as usize;
        while i <= n {
            tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }
    count
}

pub fn inversion_count(perm: &Permutation) -> usize {
    inversion_count_capped(perm, usize::MAX)
}

/// Builds the inversion graph in `O(n log n + edges)`.
pub fn build_graph(perm: &Permutation) -> PermGraph {
    let n = perm.len();
    let mut adjacency = vec![Vec::new(); n];
    let mut seen = BTreeSet::new();
    for &v in perm.values() {
        for &u in seen.range(v + 1..) {
            adjacency[u as usize - 1].push(v);
            adjacency[v as usize - 1].push(u);
        }
        seen.insert(v);
    }
    for nb in &mut adjacency {
        nb.sort_unstable();
    }
    PermGraph { n, adjacency }
}

/// True iff no proper prefix `w_1..w_m` equals `{1..m}`.
pub fn is_indecomposable(perm: &Permutation) -> bool {
    let w = perm.values();
    let mut max = 0u32;
    for (i, &v) in w[..w.len() - 1].iter().enumerate() {
        max = max.max(v);
        if max as usize == i + 1 {
            return false;
        }
    }
    true
}

/// Maximal position intervals (1-based, inclusive) spanning the components of `G_w`.
pub fn components(perm: &Permutation) -> Vec<RangeInclusive<usize>> {
    let mut out = Vec::new();
    let mut start = 1;
    let mut max = 0u32;
    for (i, &v) in perm.values().iter().enumerate() {
        max = max.max(v);
        if max as usize == i + 1 {
            out.push(start..=i + 1);
            start = i + 2;
        }
    }
    out
}

/// Occurrence flags for the patterns 321 and 3412.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternFlags {
    pub has_321: bool,
    pub has_3412: bool,
}

impl PatternFlags {
    /// Acyclic inversion graph.
    pub fn is_forest(self) -> bool {
        !self.has_321 && !self.has_3412
    }
}

pub fn pattern_flags(perm: &Permutation) -> PatternFlags {
    PatternFlags { has_321: has_321(perm.values()), has_3412: has_3412(perm.values()) }
}

/// A middle letter with a larger letter before it and a smaller one after it.
fn has_321(w: &[u32]) -> bool {
    let n = w.len();
    if n < 3 {
        return false;
    }
    let mut suffix_min = vec![u32::MAX; n + 1];
    for i in (0..n).rev() {
        suffix_min[i] = suffix_min[i + 1].min(w[i]);
    }
    let mut prefix_max = 0u32;
    for j in 0..n {
        if prefix_max > w[j] && suffix_min[j + 1] < w[j] {
            return true;
        }
        prefix_max = prefix_max.max(w[j]);
    }
    false
}

/// For positions `b < c` with `w_c < w_b`, pick the largest earlier letter
/// below `w_b` and the smallest later letter above `w_c`; a 3412 exists iff
/// some such pair has the later one below the earlier one.
fn has_3412(w: &[u32]) -> bool {
    let n = w.len();
    if n < 4 {
        return false;
    }
    // below_before[b]: max{w_a : a < b, w_a < w_b}, 0 if none.
    let below_before: Vec<u32> = (0..n)
        .map(|b| w[..b].iter().copied().filter(|&x| x < w[b]).max().unwrap_or(0))
        .collect();
    // above_after[c]: min{w_d : d > c, w_d > w_c}, u32::MAX if none.
    let above_after: Vec<u32> = (0..n)
        .map(|c| w[c + 1..].iter().copied().filter(|&x| x > w[c]).min().unwrap_or(u32::MAX))
        .collect();
    for b in 1..n {
        if below_before[b] == 0 {
            continue;
        }
        for c in b + 1..n - 1 {
            if w[c] < w[b] && above_after[c] < below_before[b] {
                return true;
            }
        }
    }
    false
}

/// Tree test in `O(n log n)`: indecomposable with exactly `n - 1` inversions.
pub fn is_tree_permutation(perm: &Permutation) -> bool {
    let n = perm.len();
    if n == 1 {
        return true;
    }
    is_indecomposable(perm) && inversion_count_capped(perm, n - 1) == n - 1
}

pub fn is_forest_permutation(perm: &Permutation) -> bool {
    pattern_flags(perm).is_forest()
}

/// All permutations of `1..=n` in lexicographic order.
pub fn permutations(n: usize) -> LexPermutations {
    LexPermutations::starting_from((1..=n as u32).collect())
}

/// Lexicographic successor iteration over permutations of a fixed letter set.
#[derive(Clone, Debug)]
pub struct LexPermutations {
    next: Option<Vec<u32>>,
}

impl LexPermutations {
    /// Iterates from `start` (inclusive) to the lexicographically last arrangement.
    pub fn starting_from(start: Vec<u32>) -> Self {
        Self { next: Some(start) }
    }
}

/// In-place lexicographic successor; false when `w` is the last arrangement.
pub fn next_permutation(w: &mut [u32]) -> bool {
    if w.len() < 2 {
        return false;
    }
    let mut i = w.len() - 1;
    while i > 0 && w[i - 1] >= w[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = w.len() - 1;
    while w[j] <= w[i - 1] {
        j -= 1;
    }
    w.swap(i - 1, j);
    w[i..].reverse();
    true
}

impl Iterator for LexPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { values: current })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[u32]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    fn naive_contains(w: &[u32], pattern: &[u32]) -> bool {
        let k = pattern.len();
        let n = w.len();
        if n < k {
            return false;
        }
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            let ok = (0..k).all(|x| {
                (0..k).all(|y| (pattern[x] < pattern[y]) == (w[idx[x]] < w[idx[y]]))
            });
            if ok {
                return true;
            }
            // next k-combination of 0..n
            let mut i = k;
            loop {
                if i == 0 {
                    return false;
                }
                i -= 1;
                if idx[i] < n - k + i {
                    break;
                }
            }
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![]).is_err());
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 3]).is_err());
        assert_eq!("2, 1,3".parse::<Permutation>().unwrap(), p(&[2, 1, 3]));
    }

    #[test]
    fn inversion_examples() {
        assert!(inversions(&p(&[1, 2, 3])).is_empty());
        assert_eq!(inversions(&p(&[3, 1, 2])), vec![(3, 1), (3, 2)]);
        let g = build_graph(&p(&[2, 5, 1, 3, 6, 7, 11, 4, 8, 9, 10]));
        assert_eq!(g.neighbors(5), &[1, 3, 4]);
        assert_eq!(g.neighbors(4), &[5, 6, 7, 11]);
    }

    #[test]
    fn graph_examples() {
        assert_eq!(build_graph(&p(&[2, 1])).edges(), vec![(1, 2)]);
        assert_eq!(build_graph(&p(&[2, 3, 4, 1])).edges(), vec![(1, 2), (1, 3), (1, 4)]);
        assert_eq!(build_graph(&p(&[2, 4, 1, 3])).edges(), vec![(1, 2), (1, 4), (3, 4)]);
    }

    #[test]
    fn indecomposable_and_components() {
        assert!(!is_indecomposable(&p(&[1, 2, 3])));
        assert!(is_indecomposable(&p(&[2, 3, 1])));
        assert!(!is_indecomposable(&p(&[2, 1, 4, 3])));
        assert!(is_indecomposable(&p(&[1])));
        assert_eq!(components(&p(&[1, 2, 3])), vec![1..=1, 2..=2, 3..=3]);
        assert_eq!(components(&p(&[2, 1, 4, 3])), vec![1..=2, 3..=4]);
        assert_eq!(components(&p(&[2, 3, 1])), vec![1..=3]);
    }

    #[test]
    fn pattern_examples() {
        let f = |v: &[u32]| {
            let fl = pattern_flags(&p(v));
            (fl.has_321, fl.has_3412)
        };
        assert_eq!(f(&[1, 2, 3]), (false, false));
        assert_eq!(f(&[3, 2, 1]), (true, false));
        assert_eq!(f(&[3, 4, 1, 2]), (false, true));
    }

    #[test]
    fn lex_order_and_counts() {
        let all: Vec<_> = permutations(3).map(|q| q.into_values()).collect();
        assert_eq!(
            all,
            vec![
                vec![1, 2, 3],
                vec![1, 3, 2],
                vec![2, 1, 3],
                vec![2, 3, 1],
                vec![3, 1, 2],
                vec![3, 2, 1]
            ]
        );
        assert_eq!(permutations(6).count(), 720);
        assert_eq!(permutations(1).count(), 1);
    }

    #[test]
    fn exhaustive_small_n_agreement() {
        for n in 1..=8 {
            for perm in permutations(n) {
                let g = build_graph(&perm);
                assert_eq!(is_indecomposable(&perm), g.is_connected(), "{perm}");
                let fl = pattern_flags(&perm);
                assert_eq!(fl.has_321, naive_contains(perm.values(), &[3, 2, 1]), "{perm}");
                assert_eq!(fl.has_3412, naive_contains(perm.values(), &[3, 4, 1, 2]), "{perm}");
                assert_eq!(fl.is_forest(), g.is_acyclic(), "{perm}");
                assert_eq!(is_tree_permutation(&perm), g.is_tree(), "{perm}");
                assert_eq!(inversion_count(&perm), g.edge_count());
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_perm() -> impl Strategy<Value = Permutation> {
            (1usize..40)
                .prop_flat_map(|n| Just((1..=n as u32).collect::<Vec<_>>()).prop_shuffle())
                .prop_map(|v| Permutation::new(v).unwrap())
        }

        proptest! {
            #[test]
            fn inversions_match_degrees(perm in arb_perm()) {
                let g = build_graph(&perm);
                let deg_sum: usize = g.degrees().iter().sum();
                prop_assert_eq!(inversions(&perm).len(), deg_sum / 2);
                prop_assert_eq!(inversion_count(&perm), g.edge_count());
                for v in 1..=perm.len() as u32 {
                    for &u in g.neighbors(v) {
                        prop_assert!(g.neighbors(u).contains(&v));
                    }
                }
            }

            #[test]
            fn components_are_intervals(perm in arb_perm()) {
                let ranges = components(&perm);
                let g = build_graph(&perm);
                prop_assert_eq!(*ranges[0].start(), 1);
                prop_assert_eq!(*ranges.last().unwrap().end(), perm.len());
                for pair in ranges.windows(2) {
                    prop_assert_eq!(*pair[0].end() + 1, *pair[1].start());
                }
                let comps = g.connected_components();
                prop_assert_eq!(comps.len(), ranges.len());
                for r in &ranges {
                    let mut letters: Vec<u32> = r.clone().map(|i| perm.at(i)).collect();
                    letters.sort_unstable();
                    prop_assert!(comps.contains(&letters));
                }
            }
        }
    }
}
