//! Left-to-right-maxima bipartition, block decomposition and caterpillar
//! geometry of tree permutations.
//!
//! Every neighbourhood and degree here is read off the block sizes alone;
//! the inversion graph is never built.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{is_tree_permutation, Permutation};

/// `flags[p - 1]` is true iff `w_p` is a left-to-right maximum.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bipartition {
    pub flags: Vec<bool>,
}

impl Bipartition {
    /// Flags at positions `2..=n-1`, the coupled 0-1 sequence.
    pub fn interior(&self) -> &[bool] {
        let n = self.flags.len();
        if n <= 2 {
            &[]
        } else {
            &self.flags[1..n - 1]
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    /// Left-to-right maxima.
    W1,
    W0,
}

/// A maximal run of same-side positions, 1-based and inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub end: usize,
    pub side: Side,
    /// Letter at `start` (the block's smallest).
    pub first: u32,
    /// Letter at `end` (the block's largest).
    pub last: u32,
}

impl Block {
    pub fn size(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, pos: usize) -> bool {
        (self.start..=self.end).contains(&pos)
    }
}

/// Blocks `B_1..B_2l`, alternating W1/W0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockDecomposition {
    pub blocks: Vec<Block>,
}

impl BlockDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Block::size).collect()
    }

    /// Index of the block holding position `pos`.
    pub fn block_of(&self, pos: usize) -> usize {
        self.blocks.partition_point(|b| b.end < pos)
    }
}

/// Caterpillar spine, from the end in `{1, w_1}` to the end in `{n, w_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CentralPath {
    pub vertices: Vec<u32>,
}

fn check_tree(perm: &Permutation, op: &'static str, min: usize) -> Result<()> {
    let n = perm.len();
    if n < min {
        return Err(Error::TooSmall { op, n, min });
    }
    if !is_tree_permutation(perm) {
        return Err(Error::NotATree);
    }
    Ok(())
}

/// Marks left-to-right maxima.
pub fn bipartition(perm: &Permutation) -> Bipartition {
    let mut max = 0u32;
    let flags = perm
        .values()
        .iter()
        .map(|&v| {
            let is_max = v > max;
            max = max.max(v);
            is_max
        })
        .collect();
    Bipartition { flags }
}

/// Maximal alternating runs of the bipartition flags.
pub fn blocks(perm: &Permutation) -> BlockDecomposition {
    blocks_from_flags(perm, &bipartition(perm).flags)
}

fn blocks_from_flags(perm: &Permutation, flags: &[bool]) -> BlockDecomposition {
    let w = perm.values();
    let mut out: Vec<Block> = Vec::new();
    let mut start = 0;
    for i in 1..=w.len() {
        if i == w.len() || flags[i] != flags[start] {
            out.push(Block {
                start: start + 1,
                end: i,
                side: if flags[start] { Side::W1 } else { Side::W0 },
                first: w[start],
                last: w[i - 1],
            });
            start = i;
        }
    }
    BlockDecomposition { blocks: out }
}

fn block_letters<'a>(perm: &'a Permutation, b: &Block) -> impl Iterator<Item = u32> + 'a {
    perm.values()[b.start - 1..b.end].iter().copied()
}

/// `N(w_pos)` from the block decomposition alone, sorted ascending.
pub fn neighbors_via_blocks(perm: &Permutation, pos: usize) -> Result<Vec<u32>> {
    check_tree(perm, "neighbors_via_blocks", 2)?;
    if pos == 0 || pos > perm.len() {
        return Err(Error::InvalidArgument(format!("position {pos} out of range")));
    }
    Ok(neighbors_in(perm, &blocks(perm), pos))
}

pub(crate) fn neighbors_in(perm: &Permutation, dec: &BlockDecomposition, pos: usize) -> Vec<u32> {
    let bs = &dec.blocks;
    let j = dec.block_of(pos);
    let b = &bs[j];
    let mut out: Vec<u32> = match b.side {
        Side::W1 if pos != b.end => vec![bs[j + 1].first],
        Side::W1 => {
            let mut v: Vec<u32> = block_letters(perm, &bs[j + 1]).collect();
            if j + 2 < bs.len() {
                v.push(bs[j + 3].first);
            }
            v
        }
        Side::W0 if pos != b.start => vec![bs[j - 1].last],
        Side::W0 => {
            let mut v: Vec<u32> = block_letters(perm, &bs[j - 1]).collect();
            if j >= 3 {
                v.push(bs[j - 3].last);
            }
            v
        }
    };
    out.sort_unstable();
    out
}

/// Degree of `w_p` for each position, from block sizes only.
pub fn degree_sequence(perm: &Permutation) -> Result<Vec<usize>> {
    check_tree(perm, "degree_sequence", 1)?;
    Ok(degrees_from_blocks(perm.len(), &blocks(perm)))
}

pub(crate) fn degrees_from_blocks(n: usize, dec: &BlockDecomposition) -> Vec<usize> {
    let bs = &dec.blocks;
    let mut deg = vec![1usize; n];
    if n == 1 {
        deg[0] = 0;
        return deg;
    }
    for (j, b) in bs.iter().enumerate() {
        match b.side {
            Side::W1 => {
                let next = bs[j + 1].size();
                deg[b.end - 1] = if j + 2 < bs.len() { next + 1 } else { next };
            }
            Side::W0 => {
                let prev = bs[j - 1].size();
                deg[b.start - 1] = if j >= 3 { prev + 1 } else { prev };
            }
        }
    }
    deg
}

/// Spine of the caterpillar `G_perm`, `n >= 3`.
///
/// In the star cases (`w_1 = n` or `w_n = 1`) this is the single centre.
pub fn central_path(perm: &Permutation) -> Result<CentralPath> {
    check_tree(perm, "central_path", 3)?;
    let n = perm.len();
    let dec = blocks(perm);
    let deg = degrees_from_blocks(n, &dec);
    Ok(CentralPath { vertices: spine(perm, &dec, &deg).into_iter().map(|(v, _)| v).collect() })
}

/// Spine as `(letter, degree)` pairs: `f_2, l_1, f_4, l_3, ...` with
/// leaves dropped from the two ends.
pub(crate) fn spine(perm: &Permutation, dec: &BlockDecomposition, deg: &[usize]) -> Vec<(u32, usize)> {
    let bs = &dec.blocks;
    let w = perm.values();
    let mut out = Vec::with_capacity(bs.len());
    for pair in bs.chunks(2) {
        let (hi, lo) = (&pair[0], &pair[1]);
        out.push((w[lo.start - 1], deg[lo.start - 1]));
        out.push((w[hi.end - 1], deg[hi.end - 1]));
    }
    out.retain(|&(_, d)| d >= 2);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode, enumerate_trees};
    use crate::perm::build_graph;

    const EXAMPLE: [u32; 11] = [2, 5, 1, 3, 6, 7, 11, 4, 8, 9, 10];

    fn p(v: &[u32]) -> Permutation {
        Permutation::new(v.to_vec()).unwrap()
    }

    #[test]
    fn bipartition_examples() {
        assert_eq!(bipartition(&p(&[2, 1])).flags, vec![true, false]);
        let flags = bipartition(&p(&EXAMPLE)).flags;
        let w1: Vec<usize> = (1..=11).filter(|&i| flags[i - 1]).collect();
        assert_eq!(w1, vec![1, 2, 5, 6, 7]);
        let bp = bipartition(&p(&[2, 4, 1, 3]));
        assert_eq!(bp.flags, vec![true, true, false, false]);
        assert_eq!(bp.interior(), &[true, false]);
    }

    #[test]
    fn block_examples() {
        let d = blocks(&p(&[2, 1]));
        assert_eq!(d.sizes(), vec![1, 1]);
        assert_eq!(d.blocks[0].side, Side::W1);
        let d = blocks(&p(&EXAMPLE));
        assert_eq!(d.sizes(), vec![2, 2, 3, 4]);
        let sides: Vec<Side> = d.blocks.iter().map(|b| b.side).collect();
        assert_eq!(sides, vec![Side::W1, Side::W0, Side::W1, Side::W0]);
        assert_eq!(blocks(&p(&[4, 1, 2, 3])).sizes(), vec![1, 3]);
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(neighbors_via_blocks(&p(&EXAMPLE), 2).unwrap(), vec![1, 3, 4]);
        assert_eq!(neighbors_via_blocks(&p(&EXAMPLE), 8).unwrap(), vec![5, 6, 7, 11]);
        assert_eq!(neighbors_via_blocks(&p(&[2, 1]), 1).unwrap(), vec![1]);
        assert!(neighbors_via_blocks(&p(&[2, 1]), 3).is_err());
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degree_sequence(&p(&[2, 1])).unwrap(), vec![1, 1]);
        assert_eq!(degree_sequence(&p(&[2, 3, 4, 1])).unwrap(), vec![1, 1, 1, 3]);
        let w = p(&EXAMPLE);
        let g = build_graph(&w);
        let want: Vec<usize> = w.values().iter().map(|&v| g.degree(v)).collect();
        assert_eq!(degree_sequence(&w).unwrap(), want);
        assert_eq!(degree_sequence(&p(&[1, 2])), Err(Error::NotATree));
    }

    #[test]
    fn central_path_examples() {
        assert_eq!(central_path(&p(&[2, 3, 4, 1])).unwrap().vertices, vec![1]);
        assert_eq!(central_path(&p(&[2, 4, 1, 3])).unwrap().vertices, vec![1, 4]);
        assert_eq!(central_path(&p(&[2, 3, 1])).unwrap().vertices, vec![1]);
        assert_eq!(central_path(&p(&[4, 1, 2, 3])).unwrap().vertices, vec![4]);
        assert!(matches!(central_path(&p(&[2, 1])), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn block_invariants_hold_exhaustively() {
        for n in 2..=12 {
            for w in enumerate_trees(n).unwrap() {
                let d = blocks(&w);
                assert_eq!(d.blocks.first().unwrap().side, Side::W1);
                assert_eq!(d.blocks.last().unwrap().side, Side::W0);
                assert_eq!(d.blocks.len() % 2, 0);
                for b in &d.blocks {
                    let letters: Vec<u32> = block_letters(&w, b).collect();
                    assert!(letters.windows(2).all(|x| x[0] < x[1]));
                }
                let bp = bipartition(&w);
                let code: Vec<bool> = encode(&w).unwrap().bits().collect();
                assert_eq!(bp.interior(), code.as_slice());
                let deg = degree_sequence(&w).unwrap();
                assert_eq!(deg.iter().sum::<usize>(), 2 * (n - 1));
            }
        }
    }
}
