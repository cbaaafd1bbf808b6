//! Minimum vertex sets meeting every edge of a permutation tree.
//!
//! Three independent routes: the leaf-neighbour marking iteration, the
//! closed form `k + sum floor(n_i / 2)` over the caterpillar spine, and an
//! exact two-state tree DP.

use serde::{Deserialize, Serialize};

use crate::codec::{decode, TreeCode};
use crate::error::{Error, Result};
use crate::perm::{build_graph, is_tree_permutation, Permutation};
use crate::stats::{coin_stats, CoinSequence};
use crate::structure::{blocks, degrees_from_blocks, spine};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverResult {
    /// Marked vertices, ascending.
    pub chosen: Vec<u32>,
    pub size: usize,
    /// Vertices marked in the first round, ascending.
    pub s1: Vec<u32>,
}

fn require_tree(perm: &Permutation) -> Result<()> {
    if is_tree_permutation(perm) {
        Ok(())
    } else {
        Err(Error::NotATree)
    }
}

fn find(parent: &mut [u32], mut v: u32) -> u32 {
    while parent[v as usize] != v {
        let up = parent[parent[v as usize] as usize];
        parent[v as usize] = up;
        v = up;
    }
    v
}

/// Repeatedly marks every neighbour of a leaf in components with at least
/// three vertices, deleting edges at marked vertices; each surviving single
/// edge then contributes its smaller endpoint.
pub fn marking_algorithm(perm: &Permutation) -> Result<CoverResult> {
    require_tree(perm)?;
    let n = perm.len();
    let mut alive = build_graph(perm).edges();
    let mut marked = vec![false; n + 1];
    let mut deg = vec![0u32; n + 1];
    let mut parent: Vec<u32> = (0..=n as u32).collect();
    let mut size = vec![0u32; n + 1];
    let mut s1: Option<Vec<u32>> = None;
    loop {
        for &(u, v) in &alive {
            for x in [u, v] {
                deg[x as usize] = 0;
                parent[x as usize] = x;
                size[x as usize] = 1;
            }
        }
        for &(u, v) in &alive {
            deg[u as usize] += 1;
            deg[v as usize] += 1;
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a as usize] = b;
                size[b as usize] += size[a as usize];
            }
        }
        let mut round = Vec::new();
        for &(u, v) in &alive {
            let big = size[find(&mut parent, u) as usize] >= 3;
            if !big {
                continue;
            }
            if deg[u as usize] == 1 {
                round.push(v);
            }
            if deg[v as usize] == 1 {
                round.push(u);
            }
        }
        if round.is_empty() {
            break;
        }
        for &v in &round {
            marked[v as usize] = true;
        }
        if s1.is_none() {
            round.sort_unstable();
            round.dedup();
            s1 = Some(round);
        }
        alive.retain(|&(u, v)| !marked[u as usize] && !marked[v as usize]);
    }
    for &(u, v) in &alive {
        marked[u.min(v) as usize] = true;
    }
    let chosen: Vec<u32> = (1..=n as u32).filter(|&v| marked[v as usize]).collect();
    let s1 = s1.unwrap_or_else(|| chosen.clone());
    Ok(CoverResult { size: chosen.len(), chosen, s1 })
}

/// Pieces of the closed form: `gamma = s1.len() + sum floor(gap / 2)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaBreakdown {
    /// Spine endpoints and spine vertices of degree at least 3, in spine order.
    pub s1: Vec<u32>,
    /// Lengths of the degree-2 runs between consecutive members of `s1`.
    pub gaps: Vec<usize>,
    pub gamma: usize,
}

pub fn gamma_breakdown(perm: &Permutation) -> Result<GammaBreakdown> {
    require_tree(perm)?;
    let n = perm.len();
    match n {
        1 => return Ok(GammaBreakdown { s1: vec![], gaps: vec![], gamma: 0 }),
        2 => return Ok(GammaBreakdown { s1: vec![1], gaps: vec![], gamma: 1 }),
        _ => {}
    }
    let dec = blocks(perm);
    let deg = degrees_from_blocks(n, &dec);
    let sp = spine(perm, &dec, &deg);
    let last = sp.len() - 1;
    let mut s1 = Vec::new();
    let mut gaps = Vec::new();
    let mut run = 0;
    for (i, &(v, d)) in sp.iter().enumerate() {
        if i == 0 || i == last || d >= 3 {
            if i > 0 {
                gaps.push(run);
            }
            s1.push(v);
            run = 0;
        } else {
            run += 1;
        }
    }
    let gamma = s1.len() + gaps.iter().map(|g| g / 2).sum::<usize>();
    Ok(GammaBreakdown { s1, gaps, gamma })
}

/// `k + sum floor(n_i / 2)` over the central path.
pub fn gamma_formula(perm: &Permutation) -> Result<usize> {
    Ok(gamma_breakdown(perm)?.gamma)
}

/// `gamma` from the block sizes of the coupled 0-1 sequence (`n >= 3`).
///
/// Each block is a spine vertex of degree `size + 1`; the end blocks and
/// the blocks of size at least two form `S_1`, and a run of size-1 interior
/// blocks pays one for every second member.
pub fn gamma_from_blocks(sizes: &[usize]) -> usize {
    let l = sizes.len();
    if l <= 1 {
        return l;
    }
    let mut gamma = 2;
    let mut odd = false;
    for &b in &sizes[1..l - 1] {
        if b >= 2 {
            gamma += 1;
            odd = false;
        } else {
            gamma += usize::from(odd);
            odd = !odd;
        }
    }
    gamma
}

/// Exact minimum by DP over the inversion graph rooted at vertex 1.
pub fn min_cover_oracle(perm: &Permutation) -> Result<usize> {
    require_tree(perm)?;
    let n = perm.len();
    let g = build_graph(perm);
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![0u32; n + 1];
    let mut stack = vec![1u32];
    while let Some(v) = stack.pop() {
        order.push(v);
        for &u in g.neighbors(v) {
            if u != parent[v as usize] {
                parent[u as usize] = v;
                stack.push(u);
            }
        }
    }
    // with[v]: best in the subtree with v chosen; without[v]: v not chosen.
    let mut with = vec![1usize; n + 1];
    let mut without = vec![0usize; n + 1];
    for &v in order.iter().rev() {
        let p = parent[v as usize];
        if p != 0 {
            with[p as usize] += with[v as usize].min(without[v as usize]);
            without[p as usize] += with[v as usize];
        }
    }
    Ok(with[1].min(without[1]))
}

/// Terms of the coin-sequence expression for `gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaDecomposition {
    /// `sum_(i >= 2) Y_i`.
    pub sum_y_ge2: usize,
    /// `sum_(k >= 2) floor(k / 2) Z*_k`.
    pub weighted_z: usize,
    /// `sum_(k >= 1) ceil(k / 2) (1[prefix H^k T] + 1[suffix T H^k])`, or
    /// `floor(n / 2)` when every toss is a head.
    pub boundary: usize,
    pub gamma: usize,
}

/// Splits `gamma(decode(code))` into block, interior-run and boundary
/// terms of the coupled toss sequence, checking that they add up.
///
/// An all-heads sequence is a path: it has no blocks of size two or more
/// and no tails, so the whole `floor(n / 2)` is booked as boundary.
pub fn gamma_decomposition(code: &TreeCode) -> Result<GammaDecomposition> {
    let n = code.n();
    if n < 4 {
        return Err(Error::TooSmall { op: "gamma_decomposition", n, min: 4 });
    }
    let seq = CoinSequence::from_code(code);
    let cs = coin_stats(&seq);
    let sum_y_ge2 = cs.y.iter().skip(2).sum::<u64>() as usize;
    let weighted_z = cs.z_star.iter().enumerate().skip(2).map(|(k, &z)| k / 2 * z as usize).sum();
    let t = &seq.tosses;
    let boundary = match (t.iter().position(|&h| !h), t.iter().rposition(|&h| !h)) {
        (Some(first_tail), Some(last_tail)) => {
            let suffix = t.len() - 1 - last_tail;
            first_tail.div_ceil(2) + suffix.div_ceil(2)
        }
        _ => n / 2,
    };
    let gamma = gamma_formula(&decode(code))?;
    let total = sum_y_ge2 + weighted_z + boundary;
    if total != gamma {
        return Err(Error::IdentityViolation(format!(
            "{sum_y_ge2} + {weighted_z} + {boundary} != gamma = {gamma} for {code:?}"
        )));
    }
    Ok(GammaDecomposition { sum_y_ge2, weighted_z, boundary, gamma })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Asymptotic moments: mean `n / 3` (up to `O(1)`) and variance `13 n / 50`.
pub fn gamma_theory(n: usize) -> Result<GammaMoments> {
    if n == 0 {
        return Err(Error::TooSmall { op: "gamma_theory", n, min: 1 });
    }
    let nf = n as f64;
    Ok(GammaMoments { mean: nf / 3.0, variance: 13.0 * nf / 50.0 })
}

/// Exact mean and variance of `gamma` over all `2^(n-2)` tree permutations.
///
/// Blocks of the coupled 0-1 sequence are the spine vertices; the first
/// and last block and every block of size two or more are in `S_1`, and a
/// run of size-1 interior blocks pays one for every second member. A scan
/// over the sequence carrying `(P, E[g 1], E[g^2 1])` per state gives the
/// moments in `O(n)`.
pub fn gamma_exact_moments(n: usize) -> Result<GammaMoments> {
    if n == 0 {
        return Err(Error::TooSmall { op: "gamma_exact_moments", n, min: 1 });
    }
    if n <= 2 {
        return Ok(GammaMoments { mean: (n - 1) as f64, variance: 0.0 });
    }
    // State: (first block still open, open block has size >= 2, parity of
    // the current run of size-1 interior blocks).
    #[derive(Clone, Copy, Default)]
    struct M {
        p: f64,
        m1: f64,
        m2: f64,
    }
    impl M {
        fn add(&mut self, from: M, weight: f64, c: f64) {
            self.p += weight * from.p;
            self.m1 += weight * (from.m1 + c * from.p);
            self.m2 += weight * (from.m2 + 2.0 * c * from.m1 + c * c * from.p);
        }
    }
    let idx = |first: bool, big: bool, odd: bool| usize::from(first) * 4 + usize::from(big) * 2 + usize::from(odd);
    let mut cur = [M::default(); 8];
    cur[idx(true, false, false)] = M { p: 1.0, m1: 0.0, m2: 0.0 };
    for _ in 0..n - 3 {
        let mut next = [M::default(); 8];
        for first in [false, true] {
            for big in [false, true] {
                for odd in [false, true] {
                    let s = cur[idx(first, big, odd)];
                    if s.p == 0.0 {
                        continue;
                    }
                    // Tail: the open block grows.
                    next[idx(first, true, odd)].add(s, 0.5, 0.0);
                    // Head: the open block closes.
                    let (c, odd2) = if first || big || odd { (1.0, false) } else { (0.0, true) };
                    next[idx(false, false, odd2)].add(s, 0.5, c);
                }
            }
        }
        cur = next;
    }
    // The final block is always in S_1.
    let mut end = M::default();
    for s in cur {
        end.add(s, 1.0, 1.0);
    }
    Ok(GammaMoments { mean: end.m1, variance: end.m2 - end.m1 * end.m1 })
}
