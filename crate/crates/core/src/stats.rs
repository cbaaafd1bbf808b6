//! Tree statistics, coin-sequence statistics and their closed-form laws.
//!
//! A tree permutation of length `n` is coupled with the 0-1 sequence `y` of
//! its interior bipartition flags (length `n - 2`) and with the toss sequence
//! `s` of length `n - 3`, where `s_i = H` iff `y_i != y_{i+1}`. Blocks of `y`
//! give the non-leaf degrees; runs in `s` give the block sizes.

use serde::{Deserialize, Serialize};

use crate::codec::{decode, TreeCode};
use crate::error::{Error, Result};
use crate::perm::{build_graph, is_tree_permutation, PermGraph, Permutation};

/// `counts[k]` is `D_k`, the number of vertices of degree `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeCensus {
    pub n: usize,
    pub counts: Vec<u64>,
}

impl DegreeCensus {
    pub fn from_degrees(degrees: &[usize]) -> Self {
        let max = degrees.iter().copied().max().unwrap_or(0);
        let mut counts = vec![0u64; max + 1];
        for &d in degrees {
            counts[d] += 1;
        }
        Self { n: degrees.len(), counts }
    }

    /// `D_k`, zero beyond the largest degree.
    pub fn get(&self, k: usize) -> u64 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    pub fn leaves(&self) -> u64 {
        self.get(1)
    }

    pub fn max_degree(&self) -> usize {
        self.counts.iter().rposition(|&c| c > 0).unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub n: usize,
    pub leaves: usize,
    pub diameter: usize,
    pub max_degree: usize,
    pub degree_census: DegreeCensus,
}

/// Longest shortest path, by two breadth-first sweeps.
pub fn bfs_diameter(graph: &PermGraph) -> usize {
    let far = |src: u32| {
        let dist = graph.bfs_distances(src);
        let (i, d) = dist
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != usize::MAX)
            .max_by_key(|&(i, &d)| (d, std::cmp::Reverse(i)))
            .expect("source is reachable");
        (i as u32 + 1, *d)
    };
    let (a, _) = far(1);
    far(a).1
}

/// Leaves, diameter (closed form cross-checked by BFS), degrees.
pub fn tree_stats(perm: &Permutation) -> Result<TreeStats> {
    let n = perm.len();
    if n < 2 {
        return Err(Error::TooSmall { op: "tree_stats", n, min: 2 });
    }
    if !is_tree_permutation(perm) {
        return Err(Error::NotATree);
    }
    let graph = build_graph(perm);
    let census = DegreeCensus::from_degrees(&graph.degrees());
    let leaves = census.leaves() as usize;
    let diameter = n - leaves + 1;
    let bfs = bfs_diameter(&graph);
    if bfs != diameter {
        return Err(Error::IdentityViolation(format!(
            "diameter {bfs} by BFS but n - leaves + 1 = {diameter} for {perm}"
        )));
    }
    Ok(TreeStats { n, leaves, diameter, max_degree: census.max_degree(), degree_census: census })
}

/// Tosses (`true` = head) plus the first symbol of the coupled 0-1 sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinSequence {
    pub tosses: Vec<bool>,
    pub first_symbol: bool,
}

impl CoinSequence {
    /// Parses `H`/`T` characters.
    pub fn parse(tosses: &str, first_symbol: bool) -> Result<Self> {
        let tosses = tosses
            .chars()
            .map(|c| match c {
                'H' | 'h' => Ok(true),
                'T' | 't' => Ok(false),
                _ => Err(Error::InvalidArgument(format!("toss {c:?} is not H or T"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { tosses, first_symbol })
    }

    /// The toss sequence that generates `y`; `y` must be non-empty.
    pub fn from_zero_one(y: &[bool]) -> Self {
        assert!(!y.is_empty(), "0-1 sequence must be non-empty");
        Self { tosses: y.windows(2).map(|p| p[0] != p[1]).collect(), first_symbol: y[0] }
    }

    /// Coupled sequence of a code (`y` = code bits), `n >= 3`.
    pub fn from_code(code: &TreeCode) -> Self {
        let y: Vec<bool> = code.bits().collect();
        Self::from_zero_one(&y)
    }

    /// A tail repeats the previous symbol, a head flips it.
    pub fn zero_one(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.tosses.len() + 1);
        let mut cur = self.first_symbol;
        out.push(cur);
        for &h in &self.tosses {
            cur ^= h;
            out.push(cur);
        }
        out
    }

    /// Block sizes of the coupled 0-1 sequence, in order.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut prev: isize = -1;
        for (i, &h) in self.tosses.iter().enumerate() {
            if h {
                sizes.push((i as isize - prev) as usize);
                prev = i as isize;
            }
        }
        sizes.push((self.tosses.len() as isize - prev) as usize);
        sizes
    }

    pub fn to_string_ht(&self) -> String {
        self.tosses.iter().map(|&h| if h { 'H' } else { 'T' }).collect()
    }
}

/// Longest run of tails; zero for an empty or all-heads sequence.
pub fn longest_tail_run(tosses: &[bool]) -> usize {
    let mut best = 0;
    let mut cur = 0;
    for &h in tosses {
        cur = if h { 0 } else { cur + 1 };
        best = best.max(cur);
    }
    best
}

/// Counts indexed by `k`; index 0 of `y` and `y_star` is always zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinStats {
    /// `Y_k`: blocks of size `k` in the 0-1 sequence.
    pub y: Vec<u64>,
    /// `Y*_k`: occurrences of `H T^(k-1) H`.
    pub y_star: Vec<u64>,
    /// `Z*_k`: occurrences of `T H^(k+1) T`, from `k = 0`.
    pub z_star: Vec<u64>,
    pub longest_tail_run: usize,
    pub first_block: usize,
    pub last_block: usize,
    pub block_count: usize,
}

fn bump(v: &mut Vec<u64>, k: usize) {
    if v.len() <= k {
        v.resize(k + 1, 0);
    }
    v[k] += 1;
}

impl CoinStats {
    pub fn y(&self, k: usize) -> u64 {
        self.y.get(k).copied().unwrap_or(0)
    }
    pub fn y_star(&self, k: usize) -> u64 {
        self.y_star.get(k).copied().unwrap_or(0)
    }
    pub fn z_star(&self, k: usize) -> u64 {
        self.z_star.get(k).copied().unwrap_or(0)
    }
}

pub fn coin_stats(seq: &CoinSequence) -> CoinStats {
    let sizes = seq.block_sizes();
    let mut y = vec![0u64];
    for &b in &sizes {
        bump(&mut y, b);
    }
    // Consecutive heads at i < j enclose a tail run of length j - i - 1.
    let mut y_star = vec![0u64];
    let mut z_star = Vec::new();
    let mut last_head: Option<usize> = None;
    let mut last_tail: Option<usize> = None;
    for (i, &h) in seq.tosses.iter().enumerate() {
        if h {
            if let Some(j) = last_head {
                bump(&mut y_star, i - j);
            }
            last_head = Some(i);
        } else {
            if let Some(j) = last_tail {
                let heads = i - j - 1;
                if heads >= 1 {
                    bump(&mut z_star, heads - 1);
                }
            }
            last_tail = Some(i);
        }
    }
    CoinStats {
        y,
        y_star,
        z_star,
        longest_tail_run: longest_tail_run(&seq.tosses),
        first_block: sizes[0],
        last_block: *sizes.last().expect("at least one block"),
        block_count: sizes.len(),
    }
}

/// Checks `D_1 = n - Y` and `D_(k+1) = Y_k` between the tree `decode(code)`
/// (degrees taken from its inversion graph) and the code bits.
pub fn coupled_tree_stats_equivalence(code: &TreeCode) -> Result<bool> {
    let n = code.n();
    if n < 3 {
        return Err(Error::TooSmall { op: "coupled_tree_stats_equivalence", n, min: 3 });
    }
    let graph = build_graph(&decode(code));
    let census = DegreeCensus::from_degrees(&graph.degrees());
    let cs = coin_stats(&CoinSequence::from_code(code));
    let mut ok = census.get(1) == (n - cs.block_count) as u64;
    let top = census.counts.len().max(cs.y.len() + 1);
    for k in 1..top {
        ok &= census.get(k + 1) == cs.y(k);
    }
    Ok(ok)
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `P(L_n = leaves)`: `2 + Bin(n - 3, 1/2)` for `n >= 3`.
///
/// `n = 2` and `n = 1` are point masses at 2 and 0 leaves.
pub fn leaves_pmf(n: usize, leaves: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => f64::from(leaves == 0),
        2 => f64::from(leaves == 2),
        _ => {
            if leaves < 2 || leaves > n - 1 {
                0.0
            } else {
                binomial_f64((n - 3) as u64, (leaves - 2) as u64) * 0.5f64.powi((n - 3) as i32)
            }
        }
    }
}

/// `P(diameter = d)` via `d = n - L_n + 1`.
pub fn diameter_pmf(n: usize, d: usize) -> f64 {
    match n {
        0 => 0.0,
        1 => f64::from(d == 0),
        _ => {
            if d == 0 || d > n {
                0.0
            } else {
                leaves_pmf(n, n + 1 - d)
            }
        }
    }
}

/// Asymptotic `P(H_n - floor(log2(n - 3)) < k) ≈ exp(-2^(1 - k + frac))`,
/// `frac` the fractional part of `log2(n - 3)`. Carries an `o(1)` error.
pub fn maxdeg_cdf_approx(n: usize, k: i64) -> f64 {
    assert!(n >= 4, "maxdeg_cdf_approx needs n >= 4");
    let l = ((n - 3) as f64).log2();
    let frac = l - l.floor();
    (-(2f64).powf(1.0 - k as f64 + frac)).exp()
}

/// `floor(log2(n - 3))`, the centring shift for the maximum degree.
pub fn maxdeg_shift(n: usize) -> i64 {
    assert!(n >= 4, "maxdeg_shift needs n >= 4");
    (usize::BITS - 1 - (n - 3).leading_zeros()) as i64
}

/// `P(longest tail run in len fair tosses <= r)`.
pub fn longest_tail_run_cdf(len: usize, r: usize) -> f64 {
    if r >= len {
        return 1.0;
    }
    // dp[c]: probability of no run longer than r so far, ending in c tails.
    let mut dp = vec![0.0f64; r + 1];
    dp[0] = 1.0;
    for _ in 0..len {
        let total: f64 = dp.iter().sum();
        for c in (1..=r).rev() {
            dp[c] = dp[c - 1] * 0.5;
        }
        dp[0] = total * 0.5;
    }
    dp.iter().sum()
}

/// Exact law of the maximum degree `H_n = 2 + tau(n - 3)`, indexed by
/// degree and truncated once the remaining mass is below `1e-16`.
pub fn maxdeg_pmf(n: usize) -> Vec<f64> {
    match n {
        0 => return vec![],
        1 => return vec![1.0],
        2 => return vec![0.0, 1.0],
        _ => {}
    }
    let len = n - 3;
    let mut pmf = vec![0.0, 0.0];
    let mut prev = 0.0;
    for r in 0..=len {
        let cdf = longest_tail_run_cdf(len, r);
        pmf.push(cdf - prev);
        prev = cdf;
        if 1.0 - cdf < 1e-16 {
            break;
        }
    }
    pmf
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YStarMoments {
    /// Exact: `(n - k - 3) 2^-(k+1)`.
    pub mean: f64,
    /// Leading linear term `sigma_{k,k} n`; the remainder is `O(k 2^-k)`.
    pub variance: f64,
    /// Exact finite-`n` variance over uniform toss sequences.
    pub variance_exact: f64,
}

/// Moments of `Y*_k` over `n - 3` fair tosses.
///
/// The mean counts `H T^(k-1) H` windows in `n - 3` tosses, so it is
/// `(n - k - 3) / 2^(k+1)`; an `(n - k - 1)` numerator would correspond to
/// `n - 1` tosses. The exhaustive tests pin the former.
pub fn y_star_moments(n: usize, k: usize) -> YStarMoments {
    assert!(k >= 1, "k >= 1");
    let windows = (n as f64 - k as f64 - 3.0).max(0.0);
    let p = 0.5f64.powi(k as i32 + 1);
    let mean = windows * p;
    // Overlapping windows at lags 1..k-1 are mutually exclusive; lag k shares
    // exactly one head.
    let mut var = windows * p * (1.0 - p);
    for lag in 1..k {
        var -= 2.0 * (windows - lag as f64).max(0.0) * p * p;
    }
    var += 2.0 * (windows - k as f64).max(0.0) * (0.5f64.powi(2 * k as i32 + 1) - p * p);
    YStarMoments { mean, variance: sigma_entry(k, k) * n as f64, variance_exact: var }
}

/// Limiting covariance of `(Y*_i, Y*_j) / sqrt(n)`.
pub fn sigma_entry(i: usize, j: usize) -> f64 {
    assert!(i >= 1 && j >= 1, "indices start at 1");
    if i == j {
        let p = 0.5f64.powi(i as i32 + 1);
        p * (1.0 - (2.0 * i as f64 - 3.0) * p)
    } else {
        -((i + j) as f64 - 3.0) * 0.5f64.powi((i + j + 2) as i32)
    }
}

/// North-west `m x m` corner of `A Sigma A^T`, the limiting covariance of
/// `(D_1, ..., D_m) / sqrt(n)`. Row 1 of `A` is all `-1`, row `r > 1` is the
/// unit vector `e_(r-1)`; sums are truncated at index `m + 64`.
pub fn degree_cov(m: usize) -> Vec<Vec<f64>> {
    assert!(m >= 1, "m >= 1");
    let cap = m + 64;
    let sigma: Vec<Vec<f64>> =
        (1..=cap).map(|i| (1..=cap).map(|j| sigma_entry(i, j)).collect()).collect();
    let a = |r: usize, c: usize| -> f64 {
        if r == 0 {
            -1.0
        } else if c + 1 == r {
            1.0
        } else {
            0.0
        }
    };
    // A Sigma, then (A Sigma) A^T.
    let a_sigma: Vec<Vec<f64>> = (0..m)
        .map(|r| (0..cap).map(|c| (0..cap).map(|t| a(r, t) * sigma[t][c]).sum()).collect())
        .collect();
    (0..m)
        .map(|r| (0..m).map(|s| (0..cap).map(|t| a_sigma[r][t] * a(s, t)).sum()).collect())
        .collect()
}

/// Exact `E Y_k`: blocks of size `k` in a uniform 0-1 sequence of length `n - 2`.
pub fn block_count_mean(n: usize, k: usize) -> f64 {
    assert!(n >= 3 && k >= 1);
    let len = n - 2;
    if k > len {
        0.0
    } else if k == len {
        0.5f64.powi(len as i32 - 1)
    } else {
        y_star_moments(n, k).mean + 2.0 * 0.5f64.powi(k as i32)
    }
}

/// Exact `E D_k` for the uniform random tree permutation, `n >= 3`.
pub fn degree_count_mean(n: usize, k: usize) -> f64 {
    assert!(n >= 3 && k >= 1);
    if k == 1 {
        // D_1 = n - Y and Y = 1 + #heads in n - 3 tosses
        n as f64 - 1.0 - (n - 3) as f64 / 2.0
    } else {
        block_count_mean(n, k - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunsMoments {
    pub mean: f64,
    pub variance: f64,
}

/// `E R_n` and `var R_n` for runs of equal values in `n` iid
/// `Geom(1 - q)` draws on `{1, 2, ...}`.
pub fn geometric_runs(n: usize, q: f64) -> Result<RunsMoments> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!("q = {q} is outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::TooSmall { op: "geometric_runs", n, min: 1 });
    }
    let nf = n as f64;
    let denom = (1.0 + q).powi(2) * (1.0 - q.powi(3));
    let mean = 2.0 * q / (1.0 + q) * nf + (1.0 - q) / (1.0 + q);
    let slope = 2.0 * q * (1.0 - q).powi(2) * (2.0 + q * q) / denom;
    let intercept = 2.0 * q * (1.0 - q).powi(2) * (3.0 - q + q * q) / denom;
    // The linear form assumes n >= 2; a single draw is one run.
    let variance = if n == 1 { 0.0 } else { slope * nf - intercept };
    Ok(RunsMoments { mean, variance })
}

/// `R_n`: number of maximal runs of equal consecutive values.
pub fn runs_count<T: PartialEq>(values: &[T]) -> usize {
    if values.is_empty() {
        return 0;
    }
    1 + values.windows(2).filter(|p| p[0] != p[1]).count()
}
