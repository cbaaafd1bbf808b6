//! Exact counts of forest, tree and indecomposable permutations, and the
//! brute-force census they are checked against.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{components, is_indecomposable, is_tree_permutation, next_permutation, pattern_flags, Permutation};

/// Largest `n` the census walks by default (`9! = 362880` permutations).
pub const DEFAULT_CENSUS_CAP: usize = 9;

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `f(n, m)`: forest permutations of `[n]` whose graph has `m` trees.
pub fn forest_count(n: usize, m: usize) -> Result<BigUint> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n, got n = {n}, m = {m}")));
    }
    if m == n {
        return Ok(BigUint::one());
    }
    let mut total = BigUint::zero();
    for k in 1..=m.min(n - m) {
        total += (binomial(m, k) * binomial(n - m - 1, k - 1)) << (n - m - k);
    }
    Ok(total)
}

/// Coefficients `[y^0..=y^n]` of `T(y) = y + y^2 / (1 - 2y)`.
pub fn tree_gf(n: usize) -> Vec<BigUint> {
    (0..=n)
        .map(|i| match i {
            0 => BigUint::zero(),
            1 => BigUint::one(),
            _ => BigUint::one() << (i - 2),
        })
        .collect()
}

/// `[y^n] T(y)^m` by repeated truncated multiplication.
pub fn forest_count_gf(n: usize, m: usize) -> BigUint {
    let t = tree_gf(n);
    let mut acc = vec![BigUint::zero(); n + 1];
    acc[0] = BigUint::one();
    for _ in 0..m {
        let mut next = vec![BigUint::zero(); n + 1];
        for (i, a) in acc.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (j, b) in t.iter().enumerate().take(n + 1 - i).skip(1) {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    acc.swap_remove(n)
}

/// `f_n` by `f_n = 3 f_(n-1) - f_(n-2)`, `f_1 = 1`, `f_2 = 2`.
pub fn forest_total(n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::TooSmall { op: "forest_total", n, min: 1 });
    }
    let (mut a, mut b) = (BigUint::one(), BigUint::from(2u8));
    if n == 1 {
        return Ok(a);
    }
    for _ in 2..n {
        let c = &b * 3u8 - &a;
        a = b;
        b = c;
    }
    Ok(b)
}

/// Binet-style closed form for `f_n` in floating point.
pub fn forest_total_closed_form(n: usize) -> f64 {
    let s5 = 5f64.sqrt();
    let nf = n as f64;
    (s5 - 1.0) / (2.0 * s5) * ((3.0 + s5) / 2.0).powf(nf)
        + (s5 + 1.0) / (2.0 * s5) * ((3.0 - s5) / 2.0).powf(nf)
}

/// Indecomposable permutations of `[n]`: `n! - sum_(i<n) (n-i)! f(i)`.
pub fn indecomposable_count(n: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::TooSmall { op: "indecomposable_count", n, min: 1 });
    }
    let facts: Vec<BigUint> = (0..=n).map(factorial).collect();
    let mut f: Vec<BigUint> = vec![BigUint::zero(), BigUint::one()];
    for k in 2..=n {
        let split: BigUint = (1..k).map(|i| &facts[k - i] * &f[i]).sum();
        f.push(&facts[k] - split);
    }
    Ok(f.swap_remove(n))
}

/// Classification tallies over all of `S_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusTable {
    pub n: usize,
    pub total: u64,
    pub connected: u64,
    pub trees: u64,
    /// Forest permutations keyed by number of trees.
    pub forests: BTreeMap<usize, u64>,
}

impl CensusTable {
    fn empty(n: usize) -> Self {
        Self { n, total: 0, connected: 0, trees: 0, forests: BTreeMap::new() }
    }

    fn merge(mut self, other: Self) -> Self {
        self.total += other.total;
        self.connected += other.connected;
        self.trees += other.trees;
        for (m, c) in other.forests {
            *self.forests.entry(m).or_default() += c;
        }
        self
    }

    fn record(&mut self, perm: &Permutation) {
        self.total += 1;
        let connected = is_indecomposable(perm);
        self.connected += u64::from(connected);
        if connected && is_tree_permutation(perm) {
            self.trees += 1;
        }
        if pattern_flags(perm).is_forest() {
            *self.forests.entry(components(perm).len()).or_default() += 1;
        }
    }

    pub fn forest_total(&self) -> u64 {
        self.forests.values().sum()
    }

    /// Rows `n,class,m,count`; `m` is empty except for forests.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,class,m,count\n");
        let n = self.n;
        let _ = writeln!(out, "{n},total,,{}", self.total);
        let _ = writeln!(out, "{n},connected,,{}", self.connected);
        let _ = writeln!(out, "{n},trees,,{}", self.trees);
        for (m, c) in &self.forests {
            let _ = writeln!(out, "{n},forests,{m},{c}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("census serializes")
    }

    /// Compares every tally with its closed form; returns the mismatches.
    pub fn mismatches(&self) -> Vec<String> {
        let n = self.n;
        let mut bad = Vec::new();
        let mut check = |what: String, got: u64, want: BigUint| {
            if BigUint::from(got) != want {
                bad.push(format!("{what}: census {got}, formula {want}"));
            }
        };
        check("total".into(), self.total, factorial(n));
        check("trees".into(), self.trees, crate::codec::count_trees(n));
        check("connected".into(), self.connected, indecomposable_count(n).expect("n >= 1"));
        check("forest total".into(), self.forest_total(), forest_total(n).expect("n >= 1"));
        for m in 1..=n {
            let got = self.forests.get(&m).copied().unwrap_or(0);
            check(format!("forests m={m}"), got, forest_count(n, m).expect("1 <= m <= n"));
        }
        bad
    }
}

/// Census of `S_n` with the default cap.
pub fn census(n: usize) -> Result<CensusTable> {
    census_capped(n, DEFAULT_CENSUS_CAP)
}

/// Walks `S_n` in lexicographic order, one worker task per leading letter.
pub fn census_capped(n: usize, cap: usize) -> Result<CensusTable> {
    if n == 0 {
        return Err(Error::TooSmall { op: "census", n, min: 1 });
    }
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let parts: Vec<CensusTable> = (1..=n as u32)
        .into_par_iter()
        .map(|lead| {
            let mut table = CensusTable::empty(n);
            let mut w: Vec<u32> = std::iter::once(lead).chain((1..=n as u32).filter(|&v| v != lead)).collect();
            loop {
                table.record(&Permutation::from_vec_unchecked(w.clone()));
                if !next_permutation(&mut w[1..]) {
                    break;
                }
            }
            table
        })
        .collect();
    Ok(parts.into_iter().fold(CensusTable::empty(n), CensusTable::merge))
}
