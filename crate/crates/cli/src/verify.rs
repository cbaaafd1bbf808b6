//! Oracle battery: every cross-module identity, checked exhaustively up to
//! a size bound.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use permtree::codec::{count_trees, decode, encode, enum_cap, enumerate_trees, TreeCode};
use permtree::counting::{census, forest_count, forest_total, DEFAULT_CENSUS_CAP};
use permtree::cover::{gamma_decomposition, gamma_formula, marking_algorithm, min_cover_oracle};
use permtree::montecarlo::SCHEMA;
use permtree::perm::{build_graph, components, is_indecomposable, pattern_flags, permutations, Permutation};
use permtree::stats::{
    coin_stats, coupled_tree_stats_equivalence, diameter_pmf, leaves_pmf, longest_tail_run, tree_stats,
    y_star_moments, CoinSequence,
};
use permtree::structure::{central_path, neighbors_via_blocks};
use permtree::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Largest `n` for checks that walk all of `S_n`.
const BRUTE_FORCE_MAX: usize = 8;

/// Largest toss-sequence length scanned exhaustively.
const TOSS_MAX: usize = 16;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BatteryReport {
    pub schema: &'static str,
    pub max_n: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// Runs `f` on every tree with `lo <= n <= hi`; the first failure message wins.
fn over_trees<F>(lo: usize, hi: usize, f: F) -> (u64, Option<String>)
where
    F: Fn(&TreeCode, &Permutation) -> Option<String> + Sync,
{
    let mut seen = 0;
    for n in lo..=hi {
        let codes = if n <= 2 { 1u64 } else { 1u64 << (n - 2) };
        let bad = (0..codes).into_par_iter().find_map_first(|i| {
            let code = TreeCode::from_index(n, i).expect("index in range");
            f(&code, &decode(&code))
        });
        seen += codes;
        if bad.is_some() {
            return (seen, bad);
        }
    }
    (seen, None)
}

fn check(name: &str, result: (u64, Option<String>)) -> Check {
    let (seen, bad) = result;
    Check {
        name: name.into(),
        pass: bad.is_none(),
        detail: bad.unwrap_or_else(|| format!("{seen} cases")),
    }
}

fn tosses(len: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << len).map(move |m| (0..len).map(|i| m >> i & 1 == 1).collect())
}

pub fn run_battery(max_n: usize) -> Result<BatteryReport> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max-n must be at least 1".into()));
    }
    let cap = enum_cap();
    if max_n > cap {
        return Err(Error::CapExceeded { n: max_n, cap });
    }
    let brute = max_n.min(BRUTE_FORCE_MAX);
    let mut checks = Vec::new();

    let census_max = max_n.min(DEFAULT_CENSUS_CAP);
    let mut bad = None;
    for n in 1..=census_max {
        let m = census(n)?.mismatches();
        if let Some(first) = m.into_iter().next() {
            bad = Some(format!("n={n}: {first}"));
            break;
        }
    }
    checks.push(check("census_vs_formulas", (census_max as u64, bad)));

    let mut bad = None;
    for n in 1..=max_n.max(60) {
        let sum: BigUint = (1..=n).map(|m| forest_count(n, m).expect("1 <= m <= n")).sum();
        if sum != forest_total(n)? || forest_count(n, 1)? != count_trees(n) {
            bad = Some(format!("n={n}"));
            break;
        }
    }
    checks.push(check("forest_sums", (max_n.max(60) as u64, bad)));

    checks.push(check(
        "codec_roundtrip",
        over_trees(1, max_n, |code, w| (encode(w).ok().as_ref() != Some(code)).then(|| format!("{code:?}"))),
    ));

    let mut bad = None;
    for n in 1..=brute {
        let mut a: Vec<Vec<u32>> = enumerate_trees(n)?.map(Permutation::into_values).collect();
        let mut b: Vec<Vec<u32>> =
            permutations(n).filter(|w| build_graph(w).is_tree()).map(Permutation::into_values).collect();
        a.sort();
        b.sort();
        if a != b {
            bad = Some(format!("n={n}"));
            break;
        }
    }
    checks.push(check("decode_image_is_tree_set", (brute as u64, bad)));

    let mut bad = None;
    let mut seen = 0u64;
    for n in 1..=brute {
        for w in permutations(n) {
            let g = build_graph(&w);
            let flags = pattern_flags(&w);
            let comps = components(&w);
            let ok = flags.is_forest() == g.is_acyclic()
                && is_indecomposable(&w) == g.is_connected()
                && comps.len() == g.connected_components().len();
            seen += 1;
            if !ok {
                bad = Some(format!("{w}"));
                break;
            }
        }
    }
    checks.push(check("patterns_and_components_vs_graph", (seen, bad)));

    checks.push(check(
        "adjacency_from_blocks",
        over_trees(2, max_n, |_, w| {
            let g = build_graph(w);
            (1..=w.len())
                .find(|&p| neighbors_via_blocks(w, p).ok().as_deref() != Some(g.neighbors(w.at(p))))
                .map(|p| format!("{w} at position {p}"))
        }),
    ));

    checks.push(check(
        "caterpillar_shape",
        over_trees(3, max_n, |_, w| {
            let g = build_graph(w);
            let n = w.len();
            let path = central_path(w).ok()?.vertices;
            let mut sorted = path.clone();
            sorted.sort_unstable();
            let inner: Vec<u32> = (1..=n as u32).filter(|&v| g.degree(v) >= 2).collect();
            let linked = path.windows(2).all(|p| g.neighbors(p[0]).contains(&p[1]));
            let (first, last) = (path[0], *path.last().expect("non-empty"));
            let ends = (first == 1 || first == w.at(1)) && (last == n as u32 || last == w.at(n));
            (sorted != inner || !linked || !ends).then(|| format!("{w}"))
        }),
    ));

    checks.push(check(
        "diameter_formula_vs_bfs",
        over_trees(2, max_n, |_, w| tree_stats(w).err().map(|e| format!("{w}: {e}"))),
    ));

    checks.push(check(
        "degrees_vs_blocks",
        over_trees(3, max_n, |code, w| {
            (!coupled_tree_stats_equivalence(code).unwrap_or(false)).then(|| format!("{w}"))
        }),
    ));

    checks.push(check(
        "gamma_triple_agreement",
        over_trees(1, max_n, |_, w| {
            let g = gamma_formula(w).ok()?;
            let m = marking_algorithm(w).ok()?;
            let covered = build_graph(w).edges().iter().all(|(u, v)| m.chosen.contains(u) || m.chosen.contains(v));
            (m.size != g || min_cover_oracle(w).ok() != Some(g) || !covered).then(|| format!("{w}"))
        }),
    ));

    checks.push(check(
        "gamma_decomposition",
        over_trees(4, max_n.max(3), |code, w| gamma_decomposition(code).err().map(|e| format!("{w}: {e}"))),
    ));

    let mut bad = None;
    let mut seen = 0u64;
    for n in 3..=max_n {
        let total = 1u64 << (n - 2);
        let mut leaves = BTreeMap::new();
        let mut diam = BTreeMap::new();
        let mut maxdeg = BTreeMap::new();
        let mut last_leaf = 0u64;
        for w in enumerate_trees(n)? {
            let s = tree_stats(&w)?;
            *leaves.entry(s.leaves).or_insert(0u64) += 1;
            *diam.entry(s.diameter).or_insert(0u64) += 1;
            *maxdeg.entry(s.max_degree).or_insert(0u64) += 1;
            last_leaf += u64::from(build_graph(&w).degree(w.at(n)) == 1);
        }
        seen += total;
        let leaf_ok = (0..=n).all(|l| leaves.get(&l).copied().unwrap_or(0) as f64 == leaves_pmf(n, l) * total as f64);
        let diam_ok =
            (0..=n + 1).all(|d| diam.get(&d).copied().unwrap_or(0) as f64 == diameter_pmf(n, d) * total as f64);
        let tail_ok = if n - 3 <= TOSS_MAX {
            let mut tails = BTreeMap::new();
            for t in tosses(n - 3) {
                *tails.entry(2 + longest_tail_run(&t)).or_insert(0u64) += 2;
            }
            tails == maxdeg
        } else {
            true
        };
        if !(leaf_ok && diam_ok && tail_ok && 2 * last_leaf == total) {
            bad = Some(format!("n={n}"));
            break;
        }
    }
    checks.push(check("exact_small_n_laws", (seen, bad)));

    let mut bad = None;
    let mut seen = 0u64;
    for len in 0..=max_n.saturating_sub(3).min(TOSS_MAX) {
        let n = len + 3;
        let mut sums = vec![0u64; len + 2];
        let mut z_law = BTreeMap::new();
        let mut y_law = BTreeMap::new();
        for t in tosses(len) {
            let cs = coin_stats(&CoinSequence { tosses: t, first_symbol: false });
            let excess: u64 = (1..=len + 1).map(|k| cs.y(k) - cs.y_star(k)).sum();
            if excess != cs.block_count.min(2) as u64 {
                bad.get_or_insert(format!("excess {excess} at len {len}"));
            }
            for (k, sum) in sums.iter_mut().enumerate().skip(1) {
                *sum += cs.y_star(k);
            }
            for k in 0..=len {
                *z_law.entry((k, cs.z_star(k))).or_insert(0u64) += 1;
                *y_law.entry((k, cs.y_star(k + 2))).or_insert(0u64) += 1;
            }
            seen += 1;
        }
        for (k, &sum) in sums.iter().enumerate().take(len).skip(1) {
            let mean = sum as f64 / (1u64 << len) as f64;
            if (mean - y_star_moments(n, k).mean).abs() > 1e-12 {
                bad.get_or_insert(format!("mean Y*_{k} at n={n}"));
            }
        }
        if z_law != y_law {
            bad.get_or_insert(format!("Z* law at len {len}"));
        }
    }
    checks.push(check("coin_sequence_identities", (seen, bad)));

    let passed = checks.iter().all(|c| c.pass);
    Ok(BatteryReport { schema: SCHEMA, max_n, checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_passes_small() {
        let r = run_battery(8).unwrap();
        for c in &r.checks {
            assert!(c.pass, "{} {}", c.name, c.detail);
        }
        assert!(r.passed);
        assert!(run_battery(0).is_err());
        assert!(matches!(run_battery(enum_cap() + 1), Err(Error::CapExceeded { .. })));
    }
}
