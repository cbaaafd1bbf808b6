//! Public API checked against independent brute-force oracles and frozen values.

use num_bigint::BigUint;
use permtree::codec::{count_trees, decode, encode, enumerate_trees, TreeCode};
use permtree::counting::{census, forest_total, indecomposable_count};
use permtree::cover::{gamma_exact_moments, gamma_formula};
use permtree::montecarlo::{run_experiment_with_workers, ExperimentConfig, Statistic};
use permtree::perm::permutations;
use permtree::{build_graph, Permutation};
use proptest::prelude::*;

/// Inversion pairs by definition, quadratic.
fn naive_edges(w: &[u32]) -> Vec<(u32, u32)> {
    let mut e = Vec::new();
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            if w[i] > w[j] {
                e.push((w[j], w[i]));
            }
        }
    }
    e
}

/// Smallest vertex cover by trying every subset.
fn naive_cover(n: usize, edges: &[(u32, u32)]) -> usize {
    (0u32..1 << n)
        .filter(|s| edges.iter().all(|&(u, v)| s >> (u - 1) & 1 == 1 || s >> (v - 1) & 1 == 1))
        .map(u32::count_ones)
        .min()
        .unwrap() as usize
}

fn naive_is_tree(n: usize, edges: &[(u32, u32)]) -> bool {
    if edges.len() + 1 != n {
        return false;
    }
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    edges.iter().all(|&(u, v)| {
        let (a, b) = (find(&mut parent, u as usize), find(&mut parent, v as usize));
        parent[a] = b;
        a != b
    })
}

#[test]
fn frozen_counts() {
    let forests: Vec<String> = (1..=10).map(|n| forest_total(n).unwrap().to_string()).collect();
    assert_eq!(forests, ["1", "2", "5", "13", "34", "89", "233", "610", "1597", "4181"]);
    let connected: Vec<String> = (1..=9).map(|n| indecomposable_count(n).unwrap().to_string()).collect();
    assert_eq!(connected, ["1", "1", "3", "13", "71", "461", "3447", "29093", "273343"]);
    assert_eq!(count_trees(66), BigUint::from(1u8) << 64);
}

#[test]
fn trees_match_naive_graph() {
    for n in 1..=7 {
        let mut naive: Vec<Vec<u32>> = permutations(n)
            .map(Permutation::into_values)
            .filter(|w| naive_is_tree(n, &naive_edges(w)))
            .collect();
        let mut ours: Vec<Vec<u32>> = enumerate_trees(n).unwrap().map(Permutation::into_values).collect();
        naive.sort();
        ours.sort();
        assert_eq!(naive, ours, "n={n}");
    }
}

#[test]
fn gamma_matches_subset_search() {
    for n in 1..=11 {
        for w in enumerate_trees(n).unwrap() {
            assert_eq!(gamma_formula(&w).unwrap(), naive_cover(n, &naive_edges(w.values())), "{w}");
        }
    }
}

#[test]
fn gamma_exact_moments_match_enumeration() {
    for n in [5, 9, 13] {
        let vals: Vec<f64> = enumerate_trees(n).unwrap().map(|w| gamma_formula(&w).unwrap() as f64).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / vals.len() as f64;
        let m = gamma_exact_moments(n).unwrap();
        assert!((m.mean - mean).abs() < 1e-9 && (m.variance - var).abs() < 1e-9, "n={n}");
    }
}

#[test]
fn census_json_is_valid() {
    let c = census(5).unwrap();
    let v: serde_json::Value = serde_json::from_str(&c.to_json()).unwrap();
    assert_eq!(v["trees"], 8);
    assert_eq!(v["connected"], 71);
    assert!(c.mismatches().is_empty());
}

#[test]
fn reports_do_not_depend_on_workers() {
    for stat in [Statistic::Gamma, Statistic::Maxdeg, Statistic::Dcov { m: 3 }] {
        let config = ExperimentConfig::new(300, 3000, 11, stat);
        let a = run_experiment_with_workers(&config, 1).unwrap();
        let b = run_experiment_with_workers(&config, 4).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

#[test]
fn graph_edges_match_definition() {
    let w = decode(&TreeCode::from_hex(12, "0x2b5").unwrap());
    let mut naive = naive_edges(w.values());
    naive.sort_unstable();
    let mut ours = build_graph(&w).edges();
    ours.sort_unstable();
    assert_eq!(naive, ours);
}

proptest! {
    #[test]
    fn roundtrip_large(n in 3usize..400, seed in any::<u64>()) {
        let bits: Vec<bool> = (0..n - 2).map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1).collect();
        let code = TreeCode::from_bits(n, &bits).unwrap();
        let w = decode(&code);
        prop_assert_eq!(naive_edges(w.values()).len(), n - 1);
        prop_assert_eq!(encode(&w).unwrap(), code);
    }
}
