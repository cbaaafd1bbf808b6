use std::process::{Command, Output};

use serde_json::Value;

fn permtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permtree")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn counts_trees() {
    let out = permtree(&["count", "--what", "trees", "--n", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "{\"schema\":\"permtree/1\",\"what\":\"trees\",\"n\":10,\"count\":256}\n");
}

#[test]
fn big_counts_are_exact() {
    let out = permtree(&["--format", "text", "count", "--what", "trees", "--n", "102"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "1267650600228229401496703205376");
    let out = permtree(&["count", "--what", "forests", "--n", "8"]);
    assert_eq!(json(&out)["count"], 610);
    let out = permtree(&["count", "--what", "forests", "--n", "8", "--m", "1"]);
    assert_eq!(json(&out)["count"], 64);
    let out = permtree(&["count", "--what", "indecomposable", "--n", "8"]);
    assert_eq!(json(&out)["count"], 29093);
}

#[test]
fn gamma_theory_values() {
    let v = json(&permtree(&["theory", "--stat", "gamma", "--n", "300"]));
    assert_eq!(v["mean"], 100);
    assert_eq!(v["variance"], 78);
    let v = json(&permtree(&["theory", "--stat", "ystar", "--n", "100", "--k", "1"]));
    assert_eq!(v["variance"], 31.25);
}

#[test]
fn verify_small_battery() {
    let out = permtree(&["verify", "--max-n", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["count", "--what", "trees"][..],
        &["count", "--what", "forests", "--n", "5", "--m", "9"],
        &["theory", "--stat", "nonsense", "--n", "5"],
        &["stats", "--n", "100", "--samples", "10", "--seed", "1", "--stat", "bogus"],
        &["frobnicate"],
    ] {
        let out = permtree(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn enumeration_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_permtree"))
        .args(["enumerate", "--n", "6"])
        .env("PERMTREE_ENUM_CAP", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v = json(&permtree(&["enumerate", "--n", "6"]));
    assert_eq!(v["items"].as_array().unwrap().len(), 16);
}

#[test]
fn output_independent_of_workers() {
    for args in [
        &["sample", "--n", "50", "--count", "200", "--seed", "9"][..],
        &["stats", "--n", "200", "--samples", "2000", "--seed", "3", "--stat", "gamma"],
        &["stats", "--n", "200", "--samples", "2000", "--seed", "3", "--stat", "dcensus"],
    ] {
        let mut outs = Vec::new();
        for w in ["1", "2", "5"] {
            let mut full = vec!["--workers", w];
            full.extend_from_slice(args);
            outs.push(permtree(&full).stdout);
        }
        assert!(outs.windows(2).all(|p| p[0] == p[1]), "{args:?}");
    }
}

#[test]
fn csv_and_text_formats() {
    let out = permtree(&["--format", "csv", "enumerate", "--n", "4", "--emit", "stats"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,code,perm,leaves,diameter,max_degree,gamma");
    assert_eq!(lines.len(), 5);
    let out = permtree(&["--format", "text", "enumerate", "--n", "4"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
    let out = permtree(&["--format", "csv", "theory", "--stat", "gamma", "--n", "30"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("field,value\n"));
}

#[test]
fn tolerances_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tight.toml");
    let base = include_str!("../../core/config/default_tolerances.toml");
    let tight = base
        .lines()
        .map(|l| if l.starts_with("gamma_mean_per_n") { "gamma_mean_per_n = [0.01, 0.02]" } else { l })
        .collect::<Vec<_>>()
        .join("\n");
    std::fs::write(&path, tight).unwrap();
    let args = ["stats", "--n", "300", "--samples", "2000", "--seed", "1", "--stat", "gamma"];
    let mean_pass = |out: &Output| {
        let v = json(out);
        v["tests"].as_array().unwrap().iter().find(|t| t["name"] == "mean_per_n").unwrap()["pass"].clone()
    };
    assert_eq!(mean_pass(&permtree(&args)), true);
    let mut with_file = args.to_vec();
    with_file.extend(["--tolerances", path.to_str().unwrap()]);
    let strict = permtree(&with_file);
    assert_eq!(mean_pass(&strict), false);
    assert_eq!(strict.status.code(), Some(1));
    assert_eq!(json(&strict)["verdict"], "fail");

    std::fs::write(&path, "unknown_key = 1\n").unwrap();
    assert_eq!(permtree(&with_file).status.code(), Some(2));
}

#[test]
fn sampling_is_reproducible() {
    let a = permtree(&["sample", "--n", "30", "--count", "5", "--seed", "42"]);
    let b = permtree(&["sample", "--n", "30", "--count", "5", "--seed", "42"]);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    for item in v["items"].as_array().unwrap() {
        assert_eq!(item["perm"].as_array().unwrap().len(), 30);
    }
}
