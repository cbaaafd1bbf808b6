//! `theory` subcommand: every number comes from the library's closed forms.

use permtree::cover::{gamma_exact_moments, gamma_theory};
use permtree::montecarlo::SCHEMA;
use permtree::stats::{
    degree_count_mean, degree_cov, diameter_pmf, geometric_runs, leaves_pmf, maxdeg_cdf_approx, maxdeg_pmf,
    sigma_entry, y_star_moments,
};
use serde_json::{json, Map, Value};

use crate::Failure;

#[derive(Clone, Copy, Debug, Default)]
pub struct Args {
    pub n: Option<usize>,
    pub k: Option<i64>,
    pub j: Option<usize>,
    pub m: Option<usize>,
    pub q: Option<f64>,
}

fn need<T>(v: Option<T>, flag: &str, stat: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("theory --stat {stat} needs --{flag}")))
}

fn positive_k(k: i64, stat: &str) -> Result<usize, Failure> {
    usize::try_from(k).ok().filter(|&k| k >= 1).ok_or_else(|| Failure::Usage(format!("{stat} needs --k >= 1")))
}

fn min_n(n: usize, min: usize, stat: &str) -> Result<usize, Failure> {
    if n < min {
        Err(Failure::Usage(format!("{stat} needs --n >= {min}")))
    } else {
        Ok(n)
    }
}

fn pmf_doc(pmf: Vec<(usize, f64)>) -> Value {
    Value::Array(pmf.into_iter().filter(|&(_, p)| p > 0.0).map(|(v, p)| json!([v, p])).collect())
}

pub fn evaluate(stat: &str, a: Args) -> Result<Map<String, Value>, Failure> {
    let mut doc = Map::new();
    doc.insert("schema".into(), SCHEMA.into());
    doc.insert("stat".into(), stat.into());
    if let Some(n) = a.n {
        doc.insert("n".into(), n.into());
    }
    let mut put = |k: &str, v: Value| {
        doc.insert(k.into(), v);
    };
    match stat {
        "leaves" | "diam" | "diameter" => {
            let n = min_n(need(a.n, "n", stat)?, 1, stat)?;
            let f = if stat == "leaves" { leaves_pmf } else { diameter_pmf };
            let pmf: Vec<(usize, f64)> = (0..=n + 1).map(|v| (v, f(n, v))).collect();
            let mean: f64 = pmf.iter().map(|&(v, p)| v as f64 * p).sum();
            let var: f64 = pmf.iter().map(|&(v, p)| (v as f64 - mean).powi(2) * p).sum();
            put("mean", mean.into());
            put("variance", var.into());
            put("pmf", pmf_doc(pmf));
        }
        "maxdeg" => {
            let n = need(a.n, "n", stat)?;
            match a.k {
                Some(k) => {
                    let n = min_n(n, 4, stat)?;
                    put("k", k.into());
                    put("cdf_approx", maxdeg_cdf_approx(n, k).into());
                }
                None => {
                    let n = min_n(n, 1, stat)?;
                    put("pmf", pmf_doc(maxdeg_pmf(n).into_iter().enumerate().collect()));
                }
            }
        }
        "ystar" => {
            let k = positive_k(need(a.k, "k", stat)?, stat)?;
            let n = min_n(need(a.n, "n", stat)?, k + 4, stat)?;
            let m = y_star_moments(n, k);
            put("k", k.into());
            put("mean", m.mean.into());
            put("variance", m.variance.into());
            put("variance_exact", m.variance_exact.into());
        }
        "sigma" => {
            let i = positive_k(need(a.k, "k", stat)?, stat)?;
            let j = need(a.j, "j", stat)?;
            if j == 0 {
                return Err(Failure::Usage("sigma needs --j >= 1".into()));
            }
            put("i", i.into());
            put("j", j.into());
            put("value", sigma_entry(i, j).into());
        }
        "dcov" => {
            let m = need(a.m, "m", stat)?;
            if m == 0 {
                return Err(Failure::Usage("dcov needs --m >= 1".into()));
            }
            put("m", m.into());
            put("matrix", json!(degree_cov(m)));
        }
        "dmean" => {
            let n = min_n(need(a.n, "n", stat)?, 3, stat)?;
            let k = positive_k(need(a.k, "k", stat)?, stat)?;
            put("k", k.into());
            put("mean", degree_count_mean(n, k).into());
        }
        "gamma" => {
            let t = gamma_theory(need(a.n, "n", stat)?)?;
            put("mean", t.mean.into());
            put("variance", t.variance.into());
        }
        "gamma_exact" => {
            let t = gamma_exact_moments(need(a.n, "n", stat)?)?;
            put("mean", t.mean.into());
            put("variance", t.variance.into());
        }
        "runs" => {
            let n = need(a.n, "n", stat)?;
            let q = a.q.unwrap_or(0.5);
            let t = geometric_runs(n, q)?;
            put("q", q.into());
            put("mean", t.mean.into());
            put("variance", t.variance.into());
        }
        other => return Err(Failure::Usage(format!("unknown statistic {other:?}"))),
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(n: usize) -> Args {
        Args { n: Some(n), ..Args::default() }
    }

    #[test]
    fn small_pmfs_sum_to_one() {
        for stat in ["leaves", "diam"] {
            let doc = evaluate(stat, args(9)).unwrap();
            let total: f64 = doc["pmf"].as_array().unwrap().iter().map(|p| p[1].as_f64().unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12, "{stat}");
        }
    }

    #[test]
    fn missing_flags_are_usage_errors() {
        assert!(matches!(evaluate("ystar", args(20)), Err(Failure::Usage(_))));
        assert!(matches!(evaluate("sigma", Args { k: Some(1), ..Args::default() }), Err(Failure::Usage(_))));
        assert!(matches!(evaluate("ystar", Args { n: Some(4), k: Some(1), ..Args::default() }), Err(Failure::Usage(_))));
    }

    #[test]
    fn sigma_diagonal() {
        let doc = evaluate("sigma", Args { k: Some(1), j: Some(1), ..Args::default() }).unwrap();
        assert_eq!(doc["value"].as_f64().unwrap(), 5.0 / 16.0);
    }
}
