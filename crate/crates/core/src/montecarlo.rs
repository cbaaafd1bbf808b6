//! Seeded simulation of random tree permutations, checked against the
//! closed-form laws.
//!
//! Sample `i` of a run with master seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`: the seed fixes
//! the key, the sample index selects the stream, so no two samples share
//! generator state. Per-sample values are collected in index order and
//! reduced sequentially, which makes a report independent of the number
//! of worker threads.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::codec::{sample_code, TreeCode};
use crate::cover::{gamma_exact_moments, gamma_from_blocks, gamma_theory};
use crate::error::{Error, Result};
use crate::stats::{
    degree_count_mean, degree_cov, diameter_pmf, geometric_runs, leaves_pmf, maxdeg_cdf_approx, maxdeg_pmf,
    maxdeg_shift, y_star_moments,
};

/// Version tag carried by every emitted document.
pub const SCHEMA: &str = "permtree/1";

/// Largest `m` accepted for degree covariance runs.
pub const DCOV_MAX_M: usize = 8;

const DEFAULT_TOLERANCES: &str = include_str!("../config/default_tolerances.toml");

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Statistic {
    Leaves,
    Diameter,
    Maxdeg,
    DegreeCensus,
    Gamma,
    Dcov { m: usize },
    RunsGeometric { q: f64 },
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Leaves => f.write_str("leaves"),
            Statistic::Diameter => f.write_str("diameter"),
            Statistic::Maxdeg => f.write_str("maxdeg"),
            Statistic::DegreeCensus => f.write_str("degree_census"),
            Statistic::Gamma => f.write_str("gamma"),
            Statistic::Dcov { m } => write!(f, "dcov:{m}"),
            Statistic::RunsGeometric { q } => write!(f, "runs_geometric:{q}"),
        }
    }
}

/// Accepts `leaves`, `diam`, `maxdeg`, `dcensus`, `gamma`, `dcov[:m]` and
/// `runs[:q]`, plus the long names used in reports.
impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let bad = || Error::InvalidArgument(format!("unknown statistic {s:?}"));
        let stat = match name {
            "leaves" => Statistic::Leaves,
            "diam" | "diameter" => Statistic::Diameter,
            "maxdeg" => Statistic::Maxdeg,
            "dcensus" | "degree_census" => Statistic::DegreeCensus,
            "gamma" => Statistic::Gamma,
            "dcov" => Statistic::Dcov { m: arg.map(str::parse).transpose().map_err(|_| bad())?.unwrap_or(5) },
            "runs" | "runs_geometric" => {
                Statistic::RunsGeometric { q: arg.map(str::parse).transpose().map_err(|_| bad())?.unwrap_or(0.5) }
            }
            _ => return Err(bad()),
        };
        if arg.is_some() && !matches!(stat, Statistic::Dcov { .. } | Statistic::RunsGeometric { .. }) {
            return Err(bad());
        }
        Ok(stat)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub chi_square_quantile: f64,
    pub moment_z: f64,
    pub gamma_mean_per_n: [f64; 2],
    pub gamma_variance_per_n: [f64; 2],
    pub covariance_abs: f64,
    pub cdf_abs: f64,
    pub maxdeg_k_range: [i64; 2],
    pub normality_max_deviation: f64,
    pub degree_k_max: usize,
    pub y_star_k_max: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::from_toml(DEFAULT_TOLERANCES).expect("bundled tolerances parse")
    }
}

impl Tolerances {
    pub fn from_toml(text: &str) -> Result<Self> {
        let t: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("chi_square_quantile", self.chi_square_quantile),
            ("moment_z", self.moment_z),
            ("covariance_abs", self.covariance_abs),
            ("cdf_abs", self.cdf_abs),
            ("normality_max_deviation", self.normality_max_deviation),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.chi_square_quantile >= 1.0 {
            return Err(Error::InvalidConfig("chi_square_quantile must be below 1".into()));
        }
        for (name, [lo, hi]) in
            [("gamma_mean_per_n", self.gamma_mean_per_n), ("gamma_variance_per_n", self.gamma_variance_per_n)]
        {
            if !(lo > 0.0 && lo <= hi) {
                return Err(Error::InvalidConfig(format!("{name} must satisfy 0 < lo <= hi")));
            }
        }
        if self.maxdeg_k_range[0] > self.maxdeg_k_range[1] {
            return Err(Error::InvalidConfig("maxdeg_k_range is empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub statistic: Statistic,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn new(n: usize, samples: usize, seed: u64, statistic: Statistic) -> Self {
        Self { n, samples, seed, statistic, tolerances: Tolerances::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        match self.statistic {
            Statistic::Dcov { m } if m == 0 || m > DCOV_MAX_M => {
                return Err(Error::InvalidConfig(format!("dcov needs 1 <= m <= {DCOV_MAX_M}, got {m}")));
            }
            Statistic::RunsGeometric { q } if !(q > 0.0 && q < 1.0) => {
                return Err(Error::InvalidConfig(format!("runs_geometric needs 0 < q < 1, got {q}")));
            }
            _ => {}
        }
        self.tolerances.validate()
    }
}

/// Generator for sample `index` of a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The code of sample `index`.
pub fn sample_code_at(n: usize, seed: u64, index: u64) -> TreeCode {
    sample_code(n, &mut substream(seed, index))
}

/// Block sizes of the code's 0-1 sequence; empty for `n <= 2`.
pub fn code_block_sizes(code: &TreeCode) -> Vec<usize> {
    let len = code.len();
    let mut sizes = Vec::new();
    if len == 0 {
        return sizes;
    }
    let mut run = 1;
    let mut prev = code.bit(0);
    for j in 1..len {
        let b = code.bit(j);
        if b == prev {
            run += 1;
        } else {
            sizes.push(run);
            run = 1;
            prev = b;
        }
    }
    sizes.push(run);
    sizes
}

/// Tree statistics read off the block sizes of a code.
#[derive(Clone, Debug)]
struct Shape {
    n: usize,
    sizes: Vec<usize>,
    /// `y[k]`: blocks of size `k`.
    y: Vec<i64>,
}

impl Shape {
    fn new(code: &TreeCode) -> Self {
        let sizes = code_block_sizes(code);
        let mut y = vec![0i64; sizes.iter().copied().max().unwrap_or(0) + 1];
        for &b in &sizes {
            y[b] += 1;
        }
        Self { n: code.n(), sizes, y }
    }

    fn blocks(&self) -> i64 {
        self.sizes.len() as i64
    }

    fn leaves(&self) -> i64 {
        match self.n {
            1 => 0,
            2 => 2,
            n => n as i64 - self.blocks(),
        }
    }

    fn diameter(&self) -> i64 {
        match self.n {
            1 => 0,
            2 => 1,
            _ => self.blocks() + 1,
        }
    }

    fn max_degree(&self) -> i64 {
        match self.n {
            1 => 0,
            2 => 1,
            _ => self.y.len() as i64,
        }
    }

    fn gamma(&self) -> i64 {
        match self.n {
            1 => 0,
            2 => 1,
            _ => gamma_from_blocks(&self.sizes) as i64,
        }
    }

    /// `D_k`, the number of vertices of degree `k >= 1`.
    fn degree_count(&self, k: usize) -> i64 {
        match (self.n, k) {
            (1, _) => 0,
            (2, 1) => 2,
            (2, _) => 0,
            (_, 1) => self.leaves(),
            _ => self.y.get(k - 1).copied().unwrap_or(0),
        }
    }

    /// `Y*_k = Y_k - [b_1 = k] - [b_l = k]`, one end when there is one block.
    fn y_star(&self, k: usize) -> i64 {
        let Some(&first) = self.sizes.first() else { return 0 };
        let last = *self.sizes.last().expect("non-empty");
        let ends = if self.sizes.len() == 1 {
            i64::from(first == k)
        } else {
            i64::from(first == k) + i64::from(last == k)
        };
        self.y.get(k).copied().unwrap_or(0) - ends
    }
}

fn runs_sample(n: usize, q: f64, rng: &mut ChaCha8Rng) -> i64 {
    let geo = Geometric::new(1.0 - q).expect("0 < q < 1");
    let mut prev = geo.sample(rng);
    let mut runs = 1i64;
    for _ in 1..n {
        let x = geo.sample(rng);
        runs += i64::from(x != prev);
        prev = x;
    }
    runs
}

/// Observed counts at each value, ascending.
pub type Histogram = Vec<(i64, u64)>;

fn histogram(values: impl Iterator<Item = i64>) -> Histogram {
    let mut h = BTreeMap::new();
    for v in values {
        *h.entry(v).or_insert(0u64) += 1;
    }
    h.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    /// Merged bins as `(low value, high value, observed, expected)`.
    pub bins: Vec<(i64, i64, u64, f64)>,
}

/// Pearson statistic of `observed` against `expected` masses.
///
/// Values are walked in order over the union of both supports; adjacent
/// values are merged until each group expects at least 5 counts, and a
/// short final group joins its predecessor.
pub fn chi_square(observed: &[(i64, u64)], expected: &[(i64, f64)]) -> Result<ChiSquare> {
    let total: u64 = observed.iter().map(|&(_, c)| c).sum();
    if total == 0 {
        return Err(Error::EmptyHistogram);
    }
    let mut cells: BTreeMap<i64, (u64, f64)> = BTreeMap::new();
    for &(v, c) in observed {
        cells.entry(v).or_default().0 += c;
    }
    for &(v, p) in expected {
        cells.entry(v).or_default().1 += p * total as f64;
    }
    let mut bins: Vec<(i64, i64, u64, f64)> = Vec::new();
    let mut open: Option<(i64, i64, u64, f64)> = None;
    for (v, (o, e)) in cells {
        let g = open.get_or_insert((v, v, 0, 0.0));
        g.1 = v;
        g.2 += o;
        g.3 += e;
        if g.3 >= 5.0 {
            bins.push(open.take().expect("open group"));
        }
    }
    if let Some(g) = open {
        match bins.last_mut() {
            Some(prev) => {
                prev.1 = g.1;
                prev.2 += g.2;
                prev.3 += g.3;
            }
            None => bins.push(g),
        }
    }
    let statistic = bins
        .iter()
        .map(|&(_, _, o, e)| {
            let d = o as f64 - e;
            if e > 0.0 {
                d * d / e
            } else if o == 0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .sum();
    Ok(ChiSquare { statistic, dof: bins.len() - 1, bins })
}

/// Quantile `q` of the chi-square law with `dof` degrees of freedom.
pub fn chi_square_quantile(dof: usize, q: f64) -> f64 {
    if dof == 0 {
        return 0.0;
    }
    ChiSquared::new(dof as f64).expect("positive dof").inverse_cdf(q)
}

/// Minimum number of values accepted by [`normality_check`].
pub const NORMALITY_MIN_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityScore {
    pub samples: usize,
    /// `sup |F_n - Phi|` after standardizing by the sample mean and deviation.
    pub max_deviation: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

pub fn normality_check(values: &[f64]) -> Result<NormalityScore> {
    let n = values.len();
    if n < NORMALITY_MIN_SAMPLES {
        return Err(Error::TooFewSamples { got: n, need: NORMALITY_MIN_SAMPLES });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    if m2 <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let sd = (m2 * nf / (nf - 1.0)).sqrt();
    let mut z: Vec<f64> = values.iter().map(|&v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let mut dev = 0.0f64;
    for (i, &zi) in z.iter().enumerate() {
        let phi = std_normal_cdf(zi);
        dev = dev.max((i + 1) as f64 / nf - phi).max(phi - i as f64 / nf);
    }
    Ok(NormalityScore {
        samples: n,
        max_deviation: dev,
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    })
}

/// Exact integer sums for mean and unbiased variance.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: i128,
    sum: i128,
    sum_sq: i128,
}

impl Moments {
    fn of(values: impl Iterator<Item = i64>) -> Self {
        let mut m = Self::default();
        for v in values {
            m.count += 1;
            m.sum += v as i128;
            m.sum_sq += (v as i128) * (v as i128);
        }
        m
    }

    fn mean(&self) -> f64 {
        self.sum as f64 / self.count as f64
    }

    fn variance(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let num = self.count * self.sum_sq - self.sum * self.sum;
        num as f64 / (self.count * (self.count - 1)) as f64
    }

    fn std_error(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }
}

/// Unbiased covariance of integer columns, exact until the final division.
fn covariance(rows: &[Vec<i64>], scale: f64) -> Vec<Vec<f64>> {
    let m = rows.first().map_or(0, Vec::len);
    let n = rows.len() as i128;
    let mut sums = vec![0i128; m];
    let mut cross = vec![vec![0i128; m]; m];
    for r in rows {
        for i in 0..m {
            sums[i] += r[i] as i128;
            for j in i..m {
                cross[i][j] += r[i] as i128 * r[j] as i128;
            }
        }
    }
    let mut out = vec![vec![0.0; m]; m];
    if n < 2 {
        return out;
    }
    for i in 0..m {
        for j in i..m {
            let num = n * cross[i][j] - sums[i] * sums[j];
            let c = num as f64 / (n * (n - 1)) as f64 / scale;
            out[i][j] = c;
            out[j][i] = c;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    ChiSquare,
    ZScore,
    Band,
    AbsDiff,
    Normality,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub name: String,
    pub kind: TestKind,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dof: Option<usize>,
    pub pass: bool,
}

impl TestResult {
    fn band(name: impl Into<String>, kind: TestKind, value: f64, lower: f64, upper: f64) -> Self {
        let pass = value >= lower && value <= upper;
        Self { name: name.into(), kind, value, lower: Some(lower), upper: Some(upper), dof: None, pass }
    }

    /// `|value| <= bound`.
    fn within(name: impl Into<String>, kind: TestKind, value: f64, bound: f64) -> Self {
        Self::band(name, kind, value, -bound, bound)
    }

    fn z(name: impl Into<String>, empirical: f64, theory: f64, se: f64, z_max: f64) -> Self {
        let diff = empirical - theory;
        let value = if se > 0.0 {
            diff / se
        } else if diff.abs() <= 1e-12 * theory.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        };
        Self::within(name, TestKind::ZScore, value, z_max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistBin {
    pub value: i64,
    pub count: u64,
    /// `samples * P(value)` when the exact law is known.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub expected: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Empirical {
    pub samples: usize,
    pub mean: f64,
    pub variance: f64,
    pub histogram: Vec<HistBin>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Theory {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub covariance: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub empirical: Empirical,
    pub theory: Theory,
    pub tests: Vec<TestResult>,
    pub verdict: Verdict,
}

impl StatReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn test(&self, name: &str) -> Option<&TestResult> {
        self.tests.iter().find(|t| t.name == name)
    }

    /// Histogram rows `value,count,expected`.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("value,count,expected\n");
        for b in &self.empirical.histogram {
            let e = b.expected.map(|e| e.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{}", b.value, b.count, e);
        }
        out
    }
}

fn pmf_moments(pmf: &[(i64, f64)]) -> (f64, f64) {
    let mean: f64 = pmf.iter().map(|&(v, p)| v as f64 * p).sum();
    let var: f64 = pmf.iter().map(|&(v, p)| (v as f64 - mean).powi(2) * p).sum();
    (mean, var)
}

fn chi_square_test(hist: &Histogram, pmf: &[(i64, f64)], quantile: f64) -> Result<TestResult> {
    let cs = chi_square(hist, pmf)?;
    let upper = chi_square_quantile(cs.dof, quantile);
    let pass = if cs.dof == 0 { cs.statistic == 0.0 } else { cs.statistic < upper };
    Ok(TestResult {
        name: "chi_square".into(),
        kind: TestKind::ChiSquare,
        value: cs.statistic,
        lower: None,
        upper: Some(upper),
        dof: Some(cs.dof),
        pass,
    })
}

fn normality_test(name: &str, values: &[i64], bound: f64) -> Option<(TestResult, NormalityScore)> {
    let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
    let score = normality_check(&v).ok()?;
    let mut t = TestResult::band(name, TestKind::Normality, score.max_deviation, 0.0, bound);
    t.lower = None;
    Some((t, score))
}

/// Per-sample integer outputs, index-ordered: column 0 is the headline value.
fn collect_samples(config: &ExperimentConfig) -> Vec<Vec<i64>> {
    let n = config.n;
    let seed = config.seed;
    let stat = config.statistic;
    let tol = &config.tolerances;
    let kd = tol.degree_k_max;
    let ky = tol.y_star_k_max;
    (0..config.samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i);
            if let Statistic::RunsGeometric { q } = stat {
                return vec![runs_sample(n, q, &mut rng)];
            }
            let shape = Shape::new(&sample_code(n, &mut rng));
            match stat {
                Statistic::Leaves => vec![shape.leaves()],
                Statistic::Diameter => vec![shape.diameter()],
                Statistic::Maxdeg => vec![shape.max_degree()],
                Statistic::Gamma => vec![shape.gamma()],
                Statistic::DegreeCensus => {
                    let mut row: Vec<i64> = (1..=kd.max(1)).map(|k| shape.degree_count(k)).collect();
                    row.extend((1..=ky).map(|k| shape.y_star(k)));
                    row
                }
                Statistic::Dcov { m } => (1..=m).map(|k| shape.degree_count(k)).collect(),
                Statistic::RunsGeometric { .. } => unreachable!(),
            }
        })
        .collect()
}

/// Runs `config` on the global rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<StatReport> {
    config.validate()?;
    let rows = collect_samples(config);
    build_report(config, &rows)
}

/// Runs `config` on a dedicated pool of `workers` threads; the report does
/// not depend on `workers`.
pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<StatReport> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let rows = pool.install(|| collect_samples(config));
    build_report(config, &rows)
}

fn build_report(config: &ExperimentConfig, rows: &[Vec<i64>]) -> Result<StatReport> {
    let n = config.n;
    let tol = &config.tolerances;
    let samples = rows.len();
    let head: Vec<i64> = rows.iter().map(|r| r[0]).collect();
    let moments = Moments::of(head.iter().copied());
    let hist = histogram(head.iter().copied());
    let mut theory = Theory::default();
    let mut tests = Vec::new();
    let mut pmf: Option<Vec<(i64, f64)>> = None;
    let mut extra = BTreeMap::new();
    let mut covariance = None;

    match config.statistic {
        Statistic::Leaves | Statistic::Diameter | Statistic::Maxdeg => {
            let law: Vec<(i64, f64)> = match config.statistic {
                Statistic::Leaves => (0..=n).map(|l| (l as i64, leaves_pmf(n, l))).collect(),
                Statistic::Diameter => (0..=n + 1).map(|d| (d as i64, diameter_pmf(n, d))).collect(),
                _ => maxdeg_pmf(n).into_iter().enumerate().map(|(d, p)| (d as i64, p)).collect(),
            };
            let law: Vec<(i64, f64)> = law.into_iter().filter(|&(_, p)| p > 0.0).collect();
            let (mean, var) = pmf_moments(&law);
            theory.mean = Some(mean);
            theory.variance = Some(var);
            tests.push(chi_square_test(&hist, &law, tol.chi_square_quantile)?);
            tests.push(TestResult::z("mean", moments.mean(), mean, moments.std_error(), tol.moment_z));
            if config.statistic == Statistic::Maxdeg && n >= 4 {
                let shift = maxdeg_shift(n);
                for k in tol.maxdeg_k_range[0]..=tol.maxdeg_k_range[1] {
                    let below = head.iter().filter(|&&h| h - shift < k).count();
                    let emp = below as f64 / samples as f64;
                    let approx = maxdeg_cdf_approx(n, k);
                    extra.insert(format!("cdf_k{k}"), emp);
                    theory.extra.insert(format!("cdf_k{k}"), approx);
                    tests.push(TestResult::within(format!("cdf_k{k}"), TestKind::AbsDiff, emp - approx, tol.cdf_abs));
                }
            }
            pmf = Some(law);
        }
        Statistic::Gamma => {
            let t = gamma_theory(n)?;
            let exact = gamma_exact_moments(n)?;
            theory.mean = Some(t.mean);
            theory.variance = Some(t.variance);
            theory.extra.insert("exact_mean".into(), exact.mean);
            theory.extra.insert("exact_variance".into(), exact.variance);
            let nf = n as f64;
            let [lo, hi] = tol.gamma_mean_per_n;
            tests.push(TestResult::band("mean_per_n", TestKind::Band, moments.mean() / nf, lo, hi));
            let [lo, hi] = tol.gamma_variance_per_n;
            tests.push(TestResult::band("variance_per_n", TestKind::Band, moments.variance() / nf, lo, hi));
            tests.push(TestResult::z("mean_vs_exact", moments.mean(), exact.mean, moments.std_error(), tol.moment_z));
            let m4 = central_moment4(&head, moments.mean());
            let se_var = ((m4 - moments.variance().powi(2)) / samples as f64).max(0.0).sqrt();
            tests.push(TestResult::z("variance_vs_exact", moments.variance(), exact.variance, se_var, tol.moment_z));
            if let Some((t, score)) = normality_test("normality", &head, tol.normality_max_deviation) {
                extra.insert("skewness".into(), score.skewness);
                extra.insert("excess_kurtosis".into(), score.excess_kurtosis);
                tests.push(t);
            }
        }
        Statistic::DegreeCensus => {
            let kd = tol.degree_k_max.max(1);
            for k in 1..=kd {
                let m = Moments::of(rows.iter().map(|r| r[k - 1]));
                extra.insert(format!("mean_D{k}"), m.mean());
                if n >= 3 && k < n {
                    let th = degree_count_mean(n, k);
                    theory.extra.insert(format!("mean_D{k}"), th);
                    tests.push(TestResult::z(format!("mean_D{k}"), m.mean(), th, m.std_error(), tol.moment_z));
                }
            }
            for k in 1..=tol.y_star_k_max {
                let m = Moments::of(rows.iter().map(|r| r[kd + k - 1]));
                extra.insert(format!("mean_Ystar{k}"), m.mean());
                if n >= k + 4 {
                    let th = y_star_moments(n, k).mean;
                    theory.extra.insert(format!("mean_Ystar{k}"), th);
                    tests.push(TestResult::z(format!("mean_Ystar{k}"), m.mean(), th, m.std_error(), tol.moment_z));
                }
            }
            if n >= 3 {
                theory.mean = Some(degree_count_mean(n, 1));
            }
            if let Some((t, score)) = normality_test("normality_D1", &head, tol.normality_max_deviation) {
                extra.insert("skewness_D1".into(), score.skewness);
                extra.insert("excess_kurtosis_D1".into(), score.excess_kurtosis);
                tests.push(t);
            }
        }
        Statistic::Dcov { m } => {
            let emp = covariance_of(rows, n);
            let th = degree_cov(m);
            for i in 0..m {
                for j in i..m {
                    let d = emp[i][j] - th[i][j];
                    tests.push(TestResult::within(
                        format!("cov_D{}_D{}", i + 1, j + 1),
                        TestKind::AbsDiff,
                        d,
                        tol.covariance_abs,
                    ));
                }
            }
            covariance = Some(emp);
            theory.covariance = Some(th);
        }
        Statistic::RunsGeometric { q } => {
            let t = geometric_runs(n, q)?;
            theory.mean = Some(t.mean);
            theory.variance = Some(t.variance);
            tests.push(TestResult::z("mean", moments.mean(), t.mean, moments.std_error(), tol.moment_z));
            let m4 = central_moment4(&head, moments.mean());
            let se_var = ((m4 - moments.variance().powi(2)) / samples as f64).max(0.0).sqrt();
            tests.push(TestResult::z("variance", moments.variance(), t.variance, se_var, tol.moment_z));
        }
    }

    let expected_at = |v: i64| {
        pmf.as_ref().map(|law| law.iter().find(|&&(x, _)| x == v).map_or(0.0, |&(_, p)| p * samples as f64))
    };
    let histogram = hist.iter().map(|&(value, count)| HistBin { value, count, expected: expected_at(value) }).collect();
    let verdict = if tests.iter().all(|t| t.pass) { Verdict::Pass } else { Verdict::Fail };
    Ok(StatReport {
        schema: SCHEMA.into(),
        config: config.clone(),
        empirical: Empirical {
            samples,
            mean: moments.mean(),
            variance: moments.variance(),
            histogram,
            covariance,
            extra,
        },
        theory,
        tests,
        verdict,
    })
}

fn central_moment4(values: &[i64], mean: f64) -> f64 {
    values.iter().map(|&v| (v as f64 - mean).powi(4)).sum::<f64>() / values.len() as f64
}

fn covariance_of(rows: &[Vec<i64>], n: usize) -> Vec<Vec<f64>> {
    covariance(rows, n as f64)
}

/// Sample covariance of `(D_1, ..., D_m) / sqrt(n)` over `samples` trees.
pub fn empirical_dcov(n: usize, samples: usize, m: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m == 0 || m > DCOV_MAX_M {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= {DCOV_MAX_M}, got {m}")));
    }
    let config = ExperimentConfig::new(n, samples, seed, Statistic::Dcov { m });
    config.validate()?;
    Ok(covariance_of(&collect_samples(&config), n))
}

/// `count` standard normal draws, for calibrating [`normality_check`].
pub fn standard_normal_values<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.sample(rand_distr::StandardNormal)).collect()
}
