//! `permtree` command line: counting, enumeration, sampling, simulation
//! reports, closed-form evaluation and the oracle battery.
//!
//! Exit codes: 0 on success, 1 when a verification or report fails, 2 on
//! usage errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use permtree::montecarlo::{self, ExperimentConfig, Statistic, Tolerances};
use permtree::Error;

pub mod output;
pub mod theory;
pub mod verify;

use output::{json_line, Format};

#[derive(Parser, Debug)]
#[command(name = "permtree", version, about = "Tree permutations and their inversion graphs")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,

    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Countable {
    Trees,
    Forests,
    Indecomposable,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Perms,
    Codes,
    Stats,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact counts.
    Count {
        #[arg(long)]
        what: Countable,
        #[arg(long)]
        n: usize,
        /// Number of trees in a forest; omit for the total.
        #[arg(long)]
        m: Option<usize>,
    },
    /// Every tree permutation of length n, in code order.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Emit::Perms)]
        emit: Emit,
    },
    /// Uniform random tree permutations.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Simulation report comparing a statistic with its law.
    Stats {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// leaves, diam, maxdeg, dcensus, gamma, dcov or runs.
        #[arg(long)]
        stat: String,
        /// Covariance size for dcov.
        #[arg(long)]
        m: Option<usize>,
        /// Geometric parameter for runs.
        #[arg(long)]
        q: Option<f64>,
        /// TOML file overriding the bundled tolerances.
        #[arg(long)]
        tolerances: Option<PathBuf>,
    },
    /// Closed-form values.
    Theory {
        /// leaves, diam, maxdeg, ystar, sigma, dcov, dmean, gamma, gamma_exact or runs.
        #[arg(long)]
        stat: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<i64>,
        /// Second index for sigma.
        #[arg(long)]
        j: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Oracle battery over all trees up to max-n.
    Verify {
        #[arg(long)]
        max_n: usize,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Check,
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

pub type CliResult = std::result::Result<(), Failure>;

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    let workers = cli.workers.unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    match pool.install(|| dispatch(&cli, out)) {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send)) -> CliResult {
    let format = cli.format;
    match &cli.command {
        Command::Count { what, n, m } => count(*what, *n, *m, format, out),
        Command::Enumerate { n, emit } => output::enumerate(*n, *emit, format, out),
        Command::Sample { n, count, seed } => output::sample(*n, *count, *seed, format, out),
        Command::Stats { n, samples, seed, stat, m, q, tolerances } => {
            let mut statistic: Statistic = stat.parse()?;
            match (&mut statistic, m, q) {
                (Statistic::Dcov { m: slot }, Some(m), _) => *slot = *m,
                (Statistic::RunsGeometric { q: slot }, _, Some(q)) => *slot = *q,
                (_, None, None) => {}
                _ => return Err(Failure::Usage(format!("--m/--q do not apply to {stat}"))),
            }
            let tolerances = match tolerances {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    Tolerances::from_toml(&text)?
                }
                None => Tolerances::default(),
            };
            let config = ExperimentConfig { n: *n, samples: *samples, seed: *seed, statistic, tolerances };
            let report = montecarlo::run_experiment(&config)?;
            match format {
                Format::Json => out.write_all(json_line(&report).as_bytes())?,
                Format::Csv => out.write_all(report.histogram_csv().as_bytes())?,
                Format::Text => {
                    writeln!(out, "{} n={} samples={} seed={}", config.statistic, n, samples, seed)?;
                    writeln!(out, "mean {} variance {}", report.empirical.mean, report.empirical.variance)?;
                    for t in &report.tests {
                        let status = if t.pass { "PASS" } else { "FAIL" };
                        writeln!(out, "{status} {} {}", t.name, t.value)?;
                    }
                }
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
        Command::Theory { stat, n, k, j, m, q } => {
            let doc = theory::evaluate(stat, theory::Args { n: *n, k: *k, j: *j, m: *m, q: *q })?;
            output::emit_document(&doc, format, out)
        }
        Command::Verify { max_n } => {
            let report = verify::run_battery(*max_n)?;
            match format {
                Format::Json => out.write_all(json_line(&report).as_bytes())?,
                Format::Csv => {
                    writeln!(out, "check,pass,detail")?;
                    for c in &report.checks {
                        writeln!(out, "{},{},\"{}\"", c.name, c.pass, c.detail.replace('"', "'"))?;
                    }
                }
                Format::Text => {
                    for c in &report.checks {
                        writeln!(out, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
                    }
                }
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

fn count(what: Countable, n: usize, m: Option<usize>, format: Format, out: &mut dyn Write) -> CliResult {
    use permtree::codec::count_trees;
    use permtree::counting::{forest_count, forest_total, indecomposable_count};
    if n == 0 {
        return Err(Failure::Usage("n must be at least 1".into()));
    }
    let value = match (what, m) {
        (Countable::Trees, None) => count_trees(n),
        (Countable::Forests, None) => forest_total(n)?,
        (Countable::Forests, Some(m)) => forest_count(n, m)?,
        (Countable::Indecomposable, None) => indecomposable_count(n)?,
        (_, Some(_)) => return Err(Failure::Usage("--m only applies to forests".into())),
    };
    let name = what.to_possible_value().expect("not skipped").get_name().to_string();
    output::emit_count(&name, n, m, &value, format, out)
}
