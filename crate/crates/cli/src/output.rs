//! Rendering in the three output formats. JSON is canonical; CSV and text
//! are projections of the same data.

use std::io::Write;

use clap::ValueEnum;
use num_bigint::BigUint;
use permtree::codec::{decode, enumerate_trees, TreeCode};
use permtree::cover::gamma_formula;
use permtree::montecarlo::{sample_code_at, SCHEMA};
use permtree::stats::tree_stats;
use permtree::Permutation;
use serde::Serialize;
use serde_json::value::RawValue;
use serde_json::{Map, Number, Value};

use crate::{CliResult, Emit, Failure};

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Rewrites integral floats below `2^53` as integers, recursively.
pub fn normalize_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let f = n.as_f64().expect("f64 number");
            if f.fract() == 0.0 && f.abs() < 9_007_199_254_740_992.0 {
                *n = Number::from(f as i64);
            }
        }
        Value::Array(a) => a.iter_mut().for_each(normalize_numbers),
        Value::Object(o) => o.values_mut().for_each(normalize_numbers),
        _ => {}
    }
}

/// One JSON document followed by a newline.
pub fn json_line<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable");
    normalize_numbers(&mut v);
    let mut s = serde_json::to_string(&v).expect("value serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct CountDoc<'a> {
    schema: &'static str,
    what: &'a str,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    count: Box<RawValue>,
}

pub fn emit_count(
    what: &str,
    n: usize,
    m: Option<usize>,
    value: &BigUint,
    format: Format,
    out: &mut dyn Write,
) -> CliResult {
    match format {
        Format::Json => {
            let count = RawValue::from_string(value.to_string()).expect("digits are valid JSON");
            let doc = CountDoc { schema: SCHEMA, what, n, m, count };
            writeln!(out, "{}", serde_json::to_string(&doc).expect("serializable"))?;
        }
        Format::Csv => {
            writeln!(out, "what,n,m,count")?;
            writeln!(out, "{what},{n},{},{value}", m.map(|m| m.to_string()).unwrap_or_default())?;
        }
        Format::Text => writeln!(out, "{value}")?,
    }
    Ok(())
}

#[derive(Serialize)]
struct TreeRecord {
    index: u64,
    code: String,
    perm: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<TreeSummary>,
}

#[derive(Serialize)]
struct TreeSummary {
    leaves: usize,
    diameter: usize,
    max_degree: usize,
    gamma: usize,
}

fn summary(w: &Permutation) -> TreeSummary {
    let gamma = gamma_formula(w).expect("tree");
    if w.len() == 1 {
        return TreeSummary { leaves: 0, diameter: 0, max_degree: 0, gamma };
    }
    let s = tree_stats(w).expect("tree");
    TreeSummary { leaves: s.leaves, diameter: s.diameter, max_degree: s.max_degree, gamma }
}

/// Streams records so large enumerations are never held in memory.
fn stream_records(
    header: Value,
    records: impl Iterator<Item = (u64, TreeCode)>,
    emit: Emit,
    format: Format,
    out: &mut dyn Write,
) -> CliResult {
    let with_stats = emit == Emit::Stats;
    match format {
        Format::Json => {
            let mut head = serde_json::to_string(&header).expect("serializable");
            head.pop();
            write!(out, "{head},\"items\":[")?;
        }
        Format::Csv => {
            let cols = match emit {
                Emit::Perms => "index,perm",
                Emit::Codes => "index,code",
                Emit::Stats => "index,code,perm,leaves,diameter,max_degree,gamma",
            };
            writeln!(out, "{cols}")?;
        }
        Format::Text => {}
    }
    for (i, (index, code)) in records.enumerate() {
        let w = decode(&code);
        let stats = with_stats.then(|| summary(&w));
        match format {
            Format::Json => {
                if i > 0 {
                    out.write_all(b",")?;
                }
                let item = match emit {
                    Emit::Perms => serde_json::to_string(w.values()),
                    Emit::Codes => serde_json::to_string(&code),
                    Emit::Stats => serde_json::to_string(&TreeRecord {
                        index,
                        code: code.to_hex(),
                        perm: w.values().to_vec(),
                        stats,
                    }),
                }
                .expect("serializable");
                out.write_all(item.as_bytes())?;
            }
            Format::Csv => match emit {
                Emit::Perms => writeln!(out, "{index},\"{w}\"")?,
                Emit::Codes => writeln!(out, "{index},{}", code.to_hex())?,
                Emit::Stats => {
                    let s = stats.expect("stats requested");
                    writeln!(
                        out,
                        "{index},{},\"{w}\",{},{},{},{}",
                        code.to_hex(),
                        s.leaves,
                        s.diameter,
                        s.max_degree,
                        s.gamma
                    )?
                }
            },
            Format::Text => match emit {
                Emit::Perms => writeln!(out, "{w}")?,
                Emit::Codes => writeln!(out, "{}", code.to_hex())?,
                Emit::Stats => {
                    let s = stats.expect("stats requested");
                    writeln!(
                        out,
                        "{w} leaves={} diameter={} max_degree={} gamma={}",
                        s.leaves, s.diameter, s.max_degree, s.gamma
                    )?
                }
            },
        }
    }
    if format == Format::Json {
        out.write_all(b"]}\n")?;
    }
    Ok(())
}

pub fn enumerate(n: usize, emit: Emit, format: Format, out: &mut dyn Write) -> CliResult {
    let trees = enumerate_trees(n)?;
    let header = serde_json::json!({ "schema": SCHEMA, "n": n, "count": trees.len() });
    let records = trees.with_codes().enumerate().map(|(i, (code, _))| (i as u64, code));
    stream_records(header, records, emit, format, out)
}

pub fn sample(n: usize, count: usize, seed: u64, format: Format, out: &mut dyn Write) -> CliResult {
    if n == 0 {
        return Err(Failure::Usage("n must be at least 1".into()));
    }
    let header = serde_json::json!({ "schema": SCHEMA, "n": n, "count": count, "seed": seed });
    let records = (0..count as u64).map(|i| (i, sample_code_at(n, seed, i)));
    stream_records(header, records, Emit::Stats, format, out)
}

/// Emits a flat or nested JSON object; CSV and text list its fields.
pub fn emit_document(doc: &Map<String, Value>, format: Format, out: &mut dyn Write) -> CliResult {
    let mut v = Value::Object(doc.clone());
    normalize_numbers(&mut v);
    let Value::Object(doc) = v else { unreachable!() };
    match format {
        Format::Json => writeln!(out, "{}", Value::Object(doc))?,
        Format::Csv => {
            writeln!(out, "field,value")?;
            for (k, v) in &doc {
                writeln!(out, "{k},{}", csv_cell(v))?;
            }
        }
        Format::Text => {
            for (k, v) in &doc {
                match v {
                    Value::String(s) => writeln!(out, "{k}: {s}")?,
                    other => writeln!(out, "{k}: {other}")?,
                }
            }
        }
    }
    Ok(())
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        other => format!("\"{}\"", other.to_string().replace('"', "\"\"")),
    }
}
