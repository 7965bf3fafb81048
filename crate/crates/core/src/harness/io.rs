//! File formats: the run CSV, its JSON summary and `key=value` config files.
//!
//! CSV columns, in order:
//! `protocol,d,prior,alpha,N,trials,mean_fidelity,std_err,scaled_risk,scaled_risk_err`.
//! Floats carry 17 significant digits; a missing standard error is `NA`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::{ExperimentConfig, RunRow, RunTable};
use crate::bloch::Dim;
use crate::error::{QestError, Result};
use crate::fisherinfo::{collective_constant, separable_constant};
use crate::prior::{PriorKind, PriorSpec};

pub const CSV_HEADER: [&str; 10] = [
    "protocol",
    "d",
    "prior",
    "alpha",
    "N",
    "trials",
    "mean_fidelity",
    "std_err",
    "scaled_risk",
    "scaled_risk_err",
];

pub const NA: &str = "NA";

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| NA.to_string(), fmt_f64)
}

pub fn write_csv<W: std::io::Write>(table: &RunTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            table.protocol.to_string(),
            table.dim.to_string(),
            table.prior.to_string(),
            fmt_f64(table.alpha),
            r.n.to_string(),
            r.trials.to_string(),
            fmt_f64(r.mean_fidelity),
            fmt_opt(r.std_err),
            fmt_f64(r.scaled_risk),
            fmt_opt(r.scaled_risk_err),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(table: &RunTable) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(table, &mut buf)?;
    String::from_utf8(buf).map_err(|e| QestError::Parse(e.to_string()))
}

pub fn write_csv_file(table: &RunTable, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(table)?)?;
    Ok(())
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| QestError::Parse(format!("row {line}: bad {} value `{raw}`", CSV_HEADER[idx])))
}

fn parse_opt(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<Option<f64>> {
    if rec.get(idx).map(str::trim) == Some(NA) {
        Ok(None)
    } else {
        parse_field(rec, idx, line).map(Some)
    }
}

/// Reads a run CSV. Every row must share protocol, d, prior and alpha.
pub fn read_csv<R: std::io::Read>(input: R) -> Result<RunTable> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header != CSV_HEADER {
        return Err(QestError::Parse(format!("unexpected CSV header `{}`", header.join(","))));
    }
    let mut meta: Option<(String, Dim, PriorKind, f64)> = None;
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let protocol: String = rec.get(0).unwrap_or("").trim().to_string();
        let dim: Dim = parse_field(&rec, 1, line)?;
        let prior: PriorKind = parse_field(&rec, 2, line)?;
        let alpha: f64 = parse_field(&rec, 3, line)?;
        match &meta {
            None => meta = Some((protocol, dim, prior, alpha)),
            Some(m) if *m != (protocol.clone(), dim, prior, alpha) => {
                return Err(QestError::Parse(format!("row {line}: mixed experiment metadata")));
            }
            Some(_) => {}
        }
        let n: u64 = parse_field(&rec, 4, line)?;
        let trials: u64 = parse_field(&rec, 5, line)?;
        let mean: f64 = parse_field(&rec, 6, line)?;
        let std_err = parse_opt(&rec, 7, line)?;
        let mut row = RunRow::new(n, trials, mean, std_err);
        row.scaled_risk = parse_field(&rec, 8, line)?;
        row.scaled_risk_err = parse_opt(&rec, 9, line)?;
        rows.push(row);
    }
    let (protocol, dim, prior, alpha) = meta.ok_or_else(|| QestError::Parse("CSV has no rows".into()))?;
    Ok(RunTable {
        protocol: protocol.parse()?,
        dim,
        prior,
        alpha,
        rows,
    })
}

pub fn read_csv_file(path: &Path) -> Result<RunTable> {
    let f = std::fs::File::open(path).map_err(|e| QestError::Io(format!("{}: {e}", path.display())))?;
    read_csv(f)
}

fn row_json(table: &RunTable, r: &RunRow) -> Value {
    json!({
        "protocol": table.protocol.to_string(),
        "d": table.dim.get(),
        "prior": table.prior.to_string(),
        "alpha": table.alpha,
        "N": r.n,
        "trials": r.trials,
        "mean_fidelity": r.mean_fidelity,
        "std_err": r.std_err,
        "scaled_risk": r.scaled_risk,
        "scaled_risk_err": r.scaled_risk_err,
    })
}

/// JSON summary: config echo, bound constants and the CSV rows.
pub fn summary_json(cfg: &ExperimentConfig, table: &RunTable) -> Value {
    json!({
        "config": {
            "protocol": cfg.protocol.to_string(),
            "prior": cfg.prior.kind().to_string(),
            "d": cfg.dim().get(),
            "n_grid": cfg.n_grid,
            "trials": cfg.trials,
            "alpha": cfg.alpha,
            "seed": cfg.master_seed,
        },
        "separable_constant": separable_constant(cfg.dim()),
        "collective_constant": collective_constant(&cfg.prior, cfg.dim()),
        "rows": table.rows.iter().map(|r| row_json(table, r)).collect::<Vec<_>>(),
    })
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Keys accepted in config files (dashes and underscores are equivalent).
pub const CONFIG_KEYS: [&str; 9] = [
    "protocol", "prior", "d", "n_grid", "trials", "alpha", "seed", "threads", "out",
];

/// Parses `key=value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| QestError::param("config", format!("line {}: expected key=value", i + 1)))?;
        let key = key.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(QestError::param("config", format!("line {}: unknown key `{key}`", i + 1)));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

/// Comma-separated copy counts.
pub fn parse_grid(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| QestError::param("n-grid", format!("bad copy count `{}`", v.trim())))
        })
        .collect()
}

pub fn prior_from_str(kind: &str, dim: Dim) -> Result<PriorSpec> {
    PriorSpec::new(kind.parse()?, dim)
}
