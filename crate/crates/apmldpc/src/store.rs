//! Line-delimited witness store and the bound report tables.
//!
//! Each store line is one JSON record carrying the witness fields plus its
//! certificate. Support coordinates are written as flat indices; readers
//! also accept [c, t] pairs meaning c*B + t where B is the code's lift
//! size P. Records are written in sorted order so identical runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spec::Catalog;
use crate::witness::{BoundLedger, Certificate, Method, MethodParams, Side, Witness};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("store line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("store line {line}: support pair ({c}, {t}) needs t < {b}")]
    BadPair { line: usize, c: usize, t: usize, b: usize },
    #[error("store line {line}: unknown code {id}")]
    UnknownCode { line: usize, id: String },
}

/// Flat indices or (c, t) pairs; pairs resolve against a block size.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum SupportRepr {
    Flat(Vec<usize>),
    Pairs(Vec<(usize, usize)>),
}

impl SupportRepr {
    pub fn resolve(&self, block: usize) -> Result<Vec<usize>, (usize, usize)> {
        match self {
            SupportRepr::Flat(v) => Ok(v.clone()),
            SupportRepr::Pairs(pairs) => {
                let mut out = Vec::with_capacity(pairs.len());
                for &(c, t) in pairs {
                    if t >= block {
                        return Err((c, t));
                    }
                    out.push(c * block + t);
                }
                out.sort_unstable();
                Ok(out)
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StoreRecord {
    pub code_id: String,
    pub side: Side,
    pub method: Method,
    #[serde(default)]
    pub method_params: MethodParams,
    pub support: SupportRepr,
    pub weight: usize,
    pub cert: Certificate,
}

impl StoreRecord {
    pub fn from_entry(witness: &Witness, cert: &Certificate) -> StoreRecord {
        StoreRecord {
            code_id: witness.code_id.clone(),
            side: witness.side,
            method: witness.method,
            method_params: witness.method_params.clone(),
            support: SupportRepr::Flat(witness.support.clone()),
            weight: witness.weight,
            cert: *cert,
        }
    }

    /// The witness with its support resolved to flat indices.
    pub fn witness(&self, p: usize) -> Result<Witness, (usize, usize)> {
        Ok(Witness {
            code_id: self.code_id.clone(),
            side: self.side,
            method: self.method,
            method_params: self.method_params.clone(),
            support: self.support.resolve(p)?,
            weight: self.weight,
        })
    }
}

/// Sorts records into the order `write_store` emits, so a ledger
/// replayed from memory matches one replayed from the file.
pub fn sort_records(records: &mut [StoreRecord]) {
    records.sort_by(|a, b| sort_key(&a, &b));
}

/// Writes records as one JSON object per line, sorted by
/// (code, side, method, weight, support) for reproducible output.
pub fn write_store(path: impl AsRef<Path>, records: &[StoreRecord]) -> Result<(), StoreError> {
    let mut sorted: Vec<&StoreRecord> = records.iter().collect();
    sorted.sort_by(sort_key);
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    for rec in sorted {
        serde_json::to_writer(&mut file, rec).map_err(std::io::Error::other)?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}

fn sort_key(a: &&StoreRecord, b: &&StoreRecord) -> std::cmp::Ordering {
    // Deterministic tiebreak only; pairs flatten positionally.
    let flat = |r: &StoreRecord| match &r.support {
        SupportRepr::Flat(v) => v.clone(),
        SupportRepr::Pairs(p) => p.iter().flat_map(|&(c, t)| [c, t]).collect(),
    };
    (&a.code_id, a.side, a.method, a.weight, flat(a)).cmp(&(
        &b.code_id,
        b.side,
        b.method,
        b.weight,
        flat(b),
    ))
}

pub fn read_store(path: impl AsRef<Path>) -> Result<Vec<StoreRecord>, StoreError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: StoreRecord = serde_json::from_str(&line).map_err(|source| {
            StoreError::Parse {
                line: i + 1,
                source,
            }
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Rebuilds a ledger by replaying store records in file order after
/// re-sorting by (weight, position); only accepted records register.
pub fn replay(records: &[StoreRecord], catalog: &Catalog) -> Result<BoundLedger, StoreError> {
    let mut ledger = BoundLedger::new();
    let mut ordered: Vec<(usize, &StoreRecord)> = records.iter().enumerate().collect();
    ordered.sort_by_key(|(i, r)| (r.weight, *i));
    for (i, rec) in ordered {
        let spec = catalog
            .get(&rec.code_id)
            .map_err(|_| StoreError::UnknownCode {
                line: i + 1,
                id: rec.code_id.clone(),
            })?;
        let witness = rec
            .witness(spec.p as usize)
            .map_err(|(c, t)| StoreError::BadPair {
                line: i + 1,
                c,
                t,
                b: spec.p as usize,
            })?;
        if rec.cert.accepted() {
            ledger
                .register(witness, rec.cert)
                .expect("accepted certificates register");
        }
    }
    Ok(ledger)
}

/// One report row per (code, side): the retained bound per method.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub code_id: String,
    pub p: u64,
    pub n: usize,
    pub side: Side,
    pub bounds: Vec<Option<ReportCell>>,
    pub code_best: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct ReportCell {
    pub weight: usize,
    /// ETS union stage when the witness came from the trapping-set search.
    pub stage: Option<u64>,
    pub is_code_best: bool,
}

impl ReportCell {
    fn render(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{}", self.weight);
        if let Some(stage) = self.stage {
            let _ = write!(s, "^[{stage}]");
        }
        if self.is_code_best {
            s.push('*');
        }
        s
    }
}

#[must_use]
pub fn report_rows(ledger: &BoundLedger, catalog: &Catalog) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for spec in catalog.codes() {
        let code_best = ledger.best_for_code(&spec.id);
        for side in [Side::X, Side::Z] {
            let bounds = Method::ALL
                .iter()
                .map(|&method| {
                    ledger.get(&spec.id, side, method).map(|entry| ReportCell {
                        weight: entry.witness.weight,
                        stage: (method == Method::Ets)
                            .then(|| {
                                entry
                                    .witness
                                    .method_params
                                    .get("stage")
                                    .and_then(serde_json::Value::as_u64)
                            })
                            .flatten(),
                        is_code_best: Some(entry.witness.weight) == code_best,
                    })
                })
                .collect();
            rows.push(ReportRow {
                code_id: spec.id.clone(),
                p: spec.p,
                n: spec.n(),
                side,
                bounds,
                code_best,
            });
        }
    }
    rows
}

/// Parameter string [[n, k, d <= w]] for a code; the bound is the smallest
/// certified weight over both sides, omitted when nothing is certified.
fn parameter_string(n: usize, k: usize, best: Option<usize>) -> String {
    match best {
        Some(d) => format!("[[{n}, {k}, d<={d}]]"),
        None => format!("[[{n}, {k}]]"),
    }
}

/// The aligned text table. `dims` supplies k per code id.
pub fn render_text(
    rows: &[ReportRow],
    dims: &std::collections::BTreeMap<String, usize>,
) -> String {
    let mut header: Vec<String> = vec![
        "code".into(),
        "P".into(),
        "parameters".into(),
        "side".into(),
    ];
    header.extend(Method::ALL.iter().map(|m| m.name().to_string()));
    let mut table: Vec<Vec<String>> = vec![header];
    for row in rows {
        let mut cells = vec![
            row.code_id.clone(),
            row.p.to_string(),
            dims.get(&row.code_id).map_or_else(String::new, |&k| {
                parameter_string(row.n, k, row.code_best)
            }),
            row.side.to_string(),
        ];
        for (method, bound) in Method::ALL.iter().zip(&row.bounds) {
            cells.push(match bound {
                Some(cell) => cell.render(),
                // Only the heuristic columns advertise absence; structural
                // methods that produced nothing stay blank.
                None if matches!(method, Method::Ets | Method::Dec) => "--".into(),
                None => String::new(),
            });
        }
        table.push(cells);
    }
    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in table.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            let _ = write!(out, "{:<width$}", cell, width = widths[c]);
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
        if i == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

/// CSV mirror of the text table: one row per (code, side).
pub fn render_csv(
    rows: &[ReportRow],
    dims: &std::collections::BTreeMap<String, usize>,
) -> String {
    let mut out = String::from("code,p,n,k,d_bound,side,lat,blk,fib,crt,dir,ets,ets_stage,dec\n");
    for row in rows {
        let k = dims.get(&row.code_id).copied();
        let cell = |i: usize| -> String {
            row.bounds[i].map_or_else(String::new, |c| c.weight.to_string())
        };
        let ets_stage = row.bounds[5]
            .and_then(|c| c.stage)
            .map_or_else(String::new, |s| s.to_string());
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.code_id,
            row.p,
            row.n,
            k.map_or_else(String::new, |k| k.to_string()),
            row.code_best.map_or_else(String::new, |d| d.to_string()),
            row.side,
            cell(0),
            cell(1),
            cell(2),
            cell(3),
            cell(4),
            cell(5),
            ets_stage,
            cell(6),
        );
    }
    out
}
