//! Run orchestration: dispatches the selected witness searches over a
//! catalog selection, fans the partitionable methods out across worker
//! threads, and writes the store and reports. Every partitioned method
//! has a merge rule that reproduces the single-worker result, so output
//! bytes are independent of the worker count.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::code::{BuildError, CssCode};
use crate::config::{ConfigError, OutPaths, RunConfig};
use crate::decoder::{harvest_residuals, merge_harvests, DecoderError};
use crate::ets::{ets_witnesses, EtsError};
use crate::latent::{search_latent, LatentError};
use crate::lift::{
    merge_search_results, search_blk, search_crt, search_dir, search_fib, LiftError, Partition,
};
use crate::spec::{Catalog, CodeSpec};
use crate::store::{
    render_csv, render_text, replay, report_rows, sort_records, write_store, StoreError,
    StoreRecord,
};
use crate::witness::{certify, Certificate, Method, Side, Witness};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("unknown code id {0:?}")]
    UnknownCode(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Latent(#[from] LatentError),
    #[error(transparent)]
    Ets(#[from] EtsError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Codes to run, in catalog order regardless of how the selection was
/// written; every requested id must exist.
pub fn selected_codes<'a>(
    catalog: &'a Catalog,
    cfg: &RunConfig,
) -> Result<Vec<&'a CodeSpec>, RunnerError> {
    if cfg.codes.is_empty() {
        return Ok(catalog.codes().iter().collect());
    }
    for id in &cfg.codes {
        if !catalog.codes().iter().any(|c| &c.id == id) {
            return Err(RunnerError::UnknownCode(id.clone()));
        }
    }
    Ok(catalog
        .codes()
        .iter()
        .filter(|c| cfg.codes.contains(&c.id))
        .collect())
}

/// Runs `job` once per worker slice and returns the parts in slice
/// order. One worker runs inline; more spawn scoped threads.
fn parted<T, E, F>(workers: usize, job: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(Partition) -> Result<T, E> + Sync,
{
    if workers <= 1 {
        return Ok(vec![job(Partition::solo())?]);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|index| {
                let job = &job;
                scope.spawn(move || {
                    job(Partition {
                        index,
                        count: workers,
                    })
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("search worker panicked"))
            .collect()
    })
}

fn run_code_side(
    code: &CssCode,
    side: Side,
    cfg: &RunConfig,
    methods: &[Method],
    workers: usize,
) -> Result<Vec<(Witness, Certificate)>, RunnerError> {
    let p = code.spec.p as usize;
    let qbudget = cfg.quotient_budget();
    let mut out = Vec::new();
    for &method in methods {
        match method {
            Method::Lat => out.extend(search_latent(code, side, &cfg.lat.resolve())?),
            Method::Blk => {
                for m in cfg.blk.m_list(p) {
                    let parts =
                        parted(workers, |part| search_blk(code, side, m, &qbudget, part))?;
                    out.extend(merge_search_results(parts, qbudget.keep_top));
                }
            }
            Method::Fib => {
                for m in cfg.fib.m_list(p) {
                    let patterns = cfg.fib.patterns(m);
                    if patterns.is_empty() {
                        continue;
                    }
                    let parts = parted(workers, |part| {
                        search_fib(code, side, m, &patterns, &qbudget, part)
                    })?;
                    out.extend(merge_search_results(parts, qbudget.keep_top));
                }
            }
            Method::Crt => {
                for split in cfg.crt.splits(p) {
                    out.extend(search_crt(
                        code,
                        side,
                        &split,
                        cfg.crt.combo_max(),
                        &qbudget,
                    )?);
                }
            }
            Method::Dir => {
                let budget = cfg.dir.budget(cfg.seed);
                let parts = parted::<_, RunnerError, _>(workers, |part| {
                    Ok(search_dir(code, side, &budget, part))
                })?;
                out.extend(merge_search_results(parts, budget.keep_top));
            }
            Method::Ets => out.extend(ets_witnesses(code, side, &cfg.ets.resolve())?),
            Method::Dec => {
                let dcfg = cfg.dec.resolve(cfg.seed)?;
                let parts = parted(workers, |part| harvest_residuals(code, side, &dcfg, part))?;
                out.extend(merge_harvests(parts, dcfg.keep_top));
            }
        }
    }
    Ok(out)
}

pub struct RunOutput {
    /// Certified witnesses found, already in store order.
    pub records: Vec<StoreRecord>,
    /// Logical dimension per selected code id, for report rendering.
    pub dims: BTreeMap<String, usize>,
}

/// Runs the configured searches over the selected codes, both sides.
pub fn run_search(catalog: &Catalog, cfg: &RunConfig) -> Result<RunOutput, RunnerError> {
    cfg.validate()?;
    let methods = cfg.selected_methods()?;
    let workers = cfg.worker_count();
    let mut records = Vec::new();
    let mut dims = BTreeMap::new();
    for spec in selected_codes(catalog, cfg)? {
        let code = CssCode::build(spec)?;
        dims.insert(spec.id.clone(), code.k);
        for side in [Side::X, Side::Z] {
            let found = run_code_side(&code, side, cfg, &methods, workers)?;
            records.extend(found.iter().map(|(w, c)| StoreRecord::from_entry(w, c)));
        }
    }
    sort_records(&mut records);
    Ok(RunOutput { records, dims })
}

/// Logical dimension per code id appearing in `records`; builds each
/// code once.
pub fn dims_for(
    records: &[StoreRecord],
    catalog: &Catalog,
) -> Result<BTreeMap<String, usize>, RunnerError> {
    let mut dims = BTreeMap::new();
    for rec in records {
        if dims.contains_key(&rec.code_id) {
            continue;
        }
        let spec = catalog
            .get(&rec.code_id)
            .map_err(|_| RunnerError::UnknownCode(rec.code_id.clone()))?;
        dims.insert(rec.code_id.clone(), CssCode::build(spec)?.k);
    }
    Ok(dims)
}

/// Writes the store and both report renderings; rows are limited to the
/// codes in `dims` so an unselected catalog entry adds no blank rows.
pub fn write_outputs(
    output: &RunOutput,
    catalog: &Catalog,
    out: &OutPaths,
) -> Result<(), RunnerError> {
    let mut records = output.records.clone();
    sort_records(&mut records);
    for path in [&out.store, &out.report_text, &out.report_csv] {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
    }
    write_store(&out.store, &records)?;
    let ledger = replay(&records, catalog)?;
    let rows: Vec<_> = report_rows(&ledger, catalog)
        .into_iter()
        .filter(|row| output.dims.contains_key(&row.code_id))
        .collect();
    std::fs::write(&out.report_text, render_text(&rows, &output.dims))?;
    std::fs::write(&out.report_csv, render_csv(&rows, &output.dims))?;
    Ok(())
}

/// What re-certification concluded about one store record.
#[derive(Clone, Debug)]
pub enum RecertVerdict {
    /// Recomputed certificate equals the stored one bit for bit.
    Match(Certificate),
    /// The vector certifies, but differently from what was stored.
    Mismatch(Certificate),
    /// The record's vector cannot even be rebuilt against its code.
    Invalid(String),
}

#[derive(Clone, Debug)]
pub struct CertifyOutcome {
    pub code_id: String,
    pub side: Side,
    pub method: Method,
    pub weight: usize,
    /// Whether the stored certificate claimed acceptance.
    pub claimed: bool,
    pub verdict: RecertVerdict,
}

impl CertifyOutcome {
    /// A record fails only when it claimed acceptance it cannot back.
    #[must_use]
    pub fn passes(&self) -> bool {
        !self.claimed || matches!(self.verdict, RecertVerdict::Match(_))
    }
}

/// Re-certifies every record against freshly built codes. Per-record
/// problems (bad support, wrong length, changed certificate) become
/// failing outcomes rather than errors; only an unknown code id or a
/// build failure aborts.
pub fn recertify(
    records: &[StoreRecord],
    catalog: &Catalog,
) -> Result<Vec<CertifyOutcome>, RunnerError> {
    let mut codes: BTreeMap<String, CssCode> = BTreeMap::new();
    let mut out = Vec::new();
    for rec in records {
        if !codes.contains_key(&rec.code_id) {
            let spec = catalog
                .get(&rec.code_id)
                .map_err(|_| RunnerError::UnknownCode(rec.code_id.clone()))?;
            codes.insert(rec.code_id.clone(), CssCode::build(spec)?);
        }
        let code = &codes[&rec.code_id];
        let verdict = match rebuild_and_certify(rec, code) {
            Ok(cert) if cert == rec.cert => RecertVerdict::Match(cert),
            Ok(cert) => RecertVerdict::Mismatch(cert),
            Err(reason) => RecertVerdict::Invalid(reason),
        };
        out.push(CertifyOutcome {
            code_id: rec.code_id.clone(),
            side: rec.side,
            method: rec.method,
            weight: rec.weight,
            claimed: rec.cert.accepted(),
            verdict,
        });
    }
    Ok(out)
}

fn rebuild_and_certify(rec: &StoreRecord, code: &CssCode) -> Result<Certificate, String> {
    let witness = rec
        .witness(code.spec.p as usize)
        .map_err(|(c, t)| format!("pair ({c}, {t}) out of range for P={}", code.spec.p))?;
    if witness.weight != witness.support.len() {
        return Err(format!(
            "stored weight {} does not match support size {}",
            witness.weight,
            witness.support.len()
        ));
    }
    let vector = witness.vector(code.n).map_err(|e| e.to_string())?;
    certify(code, rec.side, &vector).map_err(|e| e.to_string())
}
