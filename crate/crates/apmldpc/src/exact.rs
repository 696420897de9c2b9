//! Exact latent lower bounds via coset-constant compression.
//!
//! The latent upper bound becomes exact when three facts line up: every
//! coefficient vector in the kernel of the mixed product is m-coset
//! constant (a rank test), so the whole latent image descends to the
//! quotient; no nonzero compressed vector has weight below a threshold tau
//! (an exhaustive sweep, or an exported CNF for an external solver); and a
//! certified latent witness of weight exactly m*tau exists.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::code::CssCode;
use crate::gf2::{Gf2Matrix, Gf2Vector};
use crate::latent::{mixed_product, search_latent, LatentConfig};
use crate::lift::{compress, pair_descent, Partition};
use crate::witness::Side;

#[derive(Debug, Error)]
pub enum ExactError {
    #[error("block factor {m} does not divide {p} (or is below 2)")]
    BadBlockFactor { m: usize, p: usize },
    #[error("{side} rank test failed at m={m}: compression undefined")]
    RankTestFailed { side: Side, m: usize },
    #[error("latent lift of kernel vector {index} is not coset-constant")]
    NotBlockConstant { index: usize },
    #[error("dimension {dim} exceeds exhaustive cap {cap}; export a CNF instead")]
    DimOverCap { dim: usize, cap: usize },
    #[error("threshold must be at least 1")]
    BadThreshold,
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// The (m-1)Q x P coset-constancy constraint matrix: row (j, t) is
/// e_t + e_{t+jQ}, so its kernel is exactly the m-coset-constant subspace.
pub fn build_bm(p: usize, m: usize) -> Result<Gf2Matrix, ExactError> {
    if m < 2 || p % m != 0 {
        return Err(ExactError::BadBlockFactor { m, p });
    }
    let q = p / m;
    let mut b = Gf2Matrix::zeros((m - 1) * q, p);
    for j in 1..m {
        for t in 0..q {
            let r = (j - 1) * q + t;
            b.flip(r, t);
            b.flip(r, t + j * q);
        }
    }
    Ok(b)
}

/// s-fold block-diagonal copy of `b`, one block per latent parent row.
pub fn block_diagonal(b: &Gf2Matrix, s: usize) -> Gf2Matrix {
    let mut out = Gf2Matrix::zeros(s * b.rows(), s * b.cols());
    for k in 0..s {
        for r in 0..b.rows() {
            for c in b.row_support(r) {
                out.flip(k * b.rows() + r, k * b.cols() + c);
            }
        }
    }
    out
}

/// Rank test for coset-constant kernels on both sides: pass on a side
/// means every kernel vector of that side's mixed product is m-coset
/// constant, i.e. stacking the constraint rows does not raise the rank.
/// A code without latent rows passes vacuously.
pub fn kernel_rank_test(code: &CssCode, m: usize) -> Result<(bool, bool), ExactError> {
    let p = code.spec.p as usize;
    let s = code.spec.latent_blocks();
    if s == 0 {
        build_bm(p, m)?;
        return Ok((true, true));
    }
    let constraints = block_diagonal(&build_bm(p, m)?, s);
    let mut pass = [false; 2];
    for (slot, side) in [Side::X, Side::Z].into_iter().enumerate() {
        let product = mixed_product(code, side).expect("latent rows checked above");
        pass[slot] = product.stacked(&constraints).rank() == product.rank();
    }
    Ok((pass[0], pass[1]))
}

/// Row basis of the compressed latent image: kernel vectors of the mixed
/// product are lifted through the latent rows, verified coset-constant,
/// compressed, and reduced to an independent set. Refuses when the rank
/// test fails, since compression is undefined off the constant subspace.
pub fn compressed_latent_basis(
    code: &CssCode,
    side: Side,
    m: usize,
) -> Result<Vec<Gf2Vector>, ExactError> {
    let p = code.spec.p as usize;
    let (pass_x, pass_z) = kernel_rank_test(code, m)?;
    let pass = match side {
        Side::X => pass_x,
        Side::Z => pass_z,
    };
    if !pass {
        return Err(ExactError::RankTestFailed { side, m });
    }
    if code.spec.latent_blocks() == 0 {
        return Ok(Vec::new());
    }
    let product = mixed_product(code, side).expect("latent rows present");
    let latent = match side {
        Side::X => &code.lat_x,
        Side::Z => &code.lat_z,
    };
    let mut basis: Vec<Gf2Vector> = Vec::new();
    for (index, lambda) in product.kernel_basis().iter().enumerate() {
        let x = latent.row_combination(lambda);
        if x.is_zero() {
            continue;
        }
        let compressed =
            compress(&x, p, m).map_err(|_| ExactError::NotBlockConstant { index })?;
        reduce_into_basis(&mut basis, compressed);
    }
    basis.sort_by_key(|v| (v.weight(), v.support()));
    Ok(basis)
}

/// Keeps `basis` an independent set under incremental insertion: the
/// incoming vector is reduced against current members by leading index.
fn reduce_into_basis(basis: &mut Vec<Gf2Vector>, mut v: Gf2Vector) {
    loop {
        if v.is_zero() {
            return;
        }
        let lead = v.support()[0];
        match basis.iter().find(|b| b.support()[0] == lead) {
            Some(b) => v.xor_assign(&b.clone()),
            None => {
                basis.push(v);
                return;
            }
        }
    }
}

/// Identifier block stamped into exported CNF headers.
#[derive(Clone, Copy, Debug)]
pub struct CnfMeta<'a> {
    pub code_id: &'a str,
    pub side: Side,
    pub m: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExclusionMode {
    /// Sweep all nonzero combinations when the dimension is at most `cap`.
    Exhaustive { cap: usize },
    /// Write a DIMACS instance for an external solver.
    CnfExport,
}

pub const EXHAUSTIVE_CAP: usize = 28;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Exclusion {
    /// Every nonzero combination was checked: none has weight below tau.
    ProvedExhaustive,
    /// A combination below tau exists; the lexicographically least support
    /// found is recorded.
    Refuted { support: Vec<usize> },
    /// The question was written out as a CNF for an external solver.
    CnfExported { path: PathBuf, cnf_hash: String },
    /// An operator-supplied attestation matches the exported CNF by hash.
    AttestedUnsat { cnf_hash: String, solver: String },
    Inconclusive,
}

impl Exclusion {
    /// True when the absence of sub-threshold vectors is established.
    #[must_use]
    pub fn proved(&self) -> bool {
        matches!(
            self,
            Exclusion::ProvedExhaustive | Exclusion::AttestedUnsat { .. }
        )
    }
}

/// Sweeps the combination indices owned by `part` (contiguous prefix
/// ranges of 0..2^dim) in Gray order with incremental weight updates, and
/// returns the lexicographically least support of weight below tau, if
/// any. Merging partial results over all parts by minimum reproduces the
/// solo sweep regardless of the split.
pub fn exhaustive_sweep(
    basis: &[Gf2Vector],
    tau: usize,
    part: Partition,
) -> Option<Vec<usize>> {
    let dim = basis.len();
    if dim == 0 {
        return None;
    }
    assert!(dim < 63, "sweep dimension out of range");
    let total = 1u64 << dim;
    let lo = total * part.index as u64 / part.count as u64;
    let hi = total * (part.index + 1) as u64 / part.count as u64;
    if lo >= hi {
        return None;
    }
    let n = basis[0].len();
    // Nonzero words of each basis vector, for sparse weight updates.
    let sparse: Vec<Vec<(usize, u64)>> = basis
        .iter()
        .map(|b| {
            b.words()
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0)
                .map(|(i, w)| (i, *w))
                .collect()
        })
        .collect();
    let mut words = vec![0u64; crate::gf2::Gf2Vector::zeros(n).words().len()];
    let start_code = lo ^ (lo >> 1);
    for (i, s) in sparse.iter().enumerate() {
        if start_code >> i & 1 == 1 {
            for &(wi, w) in s {
                words[wi] ^= w;
            }
        }
    }
    let mut weight: usize = words.iter().map(|w| w.count_ones() as usize).sum();
    let mut best: Option<Vec<usize>> = None;
    let consider = |words: &[u64], weight: usize, best: &mut Option<Vec<usize>>| {
        if weight == 0 || weight >= tau {
            return;
        }
        let v = Gf2Vector::from_words(n, words.to_vec());
        let support = v.support();
        if best.as_ref().is_none_or(|b| support < *b) {
            *best = Some(support);
        }
    };
    consider(&words, weight, &mut best);
    for i in lo..hi - 1 {
        let flip = (i + 1).trailing_zeros() as usize;
        let mut overlap = 0usize;
        for &(wi, w) in &sparse[flip] {
            overlap += (words[wi] & w).count_ones() as usize;
            words[wi] ^= w;
        }
        let flip_weight: usize = sparse[flip].iter().map(|(_, w)| w.count_ones() as usize).sum();
        weight = weight + flip_weight - 2 * overlap;
        consider(&words, weight, &mut best);
    }
    best
}

/// Answers "does the span of `basis` contain a nonzero vector of weight
/// below tau" by full enumeration, or exports the question as a CNF.
pub fn exclude_below(
    basis: &[Gf2Vector],
    tau: usize,
    mode: ExclusionMode,
    meta: &CnfMeta,
    out_dir: Option<&Path>,
) -> Result<Exclusion, ExactError> {
    if tau == 0 {
        return Err(ExactError::BadThreshold);
    }
    match mode {
        ExclusionMode::Exhaustive { cap } => {
            if basis.len() > cap {
                return Err(ExactError::DimOverCap {
                    dim: basis.len(),
                    cap,
                });
            }
            Ok(match exhaustive_sweep(basis, tau, Partition::solo()) {
                Some(support) => Exclusion::Refuted { support },
                None => Exclusion::ProvedExhaustive,
            })
        }
        ExclusionMode::CnfExport => {
            let Some(dir) = out_dir else {
                return Ok(Exclusion::Inconclusive);
            };
            let (text, cnf_hash) = render_cnf(basis, tau, meta);
            let path = dir.join(format!(
                "{}-{}-m{}-tau{}.cnf",
                meta.code_id, meta.side, meta.m, tau
            ));
            std::fs::create_dir_all(dir)?;
            std::fs::write(&path, text)?;
            Ok(Exclusion::CnfExported { path, cnf_hash })
        }
    }
}

/// DIMACS encoding of "some nonzero combination of the basis rows has
/// weight at most tau - 1". Variable layout: vector bits, then one
/// selector per basis row, then parity-ladder auxiliaries tying each
/// vector bit to the GF(2) sum of the selected rows, then the registers of
/// a sequential at-most-(tau-1) counter over the vector bits. Returns the
/// file text and the hash quoted by attestations: sha256 over everything
/// from the problem line onward.
pub fn render_cnf(basis: &[Gf2Vector], tau: usize, meta: &CnfMeta) -> (String, String) {
    let n = basis.first().map_or(0, Gf2Vector::len);
    let dim = basis.len();
    let var_x = |j: usize| (j + 1) as i64;
    let var_c = |i: usize| (n + i + 1) as i64;
    let mut next = (n + dim + 1) as i64;
    let mut clauses: Vec<Vec<i64>> = Vec::new();

    // x_j = XOR of selectors whose basis row has bit j, via a gate ladder.
    fn xor_gate(z: i64, a: i64, b: i64, clauses: &mut Vec<Vec<i64>>) {
        clauses.push(vec![-z, a, b]);
        clauses.push(vec![-z, -a, -b]);
        clauses.push(vec![z, -a, b]);
        clauses.push(vec![z, a, -b]);
    }
    let parity_start = next;
    for j in 0..n {
        let terms: Vec<i64> = (0..dim)
            .filter(|&i| basis[i].get(j))
            .map(var_c)
            .collect();
        match terms.len() {
            0 => clauses.push(vec![-var_x(j)]),
            1 => {
                clauses.push(vec![-var_x(j), terms[0]]);
                clauses.push(vec![var_x(j), -terms[0]]);
            }
            _ => {
                let mut acc = terms[0];
                for (k, &t) in terms.iter().enumerate().skip(1) {
                    let out = if k + 1 == terms.len() {
                        var_x(j)
                    } else {
                        next += 1;
                        next - 1
                    };
                    xor_gate(out, acc, t, &mut clauses);
                    acc = out;
                }
            }
        }
    }
    let parity_end = next;

    // The zero combination is excluded outright.
    clauses.push((0..dim).map(var_c).collect());

    // Sequential counter: register (i, j) means "at least j+1 ones among
    // the first i+1 vector bits"; forbid reaching tau.
    let k = tau - 1;
    let counter_start = next;
    if k == 0 {
        for j in 0..n {
            clauses.push(vec![-var_x(j)]);
        }
    } else if n > 1 {
        // A single vector bit never exceeds k >= 1, so n = 1 needs nothing.
        let reg = |i: usize, j: usize, base: i64| base + (i * k + j) as i64;
        let base = next;
        next += ((n.saturating_sub(1)) * k) as i64;
        clauses.push(vec![-var_x(0), reg(0, 0, base)]);
        for j in 1..k {
            clauses.push(vec![-reg(0, j, base)]);
        }
        for i in 1..n - 1 {
            clauses.push(vec![-var_x(i), reg(i, 0, base)]);
            clauses.push(vec![-reg(i - 1, 0, base), reg(i, 0, base)]);
            for j in 1..k {
                clauses.push(vec![-var_x(i), -reg(i - 1, j - 1, base), reg(i, j, base)]);
                clauses.push(vec![-reg(i - 1, j, base), reg(i, j, base)]);
            }
            clauses.push(vec![-var_x(i), -reg(i - 1, k - 1, base)]);
        }
        if n > 1 {
            clauses.push(vec![-var_x(n - 1), -reg(n - 2, k - 1, base)]);
        }
    }
    let counter_end = next;

    let num_vars = (next - 1).max(0);
    let mut body = String::new();
    body.push_str(&format!("p cnf {} {}\n", num_vars, clauses.len()));
    for clause in &clauses {
        for lit in clause {
            body.push_str(&lit.to_string());
            body.push(' ');
        }
        body.push_str("0\n");
    }
    let cnf_hash = hex(&Sha256::digest(body.as_bytes()));

    let mut text = String::new();
    text.push_str(&format!("c code: {}\n", meta.code_id));
    text.push_str(&format!("c side: {}\n", meta.side));
    text.push_str(&format!("c m: {}\n", meta.m));
    text.push_str(&format!("c tau: {tau}\n"));
    text.push_str(&format!("c dim: {dim}\n"));
    text.push_str(&format!("c vector-bits: 1..{n}\n"));
    text.push_str(&format!("c selector-bits: {}..{}\n", n + 1, n + dim));
    text.push_str(&format!(
        "c parity-aux: {}..{}\n",
        parity_start,
        parity_end - 1
    ));
    text.push_str(&format!(
        "c counter-aux: {}..{}\n",
        counter_start,
        counter_end - 1
    ));
    text.push_str(
        "c encoding: vector = GF(2) combination of basis rows (XOR ladders); \
         nonzero selector clause; sequential at-most-(tau-1) counter over vector bits\n",
    );
    text.push_str(&format!("c satisfiable iff some nonzero combination has weight < {tau}\n"));
    text.push_str(&format!("c hash: sha256 of the text from the p-line on = {cnf_hash}\n"));
    text.push_str(&body);
    (text, cnf_hash)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Operator-supplied solver verdict for an exported CNF, matched by hash.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub cnf_hash: String,
    pub solver_name: String,
    pub result: String,
}

impl Attestation {
    pub fn load(path: &Path) -> Result<Attestation, ExactError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            ExactError::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statement {
    /// Lower bound m*tau meets a certified latent witness of equal weight.
    Exact(usize),
    /// Exclusion proved below tau, but no matching witness pairs with it.
    AtLeast(usize),
    /// Nothing established (rank test failed, refuted, or exclusion open).
    Open,
}

impl std::fmt::Display for Statement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Statement::Exact(w) => write!(f, "latent distance = {w}"),
            Statement::AtLeast(w) => write!(f, "latent distance >= {w}"),
            Statement::Open => write!(f, "no latent bound established"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactnessVerdict {
    pub side: Side,
    pub m: usize,
    pub rank_pass: bool,
    pub dim: usize,
    pub tau: usize,
    pub exclusion: Exclusion,
    /// Weight of the best certified latent witness on this side, if any.
    pub witness_weight: Option<usize>,
    pub statement: Statement,
}

#[derive(Clone, Debug)]
pub struct ExactOptions {
    pub exhaustive_cap: usize,
    /// Directory for exported CNF files; None disables export.
    pub cnf_dir: Option<PathBuf>,
    pub attestations: Vec<Attestation>,
    /// Per-side witness weights already in hand (X, Z); sides left None
    /// are searched with the default latent configuration.
    pub witness_weights: (Option<usize>, Option<usize>),
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            exhaustive_cap: EXHAUSTIVE_CAP,
            cnf_dir: None,
            attestations: Vec::new(),
            witness_weights: (None, None),
        }
    }
}

/// Full certification pipeline for one block factor: rank test, compressed
/// basis, exclusion below tau, and pairing with the best certified latent
/// witness. Returns one verdict per side, X first.
pub fn exact_latent(
    code: &CssCode,
    m: usize,
    tau: usize,
    opts: &ExactOptions,
) -> Result<Vec<ExactnessVerdict>, ExactError> {
    if tau == 0 {
        return Err(ExactError::BadThreshold);
    }
    let (pass_x, pass_z) = kernel_rank_test(code, m)?;
    let mut verdicts = Vec::new();
    for (side, rank_pass, provided) in [
        (Side::X, pass_x, opts.witness_weights.0),
        (Side::Z, pass_z, opts.witness_weights.1),
    ] {
        let witness_weight = provided.or_else(|| {
            search_latent(code, side, &LatentConfig::default())
                .ok()
                .and_then(|found| found.first().map(|(w, _)| w.weight))
        });
        if !rank_pass {
            verdicts.push(ExactnessVerdict {
                side,
                m,
                rank_pass,
                dim: 0,
                tau,
                exclusion: Exclusion::Inconclusive,
                witness_weight,
                statement: Statement::Open,
            });
            continue;
        }
        let mut basis = compressed_latent_basis(code, side, m)?;
        // Lighter rows shrink both the sweep and any exported file.
        pair_descent(&mut basis, 8);
        let dim = basis.len();
        let meta = CnfMeta {
            code_id: &code.spec.id,
            side,
            m,
        };
        let mut exclusion = if dim <= opts.exhaustive_cap {
            exclude_below(
                &basis,
                tau,
                ExclusionMode::Exhaustive {
                    cap: opts.exhaustive_cap,
                },
                &meta,
                None,
            )?
        } else {
            exclude_below(
                &basis,
                tau,
                ExclusionMode::CnfExport,
                &meta,
                opts.cnf_dir.as_deref(),
            )?
        };
        if let Exclusion::CnfExported { cnf_hash, .. } = &exclusion {
            if let Some(att) = opts.attestations.iter().find(|a| {
                a.cnf_hash == *cnf_hash && a.result.eq_ignore_ascii_case("UNSAT")
            }) {
                exclusion = Exclusion::AttestedUnsat {
                    cnf_hash: cnf_hash.clone(),
                    solver: att.solver_name.clone(),
                };
            }
        }
        let statement = if exclusion.proved() {
            match witness_weight {
                Some(w) if w == m * tau => Statement::Exact(w),
                _ => Statement::AtLeast(m * tau),
            }
        } else {
            Statement::Open
        };
        verdicts.push(ExactnessVerdict {
            side,
            m,
            rank_pass,
            dim,
            tau,
            exclusion,
            witness_weight,
            statement,
        });
    }
    Ok(verdicts)
}
