//! Syndrome belief propagation and the residual harvester.
//!
//! The harvester samples pure single-type errors, decodes their syndromes,
//! and keeps residuals e + ê whose syndromes match. A syndrome-matched
//! residual lies in the check kernel by construction; if it also avoids
//! the same-side stabilizer row space it is a distance witness like any
//! other and goes through the usual certification.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::code::CssCode;
use crate::gf2::{Gf2Matrix, Gf2Vector};
use crate::witness::{certify, Certificate, Method, MethodParams, Side, Witness};

#[derive(Debug, Error, PartialEq)]
pub enum DecoderError {
    #[error("flip probability {0} outside (0, 0.5)")]
    BadProbability(f64),
    #[error("syndrome length {got} does not match {rows} checks")]
    SyndromeLength { got: usize, rows: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decoder {
    SumProduct,
    /// Min-sum with a 0.8 normalization factor.
    MinSum,
}

impl Decoder {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::SumProduct => "sum-product",
            Decoder::MinSum => "min-sum",
        }
    }
}

/// Independent Bernoulli(p) flips per coordinate.
pub fn sample_error(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Gf2Vector {
    let mut e = Gf2Vector::zeros(n);
    for i in 0..n {
        if rng.gen_bool(p) {
            e.set(i, true);
        }
    }
    e
}

#[derive(Debug)]
pub struct DecodeResult {
    pub estimate: Gf2Vector,
    /// True when the estimate reproduces the target syndrome.
    pub converged: bool,
    pub iterations: usize,
}

/// Message cap; tanh is numerically 1 well before this.
const LLR_CAP: f64 = 25.0;

struct EdgeGraph {
    check_start: Vec<usize>,
    edge_var: Vec<usize>,
    var_edges: Vec<Vec<usize>>,
}

impl EdgeGraph {
    fn new(h: &Gf2Matrix) -> EdgeGraph {
        let mut check_start = Vec::with_capacity(h.rows() + 1);
        let mut edge_var = Vec::new();
        let mut var_edges = vec![Vec::new(); h.cols()];
        check_start.push(0);
        for r in 0..h.rows() {
            for v in h.row_support(r) {
                var_edges[v].push(edge_var.len());
                edge_var.push(v);
            }
            check_start.push(edge_var.len());
        }
        EdgeGraph {
            check_start,
            edge_var,
            var_edges,
        }
    }
}

/// Flooding-schedule syndrome decoder. Stops as soon as the running hard
/// decision reproduces the target syndrome; an estimate that never does
/// within the iteration cap is flagged unconverged and the caller is
/// expected to discard the trial.
pub fn bp_decode(
    h: &Gf2Matrix,
    syndrome: &Gf2Vector,
    p: f64,
    max_iters: usize,
    decoder: Decoder,
) -> Result<DecodeResult, DecoderError> {
    if !(p > 0.0 && p < 0.5) {
        return Err(DecoderError::BadProbability(p));
    }
    if syndrome.len() != h.rows() {
        return Err(DecoderError::SyndromeLength {
            got: syndrome.len(),
            rows: h.rows(),
        });
    }
    let g = EdgeGraph::new(h);
    let n_edges = g.edge_var.len();
    let prior = ((1.0 - p) / p).ln();
    let mut v2c = vec![prior; n_edges];
    let mut c2v = vec![0.0f64; n_edges];
    let mut estimate = Gf2Vector::zeros(h.cols());
    // Zero-weight syndromes are satisfied by the zero estimate at once,
    // but run the loop anyway: it converges on iteration 1 and the code
    // path stays uniform.
    let mut scratch: Vec<f64> = Vec::new();
    for iter in 1..=max_iters {
        for c in 0..h.rows() {
            let lo = g.check_start[c];
            let hi = g.check_start[c + 1];
            let sign = if syndrome.get(c) { -1.0 } else { 1.0 };
            match decoder {
                Decoder::SumProduct => {
                    // Leave-one-out products via prefix/suffix passes.
                    scratch.clear();
                    scratch.extend((lo..hi).map(|e| (v2c[e] / 2.0).tanh()));
                    let deg = hi - lo;
                    let mut suffix = vec![1.0f64; deg + 1];
                    for k in (0..deg).rev() {
                        suffix[k] = suffix[k + 1] * scratch[k];
                    }
                    let mut prefix = 1.0f64;
                    for k in 0..deg {
                        let others = prefix * suffix[k + 1];
                        let clamped = others.clamp(-(1.0 - 1e-12), 1.0 - 1e-12);
                        c2v[lo + k] = (sign * 2.0 * clamped.atanh()).clamp(-LLR_CAP, LLR_CAP);
                        prefix *= scratch[k];
                    }
                }
                Decoder::MinSum => {
                    let mut sign_all = sign;
                    let (mut min1, mut min2) = (f64::INFINITY, f64::INFINITY);
                    let mut arg_min = lo;
                    for e in lo..hi {
                        let m = v2c[e];
                        if m < 0.0 {
                            sign_all = -sign_all;
                        }
                        let a = m.abs();
                        if a < min1 {
                            min2 = min1;
                            min1 = a;
                            arg_min = e;
                        } else if a < min2 {
                            min2 = a;
                        }
                    }
                    for e in lo..hi {
                        let mag = if e == arg_min { min2 } else { min1 };
                        let s = if v2c[e] < 0.0 { -sign_all } else { sign_all };
                        c2v[e] = (0.8 * s * mag).clamp(-LLR_CAP, LLR_CAP);
                    }
                }
            }
        }
        for v in 0..h.cols() {
            let total: f64 = prior + g.var_edges[v].iter().map(|&e| c2v[e]).sum::<f64>();
            estimate.set(v, total < 0.0);
            for &e in &g.var_edges[v] {
                v2c[e] = (total - c2v[e]).clamp(-LLR_CAP, LLR_CAP);
            }
        }
        if h.mat_vec(&estimate).support() == syndrome.support() {
            return Ok(DecodeResult {
                estimate,
                converged: true,
                iterations: iter,
            });
        }
    }
    Ok(DecodeResult {
        estimate,
        converged: false,
        iterations: max_iters,
    })
}

#[derive(Clone, Debug)]
pub struct DecConfig {
    pub p: f64,
    pub trials: usize,
    pub max_iters: usize,
    pub decoder: Decoder,
    pub seed: u64,
    /// Accepted witnesses to keep.
    pub keep_top: usize,
}

impl Default for DecConfig {
    fn default() -> Self {
        DecConfig {
            p: 0.03,
            trials: 2_000,
            max_iters: 100,
            decoder: Decoder::SumProduct,
            seed: 7,
            keep_top: 8,
        }
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut x = seed ^ 0xd1b54a32d192ed03 ^ (trial as u64).wrapping_mul(0x2545f4914f6cdd1d);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    ChaCha8Rng::seed_from_u64(x ^ (x >> 31))
}

/// Runs `trials` independent decode attempts on the selected side and
/// certifies the surviving residuals. Z-side errors are decoded against
/// H_X and excluded against Row(H_Z); the X side is the mirror image.
/// Each trial draws from its own seed-derived stream, so the outcome is a
/// deterministic function of (code, side, config) at any worker split.
pub fn harvest_residuals(
    code: &CssCode,
    side: Side,
    cfg: &DecConfig,
    part: crate::lift::Partition,
) -> Result<Vec<(Witness, Certificate)>, DecoderError> {
    if !(cfg.p > 0.0 && cfg.p < 0.5) {
        return Err(DecoderError::BadProbability(cfg.p));
    }
    let (h, rows_of) = match side {
        Side::X => (&code.h_z, &code.h_x),
        Side::Z => (&code.h_x, &code.h_z),
    };
    // (weight, support) -> earliest producing trial.
    let mut found: std::collections::BTreeMap<(usize, Vec<usize>), usize> =
        std::collections::BTreeMap::new();
    for trial in 0..cfg.trials {
        if trial % part.count != part.index {
            continue;
        }
        let mut rng = trial_rng(cfg.seed, trial);
        let e = sample_error(code.n, cfg.p, &mut rng);
        if e.is_zero() {
            continue;
        }
        let syndrome = h.mat_vec(&e);
        let result = bp_decode(h, &syndrome, cfg.p, cfg.max_iters, cfg.decoder)?;
        if !result.converged {
            continue;
        }
        let mut residual = e;
        residual.xor_assign(&result.estimate);
        if residual.is_zero() || rows_of.in_row_space(&residual) {
            continue;
        }
        debug_assert!(h.mat_vec(&residual).is_zero());
        let key = (residual.weight(), residual.support());
        let entry = found.entry(key).or_insert(trial);
        *entry = (*entry).min(trial);
    }
    // Registration order: (weight, trial, support), earliest trial first.
    let mut ordered: Vec<(usize, usize, Vec<usize>)> = found
        .into_iter()
        .map(|((weight, support), trial)| (weight, trial, support))
        .collect();
    ordered.sort();
    let mut out = Vec::new();
    for (_, trial, support) in ordered {
        if out.len() == cfg.keep_top {
            break;
        }
        let v = Gf2Vector::from_support(code.n, &support).expect("sorted support");
        let Ok(cert) = certify(code, side, &v) else {
            continue;
        };
        if !cert.accepted() {
            continue;
        }
        let mut params = MethodParams::new();
        params.insert("p".into(), cfg.p.into());
        params.insert("decoder".into(), cfg.decoder.name().into());
        params.insert("trial".into(), trial.into());
        let witness = Witness::from_vector(&code.spec.id, side, Method::Dec, params, &v)
            .expect("nonzero residual");
        out.push((witness, cert));
    }
    Ok(out)
}

/// Combines per-worker harvests into the single-worker result: records are
/// deduplicated by support keeping the earliest producing trial, then
/// re-sorted by (weight, trial, support) and truncated. The worker owning
/// a record's earliest trial always returns it when the record survives
/// globally, so the merge is invariant under the trial split.
pub fn merge_harvests(
    parts: Vec<Vec<(Witness, Certificate)>>,
    keep_top: usize,
) -> Vec<(Witness, Certificate)> {
    let trial_of = |w: &Witness| {
        w.method_params
            .get("trial")
            .and_then(|v| v.as_u64())
            .unwrap_or(u64::MAX)
    };
    let mut by_key: std::collections::BTreeMap<(usize, Vec<usize>), (Witness, Certificate)> =
        std::collections::BTreeMap::new();
    for part in parts {
        for (w, c) in part {
            let key = (w.weight, w.support.clone());
            match by_key.entry(key) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert((w, c));
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    if trial_of(&w) < trial_of(&slot.get().0) {
                        slot.insert((w, c));
                    }
                }
            }
        }
    }
    let mut merged: Vec<(Witness, Certificate)> = by_key.into_values().collect();
    merged.sort_by_key(|(w, _)| (w.weight, trial_of(w), w.support.clone()));
    merged.truncate(keep_top);
    merged
}
