//! Distance bounds from latent parent rows.
//!
//! Row combinations of the latent X-side rows that commute with the active
//! Z-side checks land in Ker(H_Z); whenever such a combination falls
//! outside Row(H_X) its weight bounds d_X from above. Feasibility of a
//! coefficient vector lambda is exactly H_Z * Lat_X^T * lambda = 0, so the
//! search enumerates structured vectors in the kernel of that mixed
//! product.

use serde_json::json;
use thiserror::Error;

use crate::code::CssCode;
use crate::gf2::{Gf2Matrix, Gf2Vector};
use crate::witness::{certify, Certificate, Method, MethodParams, Side, Witness};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatentError {
    #[error("{0}: spec has no latent block rows")]
    NoLatentRows(String),
    #[error("coefficient length {got} does not match latent row count {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// H_Z * Lat_X^T for side X (J*P x s*P), H_X * Lat_Z^T for side Z.
pub fn mixed_product(code: &CssCode, side: Side) -> Result<Gf2Matrix, LatentError> {
    let (active, latent) = match side {
        Side::X => (&code.h_z, &code.lat_x),
        Side::Z => (&code.h_x, &code.lat_z),
    };
    if latent.rows() == 0 {
        return Err(LatentError::NoLatentRows(code.spec.id.clone()));
    }
    Ok(active.mat_mul(&latent.transposed()))
}

/// The row combination lambda^T * Lat of the side's latent rows.
pub fn latent_lift(
    code: &CssCode,
    side: Side,
    lambda: &Gf2Vector,
) -> Result<Gf2Vector, LatentError> {
    let latent = match side {
        Side::X => &code.lat_x,
        Side::Z => &code.lat_z,
    };
    if latent.rows() == 0 {
        return Err(LatentError::NoLatentRows(code.spec.id.clone()));
    }
    if lambda.len() != latent.rows() {
        return Err(LatentError::LengthMismatch {
            expected: latent.rows(),
            got: lambda.len(),
        });
    }
    Ok(latent.row_combination(lambda))
}

#[derive(Clone, Debug)]
pub struct LatentConfig {
    /// Comb periods to try; None selects all divisors Q' of P with Q' >= P/8.
    pub periods: Option<Vec<u64>>,
    /// Kernel-basis pairs are drawn from the lightest `pair_pool` basis
    /// lifts, capped at `max_pairs` pairs.
    pub max_pairs: usize,
    pub pair_pool: usize,
    /// Overall cap on candidate coefficient vectors examined.
    pub budget: usize,
}

impl Default for LatentConfig {
    fn default() -> Self {
        LatentConfig {
            periods: None,
            max_pairs: 2016,
            pair_pool: 64,
            budget: 200_000,
        }
    }
}

fn divisor_periods(p: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=p).filter(|q| p % q == 0 && *q >= p.div_ceil(8)).collect();
    out.sort_unstable();
    out
}

/// A comb of period q in a single length-p block: every residue t + q*Z.
fn comb_block(p: usize, q: usize, base: usize) -> Vec<usize> {
    (0..p / q).map(|i| base + i * q).collect()
}

/// Enumerates structured coefficient vectors in Ker(mixed product), lifts
/// them through the latent rows, and certifies the results. Candidate
/// order: periodic combs per latent block (then across all blocks at
/// once), single kernel-basis vectors, then light basis pairs.
pub fn search_latent(
    code: &CssCode,
    side: Side,
    config: &LatentConfig,
) -> Result<Vec<(Witness, Certificate)>, LatentError> {
    let product = mixed_product(code, side)?;
    let p = code.spec.p as usize;
    let blocks = code.spec.latent_blocks();
    let dim = blocks * p;
    let periods = config
        .periods
        .clone()
        .unwrap_or_else(|| divisor_periods(code.spec.p));

    let mut budget = config.budget;
    let mut results: Vec<(Witness, Certificate)> = Vec::new();
    let mut seen: std::collections::HashSet<Vec<usize>> = std::collections::HashSet::new();

    let mut try_candidate =
        |lambda: &Gf2Vector, params: MethodParams, results: &mut Vec<(Witness, Certificate)>| {
            if !product.mat_vec(lambda).is_zero() {
                return;
            }
            let x = code
                .lat_x_or(side)
                .row_combination(lambda);
            if x.is_zero() || !seen.insert(x.support()) {
                return;
            }
            let cert = certify(code, side, &x).expect("nonzero vector of length n");
            if cert.accepted() {
                let witness = Witness::from_vector(
                    code.spec.id.clone(),
                    side,
                    Method::Lat,
                    params,
                    &x,
                )
                .expect("nonzero");
                results.push((witness, cert));
            }
        };

    'combs: for &q in &periods {
        if q == 0 || code.spec.p % q != 0 {
            continue;
        }
        let q = q as usize;
        for base in 0..q {
            let comb = comb_block(p, q, base);
            // One block at a time, then the same comb in every block.
            for block in 0..blocks {
                if budget == 0 {
                    break 'combs;
                }
                budget -= 1;
                let mut lambda = Gf2Vector::zeros(dim);
                for &t in &comb {
                    lambda.set(block * p + t, true);
                }
                let mut params = MethodParams::new();
                params.insert("generator".into(), json!("comb"));
                params.insert("period".into(), json!(q));
                params.insert("base".into(), json!(base));
                params.insert("block".into(), json!(block));
                try_candidate(&lambda, params, &mut results);
            }
            if blocks > 1 {
                if budget == 0 {
                    break 'combs;
                }
                budget -= 1;
                let mut lambda = Gf2Vector::zeros(dim);
                for block in 0..blocks {
                    for &t in &comb {
                        lambda.set(block * p + t, true);
                    }
                }
                let mut params = MethodParams::new();
                params.insert("generator".into(), json!("comb"));
                params.insert("period".into(), json!(q));
                params.insert("base".into(), json!(base));
                params.insert("block".into(), json!("all"));
                try_candidate(&lambda, params, &mut results);
            }
        }
    }

    // Kernel basis singles, then pairs among the lightest lifts.
    let basis = product.kernel_basis();
    let latent = code.lat_x_or(side);
    let mut ranked: Vec<(usize, usize)> = basis
        .iter()
        .enumerate()
        .map(|(i, b)| (latent.row_combination(b).weight(), i))
        .collect();
    ranked.sort_unstable();
    for &(_, i) in ranked.iter() {
        if budget == 0 {
            break;
        }
        budget -= 1;
        let mut params = MethodParams::new();
        params.insert("generator".into(), json!("kernel"));
        params.insert("index".into(), json!(i));
        try_candidate(&basis[i], params, &mut results);
    }
    let pool: Vec<usize> = ranked
        .iter()
        .take(config.pair_pool)
        .map(|&(_, i)| i)
        .collect();
    let mut pairs_left = config.max_pairs;
    'pairs: for ai in 0..pool.len() {
        for bi in ai + 1..pool.len() {
            if budget == 0 || pairs_left == 0 {
                break 'pairs;
            }
            budget -= 1;
            pairs_left -= 1;
            let (i, j) = (pool[ai], pool[bi]);
            let mut lambda = basis[i].clone();
            lambda.xor_assign(&basis[j]);
            let mut params = MethodParams::new();
            params.insert("generator".into(), json!("kernel-pair"));
            params.insert("indices".into(), json!([i, j]));
            try_candidate(&lambda, params, &mut results);
        }
    }

    results.sort_by(|a, b| {
        (a.0.weight, &a.0.support).cmp(&(b.0.weight, &b.0.support))
    });
    Ok(results)
}

impl CssCode {
    /// The latent matrix feeding side-`side` witnesses.
    pub(crate) fn lat_x_or(&self, side: Side) -> &Gf2Matrix {
        match side {
            Side::X => &self.lat_x,
            Side::Z => &self.lat_z,
        }
    }
}
