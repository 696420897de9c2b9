//! Restricted-lift witness searches.
//!
//! Four search families share one engine. Block-constant (blk) and
//! fiber-pattern (fib) searches solve a quotient system and lift solutions
//! back to full length; the CRT-stripe search (crt) parametrizes a stripe
//! subspace and combines restricted-kernel basis vectors; the direct
//! search (dir) works on the full check matrix with restricted supports.
//! Every candidate is re-checked against the full-length matrices by the
//! certification pipeline; nothing is accepted on the restricted system
//! alone.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::code::{CssCode, Girth};
use crate::ets::{enumerate_8cycles, grow_ets, GrowConfig, TannerGraph};
use crate::gf2::{Gf2Matrix, Gf2Vector};
use crate::spec::CodeSpec;
use crate::witness::{certify, Certificate, Method, MethodParams, Side, Witness};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LiftError {
    #[error("{m} does not divide the block length {p}")]
    NotADivisor { m: usize, p: usize },
    #[error("vector length {len} is not a multiple of the block length {block}")]
    LengthMismatch { len: usize, block: usize },
    #[error("vector is not {m}-block-constant at block {block}, coset {coset}")]
    NotBlockConstant { m: usize, block: usize, coset: usize },
    #[error("empty fiber pattern")]
    EmptyPattern,
    #[error("fiber index {j} outside 0..{m}")]
    BadPattern { j: usize, m: usize },
    #[error("({q1}, {q2}) is not a coprime factorization of {p}")]
    BadSplit { q1: usize, q2: usize, p: usize },
}

/// A block factor m | P with quotient length Q = P/m.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockStructure {
    pub m: usize,
    pub q: usize,
}

impl BlockStructure {
    pub fn new(p: usize, m: usize) -> Result<BlockStructure, LiftError> {
        if m < 2 || p % m != 0 {
            return Err(LiftError::NotADivisor { m, p });
        }
        Ok(BlockStructure { m, q: p / m })
    }
}

/// Picks the first coset representative of each length-Q coset, blockwise.
/// Fails unless the vector is constant on every coset {t, t+Q, .., t+(m-1)Q}.
pub fn compress(v: &Gf2Vector, p: usize, m: usize) -> Result<Gf2Vector, LiftError> {
    if m == 0 || p % m != 0 {
        return Err(LiftError::NotADivisor { m, p });
    }
    if p == 0 || v.len() % p != 0 {
        return Err(LiftError::LengthMismatch {
            len: v.len(),
            block: p,
        });
    }
    let q = p / m;
    let blocks = v.len() / p;
    let mut out = Gf2Vector::zeros(blocks * q);
    for c in 0..blocks {
        for t in 0..q {
            let bit = v.get(c * p + t);
            for j in 1..m {
                if v.get(c * p + t + j * q) != bit {
                    return Err(LiftError::NotBlockConstant {
                        m,
                        block: c,
                        coset: t,
                    });
                }
            }
            if bit {
                out.set(c * q + t, true);
            }
        }
    }
    Ok(out)
}

/// Repeats every quotient coordinate across its m coset positions.
pub fn lift(vbar: &Gf2Vector, q: usize, m: usize) -> Gf2Vector {
    let full: Vec<usize> = (0..m).collect();
    fiber_lift(vbar, q, m, &full)
}

/// Places every quotient coordinate on the selected fibers only; the full
/// pattern recovers the block-constant lift.
pub fn fiber_lift(vbar: &Gf2Vector, q: usize, m: usize, s: &[usize]) -> Gf2Vector {
    let blocks = vbar.len() / q.max(1);
    let p = q * m;
    let mut out = Gf2Vector::zeros(blocks * p);
    for idx in vbar.support() {
        let (c, t) = (idx / q, idx % q);
        for &j in s {
            out.set(c * p + t + j * q, true);
        }
    }
    out
}

/// Active check matrices of the quotient design: the same template built
/// from the maps reduced modulo Q = P/m. m = 1 returns the originals.
pub fn compressed_checks(spec: &CodeSpec, m: usize) -> Result<(Gf2Matrix, Gf2Matrix), LiftError> {
    let p = spec.p as usize;
    if m == 0 || p % m != 0 {
        return Err(LiftError::NotADivisor { m, p });
    }
    let q = spec
        .quotient((p / m) as u64)
        .expect("divisor checked above");
    Ok(crate::code::active_matrices(&q))
}

fn check_pattern(m: usize, s: &[usize]) -> Result<Vec<usize>, LiftError> {
    if s.is_empty() {
        return Err(LiftError::EmptyPattern);
    }
    let mut sorted = s.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &j in &sorted {
        if j >= m {
            return Err(LiftError::BadPattern { j, m });
        }
    }
    Ok(sorted)
}

/// Restrictions of the active matrices to the fiber-pattern subspace:
/// column (c, t') of the result is the sum over j in S of the original
/// column (c, t' + jQ). Satisfies restricted·v̄ = original·fiber_lift(v̄).
pub fn fiber_checks(
    code: &CssCode,
    m: usize,
    s: &[usize],
) -> Result<(Gf2Matrix, Gf2Matrix), LiftError> {
    let p = code.spec.p as usize;
    if m == 0 || p % m != 0 {
        return Err(LiftError::NotADivisor { m, p });
    }
    let s = check_pattern(m, s)?;
    let q = p / m;
    let restrict = |h: &Gf2Matrix| -> Gf2Matrix {
        let blocks = h.cols() / p;
        let mut out = Gf2Matrix::zeros(h.rows(), blocks * q);
        for r in 0..h.rows() {
            for e in h.row_support(r) {
                let (c, t) = (e / p, e % p);
                if s.binary_search(&(t / q)).is_ok() {
                    out.flip(r, c * q + t % q);
                }
            }
        }
        out
    };
    Ok((restrict(&code.h_x), restrict(&code.h_z)))
}

/// A coprime factorization P = q1·q2 indexing the stripe subspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrtSplit {
    pub q1: usize,
    pub q2: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl CrtSplit {
    pub fn new(p: usize, q1: usize, q2: usize) -> Result<CrtSplit, LiftError> {
        if q1 == 0 || q2 == 0 || q1 * q2 != p || gcd(q1, q2) != 1 {
            return Err(LiftError::BadSplit { q1, q2, p });
        }
        Ok(CrtSplit { q1, q2 })
    }

    pub fn coeffs_per_block(&self) -> usize {
        self.q1 + self.q2
    }
}

/// Expands stripe coefficients to a full-length vector. Block c owns q1
/// mod-q1 stripe coefficients followed by q2 mod-q2 ones; coordinate
/// (c, t) receives the parity of its two stripes.
pub fn crt_expand(y: &Gf2Vector, p: usize, split: &CrtSplit) -> Gf2Vector {
    let w = split.coeffs_per_block();
    let blocks = y.len() / w;
    let mut out = Gf2Vector::zeros(blocks * p);
    for c in 0..blocks {
        for t in 0..p {
            let bit = y.get(c * w + t % split.q1) ^ y.get(c * w + split.q1 + t % split.q2);
            if bit {
                out.set(c * p + t, true);
            }
        }
    }
    out
}

/// The restricted check map on stripe coefficients and the kernel basis of
/// its matrix. The matrix satisfies matrix·y = h·crt_expand(y).
pub struct CrtSystem {
    pub split: CrtSplit,
    pub matrix: Gf2Matrix,
    pub kernel: Vec<Gf2Vector>,
}

pub fn crt_parametrize(h: &Gf2Matrix, p: usize, split: &CrtSplit) -> CrtSystem {
    let w = split.coeffs_per_block();
    let blocks = h.cols() / p;
    let mut matrix = Gf2Matrix::zeros(h.rows(), blocks * w);
    for r in 0..h.rows() {
        for e in h.row_support(r) {
            let (c, t) = (e / p, e % p);
            matrix.flip(r, c * w + t % split.q1);
            matrix.flip(r, c * w + split.q1 + t % split.q2);
        }
    }
    let kernel = matrix.kernel_basis();
    CrtSystem {
        split: *split,
        matrix,
        kernel,
    }
}

/// Work schedule for the kernel searches. The same schedule always yields
/// the same candidates: random trials draw from per-trial streams seeded
/// by (seed, size, trial index), never from shared state.
#[derive(Clone, Debug)]
pub struct SearchBudget {
    /// Support sizes for random restricted trials.
    pub sizes: Vec<usize>,
    pub trials_per_size: usize,
    pub seed: u64,
    /// Accepted witnesses to keep per search.
    pub keep_top: usize,
    /// Include aligned multi-block comb supports.
    pub use_combs: bool,
    /// Include short-cycle union supports (girth-8 graphs only).
    pub use_cycles: bool,
    /// Enumerate the whole kernel when its dimension is at most this.
    pub exhaustive_dim: u32,
    /// Basis prefix length for greedy pair descent on large kernels.
    pub descent_cap: usize,
}

impl SearchBudget {
    /// Direct-search default: support sizes 2w for w in 8..=64, ten
    /// thousand trials each.
    pub fn dir_default() -> SearchBudget {
        SearchBudget {
            sizes: (8..=64).map(|w| 2 * w).collect(),
            trials_per_size: 10_000,
            seed: 7,
            keep_top: 8,
            use_combs: true,
            use_cycles: true,
            exhaustive_dim: 20,
            descent_cap: 2048,
        }
    }

    /// Lighter default for quotient-level systems.
    pub fn quotient_default() -> SearchBudget {
        SearchBudget {
            sizes: vec![16, 24, 32, 48, 64],
            trials_per_size: 2_000,
            seed: 7,
            keep_top: 8,
            use_combs: true,
            use_cycles: true,
            exhaustive_dim: 20,
            descent_cap: 2048,
        }
    }
}

/// Slice of the deterministic trial schedule owned by one worker. Trial g
/// belongs to worker `index` iff g % count == index; merged results are
/// therefore independent of the worker count.
#[derive(Clone, Copy, Debug)]
pub struct Partition {
    pub index: usize,
    pub count: usize,
}

impl Partition {
    pub fn solo() -> Partition {
        Partition { index: 0, count: 1 }
    }

    fn owns(&self, trial: usize) -> bool {
        trial % self.count == self.index
    }
}

/// Best-N candidate supports, deduplicated, keyed by (weight, support)
/// with the lexicographically least generator tag retained. Keeping the
/// best N of a set is insertion-order independent, so merging per-worker
/// pools and trimming again reproduces the single-worker pool.
#[derive(Clone, Debug, Default)]
pub struct CandidatePool {
    cap: usize,
    entries: BTreeMap<(usize, Vec<usize>), &'static str>,
}

impl CandidatePool {
    pub fn new(cap: usize) -> CandidatePool {
        CandidatePool {
            cap,
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, support: Vec<usize>, tag: &'static str) {
        if support.is_empty() {
            return;
        }
        let key = (support.len(), support);
        match self.entries.get_mut(&key) {
            Some(existing) => {
                if tag < *existing {
                    *existing = tag;
                }
            }
            None => {
                self.entries.insert(key, tag);
                if self.entries.len() > self.cap {
                    let worst = self.entries.keys().next_back().unwrap().clone();
                    self.entries.remove(&worst);
                }
            }
        }
    }

    pub fn merge(&mut self, other: CandidatePool) {
        for ((_, support), tag) in other.entries {
            self.insert(support, tag);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], &'static str)> {
        self.entries.iter().map(|((_, s), &t)| (s.as_slice(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn trial_seed(seed: u64, salt: u64, size: usize, trial: usize) -> u64 {
    splitmix(splitmix(seed ^ salt) ^ ((size as u64) << 32 | trial as u64))
}

fn salt_of(parts: &[u64]) -> u64 {
    parts.iter().fold(0xcbf29ce484222325, |acc, &p| {
        splitmix(acc ^ p)
    })
}

/// Visits every nonzero combination of the basis exactly once via a
/// reflected Gray walk.
fn gray_enumerate(basis: &[Gf2Vector], mut visit: impl FnMut(&Gf2Vector)) {
    if basis.is_empty() {
        return;
    }
    assert!(basis.len() < 63);
    let mut acc = Gf2Vector::zeros(basis[0].len());
    for g in 1u64..1u64 << basis.len() {
        acc.xor_assign(&basis[g.trailing_zeros() as usize]);
        visit(&acc);
    }
}

/// In-place greedy reduction: replace a basis vector by its sum with
/// another whenever that lowers its weight. Total weight strictly drops,
/// so the sweep terminates; the pass cap bounds worst cases.
pub(crate) fn pair_descent(basis: &mut [Gf2Vector], max_passes: usize) {
    basis.sort_by_key(|v| (v.weight(), v.support()));
    for _ in 0..max_passes {
        let mut improved = false;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i == j {
                    continue;
                }
                let mut cand = basis[i].clone();
                cand.xor_assign(&basis[j]);
                if !cand.is_zero() && cand.weight() < basis[i].weight() {
                    basis[i] = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
        basis.sort_by_key(|v| (v.weight(), v.support()));
    }
}

/// Full-kernel candidates: exhaustive for small kernels, otherwise greedy
/// pair descent over the lightest basis prefix, refined by folding pair
/// sums of the lightest survivors back in and descending again.
fn whole_kernel_candidates(h: &Gf2Matrix, budget: &SearchBudget, pool: &mut CandidatePool) {
    let basis = h.kernel_basis();
    if basis.is_empty() {
        return;
    }
    if basis.len() as u32 <= budget.exhaustive_dim {
        gray_enumerate(&basis, |v| pool.insert(v.support(), "kernel"));
        return;
    }
    let mut work = basis;
    work.sort_by_key(|v| (v.weight(), v.support()));
    work.truncate(budget.descent_cap.max(2));
    pair_descent(&mut work, 24);
    for _ in 0..2 {
        let window = work.len().min(200);
        let mut sums = Vec::new();
        for i in 0..window {
            for j in i + 1..window {
                let mut s = work[i].clone();
                s.xor_assign(&work[j]);
                if !s.is_zero() {
                    sums.push(s);
                }
            }
        }
        work.extend(sums);
        work.sort_by_key(|v| (v.weight(), v.support()));
        work.dedup_by(|a, b| a.support() == b.support());
        work.truncate(600);
        pair_descent(&mut work, 16);
    }
    for v in &work {
        pool.insert(v.support(), "kernel");
    }
    let window = work.len().min(100);
    for i in 0..window {
        for j in i + 1..window {
            let mut sum = work[i].clone();
            sum.xor_assign(&work[j]);
            pool.insert(sum.support(), "kernel");
        }
    }
}

/// Kernel basis of the columns in `support`, embedded back into full
/// coordinates. Only rows meeting the support participate in the
/// elimination; all other rows are zero on it.
pub fn restricted_kernel(
    h: &Gf2Matrix,
    graph: &TannerGraph,
    support: &[usize],
) -> Vec<Gf2Vector> {
    let mut rows: Vec<u32> = support
        .iter()
        .flat_map(|&v| graph.var_neighbors(v).iter().copied())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    let mut sub = Gf2Matrix::zeros(rows.len(), support.len());
    for (ri, &r) in rows.iter().enumerate() {
        for e in h.row_support(r as usize) {
            if let Ok(ci) = support.binary_search(&e) {
                sub.set(ri, ci, true);
            }
        }
    }
    sub.kernel_basis()
        .into_iter()
        .map(|small| {
            let mut v = Gf2Vector::zeros(h.cols());
            for i in small.support() {
                v.set(support[i], true);
            }
            v
        })
        .collect()
}

fn trial_candidates(
    h: &Gf2Matrix,
    graph: &TannerGraph,
    support: &[usize],
    tag: &'static str,
    pool: &mut CandidatePool,
) {
    let basis = restricted_kernel(h, graph, support);
    if basis.is_empty() {
        return;
    }
    if basis.len() <= 14 {
        gray_enumerate(&basis, |v| pool.insert(v.support(), tag));
    } else {
        let mut basis = basis;
        pair_descent(&mut basis, 24);
        for v in &basis {
            pool.insert(v.support(), tag);
        }
    }
}

/// Aligned multi-block combs: s coordinates per block at a common period,
/// over every block column, for small base offsets.
fn comb_supports(blocks: usize, block_len: usize, max_size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for s in 1..=block_len {
        if blocks * s > max_size {
            break;
        }
        if block_len % s != 0 {
            continue;
        }
        let period = block_len / s;
        for base in 0..period.min(4) {
            let mut sup: Vec<usize> = (0..blocks)
                .flat_map(|c| (0..s).map(move |k| c * block_len + base + k * period))
                .collect();
            sup.sort_unstable();
            out.push(sup);
        }
    }
    out
}

/// Variable sets of short-cycle unions and their pairwise unions; empty
/// unless the graph has girth exactly 8.
fn cycle_supports(graph: &TannerGraph, max_size: usize, cap: usize) -> Vec<Vec<usize>> {
    if graph.girth() != Girth::Finite(8) {
        return Vec::new();
    }
    let Ok(cycles) = enumerate_8cycles(graph, 4_000) else {
        return Vec::new();
    };
    let grown = grow_ets(
        graph,
        &cycles,
        &GrowConfig {
            max_stage: 3,
            frontier_cap: 1_024,
        },
    );
    let mut out: Vec<Vec<usize>> = Vec::new();
    for cand in &grown {
        if out.len() == cap {
            break;
        }
        let sup: Vec<usize> = cand.vars.iter().map(|&v| v as usize).collect();
        if sup.len() <= max_size && !out.contains(&sup) {
            out.push(sup);
        }
    }
    let singles = out.len().min(40);
    for i in 0..singles {
        for j in i + 1..singles {
            if out.len() == cap {
                return out;
            }
            let mut union = out[i].clone();
            for &v in &out[j] {
                if !union.contains(&v) {
                    union.push(v);
                }
            }
            union.sort_unstable();
            if union.len() <= max_size && !out.contains(&union) {
                out.push(union);
            }
        }
    }
    out
}

/// Runs the deterministic candidate schedule for one kernel system. The
/// schedule is a fixed list of trials (whole kernel, combs, cycle unions,
/// then seeded random supports); the partition picks every count-th one.
pub fn kernel_candidate_pool(
    h: &Gf2Matrix,
    block_len: usize,
    budget: &SearchBudget,
    salt: u64,
    part: Partition,
) -> CandidatePool {
    let mut pool = CandidatePool::new(budget.keep_top.max(1) * 8);
    let graph = TannerGraph::from_checks(h);
    let max_size = budget.sizes.iter().copied().max().unwrap_or(64);
    let mut trial = 0usize;
    let owns = |trial: &mut usize| {
        let mine = part.owns(*trial);
        *trial += 1;
        mine
    };
    if owns(&mut trial) {
        whole_kernel_candidates(h, budget, &mut pool);
    }
    if budget.use_combs && block_len > 0 {
        for sup in comb_supports(h.cols() / block_len, block_len, max_size.max(block_len / 2)) {
            if owns(&mut trial) {
                trial_candidates(h, &graph, &sup, "comb", &mut pool);
            }
        }
    }
    if budget.use_cycles {
        for sup in cycle_supports(&graph, max_size.max(48), 1_000) {
            if owns(&mut trial) {
                trial_candidates(h, &graph, &sup, "cycles", &mut pool);
            }
        }
    }
    for (si, &size) in budget.sizes.iter().enumerate() {
        let size = size.min(h.cols());
        for t in 0..budget.trials_per_size {
            if !owns(&mut trial) {
                continue;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(budget.seed, salt, si, t));
            let mut sup = rand::seq::index::sample(&mut rng, h.cols(), size).into_vec();
            sup.sort_unstable();
            trial_candidates(h, &graph, &sup, "random", &mut pool);
        }
    }
    pool
}

fn check_matrix(code: &CssCode, side: Side) -> &Gf2Matrix {
    match side {
        Side::X => &code.h_z,
        Side::Z => &code.h_x,
    }
}

/// Certifies pool entries in (weight, support) order until keep_top are
/// accepted. `to_full` maps a stored support to the full-length vector.
fn certify_pool(
    code: &CssCode,
    side: Side,
    method: Method,
    pool: &CandidatePool,
    keep_top: usize,
    to_full: impl Fn(&[usize]) -> Gf2Vector,
    params_for: impl Fn(&'static str) -> MethodParams,
) -> Vec<(Witness, Certificate)> {
    let mut out = Vec::new();
    for (support, tag) in pool.iter() {
        if out.len() == keep_top {
            break;
        }
        let v = to_full(support);
        if v.is_zero() {
            continue;
        }
        let Ok(cert) = certify(code, side, &v) else {
            continue;
        };
        if !cert.accepted() {
            continue;
        }
        let witness = Witness::from_vector(&code.spec.id, side, method, params_for(tag), &v)
            .expect("nonzero checked above");
        out.push((witness, cert));
    }
    out
}

/// Block-constant search: quotient-kernel candidates lifted with the full
/// fiber set, certified against the full code. Reported weight is m times
/// the quotient weight.
pub fn search_blk(
    code: &CssCode,
    side: Side,
    m: usize,
    budget: &SearchBudget,
    part: Partition,
) -> Result<Vec<(Witness, Certificate)>, LiftError> {
    let p = code.spec.p as usize;
    let st = BlockStructure::new(p, m)?;
    let (hbx, hbz) = compressed_checks(&code.spec, m)?;
    let hq = match side {
        Side::X => hbz,
        Side::Z => hbx,
    };
    let salt = salt_of(&[1, m as u64]);
    let pool = kernel_candidate_pool(&hq, st.q, budget, salt, part);
    Ok(certify_pool(
        code,
        side,
        Method::Blk,
        &pool,
        budget.keep_top,
        |sup| {
            let vbar = Gf2Vector::from_support(hq.cols(), sup).expect("pool supports are sorted");
            lift(&vbar, st.q, st.m)
        },
        |tag| {
            let mut params = MethodParams::new();
            params.insert("m".into(), m.into());
            params.insert("generator".into(), tag.into());
            params
        },
    ))
}

/// All nonempty proper fiber patterns for small m; singletons, adjacent
/// pairs, and single-hole complements for larger m.
pub fn default_patterns(m: usize) -> Vec<Vec<usize>> {
    if m <= 4 {
        let mut out = Vec::new();
        for mask in 1u32..(1 << m) - 1 {
            out.push((0..m).filter(|&j| mask >> j & 1 == 1).collect());
        }
        out.sort_by_key(|s: &Vec<usize>| (s.len(), s.clone()));
        return out;
    }
    let mut out: Vec<Vec<usize>> = (0..m).map(|j| vec![j]).collect();
    for j in 1..m {
        out.push(vec![0, j]);
    }
    for hole in 0..m {
        out.push((0..m).filter(|&j| j != hole).collect());
    }
    out
}

/// Fiber-pattern search over the given patterns. Each pattern gets its own
/// restricted system; lifts place quotient bits on the selected fibers.
pub fn search_fib(
    code: &CssCode,
    side: Side,
    m: usize,
    patterns: &[Vec<usize>],
    budget: &SearchBudget,
    part: Partition,
) -> Result<Vec<(Witness, Certificate)>, LiftError> {
    let p = code.spec.p as usize;
    let st = BlockStructure::new(p, m)?;
    let mut merged = Vec::new();
    for pattern in patterns {
        let s = check_pattern(m, pattern)?;
        let (hxs, hzs) = fiber_checks(code, m, &s)?;
        let hr = match side {
            Side::X => hzs,
            Side::Z => hxs,
        };
        let mut salt_parts = vec![2, m as u64];
        salt_parts.extend(s.iter().map(|&j| j as u64 + 1));
        let pool = kernel_candidate_pool(&hr, st.q, budget, salt_of(&salt_parts), part);
        let found = certify_pool(
            code,
            side,
            Method::Fib,
            &pool,
            budget.keep_top,
            |sup| {
                let vbar =
                    Gf2Vector::from_support(hr.cols(), sup).expect("pool supports are sorted");
                fiber_lift(&vbar, st.q, st.m, &s)
            },
            |tag| {
                let mut params = MethodParams::new();
                params.insert("m".into(), m.into());
                params.insert("pattern".into(), serde_json::json!(s));
                params.insert("generator".into(), tag.into());
                params
            },
        );
        merged.extend(found);
    }
    merged.sort_by_key(|(w, _)| (w.weight, w.support.clone()));
    merged.truncate(budget.keep_top);
    Ok(merged)
}

/// CRT-stripe search: kernel basis of the restricted check map, reduced by
/// pair descent on the expanded images, then sparse combinations scored by
/// true full-length weight (stripes may overlap and cancel).
pub fn search_crt(
    code: &CssCode,
    side: Side,
    split: &CrtSplit,
    combo_max: usize,
    budget: &SearchBudget,
) -> Result<Vec<(Witness, Certificate)>, LiftError> {
    let p = code.spec.p as usize;
    CrtSplit::new(p, split.q1, split.q2)?;
    let h = check_matrix(code, side);
    let system = crt_parametrize(h, p, split);
    let mut images: Vec<Gf2Vector> = system
        .kernel
        .iter()
        .map(|y| crt_expand(y, p, split))
        .filter(|v| !v.is_zero())
        .collect();
    images.sort_by_key(|v| (v.weight(), v.support()));
    images.dedup_by(|a, b| a.support() == b.support());
    let mut pool = CandidatePool::new(budget.keep_top.max(1) * 8);
    if images.len() as u32 <= budget.exhaustive_dim {
        gray_enumerate(&images, |v| pool.insert(v.support(), "stripes"));
    } else {
        images.truncate(budget.descent_cap.max(2));
        pair_descent(&mut images, 24);
        for v in &images {
            pool.insert(v.support(), "stripes");
        }
        let window = images.len().min(if combo_max >= 3 { 64 } else { 100 });
        for i in 0..window {
            for j in i + 1..window {
                let mut sum = images[i].clone();
                sum.xor_assign(&images[j]);
                pool.insert(sum.support(), "stripes");
                if combo_max >= 3 {
                    for item in images.iter().take(window).skip(j + 1) {
                        let mut triple = sum.clone();
                        triple.xor_assign(item);
                        pool.insert(triple.support(), "stripes");
                    }
                }
            }
        }
    }
    Ok(certify_pool(
        code,
        side,
        Method::Crt,
        &pool,
        budget.keep_top,
        |sup| Gf2Vector::from_support(code.n, sup).expect("pool supports are sorted"),
        |_| {
            let mut params = MethodParams::new();
            params.insert("q1".into(), split.q1.into());
            params.insert("q2".into(), split.q2.into());
            params
        },
    ))
}

/// Nontrivial coprime factorizations of P, both orders. The degenerate
/// split q1 = 1 is legal in the API but excluded here: its stripe space is
/// the whole ambient space, which the direct search already covers.
pub fn default_splits(p: usize) -> Vec<CrtSplit> {
    let mut out = Vec::new();
    for q1 in 2..p {
        if p % q1 == 0 {
            let q2 = p / q1;
            if q2 >= 2 && gcd(q1, q2) == 1 {
                out.push(CrtSplit { q1, q2 });
            }
        }
    }
    out
}

/// Direct restricted-support search on the full active matrix.
pub fn search_dir(
    code: &CssCode,
    side: Side,
    budget: &SearchBudget,
    part: Partition,
) -> Vec<(Witness, Certificate)> {
    let h = check_matrix(code, side);
    let pool = kernel_candidate_pool(h, code.spec.p as usize, budget, salt_of(&[4]), part);
    certify_pool(
        code,
        side,
        Method::Dir,
        &pool,
        budget.keep_top,
        |sup| Gf2Vector::from_support(code.n, sup).expect("pool supports are sorted"),
        |tag| {
            let mut params = MethodParams::new();
            params.insert("generator".into(), tag.into());
            params
        },
    )
}

/// Merges per-worker outputs of a partitioned search (blk, fib, dir)
/// into the single-worker result. Soundness: a candidate in the solo
/// pool lands in every discovering worker's pool, and anything sorting
/// before it in a worker's pool also sits before it in the solo pool,
/// so the solo top list is covered by the union. Duplicate (weight,
/// support) records arise when workers rediscover one vector through
/// different trials; the solo pool keeps the lexicographically least
/// generator tag per key, so the merge does too.
pub fn merge_search_results(
    parts: Vec<Vec<(Witness, Certificate)>>,
    keep_top: usize,
) -> Vec<(Witness, Certificate)> {
    let tag = |w: &Witness| -> String {
        w.method_params
            .get("generator")
            .and_then(|v| v.as_str())
            .unwrap_or("")
            .to_string()
    };
    let mut all: Vec<(Witness, Certificate)> = parts.into_iter().flatten().collect();
    all.sort_by(|(a, _), (b, _)| (a.weight, &a.support, tag(a)).cmp(&(b.weight, &b.support, tag(b))));
    all.dedup_by(|a, b| a.0.weight == b.0.weight && a.0.support == b.0.support);
    all.truncate(keep_top);
    all
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::AffineMap;
    use rand::Rng;

    fn toy() -> CssCode {
        let spec = CodeSpec::new("TL", 6, 2, 4, &[(1, 1), (1, 2)], &[(1, 3), (1, 5)]).unwrap();
        CssCode::build(&spec).unwrap()
    }

    fn mats_equal(a: &Gf2Matrix, b: &Gf2Matrix) -> bool {
        a.rows() == b.rows()
            && a.cols() == b.cols()
            && (0..a.rows()).all(|r| a.row_support(r) == b.row_support(r))
    }

    fn random_vector(len: usize, rng: &mut ChaCha8Rng) -> Gf2Vector {
        let mut v = Gf2Vector::zeros(len);
        for i in 0..len {
            if rng.gen_bool(0.5) {
                v.set(i, true);
            }
        }
        v
    }

    #[test]
    fn round_trip_and_weight_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [2usize, 3, 6] {
            let q = 6 / m;
            for _ in 0..50 {
                let vbar = random_vector(4 * q, &mut rng);
                let v = lift(&vbar, q, m);
                assert_eq!(v.weight(), m * vbar.weight());
                let back = compress(&v, 6, m).unwrap();
                assert_eq!(back.support(), vbar.support());
            }
        }
        assert!(lift(&Gf2Vector::zeros(12), 3, 2).is_zero());
    }

    #[test]
    fn compress_rejects_broken_cosets() {
        let mut v = lift(&Gf2Vector::from_support(12, &[4]).unwrap(), 3, 2);
        v.set(4 + 3, false);
        assert_eq!(
            compress(&v, 6, 2).unwrap_err(),
            LiftError::NotBlockConstant {
                m: 2,
                block: 1,
                coset: 1
            }
        );
        assert_eq!(
            compress(&Gf2Vector::zeros(10), 6, 2).unwrap_err(),
            LiftError::LengthMismatch { len: 10, block: 6 }
        );
    }

    #[test]
    fn trivial_factor_returns_original_matrices() {
        let code = toy();
        let (hx, hz) = compressed_checks(&code.spec, 1).unwrap();
        assert!(mats_equal(&hx, &code.h_x));
        assert!(mats_equal(&hz, &code.h_z));
        assert_eq!(
            compressed_checks(&code.spec, 4).unwrap_err(),
            LiftError::NotADivisor { m: 4, p: 6 }
        );
    }

    #[test]
    fn quotient_maps_descend_single_blocks() {
        // Direct permutation oracle for the descent identity
        // compress(M·lift(u)) = quotient(M)·u on single P x P blocks.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = 12u64;
        for m in [2usize, 3, 4, 6] {
            let q = 12 / m;
            for a in [1u64, 5, 7, 11] {
                let b = rng.gen_range(0..p);
                let map = AffineMap::new(a, b, p).unwrap();
                let quo = map.reduce_mod(q as u64).unwrap();
                let mut full = Gf2Matrix::zeros(12, 12);
                let mut small = Gf2Matrix::zeros(q, q);
                for t in 0..12 {
                    full.set(t, map.apply(t as u64) as usize, true);
                }
                for t in 0..q {
                    small.set(t, quo.apply(t as u64) as usize, true);
                }
                for _ in 0..20 {
                    let ubar = random_vector(q, &mut rng);
                    let lhs = compress(&full.mat_vec(&lift(&ubar, q, m)), 12, m).unwrap();
                    let rhs = small.mat_vec(&ubar);
                    assert_eq!(lhs.support(), rhs.support());
                }
            }
        }
    }

    #[test]
    fn compression_equivalence_on_the_toy() {
        let code = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in [2usize, 3] {
            let q = 6 / m;
            let (_, hbz) = compressed_checks(&code.spec, m).unwrap();
            for _ in 0..100 {
                let vbar = random_vector(4 * q, &mut rng);
                let full_syndrome = code.h_z.mat_vec(&lift(&vbar, q, m));
                let quot_syndrome = hbz.mat_vec(&vbar);
                // Syndromes descend blockwise, so zero iff zero.
                assert_eq!(
                    full_syndrome.support(),
                    lift(&quot_syndrome, q, m).support()
                );
            }
            for vbar in hbz.kernel_basis() {
                assert!(code.h_z.mat_vec(&lift(&vbar, q, m)).is_zero());
            }
        }
    }

    #[test]
    fn fiber_restriction_matches_direct_lift() {
        let code = toy();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for m in [2usize, 3] {
            let q = 6 / m;
            for pattern in default_patterns(m) {
                let (hxs, hzs) = fiber_checks(&code, m, &pattern).unwrap();
                for _ in 0..40 {
                    let ubar = random_vector(4 * q, &mut rng);
                    let lifted = fiber_lift(&ubar, q, m, &pattern);
                    assert_eq!(lifted.weight(), pattern.len() * ubar.weight());
                    assert_eq!(
                        hzs.mat_vec(&ubar).support(),
                        code.h_z.mat_vec(&lifted).support()
                    );
                    assert_eq!(
                        hxs.mat_vec(&ubar).support(),
                        code.h_x.mat_vec(&lifted).support()
                    );
                }
            }
        }
        assert_eq!(
            fiber_checks(&code, 2, &[]).unwrap_err(),
            LiftError::EmptyPattern
        );
        assert_eq!(
            fiber_checks(&code, 2, &[2]).unwrap_err(),
            LiftError::BadPattern { j: 2, m: 2 }
        );
    }

    #[test]
    fn full_fiber_pattern_is_the_block_constant_lift() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let ubar = random_vector(8, &mut rng);
            assert_eq!(
                fiber_lift(&ubar, 2, 3, &[0, 1, 2]).support(),
                lift(&ubar, 2, 3).support()
            );
        }
    }

    #[test]
    fn crt_expansion_matches_restricted_matrix() {
        let code = toy();
        let split = CrtSplit::new(6, 2, 3).unwrap();
        let system = crt_parametrize(&code.h_z, 6, &split);
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let y = random_vector(4 * split.coeffs_per_block(), &mut rng);
            let x = crt_expand(&y, 6, &split);
            assert_eq!(
                system.matrix.mat_vec(&y).support(),
                code.h_z.mat_vec(&x).support()
            );
        }
        for y in &system.kernel {
            assert!(code.h_z.mat_vec(&crt_expand(y, 6, &split)).is_zero());
        }
        assert_eq!(
            CrtSplit::new(6, 2, 2).unwrap_err(),
            LiftError::BadSplit {
                q1: 2,
                q2: 2,
                p: 6
            }
        );
    }

    #[test]
    fn stripe_space_contains_block_constants() {
        // Summing a full residue system gives the all-ones block, so every
        // per-block-constant vector lies in the stripe space.
        let split = CrtSplit::new(6, 2, 3).unwrap();
        let mut y = Gf2Vector::zeros(split.coeffs_per_block());
        for r in 0..split.q1 {
            y.set(r, true);
        }
        let x = crt_expand(&y, 6, &split);
        assert_eq!(x.support(), (0..6).collect::<Vec<_>>());
        // Degenerate q1 = 1: the beta side indexes single coordinates.
        let unit = CrtSplit::new(6, 1, 6).unwrap();
        let mut y1 = Gf2Vector::zeros(unit.coeffs_per_block());
        y1.set(1 + 4, true);
        assert_eq!(crt_expand(&y1, 6, &unit).support(), vec![4]);
    }

    /// Minimum weight over kernel vectors outside the stabilizer row
    /// space, by exhausting the kernel.
    fn exhaustive_min_logical(code: &CssCode, side: Side) -> Option<usize> {
        let (ker_of, rows_of) = match side {
            Side::X => (&code.h_z, &code.h_x),
            Side::Z => (&code.h_x, &code.h_z),
        };
        let basis = ker_of.kernel_basis();
        assert!(basis.len() <= 20, "toy-sized kernels only");
        let mut best: Option<usize> = None;
        gray_enumerate(&basis, |v| {
            if !rows_of.in_row_space(v) && best.map_or(true, |b| v.weight() < b) {
                best = Some(v.weight());
            }
        });
        best
    }

    fn tiny_budget() -> SearchBudget {
        SearchBudget {
            sizes: vec![8, 12],
            trials_per_size: 40,
            seed: 5,
            keep_top: 64,
            use_combs: true,
            use_cycles: true,
            exhaustive_dim: 20,
            descent_cap: 64,
        }
    }

    #[test]
    fn direct_search_matches_exhaustive_minimum_on_the_toy() {
        let code = toy();
        for side in [Side::X, Side::Z] {
            let oracle = exhaustive_min_logical(&code, side);
            let found = search_dir(&code, side, &tiny_budget(), Partition::solo());
            match oracle {
                Some(min) => assert_eq!(found[0].0.weight, min),
                None => assert!(found.is_empty()),
            }
        }
    }

    #[test]
    fn single_block_support_has_trivial_kernel() {
        let code = toy();
        let graph = TannerGraph::from_checks(&code.h_z);
        let support: Vec<usize> = (0..6).collect();
        assert!(restricted_kernel(&code.h_z, &graph, &support).is_empty());
    }

    #[test]
    fn block_search_covers_the_exhaustive_quotient_sweep() {
        let code = toy();
        let m = 2;
        let q = 3;
        let (_, hbz) = compressed_checks(&code.spec, m).unwrap();
        let mut expected: Vec<Vec<usize>> = Vec::new();
        gray_enumerate(&hbz.kernel_basis(), |vbar| {
            if vbar.weight() <= 4 {
                let v = lift(vbar, q, m);
                if let Ok(cert) = certify(&code, Side::X, &v) {
                    if cert.accepted() {
                        expected.push(v.support());
                    }
                }
            }
        });
        let found = search_blk(&code, Side::X, m, &tiny_budget(), Partition::solo()).unwrap();
        let got: Vec<Vec<usize>> = found.iter().map(|(w, _)| w.support.clone()).collect();
        for sup in &expected {
            assert!(got.contains(sup), "missing lifted quotient witness {sup:?}");
        }
        for (w, _) in &found {
            assert_eq!(w.weight % m, 0);
        }
    }

    #[test]
    fn fiber_search_agrees_with_exhaustive_restriction() {
        let code = toy();
        let m = 2;
        let patterns = default_patterns(m);
        let mut oracle_best: Option<usize> = None;
        for pattern in &patterns {
            let (_, hzs) = fiber_checks(&code, m, pattern).unwrap();
            gray_enumerate(&hzs.kernel_basis(), |vbar| {
                let v = fiber_lift(vbar, 3, m, pattern);
                if v.is_zero() {
                    return;
                }
                if let Ok(cert) = certify(&code, Side::X, &v) {
                    if cert.accepted() && oracle_best.map_or(true, |b| v.weight() < b) {
                        oracle_best = Some(v.weight());
                    }
                }
            });
        }
        let found =
            search_fib(&code, Side::X, m, &patterns, &tiny_budget(), Partition::solo()).unwrap();
        match oracle_best {
            Some(min) => {
                assert_eq!(found[0].0.weight, min);
                assert!(found
                    .iter()
                    .all(|(w, _)| w.method_params.contains_key("pattern")));
            }
            None => assert!(found.is_empty()),
        }
    }

    #[test]
    fn crt_search_equals_brute_force_on_the_toy() {
        let code = toy();
        let split = CrtSplit::new(6, 2, 3).unwrap();
        let system = crt_parametrize(&code.h_z, 6, &split);
        assert!(system.kernel.len() <= 20);
        let mut oracle_best: Option<usize> = None;
        gray_enumerate(&system.kernel, |y| {
            let x = crt_expand(y, 6, &split);
            if x.is_zero() {
                return;
            }
            if let Ok(cert) = certify(&code, Side::X, &x) {
                if cert.accepted() && oracle_best.map_or(true, |b| x.weight() < b) {
                    oracle_best = Some(x.weight());
                }
            }
        });
        let found = search_crt(&code, Side::X, &split, 3, &tiny_budget()).unwrap();
        match oracle_best {
            Some(min) => {
                assert_eq!(found[0].0.weight, min);
                assert!(!found[0].0.support.is_empty());
            }
            None => assert!(found.is_empty()),
        }
    }

    #[test]
    fn partitions_merge_to_the_solo_pool() {
        let code = toy();
        let budget = tiny_budget();
        let solo = kernel_candidate_pool(&code.h_z, 6, &budget, salt_of(&[4]), Partition::solo());
        for count in [2usize, 3, 5] {
            let mut merged = CandidatePool::new(budget.keep_top.max(1) * 8);
            for index in 0..count {
                merged.merge(kernel_candidate_pool(
                    &code.h_z,
                    6,
                    &budget,
                    salt_of(&[4]),
                    Partition { index, count },
                ));
            }
            let a: Vec<_> = solo.iter().collect();
            let b: Vec<_> = merged.iter().collect();
            assert_eq!(a, b, "worker count {count} changed the pool");
        }
    }

    #[test]
    fn partitioned_searches_merge_to_solo_results() {
        let code = toy();
        let budget = tiny_budget();
        let patterns = default_patterns(2);
        let checks: [(&str, Box<dyn Fn(Partition) -> Vec<(Witness, Certificate)>>); 2] = [
            (
                "dir",
                Box::new(|part| search_dir(&code, Side::X, &budget, part)),
            ),
            (
                "fib",
                Box::new(|part| {
                    search_fib(&code, Side::Z, 2, &patterns, &budget, part).unwrap()
                }),
            ),
        ];
        for (name, run) in &checks {
            let solo = run(Partition::solo());
            assert!(!solo.is_empty(), "{name}: toy search found nothing");
            for count in [2usize, 3] {
                let parts: Vec<_> = (0..count)
                    .map(|index| run(Partition { index, count }))
                    .collect();
                let merged = merge_search_results(parts, budget.keep_top);
                assert_eq!(merged.len(), solo.len(), "{name} at {count} workers");
                for ((mw, mc), (sw, sc)) in merged.iter().zip(&solo) {
                    assert_eq!(mw.support, sw.support, "{name} at {count} workers");
                    assert_eq!(mw.method_params, sw.method_params);
                    assert_eq!(mc, sc);
                }
            }
        }
    }

    #[test]
    #[ignore = "full-scale probe, ~minutes"]
    fn ninth_catalog_code_soft_targets() {
        let catalog = crate::spec::Catalog::load(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/data/catalog.toml"
        ))
        .unwrap();
        let code = CssCode::build(catalog.get("C9").unwrap()).unwrap();
        let budget = SearchBudget::quotient_default();
        let t0 = std::time::Instant::now();
        let blk = search_blk(&code, Side::X, 4, &budget, Partition::solo()).unwrap();
        eprintln!(
            "blk m=4: best {:?} in {:?}",
            blk.first().map(|(w, _)| w.weight),
            t0.elapsed()
        );
        let t0 = std::time::Instant::now();
        let fib = search_fib(&code, Side::X, 4, &[vec![0, 2]], &budget, Partition::solo()).unwrap();
        eprintln!(
            "fib m=4 S={{0,2}}: best {:?} in {:?}",
            fib.first().map(|(w, _)| w.weight),
            t0.elapsed()
        );
        let t0 = std::time::Instant::now();
        let split = CrtSplit::new(768, 3, 256).unwrap();
        let crt = search_crt(&code, Side::X, &split, 3, &budget).unwrap();
        eprintln!(
            "crt (3,256): best {:?} in {:?}",
            crt.first().map(|(w, _)| w.weight),
            t0.elapsed()
        );
    }

    #[test]
    fn default_schedules_are_sane() {
        let splits = default_splits(768);
        assert!(splits.contains(&CrtSplit { q1: 3, q2: 256 }));
        assert!(splits.contains(&CrtSplit { q1: 256, q2: 3 }));
        assert!(splits.iter().all(|s| s.q1 >= 2 && s.q2 >= 2));
        assert_eq!(default_patterns(2), vec![vec![0], vec![1]]);
        assert_eq!(default_patterns(3).len(), 6);
        assert!(default_patterns(4).iter().all(|s| s.len() < 4));
        let dir = SearchBudget::dir_default();
        assert_eq!(dir.sizes.first(), Some(&16));
        assert_eq!(dir.sizes.last(), Some(&128));
        assert_eq!(dir.trials_per_size, 10_000);
    }
}
