//! 8-cycle enumeration and trapping-set growth on Tanner graphs.
//!
//! A trapping-set candidate here is a connected union of simple 8-cycles
//! whose induced check degrees all stay in {1, 2}. Candidates with empty
//! odd-check boundary give kernel vectors directly; candidates with a
//! two-check boundary pair up by boundary, and each pair's symmetric
//! difference is again a kernel vector. Both kinds feed the usual
//! certification pipeline.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use thiserror::Error;

use crate::code::{CssCode, Girth};
use crate::gf2::{Gf2Matrix, Gf2Vector};
use crate::witness::{certify, Certificate, Method, MethodParams, Side, Witness};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EtsError {
    #[error("cycle search requires girth 8, graph has girth {0}")]
    GirthTooSmall(usize),
}

/// Sparse bipartite adjacency between variable and check nodes.
pub struct TannerGraph {
    var_checks: Vec<Vec<u32>>,
    check_vars: Vec<Vec<u32>>,
}

impl TannerGraph {
    /// Edge (check r, variable v) iff h has bit (r, v).
    pub fn from_checks(h: &Gf2Matrix) -> TannerGraph {
        let mut var_checks = vec![Vec::new(); h.cols()];
        let mut check_vars = Vec::with_capacity(h.rows());
        for r in 0..h.rows() {
            let support = h.row_support(r);
            for &v in &support {
                var_checks[v].push(r as u32);
            }
            check_vars.push(support.into_iter().map(|v| v as u32).collect());
        }
        TannerGraph {
            var_checks,
            check_vars,
        }
    }

    pub fn vars(&self) -> usize {
        self.var_checks.len()
    }

    pub fn checks(&self) -> usize {
        self.check_vars.len()
    }

    pub fn var_neighbors(&self, v: usize) -> &[u32] {
        &self.var_checks[v]
    }

    pub fn check_neighbors(&self, c: usize) -> &[u32] {
        &self.check_vars[c]
    }

    /// Shortest cycle length, by BFS from every variable node. Every cycle
    /// in a bipartite graph passes through a variable, so this is exact.
    pub fn girth(&self) -> Girth {
        let nodes = self.vars() + self.checks();
        // Nodes 0..vars are variables, vars.. are checks.
        let neighbors = |node: usize| -> &[u32] {
            if node < self.vars() {
                &self.var_checks[node]
            } else {
                &self.check_vars[node - self.vars()]
            }
        };
        let offset = |node: usize, other: u32| -> usize {
            if node < self.vars() {
                self.vars() + other as usize
            } else {
                other as usize
            }
        };
        let mut best = usize::MAX;
        let mut dist = vec![usize::MAX; nodes];
        let mut parent = vec![usize::MAX; nodes];
        let mut queue = std::collections::VecDeque::new();
        let mut touched = Vec::new();
        for start in 0..self.vars() {
            queue.clear();
            queue.push_back(start);
            dist[start] = 0;
            parent[start] = start;
            touched.push(start);
            while let Some(u) = queue.pop_front() {
                let du = dist[u];
                if best != usize::MAX && du >= best.div_ceil(2) {
                    continue;
                }
                for &raw in neighbors(u) {
                    let w = offset(u, raw);
                    if dist[w] == usize::MAX {
                        dist[w] = du + 1;
                        parent[w] = u;
                        touched.push(w);
                        queue.push_back(w);
                    } else if parent[u] != w {
                        best = best.min(du + dist[w] + 1);
                    }
                }
            }
            for &t in &touched {
                dist[t] = usize::MAX;
                parent[t] = usize::MAX;
            }
            touched.clear();
        }
        if best == usize::MAX {
            Girth::Infinite
        } else {
            Girth::Finite(best)
        }
    }
}

/// A simple 8-cycle in canonical form: alternating sequence
/// v0, c0, v1, c1, v2, c2, v3, c3 with v0 the least variable and v1 < v3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cycle8 {
    pub seq: [u32; 8],
}

impl Cycle8 {
    pub fn vars(&self) -> [u32; 4] {
        [self.seq[0], self.seq[2], self.seq[4], self.seq[6]]
    }

    pub fn checks(&self) -> [u32; 4] {
        [self.seq[1], self.seq[3], self.seq[5], self.seq[7]]
    }
}

/// All distinct simple 8-cycles, exhaustively when their number stays
/// within the budget, else a deterministic prefix. Graphs of girth
/// below 8 are refused: shorter cycles would dominate and the growth
/// definition would not apply.
pub fn enumerate_8cycles(g: &TannerGraph, budget: usize) -> Result<Vec<Cycle8>, EtsError> {
    if let Girth::Finite(girth) = g.girth() {
        if girth < 8 {
            return Err(EtsError::GirthTooSmall(girth));
        }
    }
    let mut out = Vec::new();
    // An 8-cycle splits at its least variable v0 and the opposite
    // variable v2 into two check-variable-check walks with disjoint
    // interiors; collecting walks per far endpoint finds each cycle
    // exactly once.
    for v0 in 0..g.vars() as u32 {
        let mut buckets: BTreeMap<u32, Vec<(u32, u32, u32)>> = BTreeMap::new();
        for &c1 in g.var_neighbors(v0 as usize) {
            for &v1 in g.check_neighbors(c1 as usize) {
                if v1 <= v0 {
                    continue;
                }
                for &c2 in g.var_neighbors(v1 as usize) {
                    if c2 == c1 {
                        continue;
                    }
                    for &v2 in g.check_neighbors(c2 as usize) {
                        if v2 == v1 || v2 <= v0 {
                            continue;
                        }
                        buckets.entry(v2).or_default().push((c1, v1, c2));
                    }
                }
            }
        }
        for (v2, walks) in &buckets {
            for i in 0..walks.len() {
                for j in i + 1..walks.len() {
                    let (a1, m1, b1) = walks[i];
                    let (a2, m2, b2) = walks[j];
                    if m1 == m2 || a1 == a2 || a1 == b2 || b1 == a2 || b1 == b2 {
                        continue;
                    }
                    let seq = if m1 < m2 {
                        [v0, a1, m1, b1, *v2, b2, m2, a2]
                    } else {
                        [v0, a2, m2, b2, *v2, b1, m1, a1]
                    };
                    out.push(Cycle8 { seq });
                    if out.len() == budget {
                        return Ok(out);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Checks with an odd number of neighbors inside the variable set; this
/// equals the support of H·1_S.
pub fn boundary(g: &TannerGraph, vars: &[u32]) -> Vec<u32> {
    let mut deg: BTreeMap<u32, u32> = BTreeMap::new();
    for &v in vars {
        for &c in g.var_neighbors(v as usize) {
            *deg.entry(c).or_insert(0) += 1;
        }
    }
    deg.into_iter()
        .filter(|&(_, d)| d % 2 == 1)
        .map(|(c, _)| c)
        .collect()
}

/// A grown union of 8-cycles passing the degree condition.
#[derive(Clone, Debug)]
pub struct EtsCandidate {
    /// Sorted variable set S of the union.
    pub vars: Vec<u32>,
    /// Sorted check nodes lying on the union's cycles (a subset of the
    /// full neighborhood of S).
    pub union_checks: Vec<u32>,
    /// Sorted odd-degree checks of S over the whole graph.
    pub boundary: Vec<u32>,
    /// Number of cycles in the recorded chain.
    pub stage: usize,
    /// Indices into the enumerated cycle list, in chaining order.
    pub cycles: Vec<usize>,
}

impl EtsCandidate {
    pub fn a(&self) -> usize {
        self.vars.len()
    }

    pub fn b(&self) -> usize {
        self.boundary.len()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GrowConfig {
    pub max_stage: usize,
    /// Per-stage frontier cap; states are kept in (boundary, size) order.
    pub frontier_cap: usize,
}

impl Default for GrowConfig {
    fn default() -> Self {
        GrowConfig {
            max_stage: 5,
            frontier_cap: 4096,
        }
    }
}

#[derive(Clone)]
struct UnionState {
    vars: Vec<u32>,
    checks: Vec<u32>,
    /// Degrees of every check adjacent to the variable set.
    deg: BTreeMap<u32, u32>,
    cycles: Vec<usize>,
    b: usize,
}

fn merged(a: &[u32], extra: &[u32]) -> Vec<u32> {
    let mut out = a.to_vec();
    for &x in extra {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out.sort_unstable();
    out
}

fn state_from_vars(
    g: &TannerGraph,
    vars: Vec<u32>,
    checks: Vec<u32>,
    cycles: Vec<usize>,
) -> Option<UnionState> {
    let mut deg: BTreeMap<u32, u32> = BTreeMap::new();
    for &v in &vars {
        for &c in g.var_neighbors(v as usize) {
            *deg.entry(c).or_insert(0) += 1;
        }
    }
    // Degrees only grow as cycles join, so a violation here is final.
    if deg.values().any(|&d| d > 2) {
        return None;
    }
    let b = deg.values().filter(|&&d| d % 2 == 1).count();
    Some(UnionState {
        vars,
        checks,
        deg,
        cycles,
        b,
    })
}

fn candidate_of(state: &UnionState) -> EtsCandidate {
    EtsCandidate {
        vars: state.vars.clone(),
        union_checks: state.checks.clone(),
        boundary: state
            .deg
            .iter()
            .filter(|&(_, &d)| d % 2 == 1)
            .map(|(&c, _)| c)
            .collect(),
        stage: state.cycles.len(),
        cycles: state.cycles.clone(),
    }
}

/// Breadth-first union growth over the cycle list. Stage-1 candidates are
/// single cycles; each later stage joins one more cycle sharing at least
/// one node with the current union. States are deduplicated by their
/// (variable, check) node sets, so each reachable union is reported once,
/// at its smallest stage. Unions whose check degrees exceed 2 are dropped
/// permanently since degrees never shrink.
pub fn grow_ets(g: &TannerGraph, cycles: &[Cycle8], cfg: &GrowConfig) -> Vec<EtsCandidate> {
    let mut var_cycles: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut check_cycles: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, cyc) in cycles.iter().enumerate() {
        for v in cyc.vars() {
            var_cycles.entry(v).or_default().push(i);
        }
        for c in cyc.checks() {
            check_cycles.entry(c).or_default().push(i);
        }
    }
    let mut visited: HashSet<(Vec<u32>, Vec<u32>)> = HashSet::new();
    let mut out = Vec::new();
    let mut frontier: Vec<UnionState> = Vec::new();
    for (i, cyc) in cycles.iter().enumerate() {
        let mut vars = cyc.vars().to_vec();
        let mut checks = cyc.checks().to_vec();
        vars.sort_unstable();
        checks.sort_unstable();
        let key = (vars.clone(), checks.clone());
        if visited.contains(&key) {
            continue;
        }
        visited.insert(key);
        if let Some(state) = state_from_vars(g, vars, checks, vec![i]) {
            out.push(candidate_of(&state));
            frontier.push(state);
        }
    }
    for _stage in 2..=cfg.max_stage {
        frontier.sort_by(|x, y| {
            (x.b, x.vars.len(), &x.vars, &x.checks).cmp(&(y.b, y.vars.len(), &y.vars, &y.checks))
        });
        frontier.truncate(cfg.frontier_cap);
        let mut next = Vec::new();
        for state in &frontier {
            let mut adjacent: BTreeSet<usize> = BTreeSet::new();
            for &v in &state.vars {
                if let Some(list) = var_cycles.get(&v) {
                    adjacent.extend(list.iter().copied());
                }
            }
            for &c in &state.checks {
                if let Some(list) = check_cycles.get(&c) {
                    adjacent.extend(list.iter().copied());
                }
            }
            for j in adjacent {
                if state.cycles.contains(&j) {
                    continue;
                }
                let vars = merged(&state.vars, &cycles[j].vars());
                let checks = merged(&state.checks, &cycles[j].checks());
                let key = (vars.clone(), checks.clone());
                if visited.contains(&key) {
                    continue;
                }
                visited.insert(key);
                let mut chain = state.cycles.clone();
                chain.push(j);
                if let Some(new_state) = state_from_vars(g, vars, checks, chain) {
                    out.push(candidate_of(&new_state));
                    next.push(new_state);
                }
            }
        }
        frontier = next;
    }
    out.sort_by(|x, y| {
        (x.vars.len(), x.boundary.len(), &x.vars).cmp(&(y.vars.len(), y.boundary.len(), &y.vars))
    });
    out
}

#[derive(Clone, Debug)]
pub struct EtsConfig {
    pub max_stage: usize,
    pub cycle_budget: usize,
    pub frontier_cap: usize,
    /// Cap on emitted symmetric differences per boundary key.
    pub pair_cap: usize,
}

impl Default for EtsConfig {
    fn default() -> Self {
        EtsConfig {
            max_stage: 5,
            cycle_budget: 20_000,
            frontier_cap: 4096,
            pair_cap: 64,
        }
    }
}

/// A kernel vector extracted from the candidate set, with its origin.
pub struct EtsFind {
    pub vector: Gf2Vector,
    /// Cycles used: the candidate's stage, or the two stages summed for a
    /// paired emission.
    pub stage: usize,
    /// Type of the originating candidate(s).
    pub a: usize,
    pub b: usize,
    pub paired: bool,
}

/// Kernel vectors of `h` from boundary-free candidates and from symmetric
/// differences of boundary-matched two-check candidates.
pub fn ets_kernel_vectors(h: &Gf2Matrix, cfg: &EtsConfig) -> Result<Vec<EtsFind>, EtsError> {
    let g = TannerGraph::from_checks(h);
    let cycles = enumerate_8cycles(&g, cfg.cycle_budget)?;
    let grown = grow_ets(
        &g,
        &cycles,
        &GrowConfig {
            max_stage: cfg.max_stage,
            frontier_cap: cfg.frontier_cap,
        },
    );
    let n = h.cols();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut out = Vec::new();
    let mut push = |support: Vec<usize>, stage: usize, a: usize, b: usize, paired: bool| {
        if support.is_empty() || !seen.insert(support.clone()) {
            return;
        }
        let vector = Gf2Vector::from_support(n, &support).expect("sorted in-range support");
        debug_assert!(h.mat_vec(&vector).is_zero());
        out.push(EtsFind {
            vector,
            stage,
            a,
            b,
            paired,
        });
    };
    let mut pairs: BTreeMap<(u32, u32), Vec<&EtsCandidate>> = BTreeMap::new();
    for cand in &grown {
        match cand.boundary.as_slice() {
            [] => push(
                cand.vars.iter().map(|&v| v as usize).collect(),
                cand.stage,
                cand.a(),
                0,
                false,
            ),
            &[c1, c2] => pairs.entry((c1, c2)).or_default().push(cand),
            _ => {}
        }
    }
    for group in pairs.values() {
        let mut emitted = 0usize;
        'outer: for i in 0..group.len() {
            for j in i + 1..group.len() {
                if emitted == cfg.pair_cap {
                    break 'outer;
                }
                let mut diff: Vec<usize> = Vec::new();
                let (s1, s2) = (&group[i].vars, &group[j].vars);
                let in_both: HashSet<u32> = s1.iter().filter(|v| s2.contains(v)).copied().collect();
                for &v in s1.iter().chain(s2.iter()) {
                    if !in_both.contains(&v) {
                        diff.push(v as usize);
                    }
                }
                diff.sort_unstable();
                if diff.is_empty() {
                    continue;
                }
                emitted += 1;
                push(
                    diff.clone(),
                    group[i].stage + group[j].stage,
                    diff.len(),
                    0,
                    true,
                );
            }
        }
    }
    out.sort_by(|x, y| {
        (x.vector.weight(), x.vector.support()).cmp(&(y.vector.weight(), y.vector.support()))
    });
    Ok(out)
}

/// Runs the trapping-set extraction on the selected side's check graph and
/// certifies every emitted kernel vector. X-side witnesses live in the
/// H_Z graph and vice versa.
pub fn ets_witnesses(
    code: &CssCode,
    side: Side,
    cfg: &EtsConfig,
) -> Result<Vec<(Witness, Certificate)>, EtsError> {
    let h = match side {
        Side::X => &code.h_z,
        Side::Z => &code.h_x,
    };
    let finds = ets_kernel_vectors(h, cfg)?;
    let mut out = Vec::new();
    for find in finds {
        let Ok(cert) = certify(code, side, &find.vector) else {
            continue;
        };
        if !cert.accepted() {
            continue;
        }
        let mut params = MethodParams::new();
        params.insert("stage".into(), find.stage.into());
        params.insert("type".into(), serde_json::json!([find.a, find.b]));
        if find.paired {
            params.insert("paired".into(), true.into());
        }
        let witness = Witness::from_vector(&code.spec.id, side, Method::Ets, params, &find.vector)
            .expect("nonzero by construction");
        out.push((witness, cert));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::girth;
    use crate::spec::CodeSpec;

    /// Girth-8 toy: all-translation maps on P=6 with difference structure
    /// ruling out 4- and 6-cycles in both graphs.
    fn ets_toy() -> CssCode {
        let spec = CodeSpec::new("TE", 6, 2, 4, &[(1, 1), (1, 2)], &[(1, 3), (1, 5)]).unwrap();
        CssCode::build(&spec).unwrap()
    }

    fn eight_cycle_graph() -> Gf2Matrix {
        // Four checks in a single 8-cycle with four variables.
        let mut h = Gf2Matrix::zeros(4, 4);
        for i in 0..4 {
            h.set(i, i, true);
            h.set(i, (i + 1) % 4, true);
        }
        h
    }

    #[test]
    fn single_cycle_graph_yields_one_cycle() {
        let h = eight_cycle_graph();
        let g = TannerGraph::from_checks(&h);
        assert_eq!(g.girth().finite(), Some(8));
        let cycles = enumerate_8cycles(&g, 1000).unwrap();
        assert_eq!(cycles.len(), 1);
        let grown = grow_ets(&g, &cycles, &GrowConfig::default());
        assert_eq!(grown.len(), 1);
        assert_eq!((grown[0].a(), grown[0].b()), (4, 0));
        assert_eq!(grown[0].stage, 1);
    }

    #[test]
    fn short_girth_is_refused() {
        // Two variables sharing two checks: a 4-cycle.
        let mut h = Gf2Matrix::zeros(2, 2);
        h.set(0, 0, true);
        h.set(0, 1, true);
        h.set(1, 0, true);
        h.set(1, 1, true);
        let g = TannerGraph::from_checks(&h);
        assert_eq!(
            enumerate_8cycles(&g, 10).unwrap_err(),
            EtsError::GirthTooSmall(4)
        );
    }

    #[test]
    fn graph_girth_matches_matrix_girth() {
        let code = ets_toy();
        for h in [&code.h_x, &code.h_z] {
            let g = TannerGraph::from_checks(h);
            assert_eq!(g.girth(), girth(h));
        }
        let h = eight_cycle_graph();
        assert_eq!(TannerGraph::from_checks(&h).girth(), girth(&h));
    }

    /// Depth-first oracle: enumerate all simple 8-cycles by walking
    /// alternating paths from every variable and canonicalizing.
    fn dfs_8cycles(g: &TannerGraph) -> BTreeSet<[u32; 8]> {
        let mut found = BTreeSet::new();
        for v0 in 0..g.vars() as u32 {
            let mut path = vec![v0];
            dfs_walk(g, v0, &mut path, &mut found);
        }
        found
    }

    fn dfs_walk(g: &TannerGraph, v0: u32, path: &mut Vec<u32>, found: &mut BTreeSet<[u32; 8]>) {
        let last = *path.last().unwrap();
        let on_var = path.len() % 2 == 1;
        let neighbors: &[u32] = if on_var {
            g.var_neighbors(last as usize)
        } else {
            g.check_neighbors(last as usize)
        };
        for &next in neighbors {
            if path.len() == 8 {
                if next == v0 {
                    let mut seq: [u32; 8] = path.clone().try_into().unwrap();
                    canonicalize(&mut seq);
                    found.insert(seq);
                }
                continue;
            }
            // Node classes alternate, so id collisions across classes are
            // fine; only same-class revisits must be excluded.
            let revisit = path
                .iter()
                .enumerate()
                .any(|(i, &p)| p == next && i % 2 == path.len() % 2);
            if revisit {
                continue;
            }
            path.push(next);
            dfs_walk(g, v0, path, found);
            path.pop();
        }
    }

    fn canonicalize(seq: &mut [u32; 8]) {
        let vars = [seq[0], seq[2], seq[4], seq[6]];
        let min_pos = (0..4).min_by_key(|&i| vars[i]).unwrap() * 2;
        let rotated: Vec<u32> = (0..8).map(|i| seq[(min_pos + i) % 8]).collect();
        let reflected: Vec<u32> = (0..8).map(|i| rotated[(8 - i) % 8]).collect();
        let best = if rotated[2] < reflected[2] {
            rotated
        } else {
            reflected
        };
        seq.copy_from_slice(&best);
    }

    #[test]
    fn cycle_enumeration_matches_dfs_oracle() {
        let code = ets_toy();
        let g = TannerGraph::from_checks(&code.h_z);
        let cycles = enumerate_8cycles(&g, usize::MAX).unwrap();
        let keys: BTreeSet<[u32; 8]> = cycles.iter().map(|c| c.seq).collect();
        assert_eq!(keys.len(), cycles.len(), "no duplicate cycles");
        assert_eq!(keys, dfs_8cycles(&g));
        assert!(!cycles.is_empty());
    }

    #[test]
    fn enumeration_is_deterministic_and_budgeted() {
        let code = ets_toy();
        let g = TannerGraph::from_checks(&code.h_z);
        let all = enumerate_8cycles(&g, usize::MAX).unwrap();
        let again = enumerate_8cycles(&g, usize::MAX).unwrap();
        assert_eq!(all.len(), again.len());
        assert!(all.iter().zip(&again).all(|(x, y)| x == y));
        let prefix = enumerate_8cycles(&g, 3).unwrap();
        assert_eq!(prefix.as_slice(), &all[..3]);
    }

    #[test]
    fn boundary_equals_check_vector() {
        use rand::Rng;
        use rand::SeedableRng;
        let code = ets_toy();
        let g = TannerGraph::from_checks(&code.h_z);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let mut vars = Vec::new();
            for v in 0..code.n {
                if rng.gen_bool(0.5) {
                    vars.push(v as u32);
                }
            }
            let b = boundary(&g, &vars);
            let indicator = Gf2Vector::from_support(
                code.n,
                &vars.iter().map(|&v| v as usize).collect::<Vec<_>>(),
            )
            .unwrap();
            let syndrome = code.h_z.mat_vec(&indicator);
            assert_eq!(
                syndrome.support(),
                b.iter().map(|&c| c as usize).collect::<Vec<_>>()
            );
        }
    }

    /// Subset-enumeration oracle: a variable set is a valid candidate iff
    /// its check degrees are all 1 or 2 and some connected component of
    /// the 8-cycles lying inside it covers it exactly.
    fn oracle_candidates(g: &TannerGraph, cycles: &[Cycle8], max_a: usize) -> BTreeSet<Vec<u32>> {
        let n = g.vars();
        assert!(n <= 24);
        let masks: Vec<u32> = cycles
            .iter()
            .map(|c| c.vars().iter().fold(0u32, |m, &v| m | 1 << v))
            .collect();
        let mut out = BTreeSet::new();
        for subset in 1u32..1 << n {
            if (subset.count_ones() as usize) > max_a {
                continue;
            }
            let vars: Vec<u32> = (0..n as u32).filter(|&v| subset >> v & 1 == 1).collect();
            let mut deg: BTreeMap<u32, u32> = BTreeMap::new();
            for &v in &vars {
                for &c in g.var_neighbors(v as usize) {
                    *deg.entry(c).or_insert(0) += 1;
                }
            }
            if deg.values().any(|&d| d > 2) {
                continue;
            }
            let inside: Vec<usize> = (0..cycles.len())
                .filter(|&i| masks[i] & !subset == 0)
                .collect();
            if inside.is_empty() {
                continue;
            }
            // Connected components under shared-node overlap.
            let node_key = |c: &Cycle8| -> BTreeSet<(bool, u32)> {
                c.vars()
                    .iter()
                    .map(|&v| (true, v))
                    .chain(c.checks().iter().map(|&ch| (false, ch)))
                    .collect()
            };
            let keys: Vec<BTreeSet<(bool, u32)>> =
                inside.iter().map(|&i| node_key(&cycles[i])).collect();
            let mut comp: Vec<usize> = (0..inside.len()).collect();
            loop {
                let mut changed = false;
                for i in 0..inside.len() {
                    for j in i + 1..inside.len() {
                        if comp[i] != comp[j] && !keys[i].is_disjoint(&keys[j]) {
                            let (from, to) = (comp[i].max(comp[j]), comp[i].min(comp[j]));
                            for c in comp.iter_mut() {
                                if *c == from {
                                    *c = to;
                                    changed = true;
                                }
                            }
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let mut covered = false;
            let components: BTreeSet<usize> = comp.iter().copied().collect();
            for root in components {
                let mask = (0..inside.len())
                    .filter(|&i| comp[i] == root)
                    .fold(0u32, |m, i| m | masks[inside[i]]);
                if mask == subset {
                    covered = true;
                    break;
                }
            }
            if covered {
                out.insert(vars);
            }
        }
        out
    }

    #[test]
    fn growth_matches_subset_enumeration() {
        let code = ets_toy();
        let g = TannerGraph::from_checks(&code.h_z);
        let cycles = enumerate_8cycles(&g, usize::MAX).unwrap();
        let cfg = GrowConfig {
            max_stage: 12,
            frontier_cap: usize::MAX,
        };
        let grown = grow_ets(&g, &cycles, &cfg);
        let grown_sets: BTreeSet<Vec<u32>> = grown
            .iter()
            .filter(|c| c.a() <= 8)
            .map(|c| c.vars.clone())
            .collect();
        assert_eq!(grown_sets, oracle_candidates(&g, &cycles, 8));
        assert!(!grown_sets.is_empty());
    }

    #[test]
    fn growth_replays_observe_overlap_rule() {
        let code = ets_toy();
        let g = TannerGraph::from_checks(&code.h_z);
        let cycles = enumerate_8cycles(&g, usize::MAX).unwrap();
        let grown = grow_ets(
            &g,
            &cycles,
            &GrowConfig {
                max_stage: 4,
                frontier_cap: usize::MAX,
            },
        );
        for cand in &grown {
            assert_eq!(cand.stage, cand.cycles.len());
            let mut nodes: BTreeSet<(bool, u32)> = BTreeSet::new();
            for (step, &i) in cand.cycles.iter().enumerate() {
                let cyc = &cycles[i];
                let cyc_nodes: BTreeSet<(bool, u32)> = cyc
                    .vars()
                    .iter()
                    .map(|&v| (true, v))
                    .chain(cyc.checks().iter().map(|&c| (false, c)))
                    .collect();
                if step > 0 {
                    assert!(
                        !nodes.is_disjoint(&cyc_nodes),
                        "joined cycle must overlap the union"
                    );
                }
                nodes.extend(cyc_nodes);
            }
            let vars: Vec<u32> = nodes
                .iter()
                .filter(|&&(is_var, _)| is_var)
                .map(|&(_, v)| v)
                .collect();
            assert_eq!(vars, cand.vars);
        }
    }

    #[test]
    fn extracted_vectors_are_kernel_members() {
        let code = ets_toy();
        let cfg = EtsConfig {
            max_stage: 8,
            cycle_budget: usize::MAX,
            frontier_cap: usize::MAX,
            pair_cap: 64,
        };
        let finds = ets_kernel_vectors(&code.h_z, &cfg).unwrap();
        assert!(!finds.is_empty());
        let mut saw_pair = false;
        for find in &finds {
            assert!(code.h_z.mat_vec(&find.vector).is_zero());
            saw_pair |= find.paired;
        }
        // The toy's column weight is 2, so candidates exist with two-check
        // boundaries and the pairing path gets exercised.
        let grown = grow_ets(
            &TannerGraph::from_checks(&code.h_z),
            &enumerate_8cycles(&TannerGraph::from_checks(&code.h_z), usize::MAX).unwrap(),
            &GrowConfig {
                max_stage: 8,
                frontier_cap: usize::MAX,
            },
        );
        if grown.iter().filter(|c| c.b() == 2).count() >= 2 {
            assert!(saw_pair || finds.len() > grown.iter().filter(|c| c.b() == 0).count());
        }
    }

    #[test]
    #[ignore = "full-scale run, ~minutes"]
    fn first_catalog_code_reaches_weight_ten() {
        let catalog = crate::spec::Catalog::load(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/data/catalog.toml"
        ))
        .unwrap();
        let code = CssCode::build(catalog.get("C1").unwrap()).unwrap();
        let cfg = EtsConfig::default();
        let found = ets_witnesses(&code, Side::X, &cfg).unwrap();
        assert!(!found.is_empty());
        let best = &found[0].0;
        let stage = best.method_params["stage"].as_u64().unwrap();
        eprintln!(
            "best ets witness: weight {} stage {} (of {} certified)",
            best.weight,
            stage,
            found.len()
        );
        assert_eq!(best.weight, 10);
        assert_eq!(stage, 4);
    }

    #[test]
    fn witnesses_certify_on_the_toy() {
        let code = ets_toy();
        let cfg = EtsConfig {
            max_stage: 8,
            cycle_budget: usize::MAX,
            frontier_cap: usize::MAX,
            pair_cap: 64,
        };
        let found = ets_witnesses(&code, Side::X, &cfg).unwrap();
        for (w, cert) in &found {
            assert!(cert.accepted());
            assert_eq!(w.method, Method::Ets);
            let v = w.vector(code.n).unwrap();
            assert!(code.h_z.mat_vec(&v).is_zero());
            assert!(!code.h_x.in_row_space(&v));
            assert!(w.method_params.contains_key("stage"));
        }
    }
}
