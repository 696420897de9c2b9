//! CSS code construction from affine permutation data.
//!
//! The parent template has L/2 block rows and L block columns of P x P
//! permutation matrices: X-side block (i, j) is F_{j-i} on the first half
//! and G_{j-i} on the second, Z-side block (i, j) is G_{i-j}^T on the first
//! half and F_{i-j}^T on the second, with block indices mod L/2. The first
//! J block rows are the active checks; the remaining L/2 - J are latent.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::affine::AffineMap;
use crate::gf2::Gf2Matrix;
use crate::spec::CodeSpec;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("{id}: active orthogonality fails at residues {residues:?}")]
    NotOrthogonal { id: String, residues: Vec<usize> },
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    #[must_use]
    pub fn finite(&self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(*g),
            Girth::Infinite => None,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// (a - b) mod n for block indices already below n.
fn sub_mod(a: usize, b: usize, n: usize) -> usize {
    (a + n - b % n) % n
}

/// Writes the permutation block for `map` at block position (bi, bj),
/// with the 1 of local row t in local column map(t).
fn write_block(m: &mut Gf2Matrix, p: usize, bi: usize, bj: usize, map: &AffineMap) {
    for t in 0..p {
        m.flip(bi * p + t, bj * p + map.apply(t as u64) as usize);
    }
}

fn x_side_map(spec: &CodeSpec, i: usize, j: usize) -> AffineMap {
    let half = spec.half();
    if j < half {
        spec.f[sub_mod(j, i, half)]
    } else {
        spec.g[sub_mod(j - half, i, half)]
    }
}

fn z_side_map(spec: &CodeSpec, i: usize, j: usize) -> AffineMap {
    let half = spec.half();
    if j < half {
        spec.g[sub_mod(i, j, half)].transpose()
    } else {
        spec.f[sub_mod(i, j - half, half)].transpose()
    }
}

fn build_rows(spec: &CodeSpec, block_rows: std::ops::Range<usize>, x_side: bool) -> Gf2Matrix {
    let p = spec.p as usize;
    let mut m = Gf2Matrix::zeros(block_rows.len() * p, spec.l * p);
    for (out_i, i) in block_rows.enumerate() {
        for j in 0..spec.l {
            let map = if x_side {
                x_side_map(spec, i, j)
            } else {
                z_side_map(spec, i, j)
            };
            write_block(&mut m, p, out_i, j, &map);
        }
    }
    m
}

/// Active checks: the first J block rows of each parent.
#[must_use]
pub fn active_matrices(spec: &CodeSpec) -> (Gf2Matrix, Gf2Matrix) {
    (
        build_rows(spec, 0..spec.j, true),
        build_rows(spec, 0..spec.j, false),
    )
}

/// Latent checks: parent block rows J .. L/2.
#[must_use]
pub fn latent_matrices(spec: &CodeSpec) -> (Gf2Matrix, Gf2Matrix) {
    (
        build_rows(spec, spec.j..spec.half(), true),
        build_rows(spec, spec.j..spec.half(), false),
    )
}

/// Full parents, active rows first.
#[must_use]
pub fn parent_matrices(spec: &CodeSpec) -> (Gf2Matrix, Gf2Matrix) {
    (
        build_rows(spec, 0..spec.half(), true),
        build_rows(spec, 0..spec.half(), false),
    )
}

/// The P x P orthogonality defect at block residue r: the GF(2) sum over u
/// of F_u G_{r-u} + G_{r-u} F_u. Block (i, k) of the parent product
/// Hx * Hz^T equals this sum at r = k - i mod L/2.
#[must_use]
pub fn psi(spec: &CodeSpec, r: usize) -> Gf2Matrix {
    let p = spec.p as usize;
    let half = spec.half();
    let mut m = Gf2Matrix::zeros(p, p);
    for u in 0..half {
        let v = sub_mod(r % half, u, half);
        // Matrix product F_u G_v acts on row vectors as g_v after f_u.
        for map in [spec.g[v].compose(&spec.f[u]), spec.f[u].compose(&spec.g[v])] {
            let map = map.expect("maps share the spec modulus");
            for t in 0..p {
                m.flip(t, map.apply(t as u64) as usize);
            }
        }
    }
    m
}

/// Residues k - i mod L/2 realized by active block-row pairs; orthogonality
/// of the active checks is equivalent to psi vanishing on this set.
#[must_use]
pub fn constrained_residues(spec: &CodeSpec) -> BTreeSet<usize> {
    let half = spec.half();
    let mut set = BTreeSet::new();
    for i in 0..spec.j {
        for k in 0..spec.j {
            set.insert((k + half - i) % half);
        }
    }
    set
}

#[derive(Clone, Debug)]
pub struct OrthogonalityReport {
    /// Per residue r in 0..L/2: whether r is constrained and whether psi_r = 0.
    pub residues: Vec<(usize, bool, bool)>,
}

impl OrthogonalityReport {
    #[must_use]
    pub fn passes(&self) -> bool {
        self.residues
            .iter()
            .all(|&(_, constrained, zero)| !constrained || zero)
    }

    #[must_use]
    pub fn failing(&self) -> Vec<usize> {
        self.residues
            .iter()
            .filter(|&&(_, constrained, zero)| constrained && !zero)
            .map(|&(r, _, _)| r)
            .collect()
    }
}

#[must_use]
pub fn check_active_orthogonality(spec: &CodeSpec) -> OrthogonalityReport {
    let constrained = constrained_residues(spec);
    let residues = (0..spec.half())
        .map(|r| (r, constrained.contains(&r), psi(spec, r).is_zero()))
        .collect();
    OrthogonalityReport { residues }
}

/// Girth of the bipartite adjacency graph of `h` (columns are variable
/// nodes, rows are check nodes). BFS from every variable node with an
/// early cutoff at half the best cycle length found so far.
#[must_use]
pub fn girth(h: &Gf2Matrix) -> Girth {
    let n_vars = h.cols();
    let n_checks = h.rows();
    let total = n_vars + n_checks;
    let mut var_adj: Vec<Vec<u32>> = vec![Vec::new(); n_vars];
    let mut check_adj: Vec<Vec<u32>> = vec![Vec::new(); n_checks];
    for r in 0..n_checks {
        for c in h.row_support(r) {
            var_adj[c].push(r as u32);
            check_adj[r].push(c as u32);
        }
    }
    // Node ids: variables 0..n_vars, checks n_vars..total.
    let adj = |node: usize| -> &[u32] {
        if node < n_vars {
            &var_adj[node]
        } else {
            &check_adj[node - n_vars]
        }
    };
    let offset = |node: usize, nb: u32| -> usize {
        if node < n_vars {
            n_vars + nb as usize
        } else {
            nb as usize
        }
    };
    let mut best = usize::MAX;
    let mut dist = vec![u32::MAX; total];
    let mut parent = vec![u32::MAX; total];
    let mut queue = Vec::with_capacity(total);
    let mut touched = Vec::with_capacity(total);
    for start in 0..n_vars {
        for &node in &touched {
            dist[node as usize] = u32::MAX;
            parent[node as usize] = u32::MAX;
        }
        touched.clear();
        queue.clear();
        dist[start] = 0;
        queue.push(start as u32);
        touched.push(start as u32);
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            let du = dist[u] as usize;
            if best != usize::MAX && du >= best.div_ceil(2) {
                continue;
            }
            for &nb in adj(u) {
                let w = offset(u, nb);
                if w as u32 == parent[u] {
                    continue;
                }
                if dist[w] == u32::MAX {
                    dist[w] = du as u32 + 1;
                    parent[w] = u as u32;
                    queue.push(w as u32);
                    touched.push(w as u32);
                } else {
                    let cycle = du + dist[w] as usize + 1;
                    if cycle < best {
                        best = cycle;
                    }
                }
            }
        }
    }
    if best == usize::MAX {
        Girth::Infinite
    } else {
        Girth::Finite(best)
    }
}

/// A built CSS code: active and latent check matrices, ranks, dimension,
/// and the girths of the two active Tanner graphs.
pub struct CssCode {
    pub spec: CodeSpec,
    pub h_x: Gf2Matrix,
    pub h_z: Gf2Matrix,
    pub lat_x: Gf2Matrix,
    pub lat_z: Gf2Matrix,
    pub n: usize,
    pub rank_x: usize,
    pub rank_z: usize,
    pub k: usize,
    pub girth_x: Girth,
    pub girth_z: Girth,
}

impl CssCode {
    /// Builds the code, failing if the active checks do not commute. A
    /// girth below 8 is reported via `girth_warning`, not an error.
    pub fn build(spec: &CodeSpec) -> Result<CssCode, BuildError> {
        let report = check_active_orthogonality(spec);
        if !report.passes() {
            return Err(BuildError::NotOrthogonal {
                id: spec.id.clone(),
                residues: report.failing(),
            });
        }
        let (h_x, h_z) = active_matrices(spec);
        let (lat_x, lat_z) = latent_matrices(spec);
        debug_assert!(h_x.mat_mul(&h_z.transposed()).is_zero());
        let n = spec.n();
        let rank_x = h_x.rank();
        let rank_z = h_z.rank();
        let k = n - rank_x - rank_z;
        let girth_x = girth(&h_x);
        let girth_z = girth(&h_z);
        Ok(CssCode {
            spec: spec.clone(),
            h_x,
            h_z,
            lat_x,
            lat_z,
            n,
            rank_x,
            rank_z,
            k,
            girth_x,
            girth_z,
        })
    }

    #[must_use]
    pub fn girth_warning(&self) -> bool {
        self.girth_x.finite().is_some_and(|g| g < 8)
            || self.girth_z.finite().is_some_and(|g| g < 8)
    }
}

impl fmt::Debug for CssCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CssCode[{} n={} k={} girth=({}, {})]",
            self.spec.id, self.n, self.k, self.girth_x, self.girth_z
        )
    }
}
