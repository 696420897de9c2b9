//! Code specifications and the on-disk catalog format.
//!
//! A spec fixes the lift size P, the active block-row count J, the total
//! block-column count L (even, with L/2 parent block rows), and two lists
//! of L/2 affine maps that populate the parent template.

use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::affine::{AffineError, AffineMap};

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("spec {id}: L must be even and positive, got {l}")]
    OddL { id: String, l: usize },
    #[error("spec {id}: J must satisfy 1 <= J <= L/2, got {j}")]
    BadJ { id: String, j: usize },
    #[error("spec {id}: expected {expected} maps per family, got {got}")]
    WrongMapCount { id: String, expected: usize, got: usize },
    #[error("spec {id}: map {index} in {family}: {source}")]
    BadMap {
        id: String,
        family: char,
        index: usize,
        source: AffineError,
    },
    #[error("catalog parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("catalog read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate code id {0}")]
    DuplicateId(String),
    #[error("unknown code id {0}")]
    UnknownId(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub id: String,
    pub p: u64,
    pub j: usize,
    pub l: usize,
    pub f: Vec<AffineMap>,
    pub g: Vec<AffineMap>,
}

impl CodeSpec {
    pub fn new(
        id: impl Into<String>,
        p: u64,
        j: usize,
        l: usize,
        f_pairs: &[(u64, u64)],
        g_pairs: &[(u64, u64)],
    ) -> Result<Self, SpecError> {
        let id = id.into();
        if l == 0 || l % 2 != 0 {
            return Err(SpecError::OddL { id, l });
        }
        let half = l / 2;
        if j == 0 || j > half {
            return Err(SpecError::BadJ { id, j });
        }
        for (family, pairs) in [('f', f_pairs), ('g', g_pairs)] {
            if pairs.len() != half {
                return Err(SpecError::WrongMapCount {
                    id,
                    expected: half,
                    got: pairs.len(),
                });
            }
            let _ = family;
        }
        let build = |family: char, pairs: &[(u64, u64)]| -> Result<Vec<AffineMap>, SpecError> {
            pairs
                .iter()
                .enumerate()
                .map(|(index, &(a, b))| {
                    AffineMap::new(a, b, p).map_err(|source| SpecError::BadMap {
                        id: id.clone(),
                        family,
                        index,
                        source,
                    })
                })
                .collect()
        };
        let f = build('f', f_pairs)?;
        let g = build('g', g_pairs)?;
        Ok(CodeSpec { id, p, j, l, f, g })
    }

    #[must_use]
    pub fn half(&self) -> usize {
        self.l / 2
    }

    /// Latent block-row count L/2 - J.
    #[must_use]
    pub fn latent_blocks(&self) -> usize {
        self.half() - self.j
    }

    /// Block length n = L * P.
    #[must_use]
    pub fn n(&self) -> usize {
        self.l * self.p as usize
    }

    /// The spec with every map reduced mod q; requires q | P.
    pub fn quotient(&self, q: u64) -> Result<CodeSpec, AffineError> {
        let reduce = |maps: &[AffineMap]| -> Result<Vec<AffineMap>, AffineError> {
            maps.iter().map(|m| m.reduce_mod(q)).collect()
        };
        Ok(CodeSpec {
            id: self.id.clone(),
            p: q,
            j: self.j,
            l: self.l,
            f: reduce(&self.f)?,
            g: reduce(&self.g)?,
        })
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (P={}, J={}, L={})", self.id, self.p, self.j, self.l)
    }
}

#[derive(Deserialize)]
struct RawCatalog {
    #[serde(rename = "code")]
    codes: Vec<RawCode>,
}

#[derive(Deserialize)]
struct RawCode {
    id: String,
    p: u64,
    j: usize,
    l: usize,
    f: Vec<(u64, u64)>,
    g: Vec<(u64, u64)>,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    codes: Vec<CodeSpec>,
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Catalog, SpecError> {
        let raw: RawCatalog = toml::from_str(text)?;
        let mut codes = Vec::with_capacity(raw.codes.len());
        for rc in raw.codes {
            if codes.iter().any(|c: &CodeSpec| c.id == rc.id) {
                return Err(SpecError::DuplicateId(rc.id));
            }
            codes.push(CodeSpec::new(rc.id, rc.p, rc.j, rc.l, &rc.f, &rc.g)?);
        }
        Ok(Catalog { codes })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Catalog, SpecError> {
        Catalog::parse(&std::fs::read_to_string(path)?)
    }

    #[must_use]
    pub fn codes(&self) -> &[CodeSpec] {
        &self.codes
    }

    pub fn get(&self, id: &str) -> Result<&CodeSpec, SpecError> {
        self.codes
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| SpecError::UnknownId(id.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_catalog() {
        let text = r#"
            [[code]]
            id = "T"
            p = 6
            j = 1
            l = 4
            f = [[1, 2], [5, 0]]
            g = [[1, 3], [5, 3]]
        "#;
        let cat = Catalog::parse(text).unwrap();
        let spec = cat.get("T").unwrap();
        assert_eq!(spec.n(), 24);
        assert_eq!(spec.latent_blocks(), 1);
        assert!(cat.get("missing").is_err());
    }

    #[test]
    fn malformed_entry_reports_position() {
        let text = r#"
            [[code]]
            id = "T"
            p = 6
            j = 1
            l = 4
            f = [[1, 2], [5]]
            g = [[1, 3], [5, 3]]
        "#;
        let err = Catalog::parse(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "error should locate the fault: {msg}");
    }

    #[test]
    fn map_count_must_match_half() {
        let err = CodeSpec::new("T", 6, 1, 4, &[(1, 2)], &[(1, 3), (5, 3)]).unwrap_err();
        assert!(matches!(err, SpecError::WrongMapCount { .. }));
    }

    #[test]
    fn quotient_reduces_all_maps() {
        let spec = CodeSpec::new("T", 12, 1, 4, &[(5, 2), (7, 0)], &[(1, 3), (11, 3)]).unwrap();
        let q = spec.quotient(6).unwrap();
        assert_eq!(q.p, 6);
        assert_eq!(q.f[0], AffineMap::new(5, 2, 6).unwrap());
        assert_eq!(q.f[1], AffineMap::new(1, 0, 6).unwrap());
    }
}
