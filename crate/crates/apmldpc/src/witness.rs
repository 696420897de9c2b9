//! Witness records, certification, and the bound ledger.
//!
//! A witness for side X is a vector claimed to lie in Ker(H_Z) but outside
//! Row(H_X); its weight is then an upper bound on d_X. Certification
//! recomputes both facts from the code's matrices, plus membership in the
//! latent row space as a classification aid. Sides swap for Z.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::CssCode;
use crate::gf2::Gf2Vector;

pub type MethodParams = serde_json::Map<String, serde_json::Value>;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Serialize, Deserialize)]
pub enum Side {
    X,
    Z,
}

impl Side {
    #[must_use]
    pub fn other(self) -> Side {
        match self {
            Side::X => Side::Z,
            Side::Z => Side::X,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::X => write!(f, "X"),
            Side::Z => write!(f, "Z"),
        }
    }
}

impl std::str::FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "X" | "x" => Ok(Side::X),
            "Z" | "z" => Ok(Side::Z),
            other => Err(format!("unknown side {other:?}")),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lat,
    Blk,
    Fib,
    Crt,
    Dir,
    Ets,
    Dec,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Lat,
        Method::Blk,
        Method::Fib,
        Method::Crt,
        Method::Dir,
        Method::Ets,
        Method::Dec,
    ];

    #[must_use]
    pub fn name(self) -> &'static str {
        match self {
            Method::Lat => "lat",
            Method::Blk => "blk",
            Method::Fib => "fib",
            Method::Crt => "crt",
            Method::Dir => "dir",
            Method::Ets => "ets",
            Method::Dec => "dec",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("support must be strictly increasing")]
    UnsortedSupport,
    #[error("support index {index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("witness vector is zero")]
    ZeroVector,
    #[error("vector length {got} does not match n={expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("rejected witness cannot be registered")]
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub code_id: String,
    pub side: Side,
    pub method: Method,
    pub method_params: MethodParams,
    pub support: Vec<usize>,
    pub weight: usize,
}

impl Witness {
    /// Builds a witness from a nonzero vector of the code's block length.
    pub fn from_vector(
        code_id: impl Into<String>,
        side: Side,
        method: Method,
        method_params: MethodParams,
        v: &Gf2Vector,
    ) -> Result<Witness, WitnessError> {
        if v.is_zero() {
            return Err(WitnessError::ZeroVector);
        }
        Ok(Witness {
            code_id: code_id.into(),
            side,
            method,
            method_params,
            support: v.support(),
            weight: v.weight(),
        })
    }

    pub fn vector(&self, n: usize) -> Result<Gf2Vector, WitnessError> {
        for pair in self.support.windows(2) {
            if pair[0] >= pair[1] {
                return Err(WitnessError::UnsortedSupport);
            }
        }
        if let Some(&last) = self.support.last() {
            if last >= n {
                return Err(WitnessError::IndexOutOfRange { index: last, n });
            }
        }
        Gf2Vector::from_support(n, &self.support).map_err(|_| WitnessError::UnsortedSupport)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kernel_ok: bool,
    pub non_stabilizer: bool,
    pub non_latent: Option<bool>,
    pub rank_base: usize,
    pub rank_aug: usize,
}

impl Certificate {
    /// A witness is accepted exactly when it commutes with the opposite
    /// checks and lies outside the stabilizer row space.
    #[must_use]
    pub fn accepted(&self) -> bool {
        self.kernel_ok && self.non_stabilizer
    }

    #[must_use]
    pub fn verdict(&self) -> &'static str {
        if self.accepted() {
            "accepted"
        } else {
            "rejected"
        }
    }
}

/// Recomputes the certificate for `v` as a side-`side` witness of `code`.
pub fn certify(code: &CssCode, side: Side, v: &Gf2Vector) -> Result<Certificate, WitnessError> {
    if v.len() != code.n {
        return Err(WitnessError::LengthMismatch {
            expected: code.n,
            got: v.len(),
        });
    }
    if v.is_zero() {
        return Err(WitnessError::ZeroVector);
    }
    let (kernel_of, row_space, latent) = match side {
        Side::X => (&code.h_z, &code.h_x, &code.lat_x),
        Side::Z => (&code.h_x, &code.h_z, &code.lat_z),
    };
    let kernel_ok = kernel_of.mat_vec(v).is_zero();
    let profile = row_space.profile();
    let non_stabilizer = !profile.contains(v);
    let non_latent = if latent.rows() == 0 {
        None
    } else {
        Some(!latent.in_row_space(v))
    };
    let rank_base = profile.rank();
    Ok(Certificate {
        kernel_ok,
        non_stabilizer,
        non_latent,
        rank_base,
        rank_aug: rank_base + usize::from(non_stabilizer),
    })
}

/// Whether an accepted witness lies in the latent row space of its side.
#[must_use]
pub fn classify_latent(code: &CssCode, side: Side, v: &Gf2Vector) -> bool {
    let latent = match side {
        Side::X => &code.lat_x,
        Side::Z => &code.lat_z,
    };
    latent.rows() > 0 && latent.in_row_space(v)
}

#[derive(Clone, Debug)]
pub struct LedgerEntry {
    pub witness: Witness,
    pub certificate: Certificate,
    pub sequence: u64,
}

/// Best certified weight per (code, side, method). Ties keep the earliest
/// registered witness, so replaying submissions in order is idempotent.
#[derive(Default, Clone, Debug)]
pub struct BoundLedger {
    entries: BTreeMap<(String, Side, Method), LedgerEntry>,
    next_sequence: u64,
}

impl BoundLedger {
    #[must_use]
    pub fn new() -> Self {
        BoundLedger::default()
    }

    /// Registers an accepted witness; returns true when it improves the
    /// retained bound for its (code, side, method) slot.
    pub fn register(
        &mut self,
        witness: Witness,
        certificate: Certificate,
    ) -> Result<bool, WitnessError> {
        if !certificate.accepted() {
            return Err(WitnessError::Rejected);
        }
        let sequence = self.next_sequence;
        self.next_sequence += 1;
        let key = (witness.code_id.clone(), witness.side, witness.method);
        match self.entries.get(&key) {
            Some(existing) if existing.witness.weight <= witness.weight => Ok(false),
            _ => {
                self.entries.insert(
                    key,
                    LedgerEntry {
                        witness,
                        certificate,
                        sequence,
                    },
                );
                Ok(true)
            }
        }
    }

    #[must_use]
    pub fn get(&self, code_id: &str, side: Side, method: Method) -> Option<&LedgerEntry> {
        self.entries
            .get(&(code_id.to_string(), side, method))
    }

    /// Smallest certified weight over all sides and methods of a code.
    #[must_use]
    pub fn best_for_code(&self, code_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .filter(|((id, _, _), _)| id == code_id)
            .map(|(_, e)| e.witness.weight)
            .min()
    }

    #[must_use]
    pub fn best_for_side(&self, code_id: &str, side: Side) -> Option<usize> {
        self.entries
            .iter()
            .filter(|((id, s, _), _)| id == code_id && *s == side)
            .map(|(_, e)| e.witness.weight)
            .min()
    }

    pub fn entries(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.values()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
