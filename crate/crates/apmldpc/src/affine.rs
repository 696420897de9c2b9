//! Affine permutations of Z/P and their permutation matrices.
//!
//! The map (a, b) sends t to a*t + b mod P and requires gcd(a, P) = 1. Its
//! P x P permutation matrix carries the 1 of row t in column a*t + b, so a
//! length-P row vector e_t maps to e_{a*t+b} under right multiplication.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::Gf2Matrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AffineError {
    #[error("modulus must be positive")]
    ZeroModulus,
    #[error("slope {a} is not invertible mod {modulus}")]
    NotInvertible { a: u64, modulus: u64 },
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("{q} does not divide modulus {modulus}")]
    NotADivisor { q: u64, modulus: u64 },
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Modular inverse by extended Euclid; `a` must be coprime to `m`.
fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u64
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AffineMap {
    a: u64,
    b: u64,
    modulus: u64,
}

impl AffineMap {
    pub fn new(a: u64, b: u64, modulus: u64) -> Result<Self, AffineError> {
        if modulus == 0 {
            return Err(AffineError::ZeroModulus);
        }
        let a = a % modulus;
        if gcd(a, modulus) != 1 {
            return Err(AffineError::NotInvertible { a, modulus });
        }
        Ok(AffineMap {
            a,
            b: b % modulus,
            modulus,
        })
    }

    pub fn identity(modulus: u64) -> Result<Self, AffineError> {
        AffineMap::new(1, 0, modulus)
    }

    #[must_use]
    pub fn a(&self) -> u64 {
        self.a
    }

    #[must_use]
    pub fn b(&self) -> u64 {
        self.b
    }

    #[must_use]
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[must_use]
    pub fn apply(&self, t: u64) -> u64 {
        (self.a * (t % self.modulus) + self.b) % self.modulus
    }

    /// `self` after `inner`: t -> self(inner(t)).
    pub fn compose(&self, inner: &AffineMap) -> Result<AffineMap, AffineError> {
        if self.modulus != inner.modulus {
            return Err(AffineError::ModulusMismatch(self.modulus, inner.modulus));
        }
        Ok(AffineMap {
            a: self.a * inner.a % self.modulus,
            b: (self.a * inner.b + self.b) % self.modulus,
            modulus: self.modulus,
        })
    }

    /// The map whose permutation matrix is the transpose of this one's,
    /// i.e. the compositional inverse (a^-1, -a^-1 b).
    #[must_use]
    pub fn transpose(&self) -> AffineMap {
        let a_inv = mod_inverse(self.a, self.modulus);
        AffineMap {
            a: a_inv,
            b: (self.modulus - a_inv * self.b % self.modulus) % self.modulus,
            modulus: self.modulus,
        }
    }

    /// Reduction mod a divisor q of the modulus; descends cosets t + qZ.
    pub fn reduce_mod(&self, q: u64) -> Result<AffineMap, AffineError> {
        if q == 0 || self.modulus % q != 0 {
            return Err(AffineError::NotADivisor { q, modulus: self.modulus });
        }
        Ok(AffineMap {
            a: self.a % q,
            b: self.b % q,
            modulus: q,
        })
    }

    /// Image list: entry t is self(t).
    #[must_use]
    pub fn permutation(&self) -> Vec<usize> {
        (0..self.modulus).map(|t| self.apply(t) as usize).collect()
    }

    /// Dense permutation matrix with the 1 of row t in column self(t).
    #[must_use]
    pub fn matrix(&self) -> Gf2Matrix {
        let p = self.modulus as usize;
        let mut m = Gf2Matrix::zeros(p, p);
        for t in 0..p {
            m.set(t, self.apply(t as u64) as usize, true);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_example() {
        let f = AffineMap::new(2, 1, 5).unwrap();
        let g = AffineMap::new(3, 4, 5).unwrap();
        // f(g(x)) = 2(3x+4)+1 = 6x+9 = x+4 mod 5
        assert_eq!(f.compose(&g).unwrap(), AffineMap::new(1, 4, 5).unwrap());
    }

    #[test]
    fn identity_fixes_everything() {
        let id = AffineMap::identity(7).unwrap();
        for t in 0..7 {
            assert_eq!(id.apply(t), t);
        }
    }

    #[test]
    fn non_invertible_slope_rejected() {
        assert_eq!(
            AffineMap::new(4, 1, 6),
            Err(AffineError::NotInvertible { a: 4, modulus: 6 })
        );
    }

    #[test]
    fn images_form_a_permutation() {
        let f = AffineMap::new(5, 7, 12).unwrap();
        let mut seen = vec![false; 12];
        for im in f.permutation() {
            assert!(!seen[im]);
            seen[im] = true;
        }
    }

    #[test]
    fn transpose_is_inverse() {
        for a in [1u64, 5, 7, 11] {
            for b in 0..12 {
                let f = AffineMap::new(a, b, 12).unwrap();
                let ft = f.transpose();
                for t in 0..12 {
                    assert_eq!(ft.apply(f.apply(t)), t);
                }
            }
        }
    }

    #[test]
    fn transpose_matches_matrix_transpose() {
        let f = AffineMap::new(7, 3, 10).unwrap();
        assert_eq!(f.transpose().matrix(), f.matrix().transposed());
    }

    #[test]
    fn matrix_composition_reverses_map_order() {
        // Row-vector action: e_t M_f M_g = e_{g(f(t))}, so the matrix
        // product M_f * M_g is the matrix of g-after-f.
        let f = AffineMap::new(3, 2, 8).unwrap();
        let g = AffineMap::new(5, 1, 8).unwrap();
        assert_eq!(f.matrix().mat_mul(&g.matrix()), g.compose(&f).unwrap().matrix());
    }

    #[test]
    fn reduce_mod_descends_cosets() {
        let f = AffineMap::new(7, 10, 24).unwrap();
        let fq = f.reduce_mod(6).unwrap();
        for t in 0..24 {
            assert_eq!(f.apply(t) % 6, fq.apply(t % 6));
        }
        assert!(f.reduce_mod(5).is_err());
    }
}
