//! Construction and certified distance bounding of APM-LDPC CSS codes.
//!
//! The library builds CSS codes from affine permutation data, runs a set
//! of structured witness searches for minimum-distance upper bounds,
//! certifies every candidate against the code's check matrices, and can
//! certify exact latent lower bounds by compressed kernel exclusion.

pub mod affine;
pub mod code;
pub mod config;
pub mod decoder;
pub mod ets;
pub mod exact;
pub mod gf2;
pub mod latent;
pub mod lift;
pub mod runner;
pub mod spec;
pub mod store;
pub mod witness;
