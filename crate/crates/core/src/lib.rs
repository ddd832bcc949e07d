//! Rational points on spheres: exact enumeration of Ω_n and Ω_T, spherical
//! harmonic analysis on S^d, the Hurwitz-quaternion Hecke operators on S^2
//! with their theta series, and small-scale equidistribution / covering
//! statistics.

pub mod equidist;
pub mod error;
pub mod harmonics;
pub mod hecke;
pub mod lattice;
pub mod number_theory;
pub mod quaternion;
pub mod theta;

pub use error::{Error, Result};
