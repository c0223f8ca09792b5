//! Noncommutative Poisson geometry on free Laurent algebras.
pub mod commpoly;
pub mod elliptic;
pub mod error;
pub mod export;
pub mod freealg;
pub mod matrep;
pub mod nccalc;
pub mod polyvec;
pub mod projective;
pub mod sample;
pub mod theta;

pub use error::{Error, Result};
pub use num_complex::Complex64;
