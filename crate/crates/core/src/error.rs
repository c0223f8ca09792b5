use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator index {index} out of range for {n} generators")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("size mismatch: expected {expected} generators, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("n and k must be coprime (n = {n}, k = {k})")]
    NotCoprime { n: usize, k: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("modular parameter must satisfy Im(tau) >= 0.05, got {0}")]
    BadTau(Complex64),

    #[error("rho has a pole at z = {0} (theta(z) vanishes)")]
    Pole(Complex64),

    #[error("near-zero denominator theta_{alpha}(0) while computing c[{i}][{r}]")]
    NearZeroDenominator { i: usize, r: usize, alpha: usize },

    #[error("malformed expression: {0}")]
    Malformed(String),

    #[error("abelianization needs polynomial entries, found Laurent letter in {0}")]
    LaurentLetter(String),

    #[error("affine bracket carries no homogeneous provenance")]
    MissingProvenance,

    #[error("invalid chart {chart} for {n} homogeneous variables")]
    InvalidChart { chart: usize, n: usize },

    #[error("Schouten bracket of degrees ({p}, {q}) is not supported")]
    UnsupportedDegree { p: usize, q: usize },

    #[error("wrong number of arguments: expected {expected}, got {found}")]
    Arity { expected: usize, found: usize },

    #[error("matrix for letter {letter} is singular or ill-conditioned (condition estimate {condition:e})")]
    Singular { letter: String, condition: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
