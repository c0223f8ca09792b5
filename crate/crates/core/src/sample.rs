//! Seeded random test data and monomial enumeration.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::freealg::{CycWord, Letter, NcPoly, TracePoly, Word};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All cyclic classes of positive words in `m` letters with degree in `1..=max_degree`,
/// sorted by (degree, word).
pub fn trace_monomials(m: usize, max_degree: usize) -> Vec<CycWord> {
    let mut out = Vec::new();
    for d in 1..=max_degree {
        let mut level = BTreeSet::new();
        let total = m.pow(d as u32);
        for code in 0..total {
            let mut idx = Vec::with_capacity(d);
            let mut c = code;
            for _ in 0..d {
                idx.push(c % m);
                c /= m;
            }
            level.insert(CycWord::new(&Word::gens(&idx)));
        }
        out.extend(level);
    }
    out
}

pub fn random_word<R: Rng>(rng: &mut R, m: usize, len: usize, laurent: bool) -> Word {
    Word::from_letters((0..len).map(|_| {
        let i = rng.random_range(0..m);
        if laurent && rng.random_bool(0.3) {
            Letter::x_inv(i)
        } else {
            Letter::x(i)
        }
    }))
}

/// Small integer coefficient in `{-3..3} \ {0}`; keeps symbolic identities exact.
pub fn small_coeff<R: Rng>(rng: &mut R) -> Complex64 {
    let v = rng.random_range(1..=3) as f64;
    Complex64::new(if rng.random_bool(0.5) { v } else { -v }, 0.0)
}

pub fn random_poly<R: Rng>(rng: &mut R, m: usize, max_deg: usize, terms: usize, laurent: bool) -> NcPoly {
    let mut f = NcPoly::zero();
    for _ in 0..terms {
        let len = rng.random_range(0..=max_deg);
        f.add_term(random_word(rng, m, len, laurent), small_coeff(rng));
    }
    f
}

pub fn random_trace_poly<R: Rng>(
    rng: &mut R,
    m: usize,
    max_deg: usize,
    terms: usize,
    laurent: bool,
) -> TracePoly {
    random_poly(rng, m, max_deg, terms, laurent).trace()
}

/// A single random trace monomial with degree in `min_deg..=max_deg`.
pub fn random_trace_monomial<R: Rng>(rng: &mut R, m: usize, min_deg: usize, max_deg: usize) -> TracePoly {
    let len = rng.random_range(min_deg..=max_deg);
    TracePoly::monomial(&random_word(rng, m, len, false))
}
