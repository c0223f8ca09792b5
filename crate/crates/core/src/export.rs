//! Serializable snapshot of an elliptic bracket: parameters, coefficient
//! matrix, sparse homogeneous tensor and the chart grid. Complex numbers are
//! written as `[re, im]` pairs and words in the dotted `u0.u1^-1` form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{build_r_tensor, c_coeffs, r_tensor_from_c, CoeffMatrix, EllipticParams};
use crate::error::{Error, Result};
use crate::freealg::{Tensor, Word};
use crate::polyvec::{Bivector, RTensor};
use crate::projective::{descend_in_chart, AffineBracket};

/// Variable prefix used for chart words.
pub const CHART_PREFIX: &str = "u";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub n: usize,
    pub k: usize,
    pub tau: Complex64,
    pub truncation: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RTensorEntry {
    pub i: usize,
    pub j: usize,
    pub a: usize,
    pub b: usize,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaEntry {
    pub i: usize,
    pub j: usize,
    pub left_word: String,
    pub right_word: String,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenDocument {
    pub params: ParamsDoc,
    pub chart: usize,
    pub c_matrix: Vec<Vec<Complex64>>,
    pub r_tensor: Vec<RTensorEntry>,
    pub affine_theta: Vec<ThetaEntry>,
    pub render: String,
}

impl GenDocument {
    /// Build the elliptic bracket for `params` and descend it into `chart`.
    pub fn generate(params: &EllipticParams, chart: usize) -> Result<GenDocument> {
        let c = c_coeffs(params)?;
        let r = build_r_tensor(params)?;
        let bracket = descend_in_chart(&r, chart)?;
        Ok(GenDocument {
            params: ParamsDoc {
                n: params.n,
                k: params.k,
                tau: params.tau,
                truncation: params.truncation,
            },
            chart,
            c_matrix: c.rows(),
            r_tensor: r
                .nonzero()
                .into_iter()
                .map(|(i, j, a, b, coeff)| RTensorEntry { i, j, a, b, coeff })
                .collect(),
            affine_theta: theta_entries(bracket.bivector()),
            render: bracket.bivector().render(CHART_PREFIX),
        })
    }

    pub fn elliptic_params(&self) -> Result<EllipticParams> {
        Ok(EllipticParams::new(self.params.n, self.params.k, self.params.tau)?
            .with_truncation(self.params.truncation))
    }

    pub fn coeff_matrix(&self) -> Result<CoeffMatrix> {
        CoeffMatrix::from_rows(self.c_matrix.clone())
    }

    pub fn r_tensor(&self) -> Result<RTensor> {
        let n = self.params.n;
        let mut r = RTensor::zeros(n);
        for e in &self.r_tensor {
            if [e.i, e.j, e.a, e.b].iter().any(|&x| x >= n) {
                return Err(Error::Malformed(format!(
                    "tensor index ({}, {}, {}, {}) out of range for n = {n}",
                    e.i, e.j, e.a, e.b
                )));
            }
            r.set(e.i, e.j, e.a, e.b, e.coeff);
        }
        Ok(r)
    }

    /// The chart bracket exactly as stored, with the stored tensor attached.
    pub fn bracket(&self) -> Result<AffineBracket> {
        let m = self
            .params
            .n
            .checked_sub(1)
            .filter(|&m| m > 0)
            .ok_or_else(|| Error::Malformed(format!("n = {} has no chart", self.params.n)))?;
        let mut b = Bivector::zero(m);
        for e in &self.affine_theta {
            if e.i >= m || e.j >= m {
                return Err(Error::Malformed(format!(
                    "grid entry ({}, {}) out of range for {m} chart variables",
                    e.i, e.j
                )));
            }
            let left = Word::parse(&e.left_word, CHART_PREFIX)?;
            let right = Word::parse(&e.right_word, CHART_PREFIX)?;
            if left.generator_bound() > m || right.generator_bound() > m {
                return Err(Error::Malformed(format!(
                    "word {} (x) {} uses more than {m} variables",
                    e.left_word, e.right_word
                )));
            }
            b.add_term(e.i, e.j, left, right, e.coeff);
        }
        AffineBracket::new(self.params.n, self.chart, b)?.with_provenance(self.r_tensor()?)
    }

    /// Largest gap between the stored tensor and the one rebuilt from the
    /// stored coefficient matrix.
    pub fn consistency_defect(&self) -> Result<f64> {
        let rebuilt = r_tensor_from_c(&self.coeff_matrix()?);
        let stored = self.r_tensor()?;
        if rebuilt.n() != stored.n() {
            return Err(Error::SizeMismatch {
                expected: stored.n(),
                found: rebuilt.n(),
            });
        }
        Ok(rebuilt
            .as_slice()
            .iter()
            .zip(stored.as_slice())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }
}

/// Sorted `(i, j, left, right, coeff)` triplets of a grid.
pub fn theta_entries(b: &Bivector) -> Vec<ThetaEntry> {
    let mut out = Vec::new();
    for i in 0..b.n() {
        for j in 0..b.n() {
            let t: &Tensor = b.entry(i, j);
            let mut terms: Vec<_> = t.iter().collect();
            terms.sort_by(|x, y| x.0.cmp(y.0));
            for ((l, r), c) in terms {
                out.push(ThetaEntry {
                    i,
                    j,
                    left_word: l.render(CHART_PREFIX),
                    right_word: r.render(CHART_PREFIX),
                    coeff: *c,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stored_bracket_matches_generated() {
        let p = EllipticParams::new(3, 1, Complex64::new(0.0, 1.0)).unwrap();
        let doc = GenDocument::generate(&p, 2).unwrap();
        let b = doc.bracket().unwrap();
        let direct = descend_in_chart(&build_r_tensor(&p).unwrap(), 2).unwrap();
        assert_eq!(b.bivector(), direct.bivector());
        assert_eq!(b.provenance(), direct.provenance());
        assert!(doc.consistency_defect().unwrap() == 0.0);
    }

    #[test]
    fn malformed_entries_are_rejected() {
        let p = EllipticParams::new(3, 2, Complex64::new(0.0, 1.0)).unwrap();
        let mut doc = GenDocument::generate(&p, 2).unwrap();
        doc.affine_theta[0].left_word = "u7".into();
        assert!(doc.bracket().is_err());
        let mut doc = GenDocument::generate(&p, 2).unwrap();
        doc.r_tensor[0].a = 3;
        assert!(doc.r_tensor().is_err());
    }
}
