//! Evaluation of trace polynomials and brackets on tuples of `N x N`
//! complex matrices. Every nonabelian bracket induces an ordinary Poisson
//! bracket on conjugation-invariant functions of such tuples, which gives a
//! numerical check that is independent of the symbolic Jacobi machinery.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freealg::{Letter, TracePoly, Word};
use crate::nccalc::cyclic_gradient;
use crate::polyvec::Bivector;
use crate::projective::BracketEval;
use crate::sample;

pub type CMatrix = DMatrix<Complex64>;

/// Points whose matrices have a larger condition number are rejected.
pub const CONDITION_BOUND: f64 = 1e8;

/// Relative tolerance for the matrix-level Jacobi test.
pub const MATRIX_JACOBI_TOL: f64 = 1e-8;

fn condition(m: &CMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// One matrix per variable, with inverses precomputed where the matrix is
/// well conditioned.
#[derive(Clone, Debug)]
pub struct MatPoint {
    size: usize,
    mats: Vec<CMatrix>,
    inverses: Vec<Option<CMatrix>>,
    conditions: Vec<f64>,
}

impl MatPoint {
    pub fn new(mats: Vec<CMatrix>) -> Result<MatPoint> {
        let size = mats.first().map(|m| m.nrows()).unwrap_or(0);
        for m in &mats {
            if m.nrows() != size || m.ncols() != size {
                return Err(Error::SizeMismatch {
                    expected: size,
                    found: m.ncols().max(m.nrows()),
                });
            }
        }
        let conditions: Vec<f64> = mats.iter().map(condition).collect();
        let inverses = mats
            .iter()
            .zip(&conditions)
            .map(|(m, &c)| if c <= CONDITION_BOUND { m.clone().try_inverse() } else { None })
            .collect();
        Ok(MatPoint {
            size,
            mats,
            inverses,
            conditions,
        })
    }

    /// Scalars, i.e. `N = 1`.
    pub fn scalars(values: &[Complex64]) -> Result<MatPoint> {
        MatPoint::new(values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect())
    }

    /// i.i.d. standard complex Gaussian entries, resampled until every
    /// matrix passes the condition screen.
    pub fn random<R: Rng>(rng: &mut R, n_vars: usize, size: usize) -> MatPoint {
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        loop {
            let mats = (0..n_vars)
                .map(|_| {
                    CMatrix::from_fn(size, size, |_, _| {
                        let re: f64 = rng.sample(StandardNormal);
                        let im: f64 = rng.sample(StandardNormal);
                        Complex64::new(re * scale, im * scale)
                    })
                })
                .collect();
            let pt = MatPoint::new(mats).expect("square matrices of equal size");
            if pt.inverses.iter().all(Option::is_some) {
                return pt;
            }
        }
    }

    pub fn n_vars(&self) -> usize {
        self.mats.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    /// `g M g^{-1}` for every matrix.
    pub fn conjugate(&self, g: &CMatrix) -> Result<MatPoint> {
        let g_inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular {
                letter: "conjugator".into(),
                condition: condition(g),
            })?;
        MatPoint::new(self.mats.iter().map(|m| g * m * &g_inv).collect())
    }

    fn letter(&self, l: Letter) -> Result<&CMatrix> {
        let g = match l.generator() {
            Some(g) if g < self.mats.len() => g,
            _ => {
                return Err(Error::Malformed(format!(
                    "letter outside the {} point variables",
                    self.mats.len()
                )))
            }
        };
        if l.is_inverse() {
            self.inverses[g].as_ref().ok_or_else(|| Error::Singular {
                letter: format!("x{g}"),
                condition: self.conditions[g],
            })
        } else {
            Ok(&self.mats[g])
        }
    }

    pub fn eval_word(&self, w: &Word) -> Result<CMatrix> {
        let mut out = CMatrix::identity(self.size, self.size);
        for &l in w.letters() {
            out *= self.letter(l)?;
        }
        Ok(out)
    }

    pub fn eval_poly(&self, p: &crate::freealg::NcPoly) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.size, self.size);
        for (w, c) in p.iter() {
            out += self.eval_word(w)? * *c;
        }
        Ok(out)
    }
}

/// `sum c tr(W)` together with `sum |c tr(W)|`, the size of the largest
/// quantity that could have cancelled.
pub fn eval_trace_poly_scaled(f: &TracePoly, pt: &MatPoint) -> Result<(Complex64, f64)> {
    let mut value = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (w, c) in f.iter() {
        let term = pt.eval_word(w.rep())?.trace() * c;
        value += term;
        scale += term.norm();
    }
    Ok((value, scale))
}

pub fn eval_trace_poly(f: &TracePoly, pt: &MatPoint) -> Result<Complex64> {
    eval_trace_poly_scaled(f, pt).map(|(v, _)| v)
}

/// `{f, g}` at a point by evaluating the symbolic bracket.
pub fn bracket_value<B: BracketEval + ?Sized>(
    b: &B,
    f: &TracePoly,
    g: &TracePoly,
    pt: &MatPoint,
) -> Result<Complex64> {
    eval_trace_poly(&b.bracket(f, g), pt)
}

/// `{f, g}` at a point computed inside the formula: the partials and the
/// tensor factors are replaced by matrices before anything is traced.
pub fn bracket_value_matrix(b: &Bivector, f: &TracePoly, g: &TracePoly, pt: &MatPoint) -> Result<Complex64> {
    let n = b.n();
    let df = cyclic_gradient(f, n);
    let dg = cyclic_gradient(g, n);
    let fm: Vec<CMatrix> = df.parts.iter().map(|p| pt.eval_poly(p)).collect::<Result<_>>()?;
    let gm: Vec<CMatrix> = dg.parts.iter().map(|p| pt.eval_poly(p)).collect::<Result<_>>()?;
    let mut total = Complex64::new(0.0, 0.0);
    for (i, fi) in fm.iter().enumerate() {
        for (j, gj) in gm.iter().enumerate() {
            for ((l, r), c) in b.entry(i, j).iter() {
                let m = fi * pt.eval_word(l)? * gj * pt.eval_word(r)?;
                total += m.trace() * c;
            }
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixJacobiReport {
    pub size: usize,
    pub samples: usize,
    pub max_residual: f64,
}

impl MatrixJacobiReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual < tol
    }
}

/// Evaluate the Jacobiator of random triples of distinct trace monomials of
/// degree `<= degree` at random `size x size` points. Each sample gets its own generator derived
/// from `seed`, so the result does not depend on thread scheduling.
pub fn jacobi_matrix_test<B: BracketEval + ?Sized>(
    b: &B,
    size: usize,
    samples: usize,
    degree: usize,
    seed: u64,
) -> Result<MatrixJacobiReport> {
    let m = b.arity();
    let residuals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = sample::rng(seed.wrapping_mul(0x9e37_79b9).wrapping_add(s as u64));
            let pt = MatPoint::random(&mut rng, m, size);
            // a repeated entry makes the Jacobiator vanish by antisymmetry alone
            let mut triple: Vec<TracePoly> = Vec::with_capacity(3);
            while triple.len() < 3 {
                let f = sample::random_trace_monomial(&mut rng, m, 1, degree);
                if !triple.contains(&f) {
                    triple.push(f);
                }
            }
            let [f, g, h]: [TracePoly; 3] = triple.try_into().expect("three entries");
            let fg = b.bracket(&f, &g);
            let gh = b.bracket(&g, &h);
            let hf = b.bracket(&h, &f);
            let terms = [b.bracket(&fg, &h), b.bracket(&gh, &f), b.bracket(&hf, &g)];
            let mut sum = Complex64::new(0.0, 0.0);
            let mut scale: f64 = 0.0;
            for t in &terms {
                let (v, s) = eval_trace_poly_scaled(t, &pt)?;
                sum += v;
                scale = scale.max(s);
            }
            Ok(if scale == 0.0 { 0.0 } else { sum.norm() / scale })
        })
        .collect::<Result<_>>()?;
    Ok(MatrixJacobiReport {
        size,
        samples,
        max_residual: residuals.into_iter().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freealg::LinComb;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn trace_is_cyclic() {
        let mut rng = sample::rng(3);
        let pt = MatPoint::random(&mut rng, 2, 3);
        let ab = TracePoly::monomial(&Word::gens(&[0, 1]));
        let (a, b) = (&pt.mats()[0], &pt.mats()[1]);
        let direct = (a * b).trace();
        assert!((eval_trace_poly(&ab, &pt).unwrap() - direct).norm() < 1e-12);
        assert!(((b * a).trace() - direct).norm() < 1e-12);
    }

    #[test]
    fn scalar_points_commute() {
        let pt = MatPoint::scalars(&[c(2.0), c(-3.0)]).unwrap();
        let f = TracePoly::monomial(&Word::gens(&[0, 1, 0, 0, 1]));
        assert!((eval_trace_poly(&f, &pt).unwrap() - c(2f64.powi(3) * 9.0)).norm() < 1e-9);
    }

    #[test]
    fn inverse_letters_need_invertible_matrices() {
        let pt = MatPoint::new(vec![CMatrix::zeros(2, 2)]).unwrap();
        let w = Word::letter(Letter::x_inv(0));
        assert!(matches!(pt.eval_word(&w), Err(Error::Singular { .. })));
        let f: TracePoly = LinComb::zero();
        assert_eq!(eval_trace_poly(&f, &pt).unwrap(), c(0.0));
    }
}
