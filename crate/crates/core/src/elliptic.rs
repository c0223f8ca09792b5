//! Elliptic coefficient matrices, the nonabelian elliptic bivector, its
//! commutative shadow, the finite Jacobi certificate, continued fractions
//! and the two `CP^2` fixtures.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::commpoly::{self, CommPoly};
use crate::error::{Error, Result};
use crate::freealg::{Tensor, TracePoly, Word};
use crate::nccalc::{cyclic_gradient, Gradient};
use crate::polyvec::{Bivector, RTensor};
use crate::projective::{biv_equiv, descend, AffineBracket, EquivReport};
use crate::theta::ThetaCtx;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Default tolerance for elliptic checks.
pub const DEFAULT_TOL: f64 = 1e-10;

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `(n, k, tau)` plus numerical settings.
#[derive(Clone, Debug, PartialEq)]
pub struct EllipticParams {
    pub n: usize,
    pub k: usize,
    pub tau: Complex64,
    pub tolerance: f64,
    pub truncation: Option<usize>,
}

impl EllipticParams {
    pub fn new(n: usize, k: usize, tau: Complex64) -> Result<EllipticParams> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("n must be at least 2, got {n}")));
        }
        if k == 0 || k >= n {
            return Err(Error::InvalidParams(format!("k must satisfy 1 <= k < n, got k = {k}")));
        }
        if gcd(n as u64, k as u64) != 1 {
            return Err(Error::NotCoprime { n, k });
        }
        if tau.im.is_nan() || tau.im <= 0.0 {
            return Err(Error::BadTau(tau));
        }
        Ok(EllipticParams {
            n,
            k,
            tau,
            tolerance: DEFAULT_TOL,
            truncation: None,
        })
    }

    pub fn with_truncation(mut self, truncation: Option<usize>) -> EllipticParams {
        self.truncation = truncation;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> EllipticParams {
        self.tolerance = tolerance;
        self
    }

    pub fn ctx(&self) -> Result<ThetaCtx> {
        ThetaCtx::with_truncation(self.tau, self.n, self.truncation)
    }
}

/// `c[i][r]` for `i, r` in `Z/nZ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CoeffMatrix {
    pub fn zeros(n: usize) -> CoeffMatrix {
        CoeffMatrix {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<CoeffMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("coefficient matrix must be square".into()));
        }
        Ok(CoeffMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn idx(&self, i: i64, r: i64) -> usize {
        let n = self.n as i64;
        (i.rem_euclid(n) * n + r.rem_euclid(n)) as usize
    }

    /// Entry with both indices taken mod `n`.
    #[inline]
    pub fn get(&self, i: i64, r: i64) -> Complex64 {
        self.data[self.idx(i, r)]
    }

    pub fn set(&mut self, i: i64, r: i64, v: Complex64) {
        let k = self.idx(i, r);
        self.data[k] = v;
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.data.chunks(self.n).map(<[Complex64]>::to_vec).collect()
    }

    pub fn scale(&self, s: Complex64) -> CoeffMatrix {
        CoeffMatrix {
            n: self.n,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    /// A copy with `delta` added to entry `(i, r)`.
    pub fn perturbed(&self, i: i64, r: i64, delta: Complex64) -> CoeffMatrix {
        let mut out = self.clone();
        out.set(i, r, self.get(i, r) + delta);
        out
    }

    /// `max |c[-i][-r] + c[i][r]|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let n = self.n as i64;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for r in 0..n {
                d = d.max((self.get(-i, -r) + self.get(i, r)).norm());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Theta-constant coefficients for a prepared context.
pub fn c_coeffs_ctx(ctx: &ThetaCtx, k: usize) -> Result<CoeffMatrix> {
    let n = ctx.n() as i64;
    let k = k as i64;
    let th = |a: i64| ctx.theta_const(a);
    let dth = |a: i64| ctx.theta_const_prime(a);
    // |theta_alpha(0)| for alpha != 0 is O(1); anything this small means a coincident zero
    let floor = 1e-10 * (1..n).map(|a| th(a).norm()).fold(0.0, f64::max);
    let safe = |i: i64, r: i64, alpha: i64| -> Result<Complex64> {
        let v = th(alpha);
        if v.norm() <= floor {
            Err(Error::NearZeroDenominator {
                i: i.rem_euclid(n) as usize,
                r: r.rem_euclid(n) as usize,
                alpha: alpha.rem_euclid(n) as usize,
            })
        } else {
            Ok(v)
        }
    };
    let mut c = CoeffMatrix::zeros(n as usize);
    for i in 0..n {
        for r in 0..n {
            let v = if i == 0 && r == 0 {
                ZERO
            } else if r == 0 {
                dth(i) / safe(i, r, i)?
            } else if r == i {
                dth(k * i) / safe(i, r, k * i)?
            } else if (i + r * (k - 1)).rem_euclid(n) == 0 {
                // theta_0(0) = 0 exactly
                ZERO
            } else {
                dth(0) * th(i + r * (k - 1)) / (safe(i, r, k * r)? * safe(i, r, i - r)?)
            };
            c.set(i, r, v);
        }
    }
    Ok(c)
}

pub fn c_coeffs(params: &EllipticParams) -> Result<CoeffMatrix> {
    c_coeffs_ctx(&params.ctx()?, params.k)
}

/// The quadratic tensor of `nu(f,g) = tr(sum c_{i-j,r} df/dx_i x_{i-r} dg/dx_j x_{j+r})`,
/// i.e. `r_{ij}^{ab} = c_{i-j, i-b}` whenever `a + b = i + j` mod `n`.
pub fn r_tensor_from_c(c: &CoeffMatrix) -> RTensor {
    let n = c.n();
    RTensor::from_fn(n, |i, j, a, b| {
        if (a + b) % n == (i + j) % n {
            c.get(i as i64 - j as i64, i as i64 - b as i64)
        } else {
            ZERO
        }
    })
}

pub fn build_r_tensor(params: &EllipticParams) -> Result<RTensor> {
    Ok(r_tensor_from_c(&c_coeffs(params)?))
}

/// A commutative quadratic bracket, stored as the values `{x_i, x_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommBracket {
    n: usize,
    entries: Vec<CommPoly>,
}

impl CommBracket {
    pub fn zero(n: usize) -> CommBracket {
        CommBracket {
            n,
            entries: vec![CommPoly::zero(); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &CommPoly {
        &self.entries[i * self.n + j]
    }

    fn add(&mut self, i: usize, j: usize, vars: &[usize], c: Complex64) {
        let m = commpoly::monomial(self.n, vars);
        self.entries[i * self.n + j].add_term(m, c);
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(CommPoly::max_abs).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: Complex64) -> CommBracket {
        CommBracket {
            n: self.n,
            entries: self.entries.iter().map(|e| e.scale(s)).collect(),
        }
    }

    /// Largest coefficient difference over all entries.
    pub fn distance(&self, other: &CommBracket) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max)
    }

    /// `max |{x_i,x_j} + {x_j,x_i}|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                d = d.max((self.get(i, j) + self.get(j, i)).max_abs());
            }
        }
        d
    }

    /// `{f, g} = sum_{i,j} df/dx_i dg/dx_j {x_i, x_j}`.
    pub fn eval(&self, f: &CommPoly, g: &CommPoly) -> CommPoly {
        let mut out = CommPoly::zero();
        for i in 0..self.n {
            let fi = commpoly::partial(f, i);
            if fi.is_zero() {
                continue;
            }
            for j in 0..self.n {
                let gj = commpoly::partial(g, j);
                if gj.is_zero() {
                    continue;
                }
                out += &commpoly::mul(&commpoly::mul(&fi, &gj), self.get(i, j));
            }
        }
        out.normalize()
    }

    pub fn jacobiator(&self, f: &CommPoly, g: &CommPoly, h: &CommPoly) -> CommPoly {
        let mut out = self.eval(&self.eval(f, g), h);
        out += &self.eval(&self.eval(g, h), f);
        out += &self.eval(&self.eval(h, f), g);
        out.normalize()
    }

    /// Largest Jacobiator coefficient over triples of distinct monomials of
    /// degree `1..=degree`, relative to the square of the largest bracket
    /// coefficient (floored at one so a vanishing bracket is not blown up).
    pub fn jacobi_residual(&self, degree: usize) -> f64 {
        let mut monos: Vec<CommPoly> = Vec::new();
        let mut stack: Vec<Vec<usize>> = (0..self.n).map(|i| vec![i]).collect();
        while let Some(v) = stack.pop() {
            monos.push(CommPoly::term(commpoly::monomial(self.n, &v), Complex64::new(1.0, 0.0)));
            if v.len() < degree {
                for i in *v.last().unwrap()..self.n {
                    let mut w = v.clone();
                    w.push(i);
                    stack.push(w);
                }
            }
        }
        let scale = self.max_abs().max(1.0);
        let mut worst: f64 = 0.0;
        for a in 0..monos.len() {
            for b in a + 1..monos.len() {
                for c in b + 1..monos.len() {
                    let j = self.jacobiator(&monos[a], &monos[b], &monos[c]);
                    worst = worst.max(j.max_abs() / (scale * scale));
                }
            }
        }
        worst
    }
}

/// The commutative elliptic bracket, straight from theta constants:
/// `{x_i,x_j} = (th'_{j-i}/th_{j-i} + th'_{k(j-i)}/th_{k(j-i)}) x_i x_j
///  + sum_{r != 0, j-i} th'_0 th_{j-i+r(k-1)} / (th_{kr} th_{j-i-r}) x_{j-r} x_{i+r}`.
pub fn q_commutative(params: &EllipticParams) -> Result<CommBracket> {
    let ctx = params.ctx()?;
    let n = params.n as i64;
    let k = params.k as i64;
    let th = |a: i64| ctx.theta_const(a);
    let dth = |a: i64| ctx.theta_const_prime(a);
    let md = |a: i64| a.rem_euclid(n) as usize;
    let mut b = CommBracket::zero(params.n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = j - i;
            let diag = dth(d) / th(d) + dth(k * d) / th(k * d);
            b.add(i as usize, j as usize, &[md(i), md(j)], diag);
            for r in 0..n {
                if r == 0 || (r - d).rem_euclid(n) == 0 {
                    continue;
                }
                let v = dth(0) * th(d + r * (k - 1)) / (th(k * r) * th(d - r));
                b.add(i as usize, j as usize, &[md(j - r), md(i + r)], v);
            }
        }
    }
    for e in b.entries.iter_mut() {
        *e = std::mem::take(e).normalize();
    }
    Ok(b)
}

/// `{x_i, x_j}` of a bivector after letting all letters commute.
pub fn abelianize_bivector(b: &Bivector) -> Result<CommBracket> {
    let n = b.n();
    let mut out = CommBracket::zero(n);
    for i in 0..n {
        for j in 0..n {
            for ((l, r), c) in b.entry(i, j).iter() {
                let mut vars = Vec::new();
                for w in [l, r] {
                    for letter in w.letters() {
                        match letter.generator() {
                            Some(g) if !letter.is_inverse() && g < n => vars.push(g),
                            _ => {
                                return Err(Error::LaurentLetter(format!(
                                    "cannot abelianize {}",
                                    w.render("x")
                                )))
                            }
                        }
                    }
                }
                out.add(i, j, &vars, *c);
            }
        }
    }
    for e in out.entries.iter_mut() {
        *e = std::mem::take(e).normalize();
    }
    Ok(out)
}

pub fn abelianize(r: &RTensor) -> CommBracket {
    abelianize_bivector(&r.to_bivector()).expect("quadratic tensors have no Laurent letters")
}

/// Solved `(p, q)` for the index equations and the independently
/// re-evaluated maximal violation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Jac2Certificate {
    pub n: usize,
    pub p: Vec<Vec<Complex64>>,
    pub q: Vec<Vec<Complex64>>,
    pub residual: f64,
    /// Largest left-hand side magnitude, for scale.
    pub lhs_scale: f64,
}

fn delta(n: i64, a: i64) -> bool {
    a.rem_euclid(n) == 0
}

/// Left side of the index equation for `alpha, beta, gamma, r, s`.
fn jac2_lhs(c: &CoeffMatrix, al: i64, be: i64, ga: i64, r: i64, s: i64) -> Complex64 {
    c.get(be - ga - r, -r - s) * c.get(al - be, -r)
        + c.get(ga - al - s, r) * c.get(be - ga, -s)
        + c.get(al - be + r + s, s) * c.get(ga - al, r + s)
}

/// Right side terms as `(is_q, first, second)` index pairs.
fn jac2_rhs_terms(n: i64, al: i64, be: i64, ga: i64, r: i64, s: i64) -> Vec<(bool, i64, i64)> {
    let mut t = Vec::with_capacity(6);
    if delta(n, r) {
        t.push((false, be - ga, -r - s));
    }
    if delta(n, s) {
        t.push((false, ga - al, r));
    }
    if delta(n, -r - s) {
        t.push((false, al - be, s));
    }
    if delta(n, ga - al - r - s) {
        t.push((true, be - ga, al - ga + r));
    }
    if delta(n, al - be + r) {
        t.push((true, ga - al, be - al + s));
    }
    if delta(n, be - ga + s) {
        t.push((true, al - be, ga - be - r - s));
    }
    t
}

/// Equation tuples `(alpha, beta, gamma = 0, r, s)`; the equations depend on
/// `alpha - beta` and `beta - gamma` only.
fn jac2_tuples(n: i64) -> impl Iterator<Item = (i64, i64, i64, i64, i64)> {
    (0..n).flat_map(move |d1| {
        (0..n).flat_map(move |d2| {
            (0..n).flat_map(move |r| (0..n).map(move |s| (d1 + d2, d2, 0, r, s)))
        })
    })
}

/// Maximal violation of the index equations for given `(p, q)`, evaluated
/// over every `(alpha, beta, gamma, r, s)`.
pub fn jac2_residual(c: &CoeffMatrix, p: &[Vec<Complex64>], q: &[Vec<Complex64>]) -> f64 {
    let n = c.n() as i64;
    let get = |m: &[Vec<Complex64>], a: i64, b: i64| m[a.rem_euclid(n) as usize][b.rem_euclid(n) as usize];
    let mut worst: f64 = 0.0;
    for al in 0..n {
        for be in 0..n {
            for ga in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let lhs = jac2_lhs(c, al, be, ga, r, s);
                        let rhs: Complex64 = jac2_rhs_terms(n, al, be, ga, r, s)
                            .into_iter()
                            .map(|(is_q, a, b)| if is_q { get(q, a, b) } else { get(p, a, b) })
                            .sum();
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
    }
    worst
}

/// Least-squares `(p, q)` for the index equations via SVD (minimum norm).
pub fn jac2_certificate(c: &CoeffMatrix) -> Jac2Certificate {
    let n = c.n();
    let ni = n as i64;
    let rows = n.pow(4);
    let cols = 2 * n * n;
    let mut a = DMatrix::<Complex64>::zeros(rows, cols);
    let mut b = DVector::<Complex64>::zeros(rows);
    let col = |is_q: bool, x: i64, y: i64| {
        (if is_q { n * n } else { 0 }) + (x.rem_euclid(ni) as usize) * n + y.rem_euclid(ni) as usize
    };
    let mut lhs_scale: f64 = 0.0;
    for (row, (al, be, ga, r, s)) in jac2_tuples(ni).enumerate() {
        let lhs = jac2_lhs(c, al, be, ga, r, s);
        lhs_scale = lhs_scale.max(lhs.norm());
        b[row] = lhs;
        for (is_q, x, y) in jac2_rhs_terms(ni, al, be, ga, r, s) {
            a[(row, col(is_q, x, y))] += Complex64::new(1.0, 0.0);
        }
    }
    let svd = a.clone().svd(true, true);
    let mut sol = svd
        .solve(&b, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(cols));
    // one round of iterative refinement on the residual
    let correction = svd
        .solve(&(&b - &a * &sol), 1e-12)
        .unwrap_or_else(|_| DVector::zeros(cols));
    sol += correction;
    let unpack = |offset: usize| -> Vec<Vec<Complex64>> {
        (0..n)
            .map(|x| (0..n).map(|y| sol[offset + x * n + y]).collect())
            .collect()
    };
    let (p, q) = (unpack(0), unpack(n * n));
    let residual = jac2_residual(c, &p, &q);
    Jac2Certificate {
        n,
        p,
        q,
        residual,
        lhs_scale,
    }
}

/// The Jacobiator assembled from products of `c`:
/// `sum delta(a+b+g = a1+b1+g1) K tr(f_a x_a1 g_b x_b1 h_g x_g1 - f_a x_a1 h_b x_b1 g_g x_g1)`
/// with `K = c_{b1+g1-2g, g1-g} c_{a-b, a-a1} + c_{g1+a1-2a, a1-a} c_{b-g, b-b1}
///         + c_{a1+b1-2b, b1-b} c_{g-a, g-g1}`.
pub fn jacobiator_c_formula(c: &CoeffMatrix, f: &TracePoly, g: &TracePoly, h: &TracePoly) -> TracePoly {
    let n = c.n();
    let ni = n as i64;
    let grads: [Gradient; 3] = [f, g, h].map(|p| cyclic_gradient(p, n));
    let x = |i: i64| [crate::freealg::Letter::x(i.rem_euclid(ni) as usize)];
    let mut out = TracePoly::zero();
    for al in 0..ni {
        for be in 0..ni {
            for ga in 0..ni {
                for a1 in 0..ni {
                    for b1 in 0..ni {
                        let g1 = (al + be + ga - a1 - b1).rem_euclid(ni);
                        let kk = c.get(b1 + g1 - 2 * ga, g1 - ga) * c.get(al - be, al - a1)
                            + c.get(g1 + a1 - 2 * al, a1 - al) * c.get(be - ga, be - b1)
                            + c.get(a1 + b1 - 2 * be, b1 - be) * c.get(ga - al, ga - g1);
                        if kk == ZERO {
                            continue;
                        }
                        let (ia, ib, ig) = (al as usize, be as usize, ga as usize);
                        for (second, third, sign) in [(1usize, 2usize, 1.0), (2, 1, -1.0)] {
                            let (pa, pb, pc) = (
                                &grads[0].parts[ia],
                                &grads[second].parts[ib],
                                &grads[third].parts[ig],
                            );
                            for (w0, c0) in pa.iter() {
                                for (w1, c1) in pb.iter() {
                                    for (w2, c2) in pc.iter() {
                                        out.add_term(
                                            crate::freealg::trace_of_concat(&[
                                                w0.letters(),
                                                &x(a1),
                                                w1.letters(),
                                                &x(b1),
                                                w2.letters(),
                                                &x(g1),
                                            ]),
                                            kk * c0 * c1 * c2 * sign,
                                        );
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out.normalize()
}

/// Continued fraction `n/k = n1 - 1/(n2 - 1/(...))` with every `n_i >= 2`.
pub fn contfrac(n: u64, k: u64) -> Result<Vec<u64>> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParams(format!("need 1 <= k < n, got n = {n}, k = {k}")));
    }
    if gcd(n, k) != 1 {
        return Err(Error::NotCoprime {
            n: n as usize,
            k: k as usize,
        });
    }
    let (mut a, mut b) = (n, k);
    let mut out = Vec::new();
    while b != 0 {
        // a/b = q - (q*b - a)/b with q = ceil(a/b)
        let q = a.div_ceil(b);
        out.push(q);
        let rem = q * b - a;
        a = b;
        b = rem;
    }
    Ok(out)
}

/// Determinant of the tridiagonal matrix with `terms` on the diagonal and
/// `-1` off the diagonal; the empty determinant is 1.
pub fn tridiag_det(terms: &[u64]) -> i128 {
    let (mut prev, mut cur) = (0i128, 1i128);
    for &t in terms.iter().rev() {
        let next = t as i128 * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContFracCheck {
    pub n: u64,
    pub k: u64,
    pub terms: Vec<u64>,
    pub d_all: i128,
    pub d_tail: i128,
    pub pass: bool,
}

pub fn contfrac_check(n: u64, k: u64) -> Result<ContFracCheck> {
    let terms = contfrac(n, k)?;
    let d_all = tridiag_det(&terms);
    let d_tail = tridiag_det(&terms[1..]);
    Ok(ContFracCheck {
        n,
        k,
        pass: d_all == n as i128 && d_tail == k as i128 && terms.iter().all(|&t| t >= 2),
        terms,
        d_all,
        d_tail,
    })
}

fn w(idx: &[usize]) -> Word {
    Word::gens(idx)
}

/// The `CP^2` chart brackets for `k = 1, 2` with parameter `t`, written in
/// `u0, u1` (chart index 2).
pub fn example_fixture(k: usize, t: Complex64) -> Result<AffineBracket> {
    let one = Complex64::new(1.0, 0.0);
    let e = Word::one();
    let mut b = Bivector::zero(2);
    let mut put = |i: usize, j: usize, terms: Vec<(Word, Word, Complex64)>| {
        let mut tensor = Tensor::zero();
        for (l, r, c) in terms {
            tensor.add_term((l, r), c);
        }
        *b.entry_mut(i, j) = tensor;
    };
    match k {
        1 => {
            let t4 = t / 4.0;
            put(0, 0, vec![(w(&[0, 1]), w(&[1]), -one), (w(&[1]), w(&[0, 1]), one)]);
            put(
                0,
                1,
                vec![
                    (w(&[0, 0]), w(&[0]), one),
                    (w(&[1]), w(&[1, 1]), one),
                    (w(&[1]), w(&[0]), t4),
                    (w(&[0]), w(&[1]), t4),
                    (e.clone(), e.clone(), one),
                ],
            );
            put(
                1,
                0,
                vec![
                    (w(&[0]), w(&[0, 0]), -one),
                    (w(&[1, 1]), w(&[1]), -one),
                    (w(&[1]), w(&[0]), -t4),
                    (w(&[0]), w(&[1]), -t4),
                    (e.clone(), e.clone(), -one),
                ],
            );
            put(1, 1, vec![(w(&[1, 0]), w(&[0]), one), (w(&[0]), w(&[1, 0]), -one)]);
        }
        2 => {
            let t2 = t / 2.0;
            put(
                0,
                0,
                vec![
                    (w(&[1, 0]), w(&[0, 0]), one),
                    (w(&[0, 0]), w(&[1, 0]), -one),
                    (e.clone(), w(&[1]), one),
                    (w(&[1]), e.clone(), -one),
                ],
            );
            put(
                0,
                1,
                vec![
                    (w(&[1, 1]), w(&[0, 0]), one),
                    (w(&[0, 1]), w(&[1, 0]), -one),
                    (w(&[0]), w(&[1]), t2),
                    (w(&[1]), w(&[0]), -t2),
                ],
            );
            put(
                1,
                0,
                vec![
                    (w(&[1, 0]), w(&[0, 1]), one),
                    (w(&[0, 0]), w(&[1, 1]), -one),
                    (w(&[0]), w(&[1]), -t2),
                    (w(&[1]), w(&[0]), -t2),
                ],
            );
            put(
                1,
                1,
                vec![
                    (w(&[1, 1]), w(&[0, 1]), one),
                    (w(&[0, 1]), w(&[1, 1]), -one),
                    (w(&[0]), e.clone(), one),
                    (e.clone(), w(&[0]), -one),
                ],
            );
        }
        _ => {
            return Err(Error::InvalidParams(format!(
                "fixtures exist for k = 1, 2 only, got {k}"
            )))
        }
    }
    AffineBracket::new(3, 2, b)
}

/// Largest coefficient of `Θ_{j,i} + Θ_{i,j}*` over all entries. Zero for a
/// grid that is antisymmetric term by term.
pub fn grid_antisymmetry_defect(b: &Bivector) -> f64 {
    let n = b.n();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = b.entry(j, i) + &b.entry(i, j).star();
            worst = worst.max(d.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max));
        }
    }
    worst
}

/// Rebuild the lower triangle from the upper one via `Θ_{j,i} = −Θ_{i,j}*`
/// and antisymmetrize the diagonal. Provenance is dropped.
pub fn antisymmetric_repair(bracket: &AffineBracket) -> Result<AffineBracket> {
    let src = bracket.bivector();
    let n = src.n();
    let half = Complex64::new(0.5, 0.0);
    let mut b = Bivector::zero(n);
    for i in 0..n {
        for j in i..n {
            let upper = if i == j {
                (src.entry(i, i) - &src.entry(i, i).star()).scale(half)
            } else {
                src.entry(i, j).clone()
            };
            *b.entry_mut(j, i) = -&upper.star();
            *b.entry_mut(i, j) = upper;
        }
    }
    bracket.with_bivector(b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FixtureMatch {
    pub lambda: Complex64,
    pub t: Complex64,
    /// Largest least-squares misfit on the fitting battery.
    pub fit_residual: f64,
    pub equiv: EquivReport,
}

/// Degree of the monomial battery used to fit `(lambda, t)`. The `k = 2`
/// bracket at `t = 0` vanishes on every pair of degree `<= 3`.
pub const FIT_DEGREE: usize = 4;

/// Fit `bracket ~ lambda * fixture(k, t)` on monomial pairs of degree `<= FIT_DEGREE`
/// (linear in `lambda` and `mu = lambda t`), then compare semantically at
/// degree `<= 4`.
pub fn match_fixture(bracket: &AffineBracket, k: usize) -> Result<FixtureMatch> {
    match_family(bracket, |t| example_fixture(k, t))
}

/// Fit `bracket ~ lambda * family(t)` for a family affine in `t`.
pub fn match_family<F>(bracket: &AffineBracket, family: F) -> Result<FixtureMatch>
where
    F: Fn(Complex64) -> Result<AffineBracket>,
{
    let one = Complex64::new(1.0, 0.0);
    let f0 = family(ZERO)?;
    if bracket.m() != f0.m() {
        return Err(Error::SizeMismatch {
            expected: f0.m(),
            found: bracket.m(),
        });
    }
    let f1 = family(one)?.bivector().add(&f0.bivector().scale(-one))?;
    let monos: Vec<TracePoly> = crate::sample::trace_monomials(bracket.m(), FIT_DEGREE)
        .iter()
        .map(|w| TracePoly::monomial(w.rep()))
        .collect();
    let mut rows: Vec<(Complex64, Complex64, Complex64)> = Vec::new();
    for f in &monos {
        for g in &monos {
            let target = bracket.eval(f, g);
            let a0 = f0.eval(f, g);
            let a1 = f1.eval(f, g);
            let mut keys: Vec<_> = target.keys().chain(a0.keys()).chain(a1.keys()).cloned().collect();
            keys.sort();
            keys.dedup();
            for key in keys {
                rows.push((a0.coeff(&key), a1.coeff(&key), target.coeff(&key)));
            }
        }
    }
    let a = DMatrix::from_fn(rows.len(), 2, |i, j| if j == 0 { rows[i].0 } else { rows[i].1 });
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-12)
        .map_err(|e| Error::InvalidParams(format!("fixture fit failed: {e}")))?;
    let (lambda, mu) = (sol[0], sol[1]);
    let fit_residual = (&a * &sol - &b).iter().map(|c| c.norm()).fold(0.0, f64::max);
    let t = if lambda.norm() > 0.0 { mu / lambda } else { ZERO };
    let fixture = family(t)?.scale(lambda);
    let equiv = biv_equiv(bracket, &fixture, 4)?;
    Ok(FixtureMatch {
        lambda,
        t,
        fit_residual,
        equiv,
    })
}

/// Descend the elliptic tensor for `(3, k)` and match it against the fixture.
pub fn match_elliptic_fixture(params: &EllipticParams) -> Result<FixtureMatch> {
    if params.n != 3 {
        return Err(Error::InvalidParams("fixtures live on CP^2 (n = 3)".into()));
    }
    match_fixture(&descend(&build_r_tensor(params)?)?, params.k)
}
