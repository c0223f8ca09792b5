//! Nonabelian vector and bivector fields acting on the trace space, the
//! quadratic r-tensor form, Jacobiators and the Schouten bracket for
//! degrees up to two.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freealg::{
    concat, trace_of_concat, Dilate, Letter, NcPoly, Tensor, TracePoly, Word,
};
use crate::nccalc::{cyclic_gradient, Gradient};
use crate::sample;

fn check_arity(n: usize, f: &TracePoly) -> Result<()> {
    let found = f.generator_bound();
    if found > n {
        Err(Error::SizeMismatch { expected: n, found })
    } else {
        Ok(())
    }
}

/// A vector field `f -> tr(sum_i a_i df/dx_i)`, stored by the images
/// `a_i = D(x_i)` of its lifting derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    coeffs: Vec<NcPoly>,
}

impl VectorField {
    pub fn new(coeffs: Vec<NcPoly>) -> VectorField {
        VectorField { coeffs }
    }

    pub fn zero(n: usize) -> VectorField {
        VectorField::new(vec![NcPoly::zero(); n])
    }

    /// The Euler field `x_i -> x_i`.
    pub fn euler(n: usize) -> VectorField {
        VectorField::new((0..n).map(NcPoly::x).collect())
    }

    pub fn n(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[NcPoly] {
        &self.coeffs
    }

    /// The derivation `D` of the Laurent algebra with `D(x_i) = a_i`.
    pub fn derive(&self, p: &NcPoly) -> NcPoly {
        let n = self.n();
        let mut out = NcPoly::zero();
        for (w, c) in p.iter() {
            let letters = w.letters();
            for (pos, &l) in letters.iter().enumerate() {
                let Some(g) = l.generator() else { continue };
                if g >= n {
                    continue;
                }
                let prefix = &letters[..pos];
                let suffix = &letters[pos + 1..];
                for (v, a) in self.coeffs[g].iter() {
                    if l.is_inverse() {
                        let inv = [l];
                        out.add_term(
                            concat(&[prefix, &inv, v.letters(), &inv, suffix]),
                            -(c * a),
                        );
                    } else {
                        out.add_term(concat(&[prefix, v.letters(), suffix]), c * a);
                    }
                }
            }
        }
        out.normalize()
    }

    pub fn apply_gradient(&self, df: &Gradient) -> TracePoly {
        let mut out = TracePoly::zero();
        for (a, d) in self.coeffs.iter().zip(df.parts.iter()) {
            for (u, x) in a.iter() {
                for (v, y) in d.iter() {
                    out.add_term(trace_of_concat(&[u.letters(), v.letters()]), x * y);
                }
            }
        }
        out.normalize()
    }

    pub fn apply(&self, f: &TracePoly) -> TracePoly {
        self.apply_gradient(&cyclic_gradient(f, self.n()))
    }

    /// `[v, w]` with lifting `D_v D_w - D_w D_v`; its coefficients are `D_v(w_i) - D_w(v_i)`.
    pub fn commutator(&self, w: &VectorField) -> Result<VectorField> {
        if self.n() != w.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                found: w.n(),
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(w.coeffs.iter())
            .map(|(vi, wi)| &self.derive(wi) - &w.derive(vi))
            .map(NcPoly::normalize)
            .collect();
        Ok(VectorField::new(coeffs))
    }
}

pub fn vf_apply(v: &VectorField, f: &TracePoly) -> Result<TracePoly> {
    check_arity(v.n(), f)?;
    Ok(v.apply(f))
}

pub fn vf_commutator(v: &VectorField, w: &VectorField) -> Result<VectorField> {
    v.commutator(w)
}

/// A bivector field `(f, g) -> tr(sum_{i,j} df/dx_i Theta_{i,j}(dg/dx_j))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Bivector {
    n: usize,
    theta: Vec<Tensor>,
}

impl Bivector {
    pub fn zero(n: usize) -> Bivector {
        Bivector {
            n,
            theta: vec![Tensor::zero(); n * n],
        }
    }

    pub fn from_grid(n: usize, theta: Vec<Tensor>) -> Result<Bivector> {
        if theta.len() != n * n {
            return Err(Error::SizeMismatch {
                expected: n * n,
                found: theta.len(),
            });
        }
        Ok(Bivector { n, theta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &Tensor {
        &self.theta[i * self.n + j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut Tensor {
        &mut self.theta[i * self.n + j]
    }

    pub fn add_term(&mut self, i: usize, j: usize, left: Word, right: Word, c: Complex64) {
        self.entry_mut(i, j).add_term((left, right), c);
    }

    pub fn is_zero(&self) -> bool {
        self.theta.iter().all(Tensor::is_zero)
    }

    pub fn scale(&self, c: Complex64) -> Bivector {
        Bivector {
            n: self.n,
            theta: self.theta.iter().map(|t| t.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &Bivector) -> Result<Bivector> {
        if self.n != other.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(Bivector {
            n: self.n,
            theta: self
                .theta
                .iter()
                .zip(other.theta.iter())
                .map(|(a, b)| (a + b).normalize())
                .collect(),
        })
    }

    /// Largest coefficient magnitude among all entries.
    pub fn max_abs(&self) -> f64 {
        self.theta.iter().map(Tensor::max_abs).fold(0.0, f64::max)
    }

    pub fn eval_gradients(&self, df: &Gradient, dg: &Gradient) -> TracePoly {
        let n = self.n;
        let mut out = TracePoly::zero();
        for i in 0..n {
            if df.parts[i].is_zero() {
                continue;
            }
            for j in 0..n {
                let theta = self.entry(i, j);
                if theta.is_zero() || dg.parts[j].is_zero() {
                    continue;
                }
                for (w1, c1) in df.parts[i].iter() {
                    for ((b, d), ct) in theta.iter() {
                        let c1t = c1 * ct;
                        for (w2, c2) in dg.parts[j].iter() {
                            out.add_term(
                                trace_of_concat(&[
                                    w1.letters(),
                                    b.letters(),
                                    w2.letters(),
                                    d.letters(),
                                ]),
                                c1t * c2,
                            );
                        }
                    }
                }
            }
        }
        out.normalize()
    }

    /// Unchecked evaluation; letters beyond `n` are treated as constants.
    pub fn eval(&self, f: &TracePoly, g: &TracePoly) -> TracePoly {
        self.eval_gradients(&cyclic_gradient(f, self.n), &cyclic_gradient(g, self.n))
    }

    pub fn render(&self, prefix: &str) -> String {
        let mut lines = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                let t = self.entry(i, j);
                if !t.is_zero() {
                    lines.push(format!("Theta[{i}][{j}] = {}", t.render(prefix)));
                }
            }
        }
        lines.join("\n")
    }
}

pub fn biv_apply(b: &Bivector, f: &TracePoly, g: &TracePoly) -> Result<TracePoly> {
    check_arity(b.n(), f)?;
    check_arity(b.n(), g)?;
    Ok(b.eval(f, g))
}

/// Quadratic bivector data: `r[i][j][a][b]` is the coefficient of
/// `tr(x_a df/dx_i x_b dg/dx_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RTensor {
    n: usize,
    data: Vec<Complex64>,
}

impl RTensor {
    pub fn zeros(n: usize) -> RTensor {
        RTensor {
            n,
            data: vec![Complex64::new(0.0, 0.0); n.pow(4)],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize, usize, usize) -> Complex64>(n: usize, mut f: F) -> RTensor {
        let mut r = RTensor::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        r.set(i, j, a, b, f(i, j, a, b));
                    }
                }
            }
        }
        r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        ((i * self.n + j) * self.n + a) * self.n + b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> Complex64 {
        self.data[self.idx(i, j, a, b)]
    }

    pub fn set(&mut self, i: usize, j: usize, a: usize, b: usize, c: Complex64) {
        let k = self.idx(i, j, a, b);
        self.data[k] = c;
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.norm() == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> RTensor {
        RTensor {
            n: self.n,
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    /// Nonzero entries as `(i, j, a, b, coeff)`.
    pub fn nonzero(&self) -> Vec<(usize, usize, usize, usize, Complex64)> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let c = self.get(i, j, a, b);
                        if c.norm() != 0.0 {
                            out.push((i, j, a, b, c));
                        }
                    }
                }
            }
        }
        out
    }

    /// `(r_{ij}^{ab} - r_{ji}^{ba}) / 2`, which induces an antisymmetric bracket.
    pub fn antisymmetrized(&self) -> RTensor {
        RTensor::from_fn(self.n, |i, j, a, b| (self.get(i, j, a, b) - self.get(j, i, b, a)) * 0.5)
    }

    /// `Theta_{i,j} = sum_{a,b} r_{i,j}^{a,b} x_b (x) x_a`.
    pub fn to_bivector(&self) -> Bivector {
        let mut b = Bivector::zero(self.n);
        for (i, j, a, bb, c) in self.nonzero() {
            b.add_term(i, j, Word::x(bb), Word::x(a), c);
        }
        b
    }
}

/// The three nested brackets `{{f,g},h}`, `{{g,h},f}`, `{{h,f},g}`.
pub fn jacobiator_terms(b: &Bivector, f: &TracePoly, g: &TracePoly, h: &TracePoly) -> [TracePoly; 3] {
    let n = b.n();
    let df = cyclic_gradient(f, n);
    let dg = cyclic_gradient(g, n);
    let dh = cyclic_gradient(h, n);
    let fg = b.eval_gradients(&df, &dg);
    let gh = b.eval_gradients(&dg, &dh);
    let hf = b.eval_gradients(&dh, &df);
    [
        b.eval_gradients(&cyclic_gradient(&fg, n), &dh),
        b.eval_gradients(&cyclic_gradient(&gh, n), &df),
        b.eval_gradients(&cyclic_gradient(&hf, n), &dg),
    ]
}

/// `{{f,g},h} + {{g,h},f} + {{h,f},g}`.
pub fn jacobiator(b: &Bivector, f: &TracePoly, g: &TracePoly, h: &TracePoly) -> TracePoly {
    let [t1, t2, t3] = jacobiator_terms(b, f, g, h);
    let mut out = t1;
    out += &t2;
    out += &t3;
    out.normalize()
}

/// The Jacobiator of the bracket induced by `r`, assembled directly from
/// index contractions of `r` with itself:
///
/// `{{P,Q},R} ~ sum r_{al,k}^{s,t} ( r_{i,j}^{al,b} tr(x_s P_i x_b Q_j x_t R_k)
///                                  + r_{i,j}^{a,al} tr(x_s Q_j x_a P_i x_t R_k) )`
///
/// summed cyclically over `(P,Q,R)`. Second derivatives are dropped, so this
/// agrees with [`jacobiator`] only for antisymmetric brackets.
pub fn jacobiator_index_formula(r: &RTensor, f: &TracePoly, g: &TracePoly, h: &TracePoly) -> TracePoly {
    let n = r.n();
    let nz = r.nonzero();
    // entries grouped by their third / fourth upper index
    let mut by_a: Vec<Vec<(usize, usize, usize, Complex64)>> = vec![Vec::new(); n];
    let mut by_b: Vec<Vec<(usize, usize, usize, Complex64)>> = vec![Vec::new(); n];
    for &(i, j, a, b, c) in &nz {
        by_a[a].push((i, j, b, c));
        by_b[b].push((i, j, a, c));
    }
    let grads = [f, g, h].map(|p| cyclic_gradient(p, n));
    let mut out = TracePoly::zero();
    let x = |i: usize| [Letter::x(i)];
    for (p, q, rr) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let (dp, dq, dr) = (&grads[p], &grads[q], &grads[rr]);
        for &(al, k, s, t, c_out) in &nz {
            if dr.parts[k].is_zero() {
                continue;
            }
            for &(i, j, b, c_in) in &by_a[al] {
                let coeff = c_out * c_in;
                add_six(&mut out, coeff, [&x(s), &x(b), &x(t)], [&dp.parts[i], &dq.parts[j], &dr.parts[k]]);
            }
            for &(i, j, a, c_in) in &by_b[al] {
                let coeff = c_out * c_in;
                add_six(&mut out, coeff, [&x(s), &x(a), &x(t)], [&dq.parts[j], &dp.parts[i], &dr.parts[k]]);
            }
        }
    }
    out.normalize()
}

/// Adds `coeff * tr(l0 P0 l1 P1 l2 P2)`.
fn add_six(out: &mut TracePoly, coeff: Complex64, l: [&[Letter; 1]; 3], p: [&NcPoly; 3]) {
    for (w0, c0) in p[0].iter() {
        for (w1, c1) in p[1].iter() {
            let c01 = coeff * c0 * c1;
            for (w2, c2) in p[2].iter() {
                out.add_term(
                    trace_of_concat(&[
                        l[0],
                        w0.letters(),
                        l[1],
                        w1.letters(),
                        l[2],
                        w2.letters(),
                    ]),
                    c01 * c2,
                );
            }
        }
    }
}

/// Polyvector data of degree one or two.
#[derive(Clone, Copy, Debug)]
pub enum PolyVector<'a> {
    Vector(&'a VectorField),
    Bivector(&'a Bivector),
}

impl PolyVector<'_> {
    pub fn degree(&self) -> usize {
        match self {
            PolyVector::Vector(_) => 1,
            PolyVector::Bivector(_) => 2,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            PolyVector::Vector(v) => v.n(),
            PolyVector::Bivector(b) => b.n(),
        }
    }

    fn eval(&self, args: &[&TracePoly]) -> TracePoly {
        match self {
            PolyVector::Vector(v) => v.apply(args[0]),
            PolyVector::Bivector(b) => b.eval(args[0], args[1]),
        }
    }
}

/// Permutations of `0..k` with their signs.
fn signed_permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut perms = Vec::new();
    rec(&mut Vec::new(), &mut (0..k).collect(), &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let inversions = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

/// Evaluate the Schouten bracket `[mu, nu]` on `p + q - 1` arguments:
///
/// `sum_s sign(s) mu(nu(a_s1..a_sq), ...) - (-1)^{(p-1)(q-1)} sum_s sign(s) nu(mu(a_s1..a_sp), ...)`.
pub fn schouten_eval(mu: PolyVector<'_>, nu: PolyVector<'_>, args: &[TracePoly]) -> Result<TracePoly> {
    let (p, q) = (mu.degree(), nu.degree());
    if p > 2 || q > 2 {
        return Err(Error::UnsupportedDegree { p, q });
    }
    if mu.n() != nu.n() {
        return Err(Error::SizeMismatch {
            expected: mu.n(),
            found: nu.n(),
        });
    }
    let k = p + q - 1;
    if args.len() != k {
        return Err(Error::Arity {
            expected: k,
            found: args.len(),
        });
    }
    for a in args {
        check_arity(mu.n(), a)?;
    }
    let second_sign = if (p - 1) * (q - 1) % 2 == 0 { -1.0 } else { 1.0 };
    let mut out = TracePoly::zero();
    for (perm, sign) in signed_permutations(k) {
        let a: Vec<&TracePoly> = perm.iter().map(|&i| &args[i]).collect();
        let inner = nu.eval(&a[..q]);
        let mut outer_args = vec![&inner];
        outer_args.extend_from_slice(&a[q..]);
        out.add_scaled(&mu.eval(&outer_args), Complex64::new(sign, 0.0));

        let inner = mu.eval(&a[..p]);
        let mut outer_args = vec![&inner];
        outer_args.extend_from_slice(&a[p..]);
        out.add_scaled(&nu.eval(&outer_args), Complex64::new(sign * second_sign, 0.0));
    }
    Ok(out.normalize())
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneityReport {
    pub homogeneous: bool,
    pub max_defect: f64,
    pub pairs_checked: usize,
}

/// Default absolute tolerance for homogeneity defects.
pub const HOMOGENEITY_TOL: f64 = 1e-9;

/// Check `nu(f^a, g^a) = nu(f, g)^a` on every pair of trace monomials of
/// degree `<= degree` plus `random_pairs` random polynomial pairs.
pub fn is_homogeneous_biv(b: &Bivector, degree: usize, random_pairs: usize, seed: u64) -> HomogeneityReport {
    let n = b.n();
    let monos: Vec<TracePoly> = sample::trace_monomials(n, degree)
        .iter()
        .map(|w| TracePoly::monomial(w.rep()))
        .collect();
    let mut pairs: Vec<(TracePoly, TracePoly)> = Vec::new();
    for f in &monos {
        for g in &monos {
            pairs.push((f.clone(), g.clone()));
        }
    }
    let mut rng = sample::rng(seed);
    for _ in 0..random_pairs {
        let f = sample::random_trace_poly(&mut rng, n, degree + 1, 3, false);
        let g = sample::random_trace_poly(&mut rng, n, degree + 1, 3, false);
        pairs.push((f, g));
    }
    let max_defect = pairs
        .par_iter()
        .map(|(f, g)| {
            let lhs = b.eval(&f.dilate(), &g.dilate());
            let rhs = b.eval(f, g).dilate();
            lhs.distance(&rhs)
        })
        .reduce(|| 0.0, f64::max);
    HomogeneityReport {
        homogeneous: max_defect <= HOMOGENEITY_TOL * b.max_abs().max(1.0),
        max_defect,
        pairs_checked: pairs.len(),
    }
}

/// A random antisymmetric `RTensor` with entries of size `O(1)`.
pub fn random_antisymmetric_rtensor<R: Rng>(rng: &mut R, n: usize, density: f64) -> RTensor {
    RTensor::from_fn(n, |_, _, _, _| {
        if rng.random_bool(density) {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
    .antisymmetrized()
}

/// The constant bivector `Theta_{0,0} = 1 (x) 1`.
pub fn constant_bivector(n: usize) -> Bivector {
    let mut b = Bivector::zero(n);
    b.add_term(0, 0, Word::one(), Word::one(), Complex64::new(1.0, 0.0));
    b
}
