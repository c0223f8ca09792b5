//! Brackets on affine charts of noncommutative projective space: descent of
//! quadratic homogeneous bivectors, chart changes, semantic equivalence and
//! Jacobi batteries.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freealg::{substitute_trace, Letter, TracePoly, Word};
use crate::nccalc::Chart;
use crate::polyvec::{jacobiator, Bivector, RTensor};
use crate::sample;

/// Default tolerance for Jacobi residuals and equivalence defects.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Anything that evaluates a bracket of trace polynomials in `arity` variables.
pub trait BracketEval: Sync {
    fn arity(&self) -> usize;
    fn bracket(&self, f: &TracePoly, g: &TracePoly) -> TracePoly;
    fn as_bivector(&self) -> &Bivector;
}

impl BracketEval for Bivector {
    fn arity(&self) -> usize {
        self.n()
    }

    fn bracket(&self, f: &TracePoly, g: &TracePoly) -> TracePoly {
        self.eval(f, g)
    }

    fn as_bivector(&self) -> &Bivector {
        self
    }
}

/// A bracket on `C<u_0, ..., u_{m-1}>` for one affine chart of `CP^{n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineBracket {
    chart: Chart,
    bivector: Bivector,
    provenance: Option<RTensor>,
}

impl AffineBracket {
    /// Wrap a bivector over the `n_total - 1` chart variables.
    pub fn new(n_total: usize, chart: usize, bivector: Bivector) -> Result<AffineBracket> {
        let chart = Chart::new(n_total, chart)?;
        if bivector.n() != chart.m() {
            return Err(Error::SizeMismatch {
                expected: chart.m(),
                found: bivector.n(),
            });
        }
        Ok(AffineBracket {
            chart,
            bivector,
            provenance: None,
        })
    }

    pub fn n_total(&self) -> usize {
        self.chart.n()
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn m(&self) -> usize {
        self.chart.m()
    }

    pub fn bivector(&self) -> &Bivector {
        &self.bivector
    }

    pub fn provenance(&self) -> Option<&RTensor> {
        self.provenance.as_ref()
    }

    pub fn scale(&self, c: Complex64) -> AffineBracket {
        AffineBracket {
            chart: self.chart,
            bivector: self.bivector.scale(c),
            provenance: self.provenance.as_ref().map(|r| r.scale(c)),
        }
    }

    /// Attach the homogeneous tensor this bracket was descended from.
    pub fn with_provenance(mut self, r: RTensor) -> Result<AffineBracket> {
        if r.n() != self.n_total() {
            return Err(Error::SizeMismatch {
                expected: self.n_total(),
                found: r.n(),
            });
        }
        self.provenance = Some(r);
        Ok(self)
    }

    /// Replace the bivector, dropping provenance.
    pub fn with_bivector(&self, bivector: Bivector) -> Result<AffineBracket> {
        AffineBracket::new(self.n_total(), self.chart.chart(), bivector)
    }

    pub fn eval(&self, f: &TracePoly, g: &TracePoly) -> TracePoly {
        self.bivector.eval(f, g)
    }
}

impl BracketEval for AffineBracket {
    fn arity(&self) -> usize {
        self.m()
    }

    fn bracket(&self, f: &TracePoly, g: &TracePoly) -> TracePoly {
        self.eval(f, g)
    }

    fn as_bivector(&self) -> &Bivector {
        &self.bivector
    }
}

/// Descend to the standard chart `u_j = x_{n-1}^-1 x_j`.
pub fn descend(r: &RTensor) -> Result<AffineBracket> {
    if r.n() < 2 {
        return Err(Error::InvalidParams(format!(
            "descent needs n >= 2, got {}",
            r.n()
        )));
    }
    descend_in_chart(r, r.n() - 1)
}

/// The chart bracket obtained by substituting `x_i = x_c u_i` into the
/// quadratic bivector, with `u_c = 1`:
///
/// `Theta_{i,j} = sum_{a,b} r_{ij}^{ab} u_b (x) u_a - r_{cj}^{ab} u_b (x) u_a u_i
///               - r_{ic}^{ab} u_b u_j (x) u_a + r_{cc}^{ab} u_b u_j (x) u_a u_i`.
pub fn descend_in_chart(r: &RTensor, chart: usize) -> Result<AffineBracket> {
    let n = r.n();
    let chart = Chart::new(n, chart)?;
    let c = chart.chart();
    let m = chart.m();
    let mut biv = Bivector::zero(m);
    let u = |i: usize| chart.u_word(i);
    for ui in 0..m {
        let i = chart.u_to_x(ui);
        for uj in 0..m {
            let j = chart.u_to_x(uj);
            let t = biv.entry_mut(ui, uj);
            for a in 0..n {
                for b in 0..n {
                    let terms = [
                        (r.get(i, j, a, b), u(b), u(a)),
                        (-r.get(c, j, a, b), u(b), u(a).mul(&u(i))),
                        (-r.get(i, c, a, b), u(b).mul(&u(j)), u(a)),
                        (r.get(c, c, a, b), u(b).mul(&u(j)), u(a).mul(&u(i))),
                    ];
                    for (coeff, left, right) in terms {
                        t.add_term((left, right), coeff);
                    }
                }
            }
            *t = std::mem::take(t).normalize();
        }
    }
    Ok(AffineBracket {
        chart,
        bivector: biv,
        provenance: Some(r.clone()),
    })
}

/// Re-descend the stored homogeneous data into another chart.
pub fn chart_transform(b: &AffineBracket, new_chart: usize) -> Result<AffineBracket> {
    let r = b.provenance().ok_or(Error::MissingProvenance)?;
    descend_in_chart(r, new_chart)
}

/// Rewrite an expression in the variables of chart `from` in terms of chart
/// `to`, using `u_{i,from} = u_{from,to}^-1 u_{i,to}`.
pub fn transfer_trace(f: &TracePoly, from: &Chart, to: &Chart) -> Result<TracePoly> {
    if from.n() != to.n() {
        return Err(Error::SizeMismatch {
            expected: from.n(),
            found: to.n(),
        });
    }
    if from.chart() == to.chart() {
        return Ok(f.clone());
    }
    if f.generator_bound() > from.m() || f.keys().any(|w| w.rep().has_aux()) {
        return Err(Error::Malformed(format!(
            "expression is not over the {} chart variables",
            from.m()
        )));
    }
    let pivot = to.x_to_u(from.chart()).expect("distinct charts");
    let image = |l: Letter| {
        let i = from.u_to_x(l.generator().expect("checked above"));
        match to.x_to_u(i) {
            Some(j) => Word::from_letters([Letter::x_inv(pivot), Letter::x(j)]),
            None => Word::letter(Letter::x_inv(pivot)),
        }
    };
    Ok(substitute_trace(f, &image))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivReport {
    pub equivalent: bool,
    pub max_defect: f64,
    pub pairs_checked: usize,
}

/// Ordered pairs of trace monomials of degree `<= degree` followed by
/// `random` seeded pairs of degree `degree + 1 ..= degree + 2`.
fn test_pairs(m: usize, degree: usize, random: usize, seed: u64) -> Vec<(TracePoly, TracePoly)> {
    let monos: Vec<TracePoly> = sample::trace_monomials(m, degree)
        .iter()
        .map(|w| TracePoly::monomial(w.rep()))
        .collect();
    let mut pairs = Vec::with_capacity(monos.len() * monos.len() + random);
    for f in &monos {
        for g in &monos {
            pairs.push((f.clone(), g.clone()));
        }
    }
    let mut rng = sample::rng(seed);
    for _ in 0..random {
        let f = sample::random_trace_monomial(&mut rng, m, degree + 1, degree + 2);
        let g = sample::random_trace_monomial(&mut rng, m, degree + 1, degree + 2);
        pairs.push((f, g));
    }
    pairs
}

/// Semantic comparison: the two brackets must agree on every pair of trace
/// monomials of degree `<= degree` and on 100 random higher-degree pairs.
pub fn biv_equiv<B1: BracketEval, B2: BracketEval>(b1: &B1, b2: &B2, degree: usize) -> Result<EquivReport> {
    biv_equiv_seeded(b1, b2, degree, 100, 0)
}

pub fn biv_equiv_seeded<B1: BracketEval, B2: BracketEval>(
    b1: &B1,
    b2: &B2,
    degree: usize,
    random_pairs: usize,
    seed: u64,
) -> Result<EquivReport> {
    if b1.arity() != b2.arity() {
        return Err(Error::SizeMismatch {
            expected: b1.arity(),
            found: b2.arity(),
        });
    }
    let pairs = test_pairs(b1.arity(), degree, random_pairs, seed);
    let max_defect = pairs
        .par_iter()
        .map(|(f, g)| b1.bracket(f, g).distance(&b2.bracket(f, g)))
        .reduce(|| 0.0, f64::max);
    Ok(EquivReport {
        equivalent: max_defect < RESIDUAL_TOL,
        max_defect,
        pairs_checked: pairs.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JacobiReport {
    pub max_residual: f64,
    /// Largest coefficient among the three nested brackets, for scale.
    pub scale: f64,
    pub triples_checked: usize,
}

fn triples_of(monos: &[TracePoly]) -> Vec<(TracePoly, TracePoly, TracePoly)> {
    let mut out = Vec::new();
    for i in 0..monos.len() {
        for j in i + 1..monos.len() {
            for k in j + 1..monos.len() {
                out.push((monos[i].clone(), monos[j].clone(), monos[k].clone()));
            }
        }
    }
    out
}

fn run_jacobi(b: &Bivector, triples: &[(TracePoly, TracePoly, TracePoly)]) -> JacobiReport {
    let (max_residual, scale) = triples
        .par_iter()
        .map(|(f, g, h)| {
            let terms = crate::polyvec::jacobiator_terms(b, f, g, h);
            let scale = terms.iter().map(TracePoly::max_abs).fold(0.0, f64::max);
            let mut sum = terms[0].clone();
            sum += &terms[1];
            sum += &terms[2];
            (sum.max_abs(), scale)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    JacobiReport {
        max_residual,
        scale,
        triples_checked: triples.len(),
    }
}

/// Jacobiator of a chart bracket over all triples of distinct trace
/// monomials of degree `1..=degree`, plus 50 random triples of degree
/// `<= degree + 2`.
pub fn jacobi_affine<B: BracketEval>(b: &B, degree: usize, seed: u64) -> JacobiReport {
    let m = b.arity();
    let monos: Vec<TracePoly> = sample::trace_monomials(m, degree)
        .iter()
        .map(|w| TracePoly::monomial(w.rep()))
        .collect();
    let mut triples = triples_of(&monos);
    let mut rng = sample::rng(seed);
    for _ in 0..50 {
        let mut pick = || sample::random_trace_monomial(&mut rng, m, 1, degree + 2);
        triples.push((pick(), pick(), pick()));
    }
    run_jacobi(b.as_bivector(), &triples)
}

/// Homogeneous test triples: chart monomials of degree `1..=degree` expanded
/// to Laurent expressions in the `x` variables.
pub fn homogeneous_triples(chart: &Chart, degree: usize) -> Result<Vec<(TracePoly, TracePoly, TracePoly)>> {
    let monos = sample::trace_monomials(chart.m(), degree)
        .iter()
        .map(|w| chart.expand_trace(&TracePoly::monomial(w.rep())))
        .collect::<Result<Vec<_>>>()?;
    Ok(triples_of(&monos))
}

/// The Jacobiator of the homogeneous bracket evaluated directly in the
/// Laurent `x` algebra; never builds a chart bracket.
pub fn jacobi_homogeneous(r: &RTensor, triples: &[(TracePoly, TracePoly, TracePoly)]) -> JacobiReport {
    run_jacobi(&r.to_bivector(), triples)
}

/// Largest difference between the expanded chart Jacobiator and the
/// homogeneous Jacobiator of the expanded arguments.
pub fn path_defect(b: &AffineBracket, r: &RTensor, f: &TracePoly, g: &TracePoly, h: &TracePoly) -> Result<f64> {
    let chart = b.chart();
    let chart_side = chart.expand_trace(&jacobiator(b.bivector(), f, g, h))?;
    let (fx, gx, hx) = (chart.expand_trace(f)?, chart.expand_trace(g)?, chart.expand_trace(h)?);
    let homog = jacobiator(&r.to_bivector(), &fx, &gx, &hx);
    Ok(chart_side.distance(&homog))
}
