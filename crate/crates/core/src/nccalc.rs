//! Cyclic partial derivatives `F -> A`, double derivatives `A -> A (x) A^op`
//! and the chain rule for affine chart coordinates `u_j = x_c^-1 x_j`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::freealg::{
    concat, substitute_trace, CycWord, Letter, NcPoly, Tensor, TracePoly, Word,
};

/// The cyclic partial derivatives `df/dx_i`, one per generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradient {
    pub parts: Vec<NcPoly>,
}

impl Gradient {
    pub fn zero(n: usize) -> Gradient {
        Gradient {
            parts: vec![NcPoly::zero(); n],
        }
    }

    pub fn n(&self) -> usize {
        self.parts.len()
    }

    /// `sum_i x_i df/dx_i`.
    pub fn left_euler(&self) -> NcPoly {
        let mut out = NcPoly::zero();
        for (i, p) in self.parts.iter().enumerate() {
            out += &(&NcPoly::x(i) * p);
        }
        out.normalize()
    }

    /// `sum_i df/dx_i x_i`.
    pub fn right_euler(&self) -> NcPoly {
        let mut out = NcPoly::zero();
        for (i, p) in self.parts.iter().enumerate() {
            out += &(p * &NcPoly::x(i));
        }
        out.normalize()
    }
}

/// The double derivatives `Df/Dx_i`, one per generator.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleGradient {
    pub parts: Vec<Tensor>,
}

fn add_cyclic_word_partials(parts: &mut [NcPoly], w: &CycWord, coeff: Complex64) {
    let letters = w.rep().letters();
    let n = parts.len();
    for (p, &l) in letters.iter().enumerate() {
        let Some(g) = l.generator() else { continue };
        if g >= n {
            continue;
        }
        let after = &letters[p + 1..];
        let before = &letters[..p];
        if l.is_inverse() {
            // d(x^-1) = -x^-1 dx x^-1
            let inv = [l];
            parts[g].add_term(concat(&[&inv, after, before, &inv]), -coeff);
        } else {
            parts[g].add_term(concat(&[after, before]), coeff);
        }
    }
}

/// All cyclic partial derivatives of `f` with respect to `x_0..x_{n-1}`.
/// Letters outside that range (including `a`) are treated as constants.
pub fn cyclic_gradient(f: &TracePoly, n: usize) -> Gradient {
    let mut grad = Gradient::zero(n);
    for (w, c) in f.iter() {
        add_cyclic_word_partials(&mut grad.parts, w, *c);
    }
    for p in grad.parts.iter_mut() {
        p.prune(crate::freealg::ZERO_THRESHOLD);
    }
    grad
}

pub fn cyclic_diff(f: &TracePoly, i: usize, n: usize) -> Result<NcPoly> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    let mut part = NcPoly::zero();
    for (w, c) in f.iter() {
        for (p, &l) in w.rep().letters().iter().enumerate() {
            if l.generator() != Some(i) {
                continue;
            }
            let letters = w.rep().letters();
            let after = &letters[p + 1..];
            let before = &letters[..p];
            if l.is_inverse() {
                let inv = [l];
                part.add_term(concat(&[&inv, after, before, &inv]), -c);
            } else {
                part.add_term(concat(&[after, before]), *c);
            }
        }
    }
    Ok(part.normalize())
}

pub fn double_diff(f: &NcPoly, i: usize, n: usize) -> Result<Tensor> {
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, n });
    }
    Ok(double_gradient(f, n).parts.swap_remove(i))
}

/// `df = sum_i Df/Dx_i (dx_i)`: each occurrence splits its word into prefix (x) suffix.
pub fn double_gradient(f: &NcPoly, n: usize) -> DoubleGradient {
    let mut parts = vec![Tensor::zero(); n];
    for (w, c) in f.iter() {
        let letters = w.letters();
        for (p, &l) in letters.iter().enumerate() {
            let Some(g) = l.generator() else { continue };
            if g >= n {
                continue;
            }
            let prefix = &letters[..p];
            let suffix = &letters[p + 1..];
            if l.is_inverse() {
                let inv = [l];
                parts[g].add_term((concat(&[prefix, &inv]), concat(&[&inv, suffix])), -c);
            } else {
                parts[g].add_term((Word(prefix.into()), Word(suffix.into())), *c);
            }
        }
    }
    DoubleGradient {
        parts: parts.into_iter().map(Tensor::normalize).collect(),
    }
}

/// An affine chart of projective space: `u_j = x_c^-1 x_{m(j)}` where `c` is the
/// inverted homogeneous variable and `m` enumerates the remaining indices in order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Chart {
    n: usize,
    chart: usize,
}

impl Chart {
    pub fn new(n: usize, chart: usize) -> Result<Chart> {
        if n < 2 {
            return Err(Error::InvalidParams(format!(
                "projective charts need n >= 2, got {n}"
            )));
        }
        if chart >= n {
            return Err(Error::InvalidChart { chart, n });
        }
        Ok(Chart { n, chart })
    }

    /// The default chart, inverting the last homogeneous variable.
    pub fn standard(n: usize) -> Result<Chart> {
        Chart::new(n, n.saturating_sub(1))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    /// Number of affine variables, `n - 1`.
    pub fn m(&self) -> usize {
        self.n - 1
    }

    pub fn u_to_x(&self, j: usize) -> usize {
        if j < self.chart {
            j
        } else {
            j + 1
        }
    }

    pub fn x_to_u(&self, i: usize) -> Option<usize> {
        use std::cmp::Ordering::*;
        match i.cmp(&self.chart) {
            Less => Some(i),
            Equal => None,
            Greater => Some(i - 1),
        }
    }

    /// The word `u_i` for a homogeneous index `i`; the chart index maps to 1.
    pub fn u_word(&self, i: usize) -> Word {
        match self.x_to_u(i) {
            Some(j) => Word::x(j),
            None => Word::one(),
        }
    }

    fn image(&self, l: Letter) -> Word {
        let j = l.generator().expect("checked by validate");
        Word::from_letters([Letter::x_inv(self.chart), Letter::x(self.u_to_x(j))])
    }

    fn validate(&self, f: &TracePoly) -> Result<()> {
        for w in f.keys() {
            for l in w.rep().letters() {
                match l.generator() {
                    None => {
                        return Err(Error::Malformed(format!(
                            "auxiliary letter in affine expression {:?}",
                            w
                        )))
                    }
                    Some(j) if j >= self.m() => {
                        return Err(Error::Malformed(format!(
                            "u{j} is not a coordinate of a chart with {} variables",
                            self.m()
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Rewrite an expression in the `u` variables as a homogeneous Laurent
    /// expression in the `x` variables.
    pub fn expand_trace(&self, f: &TracePoly) -> Result<TracePoly> {
        self.validate(f)?;
        Ok(substitute_trace(f, &|l| self.image(l)))
    }

    pub fn expand(&self, f: &NcPoly) -> Result<NcPoly> {
        self.validate(&f.trace())?;
        Ok(crate::freealg::substitute(f, &|l| self.image(l)))
    }
}

/// Cyclic partials in the homogeneous `x` variables of an expression written
/// in the chart variables, via the chain rule:
/// `df/dx_i = (df/du_i) x_c^-1` and `df/dx_c = -sum_j x_c^-1 x_j (df/du_j) x_c^-1`,
/// with every `u` expanded.
pub fn affine_partials(f: &TracePoly, chart: &Chart) -> Result<Gradient> {
    chart.validate(f)?;
    let du = cyclic_gradient(f, chart.m());
    let c = chart.chart();
    let xc_inv = Word::letter(Letter::x_inv(c));
    let mut grad = Gradient::zero(chart.n());
    for (j, part) in du.parts.iter().enumerate() {
        let expanded = chart.expand(part)?;
        let i = chart.u_to_x(j);
        let u_j = Word::from_letters([Letter::x_inv(c), Letter::x(i)]);
        for (w, coeff) in expanded.iter() {
            grad.parts[i].add_term(w.mul(&xc_inv), *coeff);
            grad.parts[c].add_term(concat(&[u_j.letters(), w.letters(), xc_inv.letters()]), -coeff);
        }
    }
    for p in grad.parts.iter_mut() {
        p.prune(crate::freealg::ZERO_THRESHOLD);
    }
    Ok(grad)
}
