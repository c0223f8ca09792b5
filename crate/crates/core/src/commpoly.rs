//! Commutative polynomials with exponent-vector keys, used for abelianized
//! brackets and their Jacobi checks.

use num_complex::Complex64;

use crate::freealg::LinComb;

/// Exponent vector of a commutative monomial.
pub type Monomial = Vec<u16>;

pub type CommPoly = LinComb<Monomial>;

pub fn var(n: usize, i: usize) -> CommPoly {
    let mut e = vec![0; n];
    e[i] = 1;
    CommPoly::term(e, Complex64::new(1.0, 0.0))
}

/// The monomial with the given variable multiset.
pub fn monomial(n: usize, vars: &[usize]) -> Monomial {
    let mut e = vec![0; n];
    for &v in vars {
        e[v] += 1;
    }
    e
}

pub fn mul(f: &CommPoly, g: &CommPoly) -> CommPoly {
    let mut out = CommPoly::zero();
    for (a, x) in f.iter() {
        for (b, y) in g.iter() {
            let e: Monomial = a.iter().zip(b.iter()).map(|(p, q)| p + q).collect();
            out.add_term(e, x * y);
        }
    }
    out
}

pub fn partial(f: &CommPoly, i: usize) -> CommPoly {
    let mut out = CommPoly::zero();
    for (a, x) in f.iter() {
        if a[i] > 0 {
            let mut e = a.clone();
            e[i] -= 1;
            out.add_term(e, x * a[i] as f64);
        }
    }
    out
}

/// Evaluate at a point.
pub fn eval(f: &CommPoly, point: &[Complex64]) -> Complex64 {
    f.iter()
        .map(|(e, c)| {
            e.iter()
                .zip(point)
                .fold(*c, |acc, (&p, x)| acc * x.powu(p as u32))
        })
        .sum()
}
