//! The free associative Laurent algebra `C<x_0..x_{n-1}, x_i^-1, a, a^-1>`,
//! its trace space (cyclic words), and the tensor algebra `A (x) A^op`
//! acting on it by `(b (x) c)(f) = b f c`.

mod lincomb;
mod word;

use std::fmt::Write as _;

use num_complex::Complex64;

pub use lincomb::{LinComb, ZERO_THRESHOLD};
pub(crate) use word::{push_reduced, Letters};
pub use word::{reduce_word, Letter, Word, MAX_GENERATORS};

/// Element of the (Laurent) free algebra.
pub type NcPoly = LinComb<Word>;
/// Element of the trace space `A / [A, A]`.
pub type TracePoly = LinComb<CycWord>;
/// Element of `A (x) A^op`; the key `(b, c)` stands for `b (x) c`.
pub type Tensor = LinComb<(Word, Word)>;

pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Canonical representative of a cyclic class of words.
///
/// The representative is cyclically reduced (no cancellation across the
/// seam) and is the lexicographically smallest rotation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CycWord(Word);

impl CycWord {
    pub fn new(w: &Word) -> CycWord {
        canonical_cyclic(w.letters())
    }

    pub fn from_letters(letters: &[Letter]) -> CycWord {
        let w = reduce_word(letters);
        canonical_cyclic(w.letters())
    }

    pub fn rep(&self) -> &Word {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::fmt::Debug for CycWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "tr({:?})", self.0)
    }
}

/// Canonical cyclic form of an already reduced letter sequence.
pub(crate) fn canonical_cyclic(letters: &[Letter]) -> CycWord {
    let (mut s, mut e) = (0, letters.len());
    while e - s >= 2 && letters[s] == letters[e - 1].inverse() {
        s += 1;
        e -= 1;
    }
    let core = &letters[s..e];
    let len = core.len();
    if len <= 1 {
        return CycWord(Word(core.iter().copied().collect()));
    }
    let mut best = 0;
    for r in 1..len {
        for t in 0..len {
            let a = core[(r + t) % len];
            let b = core[(best + t) % len];
            if a != b {
                if a < b {
                    best = r;
                }
                break;
            }
        }
    }
    CycWord(Word(
        core[best..].iter().chain(core[..best].iter()).copied().collect(),
    ))
}

/// Cyclic class of the concatenation of several letter slices.
pub(crate) fn trace_of_concat(parts: &[&[Letter]]) -> CycWord {
    let mut buf = Letters::new();
    for part in parts {
        for &l in part.iter() {
            push_reduced(&mut buf, l);
        }
    }
    canonical_cyclic(&buf)
}

/// Reduced concatenation of several letter slices.
pub(crate) fn concat(parts: &[&[Letter]]) -> Word {
    let mut buf = Letters::new();
    for part in parts {
        for &l in part.iter() {
            push_reduced(&mut buf, l);
        }
    }
    Word(buf)
}

fn fmt_coeff(c: Complex64) -> String {
    format!("({},{})", c.re, c.im)
}

impl LinComb<Word> {
    pub fn one() -> NcPoly {
        NcPoly::term(Word::one(), ONE)
    }

    pub fn constant(c: Complex64) -> NcPoly {
        NcPoly::term(Word::one(), c)
    }

    pub fn monomial(w: Word) -> NcPoly {
        NcPoly::term(w, ONE)
    }

    pub fn x(i: usize) -> NcPoly {
        NcPoly::monomial(Word::x(i))
    }

    pub fn trace(&self) -> TracePoly {
        let mut out = TracePoly::with_capacity(self.len());
        for (w, c) in self.iter() {
            out.add_term(CycWord::new(w), *c);
        }
        out.normalize()
    }

    pub fn generator_bound(&self) -> usize {
        self.keys().map(Word::generator_bound).max().unwrap_or(0)
    }

    pub fn has_inverse_letters(&self) -> bool {
        self.keys().any(Word::has_inverse_letters)
    }

    pub fn render(&self, prefix: &str) -> String {
        render_terms(self.sorted_terms().into_iter().map(|(w, c)| (w.render(prefix), c)))
    }
}

impl std::ops::Mul<&NcPoly> for &NcPoly {
    type Output = NcPoly;
    fn mul(self, rhs: &NcPoly) -> NcPoly {
        poly_mul(self, rhs)
    }
}

/// Product in the free Laurent algebra.
pub fn poly_mul(f: &NcPoly, g: &NcPoly) -> NcPoly {
    let mut out = NcPoly::with_capacity(f.len() * g.len());
    for (u, a) in f.iter() {
        for (v, b) in g.iter() {
            out.add_term(u.mul(v), a * b);
        }
    }
    out.normalize()
}

/// The quotient map `A -> A / [A, A]`.
pub fn trace(f: &NcPoly) -> TracePoly {
    f.trace()
}

impl LinComb<CycWord> {
    pub fn monomial(w: &Word) -> TracePoly {
        TracePoly::term(CycWord::new(w), ONE)
    }

    pub fn of_gens(indices: &[usize]) -> TracePoly {
        TracePoly::monomial(&Word::gens(indices))
    }

    pub fn generator_bound(&self) -> usize {
        self.keys().map(|k| k.rep().generator_bound()).max().unwrap_or(0)
    }

    pub fn has_inverse_letters(&self) -> bool {
        self.keys().any(|k| k.rep().has_inverse_letters())
    }

    /// Some representative in `A` (the canonical words themselves).
    pub fn lift(&self) -> NcPoly {
        self.map_keys(|k| k.rep().clone())
    }

    pub fn render(&self, prefix: &str) -> String {
        render_terms(
            self.sorted_terms()
                .into_iter()
                .map(|(w, c)| (format!("tr({})", w.rep().render(prefix)), c)),
        )
    }
}

impl LinComb<(Word, Word)> {
    pub fn pure(left: Word, right: Word) -> Tensor {
        Tensor::term((left, right), ONE)
    }

    pub fn identity() -> Tensor {
        Tensor::pure(Word::one(), Word::one())
    }

    /// `(b (x) c)(f) = b f c`, extended linearly.
    pub fn apply(&self, f: &NcPoly) -> NcPoly {
        let mut out = NcPoly::with_capacity(self.len() * f.len());
        for ((b, d), t) in self.iter() {
            for (w, c) in f.iter() {
                out.add_term(concat(&[b.letters(), w.letters(), d.letters()]), t * c);
            }
        }
        out.normalize()
    }

    /// The anti-involution `(b (x) c)* = c (x) b`.
    pub fn star(&self) -> Tensor {
        self.map_keys(|(b, c)| (c.clone(), b.clone()))
    }

    /// Product in `A (x) A^op`: `(b (x) c)(b' (x) c') = b b' (x) c' c`.
    pub fn compose(&self, rhs: &Tensor) -> Tensor {
        let mut out = Tensor::with_capacity(self.len() * rhs.len());
        for ((b, c), s) in self.iter() {
            for ((b2, c2), t) in rhs.iter() {
                out.add_term((b.mul(b2), c2.mul(c)), s * t);
            }
        }
        out.normalize()
    }

    pub fn has_inverse_letters(&self) -> bool {
        self.keys()
            .any(|(b, c)| b.has_inverse_letters() || c.has_inverse_letters())
    }

    pub fn render(&self, prefix: &str) -> String {
        render_terms(self.sorted_terms().into_iter().map(|((b, c), t)| {
            (format!("{} ⊗ {}", b.render(prefix), c.render(prefix)), t)
        }))
    }
}

pub fn tensor_apply(t: &Tensor, f: &NcPoly) -> NcPoly {
    t.apply(f)
}

pub fn tensor_star(t: &Tensor) -> Tensor {
    t.star()
}

fn render_terms<I: Iterator<Item = (String, Complex64)>>(terms: I) -> String {
    let mut out = String::new();
    for (i, (w, c)) in terms.enumerate() {
        if i > 0 {
            out.push_str(" + ");
        }
        let _ = write!(out, "{}*{}", fmt_coeff(c), w);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

/// Apply the algebra homomorphism determined by `image` on positive letters;
/// inverse letters go to the inverse of the image word.
pub fn substitute_word<F: Fn(Letter) -> Word>(w: &Word, image: &F) -> Word {
    let mut buf = Letters::new();
    for &l in w.letters() {
        let img = image(l.positive());
        if l.is_inverse() {
            for &m in img.letters().iter().rev() {
                push_reduced(&mut buf, m.inverse());
            }
        } else {
            for &m in img.letters() {
                push_reduced(&mut buf, m);
            }
        }
    }
    Word(buf)
}

pub fn substitute<F: Fn(Letter) -> Word>(f: &NcPoly, image: &F) -> NcPoly {
    f.map_keys(|w| substitute_word(w, image)).normalize()
}

pub fn substitute_trace<F: Fn(Letter) -> Word>(f: &TracePoly, image: &F) -> TracePoly {
    f.map_keys(|w| CycWord::new(&substitute_word(w.rep(), image)))
        .normalize()
}

fn dilation_image(l: Letter) -> Word {
    if l.is_aux() {
        Word::letter(l)
    } else {
        Word::from_letters([Letter::A, l])
    }
}

/// The homomorphism `f -> f^a` given by `x_i -> a x_i`, `a -> a`.
pub trait Dilate {
    fn dilate(&self) -> Self;
}

impl Dilate for NcPoly {
    fn dilate(&self) -> NcPoly {
        substitute(self, &dilation_image)
    }
}

impl Dilate for TracePoly {
    fn dilate(&self) -> TracePoly {
        substitute_trace(self, &dilation_image)
    }
}

impl Dilate for Word {
    fn dilate(&self) -> Word {
        substitute_word(self, &dilation_image)
    }
}
