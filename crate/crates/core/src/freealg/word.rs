use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

const CLASS_SHIFT: u16 = 12;
const INDEX_MASK: u16 = (1 << CLASS_SHIFT) - 1;
const INV_BIT: u16 = 1 << CLASS_SHIFT;
const AUX: u16 = 2 << CLASS_SHIFT;

/// Maximum generator index representable by a [`Letter`].
pub const MAX_GENERATORS: usize = INDEX_MASK as usize + 1;

/// A generator `x_i`, the auxiliary constant `a`, or one of their inverses.
///
/// The packed encoding orders letters as
/// `x_0 < x_1 < ... < x_0^-1 < x_1^-1 < ... < a < a^-1`,
/// which is the order used for canonical cyclic representatives.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u16);

impl Letter {
    pub const A: Letter = Letter(AUX);
    pub const A_INV: Letter = Letter(AUX | INV_BIT);

    pub fn x(index: usize) -> Letter {
        assert!(index < MAX_GENERATORS, "generator index {index} too large");
        Letter(index as u16)
    }

    pub fn x_inv(index: usize) -> Letter {
        Letter::x(index).inverse()
    }

    #[inline]
    pub fn inverse(self) -> Letter {
        Letter(self.0 ^ INV_BIT)
    }

    #[inline]
    pub fn is_inverse(self) -> bool {
        self.0 & INV_BIT != 0
    }

    #[inline]
    pub fn is_aux(self) -> bool {
        self.0 >= AUX
    }

    /// Generator index for `x_i` and `x_i^-1`; `None` for `a`, `a^-1`.
    #[inline]
    pub fn generator(self) -> Option<usize> {
        if self.is_aux() {
            None
        } else {
            Some((self.0 & INDEX_MASK) as usize)
        }
    }

    /// The letter with exponent +1 and the same symbol.
    #[inline]
    pub fn positive(self) -> Letter {
        Letter(self.0 & !INV_BIT)
    }

    pub fn exponent(self) -> i32 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    pub fn render(self, prefix: &str) -> String {
        let base = match self.generator() {
            Some(i) => format!("{prefix}{i}"),
            None => "a".to_string(),
        };
        if self.is_inverse() {
            format!("{base}^-1")
        } else {
            base
        }
    }

    fn parse(token: &str, prefix: &str) -> Result<Letter> {
        let (base, inv) = match token.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (token, false),
        };
        let letter = if base == "a" {
            Letter::A
        } else if let Some(idx) = base.strip_prefix(prefix) {
            let i: usize = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad letter `{token}`")))?;
            if i >= MAX_GENERATORS {
                return Err(Error::Parse(format!("generator index {i} too large")));
            }
            Letter::x(i)
        } else {
            return Err(Error::Parse(format!("bad letter `{token}`")));
        };
        Ok(if inv { letter.inverse() } else { letter })
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

pub(crate) type Letters = SmallVec<[Letter; 16]>;

/// A reduced monomial of the free Laurent algebra. The empty word is the unit.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub(crate) Letters);

/// Push `l` onto a reduced buffer, cancelling against the last letter if possible.
#[inline]
pub(crate) fn push_reduced(buf: &mut Letters, l: Letter) {
    if buf.last() == Some(&l.inverse()) {
        buf.pop();
    } else {
        buf.push(l);
    }
}

/// Free reduction of an arbitrary letter sequence.
pub fn reduce_word(letters: &[Letter]) -> Word {
    let mut buf = Letters::new();
    for &l in letters {
        push_reduced(&mut buf, l);
    }
    Word(buf)
}

impl Word {
    pub fn one() -> Word {
        Word(Letters::new())
    }

    pub fn letter(l: Letter) -> Word {
        let mut buf = Letters::new();
        buf.push(l);
        Word(buf)
    }

    pub fn x(i: usize) -> Word {
        Word::letter(Letter::x(i))
    }

    /// Word in positive generators, e.g. `Word::gens(&[0, 0, 1])` is `x0.x0.x1`.
    pub fn gens(indices: &[usize]) -> Word {
        Word(indices.iter().map(|&i| Letter::x(i)).collect())
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Word {
        let mut buf = Letters::new();
        for l in letters {
            push_reduced(&mut buf, l);
        }
        Word(buf)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, rhs: &Word) -> Word {
        let mut buf = self.0.clone();
        for &l in rhs.0.iter() {
            push_reduced(&mut buf, l);
        }
        Word(buf)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn has_inverse_letters(&self) -> bool {
        self.0.iter().any(|l| l.is_inverse())
    }

    pub fn has_aux(&self) -> bool {
        self.0.iter().any(|l| l.is_aux())
    }

    /// Largest generator index plus one (0 for words without generators).
    pub fn generator_bound(&self) -> usize {
        self.0
            .iter()
            .filter_map(|l| l.generator())
            .map(|i| i + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn render(&self, prefix: &str) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|l| l.render(prefix))
            .collect::<Vec<_>>()
            .join(".")
    }

    /// Parse the dotted rendering produced by [`Word::render`]; `1` is the unit.
    pub fn parse(s: &str, prefix: &str) -> Result<Word> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Ok(Word::one());
        }
        let letters = s
            .split('.')
            .map(|tok| Letter::parse(tok.trim(), prefix))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::from_letters(letters))
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}
