use std::hash::Hash;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rustc_hash::FxHashMap;

/// Relative zero threshold used by [`LinComb::normalize`].
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// A finite complex linear combination of basis keys.
///
/// Exact cancellations are removed eagerly; numerical dust is removed by
/// [`LinComb::normalize`], which drops every coefficient below
/// `ZERO_THRESHOLD * max |coefficient|`.
#[derive(Clone, Debug)]
pub struct LinComb<K: Eq + Hash> {
    terms: FxHashMap<K, Complex64>,
}

impl<K: Eq + Hash> Default for LinComb<K> {
    fn default() -> Self {
        LinComb {
            terms: FxHashMap::default(),
        }
    }
}

impl<K: Eq + Hash> PartialEq for LinComb<K> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<K: Clone + Eq + Hash + Ord> LinComb<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(key: K, coeff: Complex64) -> Self {
        let mut out = Self::zero();
        out.add_term(key, coeff);
        out
    }

    pub fn with_capacity(cap: usize) -> Self {
        LinComb {
            terms: FxHashMap::with_capacity_and_hasher(cap, Default::default()),
        }
    }

    #[inline]
    pub fn add_term(&mut self, key: K, coeff: Complex64) {
        if coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(key) {
            Entry::Occupied(mut e) => {
                let v = *e.get() + coeff;
                if v == Complex64::new(0.0, 0.0) {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
        }
    }

    pub fn coeff(&self, key: &K) -> Complex64 {
        self.terms.get(key).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Complex64)> {
        self.terms.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.terms.keys()
    }

    /// Terms sorted by key, for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(&K, Complex64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(k, c)| (k, *c)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn add_scaled(&mut self, other: &Self, scale: Complex64) {
        for (k, c) in other.terms.iter() {
            self.add_term(k.clone(), c * scale);
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::with_capacity(self.len());
        for (k, c) in self.terms.iter() {
            out.add_term(k.clone(), c * s);
        }
        out
    }

    /// Drop coefficients with magnitude at most `rel * max |coefficient|`.
    pub fn prune(&mut self, rel: f64) {
        let cut = rel * self.max_abs();
        self.terms.retain(|_, c| c.norm() > cut);
    }

    pub fn normalize(mut self) -> Self {
        self.prune(ZERO_THRESHOLD);
        self
    }

    /// Largest coefficient of `self - other`.
    pub fn distance(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for (k, c) in self.terms.iter() {
            d = d.max((c - other.coeff(k)).norm());
        }
        for (k, c) in other.terms.iter() {
            if !self.terms.contains_key(k) {
                d = d.max(c.norm());
            }
        }
        d
    }

    pub fn map_keys<K2, F>(&self, f: F) -> LinComb<K2>
    where
        K2: Clone + Eq + Hash + Ord,
        F: Fn(&K) -> K2,
    {
        let mut out = LinComb::with_capacity(self.len());
        for (k, c) in self.terms.iter() {
            out.add_term(f(k), *c);
        }
        out
    }
}

impl<K: Clone + Eq + Hash + Ord> FromIterator<(K, Complex64)> for LinComb<K> {
    fn from_iter<I: IntoIterator<Item = (K, Complex64)>>(iter: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in iter {
            out.add_term(k, c);
        }
        out
    }
}

impl<K: Clone + Eq + Hash + Ord> AddAssign<&LinComb<K>> for LinComb<K> {
    fn add_assign(&mut self, rhs: &LinComb<K>) {
        self.add_scaled(rhs, Complex64::new(1.0, 0.0));
    }
}

impl<K: Clone + Eq + Hash + Ord> SubAssign<&LinComb<K>> for LinComb<K> {
    fn sub_assign(&mut self, rhs: &LinComb<K>) {
        self.add_scaled(rhs, Complex64::new(-1.0, 0.0));
    }
}

impl<K: Clone + Eq + Hash + Ord> Add for &LinComb<K> {
    type Output = LinComb<K>;
    fn add(self, rhs: &LinComb<K>) -> LinComb<K> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<K: Clone + Eq + Hash + Ord> Sub for &LinComb<K> {
    type Output = LinComb<K>;
    fn sub(self, rhs: &LinComb<K>) -> LinComb<K> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<K: Clone + Eq + Hash + Ord> Neg for &LinComb<K> {
    type Output = LinComb<K>;
    fn neg(self) -> LinComb<K> {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl<K: Clone + Eq + Hash + Ord> Mul<Complex64> for &LinComb<K> {
    type Output = LinComb<K>;
    fn mul(self, rhs: Complex64) -> LinComb<K> {
        self.scale(rhs)
    }
}

impl<K: Clone + Eq + Hash + Ord> Mul<f64> for &LinComb<K> {
    type Output = LinComb<K>;
    fn mul(self, rhs: f64) -> LinComb<K> {
        self.scale(Complex64::new(rhs, 0.0))
    }
}
