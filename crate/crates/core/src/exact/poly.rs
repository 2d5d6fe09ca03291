//! Bivariate polynomials in the real indeterminates `eps` and `u`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::gaussian::GaussianRational;
use super::rational::Rational;

/// Exponent pair `(deg_eps, deg_u)`.
pub type Monomial = (u32, u32);

/// Sparse polynomial with Gaussian-rational coefficients. Zero coefficients are
/// never stored, so structural equality is polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyEU {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl PolyEU {
    pub fn constant(c: GaussianRational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: GaussianRational, de: u32, du: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((de, du), c);
        }
        Self { terms }
    }

    pub fn int(value: i64) -> Self {
        Self::constant(GaussianRational::from_ints(value, 0))
    }

    pub fn i() -> Self {
        Self::constant(GaussianRational::i())
    }

    pub fn eps() -> Self {
        Self::monomial(GaussianRational::one(), 1, 0)
    }

    pub fn u() -> Self {
        Self::monomial(GaussianRational::one(), 0, 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, de: u32, du: u32) -> GaussianRational {
        self.terms.get(&(de, du)).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> GaussianRational {
        self.coeff(0, 0)
    }

    fn add_term(&mut self, mono: Monomial, c: &GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                *existing += c;
                if existing.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, c.clone());
            }
        }
    }

    pub fn add_assign_ref(&mut self, rhs: &Self) {
        for (mono, c) in &rhs.terms {
            self.add_term(*mono, c);
        }
    }

    pub fn sub_assign_ref(&mut self, rhs: &Self) {
        for (mono, c) in &rhs.terms {
            self.add_term(*mono, &-c);
        }
    }

    pub fn mul_ref(&self, rhs: &Self) -> Self {
        let mut out = Self::default();
        for ((a1, b1), c1) in &self.terms {
            for ((a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), &(c1 * c2));
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::default();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::default();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (*m, v.scale(r))).collect(),
        }
    }

    /// Conjugates coefficients only; `eps` and `u` are real.
    pub fn conjugate(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, v)| (*m, v.conj())).collect(),
        }
    }

    /// Maximal exponents of `eps` and `u`; `(-1, -1)` for the zero polynomial.
    pub fn degrees(&self) -> (i64, i64) {
        if self.terms.is_empty() {
            return (-1, -1);
        }
        let de = self.terms.keys().map(|m| m.0).max().unwrap_or(0);
        let du = self.terms.keys().map(|m| m.1).max().unwrap_or(0);
        (de as i64, du as i64)
    }

    /// Coefficient of `eps^k` as a polynomial in `u` alone.
    pub fn eps_coefficient(&self, k: u32) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0 == k)
                .map(|(m, v)| ((0, m.1), v.clone()))
                .collect(),
        }
    }

    pub fn evaluate(&self, eps: &GaussianRational, u: &GaussianRational) -> GaussianRational {
        self.evaluate_in(eps, u)
    }

    pub fn evaluate_f64(&self, eps: Complex64, u: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|((a, b), c)| c.to_complex() * eps.powu(*a) * u.powu(*b))
            .sum()
    }

    /// Homomorphic evaluation into any coefficient ring.
    pub fn evaluate_in<C: super::Scalar>(&self, eps: &C, u: &C) -> C {
        let max_e = self.terms.keys().map(|m| m.0).max().unwrap_or(0) as usize;
        let max_u = self.terms.keys().map(|m| m.1).max().unwrap_or(0) as usize;
        let eps_pows = powers(eps, max_e);
        let u_pows = powers(u, max_u);
        let mut acc = C::zero();
        for ((a, b), c) in &self.terms {
            let term = C::from_gauss(c)
                .mul_ref(&eps_pows[*a as usize])
                .mul_ref(&u_pows[*b as usize]);
            acc.add_assign_ref(&term);
        }
        acc
    }
}

fn powers<C: super::Scalar>(x: &C, max: usize) -> Vec<C> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(C::one());
    for k in 0..max {
        let next = out[k].mul_ref(x);
        out.push(next);
    }
    out
}

impl Zero for PolyEU {
    fn zero() -> Self {
        Self::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for PolyEU {
    fn one() -> Self {
        Self::int(1)
    }
}

impl Add for PolyEU {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self.add_assign_ref(&rhs);
        self
    }
}

impl Sub for PolyEU {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.sub_assign_ref(&rhs);
        self
    }
}

impl Mul for PolyEU {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl Neg for PolyEU {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            terms: self.terms.into_iter().map(|(m, v)| (m, -v)).collect(),
        }
    }
}

impl fmt::Debug for PolyEU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PolyEU {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((a, b), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            if *a > 0 {
                write!(f, "*eps^{a}")?;
            }
            if *b > 0 {
                write!(f, "*u^{b}")?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    de: u32,
    du: u32,
    c: GaussianRational,
}

impl Serialize for PolyEU {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let list: Vec<TermRepr> = self
            .terms
            .iter()
            .map(|((de, du), c)| TermRepr { de: *de, du: *du, c: c.clone() })
            .collect();
        list.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PolyEU {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let list = Vec::<TermRepr>::deserialize(deserializer)?;
        let mut out = PolyEU::default();
        for t in list {
            out.add_term((t.de, t.du), &t.c);
        }
        Ok(out)
    }
}
