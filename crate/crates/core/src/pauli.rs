//! Sparse operators on a two-leg ladder of `n` sites, expanded in products
//! `sigma^s tau^t` with `s, t` drawn from `{+, -, 0, z}`.
//!
//! The working basis is not orthonormal: Hilbert-Schmidt norms per factor are 1
//! for `+`/`-` and 2 for `0`/`z`. Distinct strings are still orthogonal, so
//! projections reduce to coefficient lookups.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::BuildHasherDefault;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{OperatorError, ParseError};
use crate::exact::Scalar;
use crate::par::{self, Exec};

/// Deterministic hasher so accumulation order never depends on process state.
type FixedState = BuildHasherDefault<std::collections::hash_map::DefaultHasher>;

/// Longest chain a [`PauliString`] can hold (4 bits per site in a `u64`).
pub const MAX_SITES: usize = 16;
/// Largest chain converted to dense matrices.
pub const MAX_DENSE_SITES: usize = 5;

/// Single-factor label. Discriminants follow ASCII order of the text form so that
/// packed strings sort lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PauliIndex {
    Plus = 0,
    Minus = 1,
    Zero = 2,
    Z = 3,
}

impl PauliIndex {
    pub const ALL: [PauliIndex; 4] = [Self::Plus, Self::Minus, Self::Zero, Self::Z];

    fn from_code(code: u64) -> Self {
        Self::ALL[(code & 3) as usize]
    }

    pub fn as_char(self) -> char {
        match self {
            Self::Plus => '+',
            Self::Minus => '-',
            Self::Zero => '0',
            Self::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '+' => Some(Self::Plus),
            '-' => Some(Self::Minus),
            '0' => Some(Self::Zero),
            'z' => Some(Self::Z),
            _ => None,
        }
    }

    /// `+` and `-` swap; `0` and `z` are Hermitian.
    pub fn dagger(self) -> Self {
        match self {
            Self::Plus => Self::Minus,
            Self::Minus => Self::Plus,
            other => other,
        }
    }

    /// Coordinate displacement: `+1`, `-1`, or 0.
    pub fn displacement(self) -> i32 {
        match self {
            Self::Plus => 1,
            Self::Minus => -1,
            _ => 0,
        }
    }

    /// Hilbert-Schmidt norm squared of the 2x2 matrix.
    pub fn hs_weight(self) -> i64 {
        match self {
            Self::Plus | Self::Minus => 1,
            _ => 2,
        }
    }

    /// Action on a basis bit (0 = up, 1 = down): `(new bit, sign)`.
    pub fn apply(self, bit: u8) -> Option<(u8, i8)> {
        match (self, bit) {
            (Self::Zero, b) => Some((b, 1)),
            (Self::Z, 0) => Some((0, 1)),
            (Self::Z, _) => Some((1, -1)),
            (Self::Plus, 1) => Some((0, 1)),
            (Self::Minus, 0) => Some((1, 1)),
            _ => None,
        }
    }

    /// Product of two single-factor labels as at most two `(label, num, den)` terms.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: Self) -> ([(PauliIndex, i64, i64); 2], usize) {
        use PauliIndex::*;
        let none = (Zero, 0, 1);
        match (self, rhs) {
            (Zero, x) | (x, Zero) => ([(x, 1, 1), none], 1),
            (Z, Z) => ([(Zero, 1, 1), none], 1),
            (Z, Plus) => ([(Plus, 1, 1), none], 1),
            (Plus, Z) => ([(Plus, -1, 1), none], 1),
            (Z, Minus) => ([(Minus, -1, 1), none], 1),
            (Minus, Z) => ([(Minus, 1, 1), none], 1),
            (Plus, Plus) | (Minus, Minus) => ([none, none], 0),
            (Plus, Minus) => ([(Zero, 1, 2), (Z, 1, 2)], 2),
            (Minus, Plus) => ([(Zero, 1, 2), (Z, -1, 2)], 2),
        }
    }
}

/// Labels `(s, t)` for one ladder site: `sigma^s tau^t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SiteLabel {
    pub sigma: PauliIndex,
    pub tau: PauliIndex,
}

impl SiteLabel {
    pub const IDENTITY: SiteLabel = SiteLabel::new(PauliIndex::Zero, PauliIndex::Zero);

    pub const fn new(sigma: PauliIndex, tau: PauliIndex) -> Self {
        Self { sigma, tau }
    }

    pub fn all() -> impl Iterator<Item = SiteLabel> {
        PauliIndex::ALL
            .into_iter()
            .flat_map(|s| PauliIndex::ALL.into_iter().map(move |t| SiteLabel::new(s, t)))
    }

    pub fn code(self) -> u64 {
        ((self.sigma as u64) << 2) | self.tau as u64
    }

    pub fn from_code(code: u64) -> Self {
        Self::new(PauliIndex::from_code(code >> 2), PauliIndex::from_code(code))
    }

    pub fn dagger(self) -> Self {
        Self::new(self.sigma.dagger(), self.tau.dagger())
    }

    pub fn displacement(self) -> (i32, i32) {
        (self.sigma.displacement(), self.tau.displacement())
    }

    pub fn hs_weight(self) -> i64 {
        self.sigma.hs_weight() * self.tau.hs_weight()
    }

    /// Expansion of `(sigma^s tau^t)(sigma^s' tau^t')` in the 16-element basis.
    #[allow(clippy::should_implement_trait)]
    pub fn mul(self, rhs: SiteLabel) -> Vec<(SiteLabel, i64, i64)> {
        let (sig, ns) = self.sigma.mul(rhs.sigma);
        let (tau, nt) = self.tau.mul(rhs.tau);
        let mut out = Vec::with_capacity(ns * nt);
        for &(s, sn, sd) in &sig[..ns] {
            for &(t, tn, td) in &tau[..nt] {
                out.push((SiteLabel::new(s, t), sn * tn, sd * td));
            }
        }
        out
    }
}

impl fmt::Display for SiteLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sigma.as_char(), self.tau.as_char())
    }
}

/// Fixed-length product of site labels, packed 4 bits per site with site 1 most
/// significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    n: u8,
    bits: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self::from_labels(&vec![SiteLabel::IDENTITY; n])
    }

    pub fn from_labels(labels: &[SiteLabel]) -> Self {
        assert!(labels.len() <= MAX_SITES, "at most {MAX_SITES} sites");
        let bits = labels.iter().fold(0u64, |acc, l| (acc << 4) | l.code());
        Self { n: labels.len() as u8, bits }
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Label at 0-based `site`.
    pub fn get(&self, site: usize) -> SiteLabel {
        let shift = 4 * (self.len() - 1 - site);
        SiteLabel::from_code(self.bits >> shift)
    }

    pub fn labels(&self) -> Vec<SiteLabel> {
        (0..self.len()).map(|j| self.get(j)).collect()
    }

    pub fn with(&self, site: usize, label: SiteLabel) -> Self {
        let shift = 4 * (self.len() - 1 - site);
        let bits = (self.bits & !(0xF << shift)) | (label.code() << shift);
        Self { n: self.n, bits }
    }

    pub fn remove(&self, site: usize) -> Self {
        let mut labels = self.labels();
        labels.remove(site);
        Self::from_labels(&labels)
    }

    pub fn concat(&self, rhs: &PauliString) -> Self {
        assert!(self.len() + rhs.len() <= MAX_SITES, "at most {MAX_SITES} sites");
        Self {
            n: self.n + rhs.n,
            bits: (self.bits << (4 * rhs.len())) | rhs.bits,
        }
    }

    /// Sites `[start, end)` as a new string.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self::from_labels(&self.labels()[start..end])
    }

    pub fn dagger(&self) -> Self {
        let labels: Vec<_> = self.labels().into_iter().map(SiteLabel::dagger).collect();
        Self::from_labels(&labels)
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.len())
    }

    pub fn hs_weight(&self) -> i64 {
        self.labels().iter().map(|l| l.hs_weight()).product()
    }

    /// Expansion of the product `self * rhs` as `(string, num, den)` terms.
    pub fn mul(&self, rhs: &PauliString) -> Vec<(PauliString, i64, i64)> {
        debug_assert_eq!(self.n, rhs.n);
        let mut acc: Vec<(u64, i64, i64)> = vec![(0, 1, 1)];
        for site in 0..self.len() {
            let factors = self.get(site).mul(rhs.get(site));
            if factors.is_empty() {
                return Vec::new();
            }
            if factors.len() == 1 {
                let (label, num, den) = factors[0];
                for t in acc.iter_mut() {
                    *t = ((t.0 << 4) | label.code(), t.1 * num, t.2 * den);
                }
            } else {
                let mut next = Vec::with_capacity(acc.len() * factors.len());
                for &(bits, num, den) in &acc {
                    for &(label, fnum, fden) in &factors {
                        next.push(((bits << 4) | label.code(), num * fnum, den * fden));
                    }
                }
                acc = next;
            }
        }
        acc.into_iter()
            .map(|(bits, num, den)| (PauliString { n: self.n, bits }, num, den))
            .collect()
    }

    /// Matrix element action on a computational basis state (`n` sites, qubit
    /// order site 1 sigma, site 1 tau, site 2 sigma, ...; bit 0 = up).
    pub fn apply_to_basis(&self, state: usize) -> Option<(usize, i8)> {
        let qubits = 2 * self.len();
        let mut out = 0usize;
        let mut sign = 1i8;
        for site in 0..self.len() {
            let label = self.get(site);
            for (k, idx) in [(0, label.sigma), (1, label.tau)] {
                let q = 2 * site + k;
                let shift = qubits - 1 - q;
                let bit = ((state >> shift) & 1) as u8;
                let (nb, s) = idx.apply(bit)?;
                out |= (nb as usize) << shift;
                sign *= s;
            }
        }
        Some((out, sign))
    }

    /// Per chain: equal numbers of `+` and `-`, and every left prefix has at least
    /// as many `+` as `-`.
    pub fn ballot(&self) -> bool {
        let (mut hs, mut ht) = (0i32, 0i32);
        for label in self.labels() {
            hs += label.sigma.displacement();
            ht += label.tau.displacement();
            if hs < 0 || ht < 0 {
                return false;
            }
        }
        hs == 0 && ht == 0
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for site in 0..self.len() {
            if site > 0 {
                write!(f, ".")?;
            }
            write!(f, "{}", self.get(site))?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = ParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::PauliString(text.to_string());
        let mut labels = Vec::new();
        for part in text.split('.') {
            let chars: Vec<char> = part.chars().collect();
            if chars.len() != 2 {
                return Err(bad());
            }
            let s = PauliIndex::from_char(chars[0]).ok_or_else(bad)?;
            let t = PauliIndex::from_char(chars[1]).ok_or_else(bad)?;
            labels.push(SiteLabel::new(s, t));
        }
        if labels.len() > MAX_SITES {
            return Err(bad());
        }
        Ok(PauliString::from_labels(&labels))
    }
}

/// Sparse linear combination of Pauli strings of a common length.
#[derive(Clone, PartialEq)]
pub struct SparseOp<C> {
    n: usize,
    terms: BTreeMap<PauliString, C>,
}

impl<C: Scalar> SparseOp<C> {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self::single(PauliString::identity(n), C::one())
    }

    pub fn single(string: PauliString, coeff: C) -> Self {
        let mut op = Self::zero(string.len());
        op.add_term(string, coeff);
        op
    }

    /// `label` at 0-based `site`, identity elsewhere.
    pub fn site_op(n: usize, site: usize, label: SiteLabel) -> Self {
        Self::single(PauliString::identity(n).with(site, label), C::one())
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (PauliString, C)>) -> Self {
        let mut op = Self::zero(n);
        for (s, c) in terms {
            op.add_term(s, c);
        }
        op
    }

    pub fn len_sites(&self) -> usize {
        self.n
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &C)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, string: &PauliString) -> C {
        self.terms.get(string).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, string: PauliString, coeff: C) {
        assert_eq!(string.len(), self.n, "string length mismatch");
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&string) {
            Some(c) => {
                c.add_assign_ref(&coeff);
                if c.is_zero() {
                    self.terms.remove(&string);
                }
            }
            None => {
                self.terms.insert(string, coeff);
            }
        }
    }

    fn check_len(&self, rhs: &Self) -> Result<(), OperatorError> {
        if self.n != rhs.n {
            return Err(OperatorError::LengthMismatch { left: self.n, right: rhs.n });
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_len(rhs)?;
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(*s, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.check_len(rhs)?;
        let mut out = self.clone();
        for (s, c) in &rhs.terms {
            out.add_term(*s, c.neg_ref());
        }
        Ok(out)
    }

    pub fn scale(&self, factor: &C) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(s, c)| (*s, c.mul_ref(factor))))
    }

    pub fn scale_small(&self, num: i64, den: i64) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(s, c)| (*s, c.scale_small(num, den))))
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> SparseOp<D> {
        SparseOp::from_terms(self.n, self.terms.iter().map(|(s, c)| (*s, f(c))))
    }

    /// `+` and `-` swap on every factor; coefficients are conjugated.
    pub fn adjoint(&self) -> Self {
        Self::from_terms(self.n, self.terms.iter().map(|(s, c)| (s.dagger(), c.conj())))
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.mul_with(rhs, Exec::default())
    }

    /// Product with an explicit execution mode. Chunking is identical in both
    /// modes, so floating-point results agree bit for bit.
    pub fn mul_with(&self, rhs: &Self, exec: Exec) -> Result<Self, OperatorError> {
        self.check_len(rhs)?;
        let left: Vec<(&PauliString, &C)> = self.terms.iter().collect();
        let right: Vec<(&PauliString, &C)> = rhs.terms.iter().collect();
        let partials = par::map_chunks(exec, left.len(), 64, |range| {
            let mut acc: HashMap<PauliString, C, FixedState> = HashMap::default();
            for &(a, ca) in &left[range] {
                for &(b, cb) in &right {
                    let expansion = a.mul(b);
                    if expansion.is_empty() {
                        continue;
                    }
                    let base = ca.mul_ref(cb);
                    for (s, num, den) in expansion {
                        let term = base.scale_small(num, den);
                        match acc.get_mut(&s) {
                            Some(c) => c.add_assign_ref(&term),
                            None => {
                                acc.insert(s, term);
                            }
                        }
                    }
                }
            }
            let mut sorted: Vec<(PauliString, C)> = acc.into_iter().collect();
            sorted.sort_by_key(|x| x.0);
            sorted
        });
        let mut out = Self::zero(self.n);
        for part in partials {
            for (s, c) in part {
                out.add_term(s, c);
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self, OperatorError> {
        self.commutator_with(rhs, Exec::default())
    }

    pub fn commutator_with(&self, rhs: &Self, exec: Exec) -> Result<Self, OperatorError> {
        let ab = self.mul_with(rhs, exec)?;
        let ba = rhs.mul_with(self, exec)?;
        ab.sub(&ba)
    }

    pub fn anticommutator(&self, rhs: &Self) -> Result<Self, OperatorError> {
        let ab = self.mul(rhs)?;
        let ba = rhs.mul(self)?;
        ab.add(&ba)
    }

    /// Tensor product: `self` on the left sites, `rhs` on the right.
    pub fn kron(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.n + rhs.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(a.concat(b), ca.mul_ref(cb));
            }
        }
        out
    }

    /// Hilbert-Schmidt projection onto `label` at 0-based `site`:
    /// `tr_site{(sigma^s tau^t)^dag A} / tr{(sigma^s tau^t)^dag sigma^s tau^t}`.
    pub fn hs_project(&self, site: usize, label: SiteLabel) -> Result<Self, OperatorError> {
        if site >= self.n {
            return Err(OperatorError::SiteOutOfRange { site, n: self.n });
        }
        Ok(Self::from_terms(
            self.n - 1,
            self.terms
                .iter()
                .filter(|(s, _)| s.get(site) == label)
                .map(|(s, c)| (s.remove(site), c.clone())),
        ))
    }

    /// Only the identity string has nonzero trace, `4^n`.
    pub fn trace(&self) -> C {
        let c = self.coefficient(&PauliString::identity(self.n));
        c.mul_ref(&C::from_int(4i64.pow(self.n as u32)))
    }

    /// Hilbert-Schmidt inner product `tr(self^dag rhs)`.
    pub fn hs_inner(&self, rhs: &Self) -> C {
        let mut acc = C::zero();
        for (s, c) in &self.terms {
            if let Some(d) = rhs.terms.get(s) {
                acc.add_assign_ref(&c.conj().mul_ref(d).mul_ref(&C::from_int(s.hs_weight())));
            }
        }
        acc
    }

    /// Frobenius norm squared as a double.
    pub fn frobenius_sqr_f64(&self) -> f64 {
        self.terms
            .iter()
            .fold(0.0, |acc, (s, c)| acc + c.abs_sqr_f64() * s.hs_weight() as f64)
    }

    pub fn ballot_check(&self) -> bool {
        self.terms.keys().all(PauliString::ballot)
    }

    pub fn is_hermitian(&self) -> bool {
        self.adjoint() == *self
    }

    pub fn to_dense(&self) -> Result<DenseMatrix<C>, OperatorError> {
        if self.n > MAX_DENSE_SITES {
            return Err(OperatorError::TooLong { n: self.n, max: MAX_DENSE_SITES });
        }
        let dim = 1usize << (2 * self.n);
        let mut m = DenseMatrix::<C>::zeros(dim);
        for (s, c) in &self.terms {
            for col in 0..dim {
                if let Some((row, sign)) = s.apply_to_basis(col) {
                    let v = if sign < 0 { c.neg_ref() } else { c.clone() };
                    m.entry_mut(row, col).add_assign_ref(&v);
                }
            }
        }
        Ok(m)
    }

    /// Dense column `A|col>` as sparse `(row, value)` pairs, for any chain length.
    pub fn dense_column(&self, col: usize) -> BTreeMap<usize, C> {
        let mut out: BTreeMap<usize, C> = BTreeMap::new();
        for (s, c) in &self.terms {
            if let Some((row, sign)) = s.apply_to_basis(col) {
                let v = if sign < 0 { c.neg_ref() } else { c.clone() };
                out.entry(row).or_insert_with(C::zero).add_assign_ref(&v);
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }
}

impl<C: Scalar> fmt::Debug for SparseOp<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (s, c) in &self.terms {
            m.entry(&s.to_string(), c);
        }
        m.finish()
    }
}

/// Row-major square matrix, used for small dense oracles.
#[derive(Clone, PartialEq, Debug)]
pub struct DenseMatrix<C> {
    dim: usize,
    data: Vec<C>,
}

impl<C: Scalar> DenseMatrix<C> {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C::zero(); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &C {
        &self.data[row * self.dim + col]
    }

    pub fn entry_mut(&mut self, row: usize, col: usize) -> &mut C {
        &mut self.data[row * self.dim + col]
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let p = a.mul_ref(b);
                        out.entry_mut(i, j).add_assign_ref(&p);
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                *out.entry_mut(j, i) = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C {
        let mut acc = C::zero();
        for i in 0..self.dim {
            acc.add_assign_ref(self.get(i, i));
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.dim).all(|i| (i + 1..self.dim).all(|j| self.get(i, j).is_zero()))
    }
}
