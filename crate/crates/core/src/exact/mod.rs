//! Exact scalars and the common coefficient interface used by the operator algebra.
//!
//! Three coefficient rings share one code path: [`PolyEU`] (symbolic in `eps`, `u`),
//! [`GaussianRational`] (exact at a rational parameter point) and [`Complex64`]
//! (double precision).

mod gaussian;
mod poly;
mod rational;

use std::fmt::Debug;

pub use gaussian::GaussianRational;
pub use num_complex::Complex64;
pub use poly::{Monomial, PolyEU};
pub use rational::{format_rational, parse_rational, rat, rat_int, to_f64, Rational};

use num_traits::{One, Zero};

/// Complex double used by the floating-point path.
pub type ComplexF = Complex64;

/// Ring interface shared by all coefficient types.
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync + 'static {
    /// `true` when every operation on this type is exact.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_gauss(value: &GaussianRational) -> Self;
    fn conj(&self) -> Self;
    fn add_assign_ref(&mut self, rhs: &Self);
    fn sub_assign_ref(&mut self, rhs: &Self);
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// Multiplies by the small rational `num / den`.
    fn scale_small(&self, num: i64, den: i64) -> Self;
    /// Magnitude squared as a double, for norms and reports.
    fn abs_sqr_f64(&self) -> f64;

    fn from_int(value: i64) -> Self {
        Self::from_gauss(&GaussianRational::from_ints(value, 0))
    }

    fn imag_unit() -> Self {
        Self::from_gauss(&GaussianRational::i())
    }
}

impl Scalar for GaussianRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_gauss(value: &GaussianRational) -> Self {
        value.clone()
    }
    fn conj(&self) -> Self {
        GaussianRational::conj(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale_small(&self, num: i64, den: i64) -> Self {
        if num == den {
            return self.clone();
        }
        self.scale(&rat(num, den))
    }
    fn abs_sqr_f64(&self) -> f64 {
        to_f64(&self.norm_sqr())
    }
}

impl Scalar for PolyEU {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_gauss(value: &GaussianRational) -> Self {
        PolyEU::constant(value.clone())
    }
    fn conj(&self) -> Self {
        self.conjugate()
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        PolyEU::add_assign_ref(self, rhs)
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        PolyEU::sub_assign_ref(self, rhs)
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        PolyEU::mul_ref(self, rhs)
    }
    fn neg_ref(&self) -> Self {
        -self.clone()
    }
    fn scale_small(&self, num: i64, den: i64) -> Self {
        if num == den {
            return self.clone();
        }
        self.scale_rational(&rat(num, den))
    }
    fn abs_sqr_f64(&self) -> f64 {
        self.terms().fold(0.0, |acc, (_, c)| acc + to_f64(&c.norm_sqr()))
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn from_gauss(value: &GaussianRational) -> Self {
        value.to_complex()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn sub_assign_ref(&mut self, rhs: &Self) {
        *self -= rhs;
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale_small(&self, num: i64, den: i64) -> Self {
        self * (num as f64 / den as f64)
    }
    fn abs_sqr_f64(&self) -> f64 {
        self.norm_sqr()
    }
}

/// Scalars that also support division and a plain-text rendering.
pub trait FieldScalar: Scalar {
    /// `None` when dividing by zero.
    fn checked_div(&self, rhs: &Self) -> Option<Self>;
    /// Real part: `p/q` for exact values, 17 significant digits for floats.
    fn format_real(&self) -> String;
    fn is_real(&self) -> bool;
}

impl FieldScalar for GaussianRational {
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|inv| self * &inv)
    }
    fn format_real(&self) -> String {
        format_rational(&self.re)
    }
    fn is_real(&self) -> bool {
        GaussianRational::is_real(self)
    }
}

impl FieldScalar for Complex64 {
    fn checked_div(&self, rhs: &Self) -> Option<Self> {
        (!Scalar::is_zero(rhs)).then(|| self / rhs)
    }
    fn format_real(&self) -> String {
        format!("{:.16e}", self.re)
    }
    fn is_real(&self) -> bool {
        self.im == 0.0
    }
}
