//! Coefficient rings.
//!
//! Everything symbolic in this crate is generic over [`Coeff`]. The two base
//! scalars are exact Gaussian rationals ([`GaussRational`]) and double
//! precision complex floats ([`Complex64`]). Truncated coupling series
//! ([`crate::Series`]) are also coefficients, with the base scalar as their
//! ring of constants.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Sentinel precision of an exact (untruncated) coefficient.
pub const EXACT: usize = usize::MAX;

/// A coefficient ring for noncommutative polynomials.
pub trait Coeff:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Neg<Output = Self>
    + Sub<Output = Self>
{
    type Base: Scalar;

    fn from_base(b: Self::Base) -> Self;
    fn conj(&self) -> Self;
    fn scale(&self, s: &Self::Base) -> Self;
    /// Lowest total coupling order carrying a nonzero coefficient.
    /// Plain scalars have valuation 0 unless zero.
    fn valuation(&self) -> usize;
    /// Highest total coupling order that is known exactly.
    fn precision(&self) -> usize;
    fn truncate(&self, order: usize) -> Self;

    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn add_assign_ref(&mut self, other: &Self);
    fn sub_assign_ref(&mut self, other: &Self) {
        let neg = -other.clone();
        self.add_assign_ref(&neg);
    }
}

/// A base scalar: either exact or floating point complex numbers.
pub trait Scalar: Coeff<Base = Self> {
    const IS_EXACT: bool;

    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_i64(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }
    fn from_parts(re: &BigRational, im: &BigRational) -> Self;
    fn to_c64(&self) -> Complex64;
    /// Exact value; floats convert without rounding.
    fn to_exact(&self) -> GaussRational;
    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
    fn is_real(&self) -> bool;
    fn real_part(&self) -> Self;
    /// Closeness test: exact equality for exact scalars, relative or
    /// absolute `tol` for floats.
    fn close_to(&self, other: &Self, tol: f64) -> bool;
}

/// An exact complex number with rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRational {
            re,
            im: BigRational::zero(),
        }
    }

    pub fn integer(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    /// The value as an integer, if it is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        (self.im.is_zero() && self.re.is_integer()).then(|| self.re.to_integer())
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", fmt_rational(&self.re));
        }
        if self.re.is_zero() {
            return write!(f, "{}i", fmt_rational(&self.im));
        }
        let sign = if self.im.is_negative() { '-' } else { '+' };
        write!(f, "{}{}{}i", fmt_rational(&self.re), sign, fmt_rational(&self.im.abs()))
    }
}

impl Add for GaussRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_ref(&rhs)
    }
}

impl Sub for GaussRational {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self.re -= &rhs.re;
        if !rhs.im.is_zero() {
            self.im -= &rhs.im;
        }
        self
    }
}

impl Mul for GaussRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl Neg for GaussRational {
    type Output = Self;
    fn neg(self) -> Self {
        GaussRational {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign for GaussRational {
    fn add_assign(&mut self, rhs: Self) {
        self.add_assign_ref(&rhs);
    }
}

impl Zero for GaussRational {
    fn zero() -> Self {
        GaussRational::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRational {
    fn one() -> Self {
        GaussRational::integer(1)
    }
}

impl Coeff for GaussRational {
    type Base = GaussRational;

    fn from_base(b: Self) -> Self {
        b
    }
    fn conj(&self) -> Self {
        GaussRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }
    fn scale(&self, s: &Self) -> Self {
        self.mul_ref(s)
    }
    fn valuation(&self) -> usize {
        if self.is_zero() {
            EXACT
        } else {
            0
        }
    }
    fn precision(&self) -> usize {
        EXACT
    }
    fn truncate(&self, _order: usize) -> Self {
        self.clone()
    }
    fn add_ref(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign_ref(other);
        out
    }
    fn mul_ref(&self, other: &Self) -> Self {
        match (self.im.is_zero(), other.im.is_zero()) {
            (true, true) => GaussRational::real(&self.re * &other.re),
            (true, false) => GaussRational::new(&self.re * &other.re, &self.re * &other.im),
            (false, true) => GaussRational::new(&self.re * &other.re, &self.im * &other.re),
            (false, false) => GaussRational::new(
                &self.re * &other.re - &self.im * &other.im,
                &self.re * &other.im + &self.im * &other.re,
            ),
        }
    }
    fn add_assign_ref(&mut self, other: &Self) {
        self.re += &other.re;
        if !other.im.is_zero() {
            self.im += &other.im;
        }
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        self.re -= &other.re;
        if !other.im.is_zero() {
            self.im -= &other.im;
        }
    }
}

impl Scalar for GaussRational {
    const IS_EXACT: bool = true;

    fn from_ratio(num: i64, den: i64) -> Self {
        GaussRational::real(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        GaussRational::new(re.clone(), im.clone())
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
    fn to_exact(&self) -> GaussRational {
        self.clone()
    }
    fn is_real(&self) -> bool {
        self.im.is_zero()
    }
    fn real_part(&self) -> Self {
        GaussRational::real(self.re.clone())
    }
    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
}

impl Coeff for Complex64 {
    type Base = Complex64;

    fn from_base(b: Self) -> Self {
        b
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn scale(&self, s: &Self) -> Self {
        self * s
    }
    fn valuation(&self) -> usize {
        if self.is_zero() {
            EXACT
        } else {
            0
        }
    }
    fn precision(&self) -> usize {
        EXACT
    }
    fn truncate(&self, _order: usize) -> Self {
        *self
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
    fn sub_assign_ref(&mut self, other: &Self) {
        *self -= other;
    }
}

impl Scalar for Complex64 {
    const IS_EXACT: bool = false;

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex64::new(num as f64 / den as f64, 0.0)
    }
    fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        Complex64::new(re.to_f64().unwrap_or(f64::NAN), im.to_f64().unwrap_or(f64::NAN))
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn to_exact(&self) -> GaussRational {
        GaussRational::new(
            BigRational::from_float(self.re).unwrap_or_default(),
            BigRational::from_float(self.im).unwrap_or_default(),
        )
    }
    fn is_real(&self) -> bool {
        self.im == 0.0
    }
    fn real_part(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }
    fn close_to(&self, other: &Self, tol: f64) -> bool {
        let scale = self.norm().max(other.norm()).max(1.0);
        (self - other).norm() <= tol * scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> GaussRational {
        GaussRational::from_ratio(n, d)
    }

    #[test]
    fn gauss_rational_arithmetic() {
        let i = GaussRational::new(BigRational::zero(), BigRational::one());
        assert_eq!(i.mul_ref(&i), q(-1, 1));
        let a = GaussRational::from_parts(
            &BigRational::new(1.into(), 2.into()),
            &BigRational::new((-1).into(), 3.into()),
        );
        assert_eq!(a.to_string(), "1/2-1/3i");
        assert_eq!(a.conj().to_string(), "1/2+1/3i");
        assert_eq!(a.clone() - a.clone(), GaussRational::zero());
        assert_eq!(q(3, 4).add_ref(&q(1, 4)), GaussRational::one());
        assert_eq!(q(6, 3).to_integer(), Some(BigInt::from(2)));
    }

    #[test]
    fn float_close_to_is_relative() {
        let a = Complex64::new(1e6, 0.0);
        let b = Complex64::new(1e6 + 1e-7, 0.0);
        assert!(a.close_to(&b, 1e-12));
        assert!(!Complex64::new(1.0, 0.0).close_to(&Complex64::new(1.1, 0.0), 1e-3));
    }
}
