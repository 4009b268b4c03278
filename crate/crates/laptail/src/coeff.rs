//! The coefficient-ring interface consumed by the operator ring.
//!
//! Three instantiations are used: exact rationals (the default), polynomials
//! in a formal count parameter (symbolic characters and expansions), and
//! `f64` for the numeric-moment mode. Only the first two take part in the
//! exact pipeline.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::CoeffError;
use crate::poly::ParamPoly;
use crate::rational::Rational;

/// A commutative ring with enough structure for truncated operator algebra.
pub trait Coeff:
    Clone
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;

    /// Embeds an exact rational scalar.
    fn from_rational(q: &Rational) -> Self;

    /// Scales by an exact rational; every supported ring is a Q-algebra.
    fn scale_rat(&self, q: &Rational) -> Self {
        self.clone() * Self::from_rational(q)
    }

    /// Multiplicative inverse, when the element is a unit.
    fn try_invert(&self) -> Result<Self, CoeffError>;

    /// Renders for operator and expansion output; symbolic rings print their
    /// parameter with the given letter.
    fn render(&self, symbol: &str) -> String;

    /// True when the whole element is "negative", meaning rendering prefers
    /// pulling a minus sign out front.
    fn prefers_negated_render(&self) -> bool;
}

impl Coeff for Rational {
    fn zero() -> Self {
        Rational::zero()
    }

    fn one() -> Self {
        Rational::one()
    }

    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn try_invert(&self) -> Result<Self, CoeffError> {
        self.checked_recip()
    }

    fn render(&self, _symbol: &str) -> String {
        self.to_string()
    }

    fn prefers_negated_render(&self) -> bool {
        self.is_negative()
    }
}

impl Coeff for ParamPoly {
    fn zero() -> Self {
        ParamPoly::zero()
    }

    fn one() -> Self {
        ParamPoly::one()
    }

    fn is_zero(&self) -> bool {
        ParamPoly::is_zero(self)
    }

    fn from_rational(q: &Rational) -> Self {
        ParamPoly::constant(q.clone())
    }

    fn scale_rat(&self, q: &Rational) -> Self {
        self.scale(q)
    }

    fn try_invert(&self) -> Result<Self, CoeffError> {
        self.checked_recip()
    }

    fn render(&self, symbol: &str) -> String {
        ParamPoly::render(self, symbol)
    }

    fn prefers_negated_render(&self) -> bool {
        self.is_negated_form()
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn from_rational(q: &Rational) -> Self {
        q.to_f64()
    }

    fn try_invert(&self) -> Result<Self, CoeffError> {
        if *self == 0.0 {
            Err(CoeffError::DivisionByZero)
        } else {
            Ok(1.0 / *self)
        }
    }

    fn render(&self, _symbol: &str) -> String {
        format!("{self}")
    }

    fn prefers_negated_render(&self) -> bool {
        *self < 0.0
    }
}
