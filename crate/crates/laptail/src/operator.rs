//! The quotient ring of polynomials in the derivation operator `D` modulo
//! `D^(m+1)`.
//!
//! Elements are kept as dense coefficient vectors of length exactly `m + 1`;
//! nothing is ever truncated implicitly except products `D^i * D^j` with
//! `i + j > m`, which the quotient kills. Operators of different orders never
//! interoperate; convert explicitly with [`TruncatedOperator::truncate_to`].

use crate::coeff::Coeff;
use crate::error::OperatorError;

/// Largest supported truncation order. Coefficient magnitudes grow
/// factorially with the order (Weibull moments are `(jq)!`), so this is a
/// sanity bound rather than a tuning knob.
pub const MAX_ORDER: usize = 16;

/// An element `c_0 + c_1 D + ... + c_m D^m` of the order-`m` quotient ring.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedOperator<C: Coeff> {
    coeffs: Vec<C>,
}

impl<C: Coeff> TruncatedOperator<C> {
    /// Builds an operator from its full coefficient vector `c_0..c_m`.
    pub fn from_coeffs(coeffs: Vec<C>) -> Self {
        assert!(!coeffs.is_empty(), "operator needs at least the D^0 coefficient");
        assert!(
            coeffs.len() <= MAX_ORDER + 1,
            "operator order exceeds MAX_ORDER = {MAX_ORDER}"
        );
        TruncatedOperator { coeffs }
    }

    /// The ring unit `Id` at the given order.
    pub fn identity(order: usize) -> Self {
        let mut coeffs = vec![C::zero(); order + 1];
        coeffs[0] = C::one();
        Self::from_coeffs(coeffs)
    }

    /// The zero operator at the given order.
    pub fn zero(order: usize) -> Self {
        Self::from_coeffs(vec![C::zero(); order + 1])
    }

    /// The generator `D` at the given order (equals zero when `order = 0`).
    pub fn derivation(order: usize) -> Self {
        let mut coeffs = vec![C::zero(); order + 1];
        if order >= 1 {
            coeffs[1] = C::one();
        }
        Self::from_coeffs(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> &C {
        &self.coeffs[i]
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(C::is_zero)
    }

    fn check_order(&self, other: &Self) -> Result<(), OperatorError> {
        if self.order() != other.order() {
            Err(OperatorError::OrderMismatch {
                left: self.order(),
                right: other.order(),
            })
        } else {
            Ok(())
        }
    }

    /// Coefficient-wise sum; both operands must share one order.
    pub fn add(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(Self::from_coeffs(coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(Self::from_coeffs(coeffs))
    }

    pub fn neg(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    /// Product in the quotient ring: the Cauchy product of the coefficient
    /// sequences with every term in `D^(m+1)` and beyond dropped.
    pub fn mul(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check_order(other)?;
        let m = self.order();
        let mut coeffs = vec![C::zero(); m + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().take(m + 1 - i).enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        Ok(Self::from_coeffs(coeffs))
    }

    /// Coefficient-wise product by a ring element.
    pub fn scale(&self, c: &C) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }

    /// Coefficient-wise product by an exact rational scalar.
    pub fn scale_rat(&self, q: &crate::rational::Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|x| x.scale_rat(q)).collect())
    }

    /// `self^n` by repeated squaring; `n = 0` gives `Id`.
    pub fn pow(&self, n: u32) -> Self {
        let mut base = self.clone();
        let mut exp = n;
        let mut acc = Self::identity(self.order());
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base).expect("orders match by construction");
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base).expect("orders match by construction");
            }
        }
        acc
    }

    /// Exponential of a nilpotent element: requires `c_0 = 0`, in which case
    /// the series stops at `D^m` and `exp(A) = sum_{j<=m} A^j / j!` exactly.
    pub fn exp_nilpotent(&self) -> Result<Self, OperatorError> {
        if !self.coeffs[0].is_zero() {
            return Err(OperatorError::NonzeroConstantTerm);
        }
        let m = self.order();
        // Horner form: Id + A(Id + A/2 (Id + A/3 (...))).
        let mut acc = Self::identity(m);
        for j in (1..=m).rev() {
            let inv_j = crate::rational::Rational::new(1, j as i64);
            acc = self
                .mul(&acc)
                .expect("orders match")
                .scale_rat(&inv_j)
                .add(&Self::identity(m))
                .expect("orders match");
        }
        Ok(acc)
    }

    /// Inverse of an element whose constant term is a unit: writing
    /// `A = c_0 (Id - N)` with `N` nilpotent, the inverse is the truncated
    /// geometric series `c_0^{-1} sum_{j<=m} N^j`.
    pub fn invert(&self) -> Result<Self, OperatorError> {
        let c0_inv = self.coeffs[0]
            .try_invert()
            .map_err(OperatorError::NonInvertibleConstant)?;
        let m = self.order();
        let id = Self::identity(m);
        let nilpotent = id.sub(&self.scale(&c0_inv))?;
        // Horner form of Id + N + ... + N^m.
        let mut acc = id.clone();
        for _ in 0..m {
            acc = nilpotent.mul(&acc)?.add(&id)?;
        }
        Ok(acc.scale(&c0_inv))
    }

    /// Drops coefficients above `new_order`. The only sanctioned way to move
    /// between orders.
    pub fn truncate_to(&self, new_order: usize) -> Self {
        assert!(new_order <= self.order(), "truncate_to cannot raise the order");
        Self::from_coeffs(self.coeffs[..=new_order].to_vec())
    }

    /// Maps every coefficient into another ring (e.g. lifting rationals into
    /// polynomials, or specializing polynomials at a numeric parameter).
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> TruncatedOperator<D> {
        TruncatedOperator::from_coeffs(self.coeffs.iter().map(f).collect())
    }

    /// Renders as `c0 + c1·D + c2·D^2`, with the coefficient ring deciding
    /// how each `ci` prints. Zero coefficients are skipped.
    pub fn render(&self, symbol: &str) -> String {
        let mut out = String::new();
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (neg, body) = if c.prefers_negated_render() {
                (true, (-c.clone()).render(symbol))
            } else {
                (false, c.render(symbol))
            };
            let needs_parens = body.contains(' ');
            let unit = body == "1";
            let mut piece = String::new();
            if i == 0 {
                if needs_parens {
                    piece.push_str(&format!("({body})"));
                } else {
                    piece.push_str(&body);
                }
            } else {
                if !unit {
                    if needs_parens {
                        piece.push_str(&format!("({body})"));
                    } else {
                        piece.push_str(&body);
                    }
                    piece.push('·');
                }
                piece.push('D');
                if i > 1 {
                    piece.push_str(&format!("^{i}"));
                }
            }
            if first {
                if neg {
                    out.push('-');
                }
                out.push_str(&piece);
                first = false;
            } else {
                out.push_str(if neg { " - " } else { " + " });
                out.push_str(&piece);
            }
        }
        if first {
            out.push('0');
        }
        out
    }
}
