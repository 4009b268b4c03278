//! Polynomials in one formal parameter over the exact rationals.
//!
//! The parameter stands for the Poisson rate `a` or the geometric odds
//! `b = a/(1-a)`; which letter it prints as is decided at rendering time.
//! Canonical form: no trailing zero coefficients, so the zero polynomial is
//! the empty coefficient list.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::CoeffError;
use crate::rational::Rational;

/// Which letter a formal count parameter prints as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamSymbol {
    /// Poisson rate.
    A,
    /// Geometric odds.
    B,
}

impl ParamSymbol {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamSymbol::A => "a",
            ParamSymbol::B => "b",
        }
    }
}

impl fmt::Display for ParamSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Dense univariate polynomial; `coeffs[j]` multiplies the j-th power of the
/// formal parameter.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ParamPoly {
    coeffs: Vec<Rational>,
}

impl ParamPoly {
    /// Builds a polynomial from ascending-power coefficients, normalizing
    /// away trailing zeros.
    pub fn new(coeffs: Vec<Rational>) -> Self {
        let mut p = ParamPoly { coeffs };
        p.normalize();
        p
    }

    pub fn zero() -> Self {
        ParamPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        ParamPoly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        ParamPoly::new(vec![c])
    }

    /// The formal parameter itself.
    pub fn theta() -> Self {
        ParamPoly::new(vec![Rational::zero(), Rational::one()])
    }

    /// `c * theta^j`.
    pub fn monomial(c: Rational, j: usize) -> Self {
        if c.is_zero() {
            return ParamPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); j + 1];
        coeffs[j] = c;
        ParamPoly { coeffs }
    }

    fn normalize(&mut self) {
        while self.coeffs.last().map_or(false, Rational::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of the j-th power (zero beyond the stored degree).
    pub fn coeff(&self, j: usize) -> Rational {
        self.coeffs.get(j).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Exact Horner evaluation at a rational point.
    pub fn eval(&self, v: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * v) + c;
        }
        acc
    }

    /// Horner evaluation in floating point.
    pub fn eval_f64(&self, v: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * v + c.to_f64();
        }
        acc
    }

    /// Multiplicative inverse; only degree-0 nonzero polynomials are units.
    pub fn checked_recip(&self) -> Result<Self, CoeffError> {
        match self.degree() {
            None => Err(CoeffError::DivisionByZero),
            Some(0) => Ok(ParamPoly::constant(self.coeffs[0].checked_recip()?)),
            Some(d) => Err(CoeffError::NotInvertible(format!(
                "polynomial of degree {d}"
            ))),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        ParamPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// True when every nonzero coefficient is negative.
    pub fn is_negated_form(&self) -> bool {
        !self.is_zero() && self.coeffs.iter().all(|c| c.is_zero() || c.is_negative())
    }

    /// Renders with the given parameter letter, ascending powers:
    /// `c0 + c1*a + c2*a^2`. Unit coefficients drop the `1*`.
    pub fn render(&self, symbol: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    out.push('-');
                }
                first = false;
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let unit = mag.is_one();
            match (j, unit) {
                (0, _) => out.push_str(&mag.to_string()),
                (1, true) => out.push_str(symbol),
                (1, false) => {
                    out.push_str(&mag.to_string());
                    out.push('*');
                    out.push_str(symbol);
                }
                (_, true) => {
                    out.push_str(symbol);
                    out.push_str(&format!("^{j}"));
                }
                (_, false) => {
                    out.push_str(&mag.to_string());
                    out.push('*');
                    out.push_str(symbol);
                    out.push_str(&format!("^{j}"));
                }
            }
        }
        out
    }

    /// Parses the output of [`ParamPoly::render`] back, accepting only the
    /// given parameter letter.
    pub fn parse(input: &str, symbol: &str) -> Result<Self, ParsePolyError> {
        let err = |reason: &str| ParsePolyError {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let text = input.trim();
        if text.is_empty() {
            return Err(err("empty string"));
        }
        // Split into signed terms at top level; the grammar has no parentheses.
        let mut terms: Vec<(bool, &str)> = Vec::new();
        let mut rest = text;
        let mut neg = false;
        if let Some(r) = rest.strip_prefix('-') {
            neg = true;
            rest = r.trim_start();
        }
        loop {
            let split = rest
                .char_indices()
                .find(|&(i, ch)| (ch == '+' || ch == '-') && i > 0 && rest[..i].ends_with(' '));
            match split {
                Some((i, ch)) => {
                    terms.push((neg, rest[..i].trim()));
                    neg = ch == '-';
                    rest = rest[i + 1..].trim_start();
                }
                None => {
                    terms.push((neg, rest.trim()));
                    break;
                }
            }
        }
        let mut acc = ParamPoly::zero();
        for (neg, term) in terms {
            if term.is_empty() {
                return Err(err("dangling sign"));
            }
            let (coeff_str, power) = match term.split_once(symbol) {
                None => (term, None),
                Some((c, p)) => {
                    let c = c.trim().trim_end_matches('*').trim();
                    let pow = p.trim();
                    let j = if pow.is_empty() {
                        1usize
                    } else {
                        let digits = pow
                            .strip_prefix('^')
                            .ok_or_else(|| err("malformed power"))?;
                        digits.parse().map_err(|_| err("malformed exponent"))?
                    };
                    (c, Some(j))
                }
            };
            let coeff = if coeff_str.is_empty() {
                Rational::one()
            } else {
                coeff_str.parse().map_err(|_| err("malformed coefficient"))?
            };
            let coeff = if neg { -coeff } else { coeff };
            let j = power.unwrap_or(0);
            acc = acc + ParamPoly::monomial(coeff, j);
        }
        Ok(acc)
    }
}

/// Parse error for the polynomial text form.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid polynomial literal {input:?}: {reason}")]
pub struct ParsePolyError {
    pub input: String,
    pub reason: String,
}

impl Add for ParamPoly {
    type Output = ParamPoly;
    fn add(self, rhs: ParamPoly) -> ParamPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for j in 0..n {
            coeffs.push(&self.coeff(j) + &rhs.coeff(j));
        }
        ParamPoly::new(coeffs)
    }
}

impl Sub for ParamPoly {
    type Output = ParamPoly;
    fn sub(self, rhs: ParamPoly) -> ParamPoly {
        self + (-rhs)
    }
}

impl Mul for ParamPoly {
    type Output = ParamPoly;
    fn mul(self, rhs: ParamPoly) -> ParamPoly {
        if self.is_zero() || rhs.is_zero() {
            return ParamPoly::zero();
        }
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        ParamPoly::new(coeffs)
    }
}

impl Neg for ParamPoly {
    type Output = ParamPoly;
    fn neg(self) -> ParamPoly {
        ParamPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl fmt::Debug for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("t"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn poly(cs: &[(i64, i64)]) -> ParamPoly {
        ParamPoly::new(cs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn add_examples() {
        // (20 + t) + t = 20 + 2t
        let p = poly(&[(20, 1), (1, 1)]) + ParamPoly::theta();
        assert_eq!(p, poly(&[(20, 1), (2, 1)]));
    }

    #[test]
    fn mul_examples() {
        // (1 + t)(1 - t) = 1 - t^2
        let p = poly(&[(1, 1), (1, 1)]) * poly(&[(1, 1), (-1, 1)]);
        assert_eq!(p, poly(&[(1, 1), (0, 1), (-1, 1)]));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(poly(&[(20, 1), (1, 1)]).eval(&Rational::one()), rat(21, 1));
        assert_eq!(ParamPoly::zero().eval(&rat(7, 3)), Rational::zero());
        // 1680 + 60t + t^2 at t = 1/2: 1680 + 30 + 1/4 = 6841/4
        let p = poly(&[(1680, 1), (60, 1), (1, 1)]);
        assert_eq!(p.eval(&rat(1, 2)), rat(6841, 4));
    }

    #[test]
    fn recip_examples() {
        let four = ParamPoly::constant(rat(4, 1));
        assert_eq!(
            four.checked_recip().unwrap(),
            ParamPoly::constant(rat(1, 4))
        );
        assert_eq!(
            ParamPoly::zero().checked_recip(),
            Err(CoeffError::DivisionByZero)
        );
        assert!(matches!(
            ParamPoly::theta().checked_recip(),
            Err(CoeffError::NotInvertible(_))
        ));
    }

    #[test]
    fn render_examples() {
        assert_eq!(poly(&[(1680, 1), (60, 1), (1, 1)]).render("a"), "1680 + 60*a + a^2");
        assert_eq!(poly(&[(0, 1), (0, 1), (-6, 1)]).render("a"), "-6*a^2");
        assert_eq!(poly(&[(0, 1), (2, 3)]).render("b"), "2/3*b");
        assert_eq!(ParamPoly::zero().render("a"), "0");
        assert_eq!(poly(&[(0, 1), (1, 1)]).render("b"), "b");
        assert_eq!(poly(&[(1, 1), (-1, 1)]).render("a"), "1 - a");
    }

    #[test]
    fn parse_examples() {
        let p = ParamPoly::parse("1680 + 60*a + a^2", "a").unwrap();
        assert_eq!(p, poly(&[(1680, 1), (60, 1), (1, 1)]));
        let q = ParamPoly::parse("-6*a^2", "a").unwrap();
        assert_eq!(q, poly(&[(0, 1), (0, 1), (-6, 1)]));
        assert!(ParamPoly::parse("2*x", "a").is_err());
    }

    fn arb_poly() -> impl Strategy<Value = ParamPoly> {
        proptest::collection::vec((-50i64..50, 1i64..20), 0..5)
            .prop_map(|cs| ParamPoly::new(cs.into_iter().map(|(n, d)| rat(n, d)).collect()))
    }

    proptest! {
        #[test]
        fn ring_laws(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
            prop_assert_eq!(p.clone() + q.clone(), q.clone() + p.clone());
            prop_assert_eq!(p.clone() * q.clone(), q.clone() * p.clone());
            prop_assert_eq!((p.clone() + q.clone()) + r.clone(), p.clone() + (q.clone() + r.clone()));
            prop_assert_eq!((p.clone() * q.clone()) * r.clone(), p.clone() * (q.clone() * r.clone()));
            prop_assert_eq!(
                p.clone() * (q.clone() + r.clone()),
                p.clone() * q.clone() + p.clone() * r.clone()
            );
            prop_assert_eq!(p.clone() + ParamPoly::zero(), p.clone());
            prop_assert_eq!(p.clone() * ParamPoly::one(), p.clone());
        }

        #[test]
        fn eval_is_ring_homomorphism(p in arb_poly(), q in arb_poly(), n in -20i64..20, d in 1i64..10) {
            let v = rat(n, d);
            let lhs = (p.clone() * q.clone()).eval(&v);
            let rhs = p.eval(&v) * q.eval(&v);
            prop_assert_eq!(lhs, rhs);
            let lhs = (p.clone() + q.clone()).eval(&v);
            let rhs = p.eval(&v) + q.eval(&v);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn render_parse_round_trip(p in arb_poly()) {
            let s = p.render("a");
            let back = ParamPoly::parse(&s, "a").unwrap();
            prop_assert_eq!(back, p);
        }
    }
}
