//! Laplace characters and compound characters.
//!
//! The Laplace character of a moment sequence `mu_0..mu_m` is the operator
//! `sum_i (-1)^i mu_i / i! D^i`. It is multiplicative over convolution, so
//! the expected character `E[N L^(N-1)]` of a compound sum collapses to a
//! closed form for each supported count law:
//!
//! * Poisson(a):    `a · exp(a (L - Id))`
//! * geometric, odds b = a/(1-a):  `b · (Id - b (L - Id))^{-2}`
//! * degenerate n:  `n · L^(n-1)`
//! * finite pmf:    `sum_n p_n n L^(n-1)`
//!
//! The geometric form exploits `Id - a L = (1-a)(Id - b (L - Id))`, which
//! keeps every coefficient a polynomial in the odds.

use crate::coeff::Coeff;
use crate::error::CompoundError;
use crate::operator::TruncatedOperator;
use crate::poly::{ParamPoly, ParamSymbol};
use crate::rational::Rational;

/// Moments `mu_0..mu_m` of a summand distribution, with `mu_0 = 1`.
#[derive(Clone, PartialEq, Debug)]
pub struct MomentSequence<C: Coeff> {
    mu: Vec<C>,
}

impl<C: Coeff> MomentSequence<C> {
    pub fn new(mu: Vec<C>) -> Result<Self, CompoundError> {
        if mu.is_empty() || mu[0] != C::one() {
            return Err(CompoundError::BadZerothMoment);
        }
        Ok(MomentSequence { mu })
    }

    /// Highest moment index available.
    pub fn order(&self) -> usize {
        self.mu.len() - 1
    }

    pub fn moment(&self, i: usize) -> &C {
        &self.mu[i]
    }

    pub fn moments(&self) -> &[C] {
        &self.mu
    }
}

/// The distribution of the random summand count `N`.
///
/// Parameters may be left formal (`None`) for Poisson and geometric counts,
/// in which case downstream results are polynomials in the rate `a` or the
/// odds `b`. Custom counts must have finite support with exact probabilities
/// summing to one; infinite-support laws are rejected rather than silently
/// truncated.
#[derive(Clone, PartialEq, Debug)]
pub enum CountSpec {
    Poisson { rate: Option<Rational> },
    Geometric { ratio: Option<Rational> },
    Degenerate { n: u32 },
    Custom { pmf: Vec<(u32, Rational)> },
}

impl CountSpec {
    /// Checks the numeric parameter ranges and pmf axioms.
    pub fn validate(&self) -> Result<(), CompoundError> {
        match self {
            CountSpec::Poisson { rate: Some(a) } => {
                if a.is_zero() || a.is_negative() {
                    return Err(CompoundError::InvalidCount(format!(
                        "poisson rate must be positive, got {a}"
                    )));
                }
            }
            CountSpec::Geometric { ratio: Some(a) } => {
                let one = Rational::one();
                if a.is_zero() || a.is_negative() || !(a < &one) {
                    return Err(CompoundError::InvalidCount(format!(
                        "geometric parameter must lie strictly between 0 and 1, got {a}"
                    )));
                }
            }
            CountSpec::Custom { pmf } => {
                if pmf.is_empty() {
                    return Err(CompoundError::InvalidCount(
                        "custom pmf must not be empty".to_string(),
                    ));
                }
                let mut total = Rational::zero();
                let mut seen = std::collections::BTreeSet::new();
                for (n, p) in pmf {
                    if !seen.insert(*n) {
                        return Err(CompoundError::InvalidCount(format!(
                            "custom pmf repeats the atom n = {n}"
                        )));
                    }
                    if p.is_negative() {
                        return Err(CompoundError::InvalidCount(format!(
                            "custom pmf has a negative probability at n = {n}"
                        )));
                    }
                    total = &total + p;
                }
                if !total.is_one() {
                    return Err(CompoundError::InvalidCount(format!(
                        "custom pmf probabilities must sum exactly to 1, got {total}"
                    )));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// True when the count parameter is left formal.
    pub fn is_formal(&self) -> bool {
        matches!(
            self,
            CountSpec::Poisson { rate: None } | CountSpec::Geometric { ratio: None }
        )
    }

    /// The rendering symbol of the formal parameter, when there is one.
    pub fn symbol(&self) -> Option<ParamSymbol> {
        match self {
            CountSpec::Poisson { .. } => Some(ParamSymbol::A),
            CountSpec::Geometric { .. } => Some(ParamSymbol::B),
            _ => None,
        }
    }

    /// Geometric odds `b = a/(1-a)` for a numeric geometric count.
    pub fn geometric_odds(&self) -> Option<Rational> {
        match self {
            CountSpec::Geometric { ratio: Some(a) } => {
                let one_minus = Rational::one() - a.clone();
                Some(a.checked_div(&one_minus).expect("a < 1 was validated"))
            }
            _ => None,
        }
    }

    /// `P{N = 0}` for a numeric count, in floating point.
    pub fn prob_zero(&self) -> Option<f64> {
        match self {
            CountSpec::Poisson { rate: Some(a) } => Some((-a.to_f64()).exp()),
            CountSpec::Geometric { ratio: Some(a) } => Some(1.0 - a.to_f64()),
            CountSpec::Degenerate { n } => Some(if *n == 0 { 1.0 } else { 0.0 }),
            CountSpec::Custom { pmf } => Some(
                pmf.iter()
                    .find(|(n, _)| *n == 0)
                    .map(|(_, p)| p.to_f64())
                    .unwrap_or(0.0),
            ),
            _ => None,
        }
    }

    /// `E[N]` for a numeric count, exactly. Poisson gives the rate,
    /// geometric the odds.
    pub fn mean(&self) -> Option<Rational> {
        match self {
            CountSpec::Poisson { rate: Some(a) } => Some(a.clone()),
            CountSpec::Geometric { ratio: Some(_) } => self.geometric_odds(),
            CountSpec::Degenerate { n } => Some(Rational::from_integer(*n as i64)),
            CountSpec::Custom { pmf } => {
                let mut acc = Rational::zero();
                for (n, p) in pmf {
                    acc = &acc + &(Rational::from_integer(*n as i64) * p.clone());
                }
                Some(acc)
            }
            _ => None,
        }
    }
}

/// Builds the order-`m` Laplace character `sum_i (-1)^i mu_i / i! D^i`.
pub fn laplace_character<C: Coeff>(
    moments: &MomentSequence<C>,
    m: usize,
) -> Result<TruncatedOperator<C>, CompoundError> {
    if moments.order() < m {
        return Err(CompoundError::InsufficientMoments {
            need: m + 1,
            got: moments.order() + 1,
        });
    }
    let mut coeffs = Vec::with_capacity(m + 1);
    let mut sign = Rational::one();
    let mut fact = Rational::one();
    for i in 0..=m {
        if i > 0 {
            sign = -sign;
            fact = fact * Rational::from_integer(i as i64);
        }
        let w = sign.checked_div(&fact).expect("factorial is nonzero");
        coeffs.push(moments.moment(i).scale_rat(&w));
    }
    Ok(TruncatedOperator::from_coeffs(coeffs))
}

fn check_unit_constant<C: Coeff>(character: &TruncatedOperator<C>) -> Result<(), CompoundError> {
    if character.coeff(0) != &C::one() {
        return Err(CompoundError::Operator(
            crate::error::OperatorError::NonzeroConstantTerm,
        ));
    }
    Ok(())
}

/// Compound character of a Poisson count: `rate · exp(rate (L - Id))`.
///
/// Pass `rate = theta` (over [`ParamPoly`]) for the symbolic form.
pub fn poisson_compound_character<C: Coeff>(
    character: &TruncatedOperator<C>,
    rate: &C,
) -> Result<TruncatedOperator<C>, CompoundError> {
    check_unit_constant(character)?;
    let m = character.order();
    let centered = character.sub(&TruncatedOperator::identity(m))?;
    let exp = centered.scale(rate).exp_nilpotent()?;
    Ok(exp.scale(rate))
}

/// Compound character of a geometric count in the odds parameter:
/// `odds · (Id - odds (L - Id))^{-2}`.
pub fn geometric_compound_character<C: Coeff>(
    character: &TruncatedOperator<C>,
    odds: &C,
) -> Result<TruncatedOperator<C>, CompoundError> {
    check_unit_constant(character)?;
    let m = character.order();
    let id = TruncatedOperator::identity(m);
    let centered = character.sub(&id)?;
    let resolvent = id.sub(&centered.scale(odds))?.invert()?;
    Ok(resolvent.mul(&resolvent)?.scale(odds))
}

/// Compound character of a degenerate count: `n · L^(n-1)`; zero for `n = 0`.
pub fn degenerate_compound_character<C: Coeff>(
    n: u32,
    character: &TruncatedOperator<C>,
) -> TruncatedOperator<C> {
    if n == 0 {
        return TruncatedOperator::zero(character.order());
    }
    character
        .pow(n - 1)
        .scale_rat(&Rational::from_integer(n as i64))
}

/// Compound character of a finite custom count: `sum_n p_n n L^(n-1)`.
pub fn custom_compound_character<C: Coeff>(
    pmf: &[(u32, Rational)],
    character: &TruncatedOperator<C>,
) -> TruncatedOperator<C> {
    let m = character.order();
    let mut acc = TruncatedOperator::zero(m);
    for (n, p) in pmf {
        if *n == 0 || p.is_zero() {
            continue;
        }
        let weight = p.clone() * Rational::from_integer(*n as i64);
        let term = character.pow(*n - 1).scale_rat(&weight);
        acc = acc.add(&term).expect("orders match by construction");
    }
    acc
}

/// A compound character in whichever coefficient ring the count law calls
/// for: exact rationals, polynomials in the formal parameter, or floats.
#[derive(Clone, PartialEq, Debug)]
pub enum CompoundCharacter {
    Exact(TruncatedOperator<Rational>),
    Symbolic {
        symbol: ParamSymbol,
        operator: TruncatedOperator<ParamPoly>,
    },
    Numeric(TruncatedOperator<f64>),
}

impl CompoundCharacter {
    pub fn render(&self) -> String {
        match self {
            CompoundCharacter::Exact(op) => op.render(""),
            CompoundCharacter::Symbolic { symbol, operator } => operator.render(symbol.as_str()),
            CompoundCharacter::Numeric(op) => op.render(""),
        }
    }
}

/// Dispatches the closed-form compound character for an exact summand
/// character.
pub fn compound_character(
    count: &CountSpec,
    character: &TruncatedOperator<Rational>,
) -> Result<CompoundCharacter, CompoundError> {
    count.validate()?;
    match count {
        CountSpec::Poisson { rate: None } => {
            let lifted = character.map_coeffs(|c| ParamPoly::constant(c.clone()));
            let op = poisson_compound_character(&lifted, &ParamPoly::theta())?;
            Ok(CompoundCharacter::Symbolic {
                symbol: ParamSymbol::A,
                operator: op,
            })
        }
        CountSpec::Poisson { rate: Some(a) } => Ok(CompoundCharacter::Exact(
            poisson_compound_character(character, a)?,
        )),
        CountSpec::Geometric { ratio: None } => {
            let lifted = character.map_coeffs(|c| ParamPoly::constant(c.clone()));
            let op = geometric_compound_character(&lifted, &ParamPoly::theta())?;
            Ok(CompoundCharacter::Symbolic {
                symbol: ParamSymbol::B,
                operator: op,
            })
        }
        CountSpec::Geometric { ratio: Some(_) } => {
            let b = count.geometric_odds().expect("validated numeric geometric");
            Ok(CompoundCharacter::Exact(geometric_compound_character(
                character, &b,
            )?))
        }
        CountSpec::Degenerate { n } => Ok(CompoundCharacter::Exact(
            degenerate_compound_character(*n, character),
        )),
        CountSpec::Custom { pmf } => Ok(CompoundCharacter::Exact(custom_compound_character(
            pmf, character,
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::TruncatedOperator;
    use num_traits::ToPrimitive;

    type Op = TruncatedOperator<Rational>;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn rational_moments(mu: &[(i64, i64)]) -> MomentSequence<Rational> {
        MomentSequence::new(mu.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    /// Weibull moments mu_j = (3j)! up to the given order.
    fn weibull_third_moments(m: usize) -> MomentSequence<Rational> {
        let mu = (0..=m as u64)
            .map(|j| Rational::from_bigint(crate::rational::factorial(3 * j)))
            .collect();
        MomentSequence::new(mu).unwrap()
    }

    #[test]
    fn laplace_character_examples() {
        let mu = rational_moments(&[(1, 1), (7, 2), (9, 1)]);
        assert_eq!(laplace_character(&mu, 0).unwrap(), Op::identity(0));
        assert_eq!(
            laplace_character(&mu, 1).unwrap(),
            Op::from_coeffs(vec![rat(1, 1), rat(-7, 2)])
        );
        // Weibull(1/3): mu = (1, 6, 720) -> (1, -6, 360).
        let w = weibull_third_moments(2);
        assert_eq!(
            laplace_character(&w, 2).unwrap(),
            Op::from_coeffs(vec![rat(1, 1), rat(-6, 1), rat(360, 1)])
        );
        assert!(matches!(
            laplace_character(&mu, 5),
            Err(CompoundError::InsufficientMoments { need: 6, got: 3 })
        ));
    }

    #[test]
    fn moment_sequence_rejects_bad_zeroth() {
        assert!(MomentSequence::new(vec![rat(2, 1)]).is_err());
        assert!(MomentSequence::<Rational>::new(vec![]).is_err());
    }

    /// Symbolic Poisson character at order 3 against the closed form
    /// a·Id - a²μ₁·D + (a²/2)(aμ₁² + μ₂)·D² - (a²/6)(a²μ₁³ + 3aμ₁μ₂ + μ₃)·D³,
    /// checked exactly for a batch of rational moment tuples.
    #[test]
    fn poisson_symbolic_order3_display() {
        let tuples = [
            [(6, 1), (720, 1), (362880, 1)],
            [(1, 2), (3, 4), (5, 6)],
            [(2, 1), (7, 3), (11, 5)],
        ];
        for mus in tuples {
            let m1 = rat(mus[0].0, mus[0].1);
            let m2 = rat(mus[1].0, mus[1].1);
            let m3 = rat(mus[2].0, mus[2].1);
            let moments = MomentSequence::new(vec![
                Rational::one(),
                m1.clone(),
                m2.clone(),
                m3.clone(),
            ])
            .unwrap();
            let lifted = laplace_character(&moments, 3)
                .unwrap()
                .map_coeffs(|c| ParamPoly::constant(c.clone()));
            let got = poisson_compound_character(&lifted, &ParamPoly::theta()).unwrap();

            let a = |j: usize, c: Rational| ParamPoly::monomial(c, j);
            let c0 = a(1, Rational::one());
            let c1 = a(2, -m1.clone());
            let c2 = a(3, &m1 * &m1) + a(2, m2.clone());
            let c2 = c2.scale(&rat(1, 2));
            let c3 = a(4, &(&m1 * &m1) * &m1)
                + a(3, (&m1 * &m2).scale_rat(&rat(3, 1)))
                + a(2, m3.clone());
            let c3 = c3.scale(&rat(-1, 6));
            let want = TruncatedOperator::from_coeffs(vec![c0, c1, c2, c3]);
            assert_eq!(got, want);
        }
    }

    /// Symbolic geometric character at order 3 against the closed form
    /// b·Id - 2b²μ₁·D + b²(μ₂ + 3bμ₁²)·D² - (b²/3)(12b²μ₁³ + 9bμ₁μ₂ + μ₃)·D³.
    #[test]
    fn geometric_symbolic_order3_display() {
        let tuples = [
            [(6, 1), (720, 1), (362880, 1)],
            [(1, 2), (3, 4), (5, 6)],
            [(5, 7), (13, 2), (29, 3)],
        ];
        for mus in tuples {
            let m1 = rat(mus[0].0, mus[0].1);
            let m2 = rat(mus[1].0, mus[1].1);
            let m3 = rat(mus[2].0, mus[2].1);
            let moments = MomentSequence::new(vec![
                Rational::one(),
                m1.clone(),
                m2.clone(),
                m3.clone(),
            ])
            .unwrap();
            let lifted = laplace_character(&moments, 3)
                .unwrap()
                .map_coeffs(|c| ParamPoly::constant(c.clone()));
            let got = geometric_compound_character(&lifted, &ParamPoly::theta()).unwrap();

            let b = |j: usize, c: Rational| ParamPoly::monomial(c, j);
            let c0 = b(1, Rational::one());
            let c1 = b(2, (&m1).scale_rat(&rat(-2, 1)));
            let c2 = b(2, m2.clone()) + b(3, (&m1 * &m1).scale_rat(&rat(3, 1)));
            let c3 = b(4, (&(&m1 * &m1) * &m1).scale_rat(&rat(12, 1)))
                + b(3, (&m1 * &m2).scale_rat(&rat(9, 1)))
                + b(2, m3.clone());
            let c3 = c3.scale(&rat(-1, 3));
            let want = TruncatedOperator::from_coeffs(vec![c0, c1, c2, c3]);
            assert_eq!(got, want);
        }
    }

    /// Weibull(1/3) instance of the symbolic Poisson display: the D
    /// coefficient is -6a² and the D² coefficient is 18a³ + 360a².
    #[test]
    fn poisson_weibull_coefficients() {
        let lifted = laplace_character(&weibull_third_moments(3), 3)
            .unwrap()
            .map_coeffs(|c| ParamPoly::constant(c.clone()));
        let op = poisson_compound_character(&lifted, &ParamPoly::theta()).unwrap();
        assert_eq!(op.coeff(1), &ParamPoly::monomial(rat(-6, 1), 2));
        assert_eq!(
            op.coeff(2),
            &(ParamPoly::monomial(rat(360, 1), 2) + ParamPoly::monomial(rat(18, 1), 3))
        );
    }

    #[test]
    fn poisson_order0_is_rate_times_id() {
        let l = Op::identity(0);
        let op = poisson_compound_character(&l, &rat(1, 2)).unwrap();
        assert_eq!(op, Op::from_coeffs(vec![rat(1, 2)]));
    }

    #[test]
    fn geometric_order0_is_odds_times_id() {
        let lifted = Op::identity(0).map_coeffs(|c| ParamPoly::constant(c.clone()));
        let op = geometric_compound_character(&lifted, &ParamPoly::theta()).unwrap();
        assert_eq!(
            op,
            TruncatedOperator::from_coeffs(vec![ParamPoly::theta()])
        );
    }

    #[test]
    fn degenerate_examples() {
        let l = laplace_character(&weibull_third_moments(2), 2).unwrap();
        assert_eq!(degenerate_compound_character(1, &l), Op::identity(2));
        assert_eq!(
            degenerate_compound_character(2, &l),
            l.scale_rat(&rat(2, 1))
        );
        assert!(degenerate_compound_character(0, &l).is_zero());
    }

    #[test]
    fn custom_two_point_example() {
        // pmf {1: 1/2, 2: 1/2} -> Id/2 + L.
        let l = laplace_character(&weibull_third_moments(2), 2).unwrap();
        let pmf = vec![(1u32, rat(1, 2)), (2u32, rat(1, 2))];
        let got = custom_compound_character(&pmf, &l);
        let want = Op::identity(2).scale_rat(&rat(1, 2)).add(&l).unwrap();
        assert_eq!(got, want);
    }

    /// The D^0 coefficient of every compound character is E[N]: a for
    /// Poisson, b for geometric, sum n p_n for custom counts.
    #[test]
    fn constant_coefficient_is_mean_count() {
        let l = laplace_character(&weibull_third_moments(4), 4).unwrap();
        let lifted = l.map_coeffs(|c| ParamPoly::constant(c.clone()));
        let pois = poisson_compound_character(&lifted, &ParamPoly::theta()).unwrap();
        assert_eq!(pois.coeff(0), &ParamPoly::theta());
        let geom = geometric_compound_character(&lifted, &ParamPoly::theta()).unwrap();
        assert_eq!(geom.coeff(0), &ParamPoly::theta());
        let pmf = vec![(1u32, rat(1, 4)), (3u32, rat(3, 4))];
        let custom = custom_compound_character(&pmf, &l);
        assert_eq!(custom.coeff(0), &rat(10, 4));
    }

    /// Substituting b = a/(1-a) into the odds-form geometric character
    /// reproduces a(1-a)(Id - aL)^{-2}, exactly.
    #[test]
    fn odds_form_matches_direct_resolvent() {
        let l = laplace_character(&weibull_third_moments(4), 4).unwrap();
        for (n, d) in [(1i64, 3i64), (1, 2), (2, 3), (9, 10)] {
            let a = rat(n, d);
            let one_minus = Rational::one() - a.clone();
            let b = a.checked_div(&one_minus).unwrap();
            let via_odds = geometric_compound_character(&l, &b).unwrap();

            let id = Op::identity(4);
            let direct = id
                .sub(&l.scale(&a))
                .unwrap()
                .invert()
                .unwrap()
                .pow(2)
                .scale(&(a.clone() * one_minus.clone()));
            assert_eq!(via_odds, direct);
        }
    }

    /// Poisson compound coefficients against the brute-force truncated series
    /// e^{-a} sum_{n<=N} n a^n/n! L^{n-1}, within an analytic remainder bound
    /// driven by mu_{F*(n-1),i} <= (n-1)^i mu_i.
    #[test]
    fn poisson_matches_truncated_series() {
        let n_max = 60u32;
        for (an, ad) in [(1i64, 4i64), (1, 2), (3, 4)] {
            for m in 0..=4usize {
                let a = rat(an, ad);
                let l = laplace_character(&weibull_third_moments(m), m).unwrap();
                let closed = poisson_compound_character(&l, &a).unwrap();

                // Partial series in exact arithmetic, then scaled by e^{-a}.
                let mut series = Op::zero(m);
                let mut a_pow_over_fact = a.clone(); // a^n / n! at n = 1
                for n in 1..=n_max {
                    let w = a_pow_over_fact.clone() * Rational::from_integer(n as i64);
                    series = series.add(&l.pow(n - 1).scale_rat(&w)).unwrap();
                    a_pow_over_fact =
                        a_pow_over_fact * a.clone() * rat(1, (n + 1) as i64);
                }
                let scale = (-a.to_f64()).exp();

                for i in 0..=m {
                    let got = closed.coeff(i).to_f64();
                    let series_val = series.coeff(i).to_f64() * scale;
                    let bound = poisson_tail_bound(&a, n_max, i, m);
                    assert!(
                        (got - series_val).abs() <= bound + 1e-9 * got.abs().max(1.0),
                        "a={a} m={m} i={i}: {got} vs {series_val} (bound {bound:e})"
                    );
                }
            }
        }
    }

    /// Remainder of the Poisson series beyond n_max for the D^i coefficient:
    /// sum_{n>N} e^{-a} a^n n/n! (n-1)^i mu_i/i!.
    fn poisson_tail_bound(a: &Rational, n_max: u32, i: usize, m: usize) -> f64 {
        let mu_over_fact = weibull_third_moments(m).moment(i).to_f64()
            / crate::rational::factorial(i as u64).to_f64().unwrap_or(1.0);
        let af = a.to_f64();
        let mut ln_fact = (2..=n_max as u64 + 1).map(|k| (k as f64).ln()).sum::<f64>();
        let mut bound = 0.0;
        for n in (n_max + 1)..(n_max + 200) {
            let nf = n as f64;
            let ln_term = -af + nf * af.ln() - ln_fact + nf.ln() + (i as f64) * (nf - 1.0).ln();
            bound += ln_term.exp();
            ln_fact += (nf + 1.0).ln();
        }
        bound * mu_over_fact * 2.0
    }
}
