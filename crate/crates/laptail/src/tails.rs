//! Symbolic calculus on the tail family `t^r e^(-t^alpha)` and the
//! top-level asymptotic expansion of the compound tail.
//!
//! The family is closed under differentiation:
//!
//! ```text
//! d/dt [ c t^r e^(-t^alpha) ] = c r t^(r-1) e^(-t^alpha)
//!                             - c alpha t^(r+alpha-1) e^(-t^alpha)
//! ```
//!
//! so applying a truncated operator to the tail function stays inside the
//! family. An expansion of order `k` keeps exactly the terms with exponent
//! `r >= k (alpha - 1)`; everything below that scale belongs to the
//! remainder, which is `o(h^k F-bar)` with `h^k F-bar` sitting at exponent
//! `k (alpha - 1)` exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coeff::Coeff;
use crate::compound::{
    compound_character, custom_compound_character, degenerate_compound_character,
    laplace_character, poisson_compound_character, CompoundCharacter, CountSpec, MomentSequence,
};
use crate::error::TailsError;
use crate::operator::{TruncatedOperator, MAX_ORDER};
use crate::poly::{ParamPoly, ParamSymbol};
use crate::quad::weibull_moment;
use crate::rational::{factorial, Rational};

/// The summand family `F-bar(t) = exp(-t^alpha)` with hazard rate
/// `h(t) = alpha t^(alpha - 1)`.
///
/// Any positive rational `alpha` can be constructed so that inadmissible
/// parameters still produce a [`ValidationReport`]; the expansion entry
/// points insist on an admissible spec (`0 < alpha < 1`).
#[derive(Clone, PartialEq, Debug)]
pub struct SummandSpec {
    alpha: Rational,
}

impl SummandSpec {
    pub fn new(alpha: Rational) -> Result<Self, TailsError> {
        if alpha.is_zero() || alpha.is_negative() {
            return Err(TailsError::InvalidAlpha(alpha.to_string()));
        }
        Ok(SummandSpec { alpha })
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    /// `F-bar(t) = exp(-t^alpha)` for `t >= 0`.
    pub fn tail(&self, t: f64) -> f64 {
        (-t.powf(self.alpha.to_f64())).exp()
    }

    /// `F(t) = 1 - exp(-t^alpha)`.
    pub fn cdf(&self, t: f64) -> f64 {
        -(-t.powf(self.alpha.to_f64())).exp_m1()
    }

    /// Density `f(t) = alpha t^(alpha-1) exp(-t^alpha)`.
    pub fn density(&self, t: f64) -> f64 {
        self.hazard(t) * self.tail(t)
    }

    /// Hazard rate `h(t) = alpha t^(alpha - 1)`.
    pub fn hazard(&self, t: f64) -> f64 {
        let a = self.alpha.to_f64();
        a * t.powf(a - 1.0)
    }

    /// `q` when `alpha = 1/q` for a positive integer `q`; in that case the
    /// moments are exactly `mu_j = (j q)!`.
    pub fn exact_moment_order(&self) -> Option<u64> {
        use num_traits::One;
        if self.alpha.numer().is_one() {
            use num_traits::ToPrimitive;
            self.alpha.denom().to_u64()
        } else {
            None
        }
    }

    /// Exact moment sequence `mu_j = (j q)!` up to order `m`. The factorial
    /// formula is `Gamma(j q + 1)`; the quadrature oracle confirms it
    /// numerically in the test suites.
    pub fn exact_moments(&self, m: usize) -> Result<MomentSequence<Rational>, TailsError> {
        let q = self
            .exact_moment_order()
            .ok_or_else(|| TailsError::InexactMoments(self.alpha.to_string()))?;
        let mu = (0..=m as u64)
            .map(|j| Rational::from_bigint(factorial(j * q)))
            .collect();
        Ok(MomentSequence::new(mu).expect("mu_0 = 0! = 1"))
    }

    /// Floating moment sequence `mu_j = Gamma(j/alpha + 1)` by quadrature of
    /// the defining integral; used when `1/alpha` is not an integer.
    pub fn numeric_moments(&self, m: usize) -> MomentSequence<f64> {
        let mut mu = Vec::with_capacity(m + 1);
        mu.push(1.0);
        for j in 1..=m as u64 {
            mu.push(weibull_moment(&self.alpha, j));
        }
        MomentSequence::new(mu).expect("mu_0 = 1")
    }

    /// Checks each admissibility condition of the summand family separately.
    pub fn validate(&self) -> ValidationReport {
        let alpha = &self.alpha;
        let one = Rational::one();
        let positive = !alpha.is_negative() && !alpha.is_zero();
        let below_one = alpha < &one;
        let conditions = vec![
            ConditionCheck {
                name: "hazard vanishes at infinity",
                passed: below_one,
                detail: if below_one {
                    format!("h(t) = {alpha}*t^({}) -> 0", exponent_string(alpha))
                } else {
                    format!(
                        "h(t) = {alpha}*t^({}) does not tend to 0 (requires alpha < 1)",
                        exponent_string(alpha)
                    )
                },
            },
            ConditionCheck {
                name: "scaled hazard t*h(t) diverges",
                passed: positive,
                detail: format!("t*h(t) = {alpha}*t^({alpha})"),
            },
            ConditionCheck {
                name: "hazard dominates the logarithm",
                passed: positive,
                detail: format!("t*h(t)/log t = {alpha}*t^({alpha})/log t -> infinity"),
            },
            ConditionCheck {
                name: "hazard index lies in (-1, 0)",
                passed: positive && below_one,
                detail: format!("index alpha - 1 = {}", exponent_string(alpha)),
            },
        ];
        ValidationReport { conditions }
    }

    fn ensure_admissible(&self) -> Result<(), TailsError> {
        let report = self.validate();
        if report.passed() {
            Ok(())
        } else {
            Err(TailsError::NotAdmissible(report.failure_summary()))
        }
    }
}

fn exponent_string(alpha: &Rational) -> String {
    (alpha.clone() - Rational::one()).to_string()
}

/// One admissibility condition with its verdict.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`SummandSpec::validate`]; carries every condition so callers
/// can report all failures at once.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValidationReport {
    pub conditions: Vec<ConditionCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn failure_summary(&self) -> String {
        self.conditions
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// One term `coeff * t^exponent * exp(-t^alpha)` of a tail combination.
#[derive(Clone, PartialEq, Debug)]
pub struct TailTerm<C: Coeff> {
    pub coeff: C,
    pub exponent: Rational,
}

impl<C: Coeff> TailTerm<C> {
    pub fn new(coeff: C, exponent: Rational) -> Self {
        TailTerm { coeff, exponent }
    }
}

/// Merges like exponents and drops zero coefficients; output sorted by
/// strictly decreasing exponent.
fn merge_terms<C: Coeff>(terms: impl IntoIterator<Item = TailTerm<C>>) -> Vec<TailTerm<C>> {
    let mut map: BTreeMap<Rational, C> = BTreeMap::new();
    for term in terms {
        match map.entry(term.exponent) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(term.coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = e.get().clone() + term.coeff;
                *e.get_mut() = merged;
            }
        }
    }
    map.into_iter()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(exponent, coeff)| TailTerm { coeff, exponent })
        .collect()
}

/// Differentiates a tail combination once; stays inside the family.
pub fn tail_differentiate<C: Coeff>(terms: &[TailTerm<C>], alpha: &Rational) -> Vec<TailTerm<C>> {
    let mut out = Vec::with_capacity(terms.len() * 2);
    let alpha_shift = alpha.clone() - Rational::one();
    for term in terms {
        if !term.exponent.is_zero() {
            out.push(TailTerm::new(
                term.coeff.scale_rat(&term.exponent),
                term.exponent.clone() - Rational::one(),
            ));
        }
        out.push(TailTerm::new(
            -term.coeff.scale_rat(alpha),
            term.exponent.clone() + alpha_shift.clone(),
        ));
    }
    merge_terms(out)
}

/// `k`-th derivative of the bare tail `F-bar = t^0 e^(-t^alpha)`, exact.
pub fn fbar_derivative(s: &SummandSpec, k: usize) -> Vec<TailTerm<Rational>> {
    let mut terms = vec![TailTerm::new(Rational::one(), Rational::zero())];
    for _ in 0..k {
        terms = tail_differentiate(&terms, s.alpha());
    }
    terms
}

/// Applies `sum_i c_i D^i` to `F-bar`: the result is
/// `sum_i c_i F-bar^(i)` merged into one tail combination.
pub fn apply_operator<C: Coeff>(
    operator: &TruncatedOperator<C>,
    s: &SummandSpec,
) -> Vec<TailTerm<C>> {
    let mut out = Vec::new();
    let mut derivative = vec![TailTerm::new(Rational::one(), Rational::zero())];
    for i in 0..=operator.order() {
        if i > 0 {
            derivative = tail_differentiate(&derivative, s.alpha());
        }
        let c = operator.coeff(i);
        if c.is_zero() {
            continue;
        }
        for d in &derivative {
            out.push(TailTerm::new(c.scale_rat(&d.coeff), d.exponent.clone()));
        }
    }
    merge_terms(out)
}

/// The normalizer `h^k F-bar = alpha^k t^(k(alpha-1)) e^(-t^alpha)` used for
/// residual scaling.
pub fn hazard_power_tail(s: &SummandSpec, k: usize) -> TailTerm<Rational> {
    TailTerm::new(
        s.alpha().pow(k as i32),
        Rational::from_integer(k as i64) * (s.alpha().clone() - Rational::one()),
    )
}

/// A truncated expansion of the compound tail: a sorted, merged sum of tail
/// terms, all with exponent at least `k (alpha - 1)`.
#[derive(Clone, PartialEq, Debug)]
pub struct TailExpansion<C: Coeff> {
    alpha: Rational,
    order: usize,
    terms: Vec<TailTerm<C>>,
}

impl<C: Coeff> TailExpansion<C> {
    fn from_terms(alpha: Rational, order: usize, terms: Vec<TailTerm<C>>) -> Self {
        let r_min = Rational::from_integer(order as i64) * (alpha.clone() - Rational::one());
        let kept = merge_terms(terms)
            .into_iter()
            .filter(|t| t.exponent >= r_min)
            .collect();
        TailExpansion {
            alpha,
            order,
            terms: kept,
        }
    }

    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    /// The truncation order `k`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// The remainder scale exponent `k (alpha - 1)`.
    pub fn r_min(&self) -> Rational {
        Rational::from_integer(self.order as i64) * (self.alpha.clone() - Rational::one())
    }

    pub fn terms(&self) -> &[TailTerm<C>] {
        &self.terms
    }

    /// Restriction to the terms of a lower order `j <= k`: keeps exponents
    /// `r >= j (alpha - 1)`. Those coefficients are order-stable, so this is
    /// exactly the order-`j` expansion.
    pub fn truncate_order(&self, j: usize) -> Self {
        assert!(j <= self.order, "cannot raise the expansion order");
        let r_min = Rational::from_integer(j as i64) * (self.alpha.clone() - Rational::one());
        TailExpansion {
            alpha: self.alpha.clone(),
            order: j,
            terms: self
                .terms
                .iter()
                .filter(|t| t.exponent >= r_min)
                .cloned()
                .collect(),
        }
    }

    /// Per-term values at `t` with coefficients mapped to floats by `f`.
    fn evaluated_terms_with(&self, t: f64, f: impl Fn(&C) -> f64) -> Vec<(Rational, f64)> {
        let fbar = (-t.powf(self.alpha.to_f64())).exp();
        self.terms
            .iter()
            .map(|term| {
                let v = f(&term.coeff) * t.powf(term.exponent.to_f64()) * fbar;
                (term.exponent.clone(), v)
            })
            .collect()
    }
}

/// An expansion in whichever coefficient ring the inputs call for.
#[derive(Clone, PartialEq, Debug)]
pub enum Expansion {
    /// Exact rational coefficients (numeric count parameter, exact moments).
    Exact(TailExpansion<Rational>),
    /// Coefficients polynomial in the formal count parameter.
    Symbolic {
        symbol: ParamSymbol,
        expansion: TailExpansion<ParamPoly>,
    },
    /// Floating coefficients (numeric-moment mode); excluded from exact
    /// comparisons.
    Numeric(TailExpansion<f64>),
}

impl Expansion {
    pub fn alpha(&self) -> &Rational {
        match self {
            Expansion::Exact(e) => e.alpha(),
            Expansion::Symbolic { expansion, .. } => expansion.alpha(),
            Expansion::Numeric(e) => e.alpha(),
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Expansion::Exact(e) => e.order(),
            Expansion::Symbolic { expansion, .. } => expansion.order(),
            Expansion::Numeric(e) => e.order(),
        }
    }

    pub fn num_terms(&self) -> usize {
        match self {
            Expansion::Exact(e) => e.terms().len(),
            Expansion::Symbolic { expansion, .. } => expansion.terms().len(),
            Expansion::Numeric(e) => e.terms().len(),
        }
    }

    pub fn param_symbol(&self) -> Option<ParamSymbol> {
        match self {
            Expansion::Symbolic { symbol, .. } => Some(*symbol),
            _ => None,
        }
    }

    /// Per-term `(exponent, value)` pairs at `t`; symbolic coefficients are
    /// evaluated at `param`.
    pub fn evaluated_terms(
        &self,
        t: f64,
        param: Option<f64>,
    ) -> Result<Vec<(Rational, f64)>, TailsError> {
        if !(t > 0.0) {
            return Err(TailsError::InvalidEvaluationPoint(t));
        }
        match self {
            Expansion::Exact(e) => {
                if param.is_some() {
                    return Err(TailsError::UnexpectedParameter);
                }
                Ok(e.evaluated_terms_with(t, Rational::to_f64))
            }
            Expansion::Symbolic { expansion, .. } => {
                let v = param.ok_or(TailsError::MissingParameter)?;
                Ok(expansion.evaluated_terms_with(t, |p| p.eval_f64(v)))
            }
            Expansion::Numeric(e) => {
                if param.is_some() {
                    return Err(TailsError::UnexpectedParameter);
                }
                Ok(e.evaluated_terms_with(t, |c| *c))
            }
        }
    }

    /// Evaluates the full expansion at `t`, summing terms from the smallest
    /// magnitude up to limit cancellation.
    pub fn evaluate(&self, t: f64, param: Option<f64>) -> Result<f64, TailsError> {
        let mut values: Vec<f64> = self
            .evaluated_terms(t, param)?
            .into_iter()
            .map(|(_, v)| v)
            .collect();
        values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        Ok(values.into_iter().sum())
    }

    /// Partial sum of the terms with exponent at least `j (alpha - 1)`.
    pub fn partial_sum(&self, j: usize, t: f64, param: Option<f64>) -> Result<f64, TailsError> {
        let r_min = Rational::from_integer(j as i64) * (self.alpha().clone() - Rational::one());
        let mut values: Vec<f64> = self
            .evaluated_terms(t, param)?
            .into_iter()
            .filter(|(r, _)| r >= &r_min)
            .map(|(_, v)| v)
            .collect();
        values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        Ok(values.into_iter().sum())
    }
}

/// Builds the order-`k` expansion of the compound tail for summand `s` and
/// count law `count`.
///
/// The summand character is built from the moments, the count law's compound
/// character is applied to `F-bar`, and the result is truncated at the
/// remainder scale `k (alpha - 1)`. Exact output requires `1/alpha` to be an
/// integer; otherwise the floating pipeline runs, and a formal count
/// parameter is rejected.
pub fn expansion(
    s: &SummandSpec,
    count: &CountSpec,
    k: usize,
) -> Result<Expansion, TailsError> {
    s.ensure_admissible()?;
    count.validate()?;
    if k > MAX_ORDER {
        return Err(TailsError::OrderTooLarge {
            got: k,
            max: MAX_ORDER,
        });
    }
    if s.exact_moment_order().is_some() {
        let character = laplace_character(&s.exact_moments(k)?, k)?;
        match compound_character(count, &character)? {
            CompoundCharacter::Exact(op) => {
                let terms = apply_operator(&op, s);
                Ok(Expansion::Exact(TailExpansion::from_terms(
                    s.alpha().clone(),
                    k,
                    terms,
                )))
            }
            CompoundCharacter::Symbolic { symbol, operator } => {
                let terms = apply_operator(&operator, s);
                Ok(Expansion::Symbolic {
                    symbol,
                    expansion: TailExpansion::from_terms(s.alpha().clone(), k, terms),
                })
            }
            CompoundCharacter::Numeric(_) => unreachable!("exact moments stay exact"),
        }
    } else {
        if count.is_formal() {
            return Err(TailsError::InexactMoments(s.alpha().to_string()));
        }
        let character = laplace_character(&s.numeric_moments(k), k)?;
        let op = numeric_compound_character(count, &character)?;
        let terms = apply_operator(&op, s);
        Ok(Expansion::Numeric(TailExpansion::from_terms(
            s.alpha().clone(),
            k,
            terms,
        )))
    }
}

/// Compound character over floating coefficients for a numeric count law.
fn numeric_compound_character(
    count: &CountSpec,
    character: &TruncatedOperator<f64>,
) -> Result<TruncatedOperator<f64>, TailsError> {
    let op = match count {
        CountSpec::Poisson { rate: Some(a) } => {
            poisson_compound_character(character, &a.to_f64())?
        }
        CountSpec::Geometric { ratio: Some(_) } => {
            let b = count.geometric_odds().expect("numeric geometric");
            crate::compound::geometric_compound_character(character, &b.to_f64())?
        }
        CountSpec::Degenerate { n } => degenerate_compound_character(*n, character),
        CountSpec::Custom { pmf } => custom_compound_character(pmf, character),
        _ => return Err(TailsError::MissingParameter),
    };
    Ok(op)
}

// ---------------------------------------------------------------------------
// Serialization and rendering
// ---------------------------------------------------------------------------

/// JSON document form of an expansion. Coefficients and exponents cross the
/// boundary as exact strings; field order is fixed so emitted documents
/// round-trip byte-identically.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ExpansionDoc {
    pub alpha: String,
    pub k: usize,
    pub param_symbol: Option<String>,
    pub terms: Vec<TermDoc>,
}

/// One term record of [`ExpansionDoc`].
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct TermDoc {
    pub coeff: String,
    pub r: String,
}

impl Expansion {
    pub fn to_doc(&self) -> ExpansionDoc {
        let (alpha, k) = (self.alpha().to_string(), self.order());
        let (param_symbol, terms) = match self {
            Expansion::Exact(e) => (
                None,
                e.terms()
                    .iter()
                    .map(|t| TermDoc {
                        coeff: t.coeff.to_string(),
                        r: t.exponent.to_string(),
                    })
                    .collect(),
            ),
            Expansion::Symbolic { symbol, expansion } => (
                Some(symbol.as_str().to_string()),
                expansion
                    .terms()
                    .iter()
                    .map(|t| TermDoc {
                        coeff: t.coeff.render(symbol.as_str()),
                        r: t.exponent.to_string(),
                    })
                    .collect(),
            ),
            Expansion::Numeric(e) => (
                None,
                e.terms()
                    .iter()
                    .map(|t| TermDoc {
                        coeff: format!("{}", t.coeff),
                        r: t.exponent.to_string(),
                    })
                    .collect(),
            ),
        };
        ExpansionDoc {
            alpha,
            k,
            param_symbol,
            terms,
        }
    }

    /// Rebuilds an expansion from its document form.
    pub fn from_doc(doc: &ExpansionDoc) -> Result<Self, String> {
        let alpha: Rational = doc
            .alpha
            .parse()
            .map_err(|e| format!("field alpha: {e}"))?;
        match doc.param_symbol.as_deref() {
            Some(sym) => {
                let symbol = match sym {
                    "a" => ParamSymbol::A,
                    "b" => ParamSymbol::B,
                    other => return Err(format!("field param_symbol: unknown symbol {other:?}")),
                };
                let mut terms = Vec::with_capacity(doc.terms.len());
                for t in &doc.terms {
                    let coeff = ParamPoly::parse(&t.coeff, sym)
                        .map_err(|e| format!("field terms.coeff: {e}"))?;
                    let r: Rational =
                        t.r.parse().map_err(|e| format!("field terms.r: {e}"))?;
                    terms.push(TailTerm::new(coeff, r));
                }
                Ok(Expansion::Symbolic {
                    symbol,
                    expansion: TailExpansion::from_terms(alpha, doc.k, terms),
                })
            }
            None => {
                // Exact documents hold rational strings; otherwise floats.
                let exact: Result<Vec<_>, _> = doc
                    .terms
                    .iter()
                    .map(|t| {
                        let c: Result<Rational, _> = t.coeff.parse();
                        let r: Result<Rational, _> = t.r.parse();
                        match (c, r) {
                            (Ok(c), Ok(r)) => Ok(TailTerm::new(c, r)),
                            _ => Err(()),
                        }
                    })
                    .collect();
                if let Ok(terms) = exact {
                    return Ok(Expansion::Exact(TailExpansion::from_terms(
                        alpha, doc.k, terms,
                    )));
                }
                let mut terms = Vec::with_capacity(doc.terms.len());
                for t in &doc.terms {
                    let coeff: f64 = t
                        .coeff
                        .parse()
                        .map_err(|_| format!("field terms.coeff: bad literal {:?}", t.coeff))?;
                    let r: Rational =
                        t.r.parse().map_err(|e| format!("field terms.r: {e}"))?;
                    terms.push(TailTerm::new(coeff, r));
                }
                Ok(Expansion::Numeric(TailExpansion::from_terms(
                    alpha, doc.k, terms,
                )))
            }
        }
    }

    /// Text form: one `coeff * t^(r) * exp(-t^(alpha))` line per term,
    /// exponents as exact fractions.
    pub fn render_text(&self) -> String {
        let alpha = self.alpha().to_string();
        let line = |coeff: String, r: &Rational| {
            let coeff = if coeff.contains(' ') {
                format!("({coeff})")
            } else {
                coeff
            };
            format!("{coeff} * t^({r}) * exp(-t^({alpha}))")
        };
        let lines: Vec<String> = match self {
            Expansion::Exact(e) => e
                .terms()
                .iter()
                .map(|t| line(t.coeff.to_string(), &t.exponent))
                .collect(),
            Expansion::Symbolic { symbol, expansion } => expansion
                .terms()
                .iter()
                .map(|t| line(t.coeff.render(symbol.as_str()), &t.exponent))
                .collect(),
            Expansion::Numeric(e) => e
                .terms()
                .iter()
                .map(|t| line(format!("{}", t.coeff), &t.exponent))
                .collect(),
        };
        lines.join("\n")
    }
}
