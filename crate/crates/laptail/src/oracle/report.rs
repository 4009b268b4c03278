//! Residual reports: expansion partial sums against certified oracle
//! brackets, normalized by the remainder scale `h^j F-bar`.

use serde::{Deserialize, Serialize};

use crate::compound::CountSpec;
use crate::error::OracleError;
use crate::oracle::{compound_tail_bracket, OracleBracket};
use crate::poly::ParamSymbol;
use crate::rational::Rational;
use crate::tails::{Expansion, SummandSpec};

/// One row of the verification table: the order-`j` partial sum against the
/// oracle bracket at `t`, with absolute and normalized residual brackets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub t: f64,
    pub j: usize,
    pub partial_sum: f64,
    pub lower: f64,
    pub upper: f64,
    pub abs_resid_lo: f64,
    pub abs_resid_hi: f64,
    pub norm_resid_lo: f64,
    pub norm_resid_hi: f64,
}

/// A deterministic pass/fail check certified by the bracket.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedCheck {
    pub t: f64,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// The full verification report over a grid of evaluation points.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub rows: Vec<ReportRow>,
    pub checks: Vec<CertifiedCheck>,
    pub brackets: Vec<OracleBracket>,
}

impl ErrorReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// CSV form with the fixed column set.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "t,j,partial_sum,lower,upper,abs_resid_lo,abs_resid_hi,norm_resid_lo,norm_resid_hi\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.t,
                r.j,
                r.partial_sum,
                r.lower,
                r.upper,
                r.abs_resid_lo,
                r.abs_resid_hi,
                r.norm_resid_lo,
                r.norm_resid_hi
            ));
        }
        out
    }

    /// JSON form: an array of records with the CSV field names.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.rows).expect("plain float records")
    }
}

/// Derives the evaluation parameter an expansion needs from the count law.
fn evaluation_parameter(
    expansion: &Expansion,
    count: &CountSpec,
) -> Result<Option<f64>, OracleError> {
    match expansion.param_symbol() {
        None => Ok(None),
        Some(ParamSymbol::A) => match count {
            CountSpec::Poisson { rate: Some(a) } => Ok(Some(a.to_f64())),
            _ => Err(OracleError::FormalParameter),
        },
        Some(ParamSymbol::B) => match count.geometric_odds() {
            Some(b) => Ok(Some(b.to_f64())),
            None => Err(OracleError::FormalParameter),
        },
    }
}

/// Runs the oracle over `t_grid` and tabulates every partial sum of the
/// expansion against the certified bracket.
///
/// Two checks are certified per evaluation point: the bracket is a valid
/// probability interval, and the full partial sum sits within the bracket
/// up to three times the deepest retained term (the expansion's own
/// remainder scale).
pub fn error_report(
    expansion: &Expansion,
    s: &SummandSpec,
    count: &CountSpec,
    t_grid: &[f64],
    delta: f64,
) -> Result<ErrorReport, OracleError> {
    let param = evaluation_parameter(expansion, count)?;
    let k = expansion.order();
    let alpha = expansion.alpha().to_f64();
    let r_min = Rational::from_integer(k as i64)
        * (expansion.alpha().clone() - Rational::one());

    let mut rows = Vec::with_capacity(t_grid.len() * (k + 1));
    let mut checks = Vec::with_capacity(t_grid.len() * 2);
    let mut brackets = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let bracket = compound_tail_bracket(s, count, t, delta)?;
        let fbar = (-t.powf(alpha)).exp();
        let hazard = alpha * t.powf(alpha - 1.0);
        let mut scale = fbar;
        for j in 0..=k {
            if j > 0 {
                scale *= hazard;
            }
            let partial = expansion
                .partial_sum(j, t, param)
                .map_err(OracleError::Tails)?;
            rows.push(ReportRow {
                t,
                j,
                partial_sum: partial,
                lower: bracket.lower,
                upper: bracket.upper,
                abs_resid_lo: bracket.lower - partial,
                abs_resid_hi: bracket.upper - partial,
                norm_resid_lo: (bracket.lower - partial) / scale,
                norm_resid_hi: (bracket.upper - partial) / scale,
            });
        }

        let valid = bracket.lower >= 0.0
            && bracket.lower <= bracket.upper
            && bracket.upper <= 1.0;
        checks.push(CertifiedCheck {
            t,
            name: "bracket_valid".to_string(),
            passed: valid,
            detail: format!("[{}, {}]", bracket.lower, bracket.upper),
        });

        let full = expansion
            .partial_sum(k, t, param)
            .map_err(OracleError::Tails)?;
        let deepest: f64 = expansion
            .evaluated_terms(t, param)
            .map_err(OracleError::Tails)?
            .into_iter()
            .filter(|(r, _)| r == &r_min)
            .map(|(_, v)| v)
            .sum();
        let gap = (bracket.midpoint() - full).abs();
        let allowance = 0.5 * bracket.width() + 3.0 * deepest.abs();
        checks.push(CertifiedCheck {
            t,
            name: "expansion_within_remainder_scale".to_string(),
            passed: gap <= allowance,
            detail: format!("|mid - S_{k}| = {gap:e} vs half-width + 3|deepest| = {allowance:e}"),
        });

        brackets.push(bracket);
    }
    Ok(ErrorReport {
        rows,
        checks,
        brackets,
    })
}
