//! Independent numeric ground truth for the compound tail.
//!
//! The summand distribution is discretized onto a lattice twice: rounding
//! values down gives a law stochastically dominated by the summand, rounding
//! up gives a dominating one. Running both through the Panjer recursion
//! yields certified lower/upper bounds on the compound tail. Counts outside
//! the Panjer class go through direct n-fold convolution quadrature.

mod conv;
mod report;

pub use conv::convolution_tail;
pub use report::{error_report, CertifiedCheck, ErrorReport, ReportRow};

use crate::compound::CountSpec;
use crate::error::OracleError;
use crate::tails::SummandSpec;

/// Which way summand mass is rounded onto the grid.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RoundingMode {
    /// Mass of `((j-1)d, jd]` placed at `(j-1)d`: dominated by the summand.
    Lower,
    /// Mass of `((j-1)d, jd]` placed at `jd`: dominates the summand.
    Upper,
}

/// A summand distribution projected onto the lattice `{0, d, 2d, ...}`.
///
/// `masses[j]` is the probability at grid point `j*d`. Mass beyond `t_max`
/// is never placed on the grid; it is carried in `deficit` and treated as an
/// atom at `t_max` (lower mode) or at infinity (upper mode).
#[derive(Clone, Debug)]
pub struct DiscretizedSummand {
    delta: f64,
    masses: Vec<f64>,
    deficit: f64,
    mode: RoundingMode,
    t_max: f64,
}

impl DiscretizedSummand {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn mode(&self) -> RoundingMode {
        self.mode
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Grid mass at index `j`, including the lower-mode truncation atom.
    fn mass_at(&self, j: usize) -> f64 {
        let mut m = self.masses.get(j).copied().unwrap_or(0.0);
        if self.mode == RoundingMode::Lower {
            let cells = (self.t_max / self.delta).round() as usize;
            if j == cells {
                m += self.deficit;
            }
        }
        m
    }

    /// Index of the highest grid point carrying mass.
    fn max_index(&self) -> usize {
        match self.mode {
            RoundingMode::Lower => (self.t_max / self.delta).round() as usize,
            RoundingMode::Upper => self.masses.len() - 1,
        }
    }

    /// Total grid mass (excludes the deficit), summed with compensation.
    pub fn total_mass(&self) -> f64 {
        kahan_sum(self.masses.iter().copied())
    }

    /// Mean of the grid part.
    pub fn grid_mean(&self) -> f64 {
        kahan_sum(
            self.masses
                .iter()
                .enumerate()
                .map(|(j, &m)| j as f64 * self.delta * m),
        )
    }
}

fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Projects the summand law onto the lattice with the given rounding mode.
pub fn discretize_summand(
    s: &SummandSpec,
    delta: f64,
    t_max: f64,
    mode: RoundingMode,
) -> Result<DiscretizedSummand, OracleError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(OracleError::InvalidGrid(format!(
            "grid step must be positive, got {delta}"
        )));
    }
    let cells_f = t_max / delta;
    let cells = cells_f.round();
    if !(t_max > 0.0) || (cells_f - cells).abs() > 1e-6 || cells < 1.0 {
        return Err(OracleError::InvalidGrid(format!(
            "t_max = {t_max} is not a positive multiple of delta = {delta}"
        )));
    }
    let cells = cells as usize;
    let len = match mode {
        RoundingMode::Lower => cells,
        RoundingMode::Upper => cells + 1,
    };
    let mut masses = vec![0.0; len];
    let mut prev_tail = 1.0; // F-bar(0)
    for j in 1..=cells {
        let tail = s.tail(j as f64 * delta);
        let increment = prev_tail - tail;
        prev_tail = tail;
        match mode {
            RoundingMode::Lower => masses[j - 1] += increment,
            RoundingMode::Upper => masses[j] += increment,
        }
    }
    Ok(DiscretizedSummand {
        delta,
        masses,
        deficit: prev_tail,
        mode,
        t_max: cells as f64 * delta,
    })
}

/// Lattice pmf of the compound sum.
#[derive(Clone, Debug)]
pub struct CompoundPmf {
    delta: f64,
    masses: Vec<f64>,
}

impl CompoundPmf {
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total(&self) -> f64 {
        kahan_sum(self.masses.iter().copied())
    }

    /// `P{S > t}` for the discretized compound: one minus the mass at grid
    /// points up to `t`. Mass missing from the recursion (summand values
    /// beyond the truncation point in upper mode) correctly lands above `t`.
    pub fn tail_at(&self, t: f64) -> f64 {
        let k_max = ((t / self.delta) * (1.0 + 1e-12)).floor() as usize;
        let below = kahan_sum(self.masses.iter().take(k_max + 1).copied());
        1.0 - below
    }
}

/// Runs the Panjer recursion for a Poisson or geometric count over a
/// discretized summand, producing the compound pmf on `len` grid points.
///
/// Poisson(a) has `p_n = (0 + a/n) p_{n-1}` and geometric `p_n = (a + 0/n)
/// p_{n-1}`, so both lie in the recursion's `(a_P, b_P)` class. Counts
/// outside the class are rejected; use the convolution path instead.
pub fn panjer_compound(
    count: &CountSpec,
    d: &DiscretizedSummand,
    len: usize,
) -> Result<CompoundPmf, OracleError> {
    count.validate().map_err(crate::error::TailsError::from)?;
    let f0 = d.mass_at(0);
    let (a_p, b_p, g0) = match count {
        CountSpec::Poisson { rate: Some(a) } => {
            let lambda = a.to_f64();
            (0.0, lambda, (lambda * (f0 - 1.0)).exp())
        }
        CountSpec::Geometric { ratio: Some(a) } => {
            let af = a.to_f64();
            (af, 0.0, (1.0 - af) / (1.0 - af * f0))
        }
        other => {
            return Err(OracleError::UnsupportedCount(format!(
                "Panjer recursion needs a numeric Poisson or geometric count, got {other:?}"
            )))
        }
    };
    let inv = 1.0 / (1.0 - a_p * f0);
    let j_max = d.max_index();
    let mut g = Vec::with_capacity(len);
    g.push(g0);
    for k in 1..len {
        let kf = k as f64;
        let mut acc = 0.0;
        let mut carry = 0.0;
        for j in 1..=k.min(j_max) {
            let fj = d.mass_at(j);
            if fj == 0.0 {
                continue;
            }
            let term = (a_p + b_p * j as f64 / kf) * fj * g[k - j];
            let y = term - carry;
            let t = acc + y;
            carry = (t - acc) - y;
            acc = t;
        }
        g.push(inv * acc);
    }
    Ok(CompoundPmf {
        delta: d.delta,
        masses: g,
    })
}

/// Certified lower/upper bounds on the compound tail at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleBracket {
    pub t: f64,
    pub lower: f64,
    pub upper: f64,
    /// Grid step used (0 when the value comes from an exact identity).
    pub delta: f64,
    /// Summand truncation deficit carried through the accounting.
    pub deficit: f64,
    /// Number of compound grid points computed.
    pub grid_len: usize,
}

impl OracleBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// Largest custom-count support routed through convolution quadrature.
pub const MAX_CONVOLUTION_SUPPORT: u32 = 8;

/// Tolerance handed to the convolution quadrature by the bracket assembler.
const CONVOLUTION_TOL: f64 = 1e-6;

/// Assembles a certified bracket for the compound tail at `t`.
///
/// Poisson and geometric counts run the paired lower/upper discretizations
/// through the Panjer recursion with truncation point `4t`. Degenerate and
/// finite custom counts with support at most [`MAX_CONVOLUTION_SUPPORT`] are
/// assembled from n-fold convolution quadrature instead. At `t = 0` the
/// tail equals `1 - P{N = 0}` exactly, because the summands are strictly
/// positive and continuous.
pub fn compound_tail_bracket(
    s: &SummandSpec,
    count: &CountSpec,
    t: f64,
    delta: f64,
) -> Result<OracleBracket, OracleError> {
    let report = s.validate();
    if !report.passed() {
        return Err(OracleError::Tails(crate::error::TailsError::NotAdmissible(
            report.failure_summary(),
        )));
    }
    count.validate().map_err(crate::error::TailsError::from)?;
    if count.is_formal() {
        return Err(OracleError::FormalParameter);
    }
    if !(t >= 0.0) {
        return Err(OracleError::InvalidGrid(format!(
            "evaluation point must be nonnegative, got {t}"
        )));
    }

    if t == 0.0 {
        let v = 1.0 - count.prob_zero().expect("numeric count");
        let pad = 1e-14 * v.max(1e-3);
        return Ok(OracleBracket {
            t,
            lower: (v - pad).max(0.0),
            upper: (v + pad).min(1.0),
            delta: 0.0,
            deficit: 0.0,
            grid_len: 0,
        });
    }

    match count {
        CountSpec::Poisson { .. } | CountSpec::Geometric { .. } => {
            if !(delta > 0.0) {
                return Err(OracleError::InvalidGrid(format!(
                    "grid step must be positive, got {delta}"
                )));
            }
            let cells = (4.0 * t / delta).ceil().max(2.0);
            let t_max = cells * delta;
            let len = (t / delta).floor() as usize + 2;
            let lower_d = discretize_summand(s, delta, t_max, RoundingMode::Lower)?;
            let upper_d = discretize_summand(s, delta, t_max, RoundingMode::Upper)?;
            let lower_pmf = panjer_compound(count, &lower_d, len)?;
            let upper_pmf = panjer_compound(count, &upper_d, len)?;
            let lower = lower_pmf.tail_at(t).max(0.0);
            let upper = upper_pmf.tail_at(t).min(1.0);
            Ok(OracleBracket {
                t,
                lower,
                upper,
                delta,
                deficit: upper_d.deficit(),
                grid_len: len,
            })
        }
        CountSpec::Degenerate { .. } | CountSpec::Custom { .. } => {
            let pmf: Vec<(u32, crate::rational::Rational)> = match count {
                CountSpec::Degenerate { n } => vec![(*n, crate::rational::Rational::one())],
                CountSpec::Custom { pmf } => pmf.clone(),
                _ => unreachable!(),
            };
            let support_max = pmf.iter().map(|(n, _)| *n).max().unwrap_or(0);
            if support_max > MAX_CONVOLUTION_SUPPORT {
                return Err(OracleError::UnsupportedCount(format!(
                    "custom count support reaches {support_max}, above the convolution limit {MAX_CONVOLUTION_SUPPORT}"
                )));
            }
            let mut lower = 0.0;
            let mut upper = 0.0;
            for (n, p) in &pmf {
                if *n == 0 || p.is_zero() {
                    continue; // an empty sum never exceeds t > 0
                }
                let pf = p.to_f64();
                let (value, err) = convolution_tail(s, *n, t, CONVOLUTION_TOL)?;
                lower += pf * (value - err);
                upper += pf * (value + err);
            }
            // Absorb floating rounding of the endpoint evaluations.
            lower *= 1.0 - 1e-13;
            upper *= 1.0 + 1e-13;
            Ok(OracleBracket {
                t,
                lower: lower.max(0.0),
                upper: upper.min(1.0),
                delta,
                deficit: 0.0,
                grid_len: 0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::weibull_moment;
    use crate::rational::Rational;

    fn weibull_third() -> SummandSpec {
        SummandSpec::new(Rational::new(1, 3)).unwrap()
    }

    #[test]
    fn discretization_mass_telescopes() {
        let s = weibull_third();
        for mode in [RoundingMode::Lower, RoundingMode::Upper] {
            let d = discretize_summand(&s, 0.25, 2000.0, mode).unwrap();
            let total = d.total_mass() + d.deficit();
            assert!(
                (total - 1.0).abs() < 1e-12,
                "{mode:?}: total {total}"
            );
        }
    }

    #[test]
    fn upper_mode_has_no_mass_at_zero() {
        let s = weibull_third();
        let d = discretize_summand(&s, 0.5, 100.0, RoundingMode::Upper).unwrap();
        assert_eq!(d.masses()[0], 0.0);
        let low = discretize_summand(&s, 0.5, 100.0, RoundingMode::Lower).unwrap();
        assert!(low.masses()[0] > 0.0);
    }

    #[test]
    fn grid_means_bracket_the_first_moment() {
        let s = weibull_third();
        let mu1 = weibull_moment(s.alpha(), 1);
        let low = discretize_summand(&s, 0.25, 2000.0, RoundingMode::Lower).unwrap();
        let up = discretize_summand(&s, 0.25, 2000.0, RoundingMode::Upper).unwrap();
        assert!(low.grid_mean() <= mu1, "{} vs {mu1}", low.grid_mean());
        assert!(up.grid_mean() >= mu1, "{} vs {mu1}", up.grid_mean());
    }

    #[test]
    fn invalid_grids_are_rejected() {
        let s = weibull_third();
        assert!(matches!(
            discretize_summand(&s, 0.0, 10.0, RoundingMode::Lower),
            Err(OracleError::InvalidGrid(_))
        ));
        assert!(matches!(
            discretize_summand(&s, 0.3, 1.0, RoundingMode::Lower),
            Err(OracleError::InvalidGrid(_))
        ));
    }

    #[test]
    fn panjer_rejects_custom_counts() {
        let s = weibull_third();
        let d = discretize_summand(&s, 0.5, 20.0, RoundingMode::Upper).unwrap();
        let count = CountSpec::Degenerate { n: 2 };
        assert!(matches!(
            panjer_compound(&count, &d, 10),
            Err(OracleError::UnsupportedCount(_))
        ));
    }

    /// Poisson mass accounting: the finite part of the compound sums to
    /// exp(-lambda * deficit); the deficit mass is at infinity by design.
    #[test]
    fn compound_mass_conservation() {
        let s = weibull_third();
        let delta = 0.25;
        let d = discretize_summand(&s, delta, 50.0, RoundingMode::Upper).unwrap();
        let count = CountSpec::Poisson {
            rate: Some(Rational::new(1, 2)),
        };
        // Far enough out that the finite compound has negligible tail.
        let len = 3201;
        let g = panjer_compound(&count, &d, len).unwrap();
        let expected_total = (-0.5 * d.deficit()).exp();
        assert!(
            (g.total() - expected_total).abs() < 1e-10,
            "total {} vs {}",
            g.total(),
            expected_total
        );

        // Lower mode is a complete lattice law, so the pmf sums to one.
        let dl = discretize_summand(&s, delta, 50.0, RoundingMode::Lower).unwrap();
        let gl = panjer_compound(&count, &dl, len).unwrap();
        assert!((gl.total() - 1.0).abs() < 1e-10, "total {}", gl.total());
    }

    #[test]
    fn bracket_at_zero_poisson() {
        let s = weibull_third();
        let count = CountSpec::Poisson {
            rate: Some(Rational::new(1, 2)),
        };
        let b = compound_tail_bracket(&s, &count, 0.0, 0.1).unwrap();
        let exact = 1.0 - (-0.5f64).exp();
        assert!(b.contains(exact));
        assert!(b.width() < 1e-9);
        assert!((exact - 0.393469).abs() < 1e-6);
    }

    #[test]
    fn bracket_at_zero_geometric() {
        let s = weibull_third();
        let count = CountSpec::Geometric {
            ratio: Some(Rational::new(2, 7)),
        };
        let b = compound_tail_bracket(&s, &count, 0.0, 0.1).unwrap();
        assert!(b.contains(2.0 / 7.0));
        assert!(b.width() < 1e-9);
    }

    #[test]
    fn custom_single_atom_is_fbar() {
        let s = weibull_third();
        let count = CountSpec::Custom {
            pmf: vec![(1, Rational::one())],
        };
        let b = compound_tail_bracket(&s, &count, 1000.0, 0.05).unwrap();
        let exact = (-10.0f64).exp();
        assert!(b.contains(exact), "{b:?}");
        assert!(b.width() < 1e-3 * exact);
    }

    #[test]
    fn stochastic_order_and_refinement() {
        let s = weibull_third();
        let count = CountSpec::Poisson {
            rate: Some(Rational::new(1, 2)),
        };
        let t = 500.0;
        let mut prev: Option<OracleBracket> = None;
        for delta in [0.4, 0.2, 0.1] {
            let b = compound_tail_bracket(&s, &count, t, delta).unwrap();
            assert!(b.lower <= b.upper);
            if let Some(p) = &prev {
                // Refinement never widens the bracket.
                assert!(b.lower >= p.lower - 1e-12, "{b:?} vs {p:?}");
                assert!(b.upper <= p.upper + 1e-12, "{b:?} vs {p:?}");
            }
            prev = Some(b);
        }
    }

    /// Lower-mode compound tails never exceed upper-mode ones, at every
    /// grid point.
    #[test]
    fn stochastic_order_holds_gridwise() {
        let s = weibull_third();
        let count = CountSpec::Geometric {
            ratio: Some(Rational::new(1, 3)),
        };
        let delta = 0.5;
        let low = discretize_summand(&s, delta, 400.0, RoundingMode::Lower).unwrap();
        let up = discretize_summand(&s, delta, 400.0, RoundingMode::Upper).unwrap();
        let len = 201;
        let gl = panjer_compound(&count, &low, len).unwrap();
        let gu = panjer_compound(&count, &up, len).unwrap();
        for k in 0..len {
            let t = k as f64 * delta;
            assert!(
                gl.tail_at(t) <= gu.tail_at(t) + 1e-12,
                "k = {k}: {} > {}",
                gl.tail_at(t),
                gu.tail_at(t)
            );
        }
    }

    /// For a vanishing Poisson rate the compound tail divided by the rate
    /// approaches F-bar; the bracket at a = 1e-3 must straddle it.
    #[test]
    fn small_rate_poisson_approaches_fbar() {
        let s = weibull_third();
        let a = Rational::new(1, 1000);
        let count = CountSpec::Poisson { rate: Some(a) };
        let b = compound_tail_bracket(&s, &count, 1000.0, 0.1).unwrap();
        let fbar = (-10.0f64).exp();
        let scaled = (b.lower / 1e-3, b.upper / 1e-3);
        assert!(
            scaled.0 <= fbar && fbar <= scaled.1,
            "bracket {scaled:?} vs {fbar}"
        );
    }

    #[test]
    fn oversized_custom_support_is_rejected() {
        let s = weibull_third();
        let count = CountSpec::Custom {
            pmf: vec![(9, Rational::one())],
        };
        assert!(matches!(
            compound_tail_bracket(&s, &count, 100.0, 0.1),
            Err(OracleError::UnsupportedCount(_))
        ));
    }
}
