//! Exact asymptotic expansions for tails of compound sums.
//!
//! A compound sum draws a random count `N` and adds that many independent
//! copies of a positive random variable with tail `exp(-t^alpha)`,
//! `0 < alpha < 1`. This crate computes the tail of the compound sum as a
//! finite combination of terms `c * t^r * exp(-t^alpha)` with exact rational
//! (or polynomial-in-the-count-parameter) coefficients, and verifies those
//! expansions against an independent numeric oracle with certified bounds.
//!
//! The pipeline:
//!
//! 1. [`compound::laplace_character`] turns the summand's moments into an
//!    element of the truncated operator ring [`operator::TruncatedOperator`].
//! 2. The count law's compound character (`E[N L^(N-1)]`) has a closed form
//!    per count family ([`compound`]).
//! 3. Applying that operator to the tail function and truncating at the
//!    remainder scale yields the expansion ([`tails::expansion`]).
//! 4. The oracle ([`oracle`]) brackets the true compound tail by stochastic
//!    ordering and reports residuals ([`oracle::error_report`]).

pub mod coeff;
pub mod compound;
pub mod error;
pub mod operator;
pub mod oracle;
pub mod poly;
pub mod quad;
pub mod rational;
pub mod tails;

pub use coeff::Coeff;
pub use compound::{
    compound_character, custom_compound_character, degenerate_compound_character,
    geometric_compound_character, laplace_character, poisson_compound_character,
    CompoundCharacter, CountSpec, MomentSequence,
};
pub use error::{CoeffError, CompoundError, OperatorError, OracleError, TailsError};
pub use operator::{TruncatedOperator, MAX_ORDER};
pub use oracle::{
    compound_tail_bracket, convolution_tail, discretize_summand, error_report, panjer_compound,
    CompoundPmf, DiscretizedSummand, ErrorReport, OracleBracket, ReportRow, RoundingMode,
};
pub use poly::{ParamPoly, ParamSymbol};
pub use rational::Rational;
pub use tails::{
    apply_operator, expansion, fbar_derivative, hazard_power_tail, tail_differentiate, Expansion,
    ExpansionDoc, SummandSpec, TailExpansion, TailTerm, TermDoc, ValidationReport,
};
