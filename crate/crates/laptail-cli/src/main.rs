//! `laptail` — compound-sum tail expansions at the command line.
//!
//! Subcommands: `character` (compound character of the count law), `expand`
//! (tail expansion), `eval` (evaluate an expansion document), `verify`
//! (expansion against the certified numeric oracle), `validate` (summand
//! admissibility report).
//!
//! Exit codes: 0 success, 2 validation failure, 3 unsupported combination,
//! 4 certified verification failure.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use laptail::{
    compound_character, error_report, expansion, CompoundCharacter, CountSpec, Expansion,
    ExpansionDoc, OracleError, Rational, SummandSpec, TailsError,
};

#[derive(Parser)]
#[command(
    name = "laptail",
    version,
    about = "Exact asymptotic expansions for tails of compound sums, with a certified numeric oracle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the compound character E[N L^(N-1)] of the count law.
    Character(JobArgs),
    /// Print the tail expansion of the compound sum.
    Expand(JobArgs),
    /// Evaluate an expansion document (JSON, as emitted by `expand`).
    Eval(EvalArgs),
    /// Compare expansion partial sums against certified oracle brackets.
    Verify(JobArgs),
    /// Report the admissibility conditions of a summand family.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct JobArgs {
    /// Summand tail exponent alpha as an exact fraction, e.g. "1/3".
    #[arg(long)]
    alpha: Option<String>,
    /// Count law: poisson, geometric, degenerate or custom.
    #[arg(long)]
    count: Option<String>,
    /// Count parameter as an exact fraction (rate a, geometric a, or the
    /// degenerate count n). Omit to keep poisson/geometric parameters formal.
    #[arg(long)]
    param: Option<String>,
    /// Custom count pmf as "n:prob,n:prob", e.g. "1:1/2,2:1/2".
    #[arg(long)]
    pmf: Option<String>,
    /// Expansion/character truncation order k.
    #[arg(long)]
    order: Option<usize>,
    /// Evaluation point(s) for verify; repeat for a grid.
    #[arg(long = "t")]
    t: Vec<f64>,
    /// Oracle grid step.
    #[arg(long)]
    delta: Option<f64>,
    /// Output format: text, json or csv.
    #[arg(long)]
    format: Option<String>,
    /// Read the whole job from a JSON file instead of flags.
    #[arg(long, conflicts_with_all = ["alpha", "count", "param", "pmf", "order", "t", "delta", "format"])]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Evaluation point.
    #[arg(long)]
    t: f64,
    /// Value for the formal count parameter, when the expansion has one.
    #[arg(long)]
    param: Option<f64>,
    /// Expansion document path; reads standard input when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Summand tail exponent alpha as an exact fraction.
    #[arg(long)]
    alpha: String,
}

/// JSON form of a whole job, mirroring the flag set.
#[derive(Deserialize)]
struct JobSpecDoc {
    summand: SummandDoc,
    count: CountDoc,
    order: usize,
    #[serde(default)]
    t_grid: Vec<f64>,
    #[serde(default)]
    delta: Option<f64>,
    #[serde(default)]
    output: Option<String>,
}

#[derive(Deserialize)]
struct SummandDoc {
    alpha: String,
}

#[derive(Deserialize)]
struct CountDoc {
    kind: String,
    #[serde(default)]
    parameter: Option<String>,
    #[serde(default)]
    pmf: Option<Vec<(u32, String)>>,
}

#[derive(Serialize)]
struct CharacterDoc {
    order: usize,
    param_symbol: Option<String>,
    coeffs: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

struct Job {
    summand: SummandSpec,
    count: CountSpec,
    order: usize,
    t_grid: Vec<f64>,
    delta: f64,
    format: Format,
}

/// A diagnostic plus the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    fn unsupported(message: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: message.into(),
        }
    }

    fn verification(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<TailsError> for Failure {
    fn from(e: TailsError) -> Self {
        match e {
            TailsError::InexactMoments(_) => Failure::unsupported(format!(
                "{e}; bind a numeric count parameter to use the floating pipeline"
            )),
            TailsError::OrderTooLarge { .. } => Failure::unsupported(e.to_string()),
            other => Failure::validation(other.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::UnsupportedCount(_) => Failure::unsupported(e.to_string()),
            OracleError::ToleranceNotAchieved { .. } => Failure::verification(e.to_string()),
            OracleError::Tails(inner) => Failure::from(inner),
            other => Failure::validation(other.to_string()),
        }
    }
}

fn parse_rational(field: &str, text: &str) -> Result<Rational, Failure> {
    Rational::from_str(text.trim())
        .map_err(|e| Failure::validation(format!("field {field}: {e}")))
}

fn parse_format(text: Option<&str>, default: Format) -> Result<Format, Failure> {
    match text {
        None => Ok(default),
        Some("text") => Ok(Format::Text),
        Some("json") => Ok(Format::Json),
        Some("csv") => Ok(Format::Csv),
        Some(other) => Err(Failure::validation(format!(
            "field format: expected text, json or csv, got {other:?}"
        ))),
    }
}

fn parse_count(
    kind: &str,
    parameter: Option<&str>,
    pmf: Option<Vec<(u32, String)>>,
) -> Result<CountSpec, Failure> {
    let count = match kind {
        "poisson" => CountSpec::Poisson {
            rate: parameter
                .map(|p| parse_rational("param", p))
                .transpose()?,
        },
        "geometric" => CountSpec::Geometric {
            ratio: parameter
                .map(|p| parse_rational("param", p))
                .transpose()?,
        },
        "degenerate" => {
            let p = parameter.ok_or_else(|| {
                Failure::validation("field param: degenerate count needs an integer n")
            })?;
            let r = parse_rational("param", p)?;
            let n = r.to_u64().ok_or_else(|| {
                Failure::validation(format!(
                    "field param: degenerate count must be a nonnegative integer, got {r}"
                ))
            })?;
            CountSpec::Degenerate { n: n as u32 }
        }
        "custom" => {
            let entries = pmf.ok_or_else(|| {
                Failure::validation("field pmf: custom count needs a pmf, e.g. \"1:1/2,2:1/2\"")
            })?;
            let mut parsed = Vec::with_capacity(entries.len());
            for (n, p) in entries {
                parsed.push((n, parse_rational("pmf", &p)?));
            }
            CountSpec::Custom { pmf: parsed }
        }
        other => {
            return Err(Failure::validation(format!(
                "field count: expected poisson, geometric, degenerate or custom, got {other:?}"
            )))
        }
    };
    count
        .validate()
        .map_err(|e| Failure::validation(format!("field count: {e}")))?;
    Ok(count)
}

fn parse_pmf_flag(text: &str) -> Result<Vec<(u32, String)>, Failure> {
    let mut out = Vec::new();
    for piece in text.split(',') {
        let (n, p) = piece.split_once(':').ok_or_else(|| {
            Failure::validation(format!("field pmf: expected n:prob entries, got {piece:?}"))
        })?;
        let n: u32 = n
            .trim()
            .parse()
            .map_err(|_| Failure::validation(format!("field pmf: bad count {n:?}")))?;
        out.push((n, p.trim().to_string()));
    }
    Ok(out)
}

fn resolve_job(args: &JobArgs, default_format: Format) -> Result<Job, Failure> {
    if let Some(path) = &args.spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::validation(format!("cannot read spec file: {e}")))?;
        let doc: JobSpecDoc = serde_json::from_str(&text)
            .map_err(|e| Failure::validation(format!("spec file: {e}")))?;
        let alpha = parse_rational("summand.alpha", &doc.summand.alpha)?;
        let summand = SummandSpec::new(alpha).map_err(|e| Failure::validation(e.to_string()))?;
        let count = parse_count(&doc.count.kind, doc.count.parameter.as_deref(), doc.count.pmf)?;
        let format = parse_format(doc.output.as_deref(), default_format)?;
        return Ok(Job {
            summand,
            count,
            order: doc.order,
            t_grid: doc.t_grid,
            delta: doc.delta.unwrap_or(0.1),
            format,
        });
    }

    let alpha_text = args
        .alpha
        .as_deref()
        .ok_or_else(|| Failure::validation("field alpha: required (or use --spec)"))?;
    let alpha = parse_rational("alpha", alpha_text)?;
    let summand = SummandSpec::new(alpha).map_err(|e| Failure::validation(e.to_string()))?;
    let kind = args
        .count
        .as_deref()
        .ok_or_else(|| Failure::validation("field count: required (or use --spec)"))?;
    let pmf = args.pmf.as_deref().map(parse_pmf_flag).transpose()?;
    let count = parse_count(kind, args.param.as_deref(), pmf)?;
    let order = args
        .order
        .ok_or_else(|| Failure::validation("field order: required (or use --spec)"))?;
    let format = parse_format(args.format.as_deref(), default_format)?;
    Ok(Job {
        summand,
        count,
        order,
        t_grid: args.t.clone(),
        delta: args.delta.unwrap_or(0.1),
        format,
    })
}

fn ensure_admissible(job: &Job) -> Result<(), Failure> {
    let report = job.summand.validate();
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::validation(format!(
            "summand family not admissible: {}",
            report.failure_summary()
        )))
    }
}

fn cmd_character(args: &JobArgs) -> Result<(), Failure> {
    let job = resolve_job(args, Format::Text)?;
    ensure_admissible(&job)?;
    if job.order > laptail::MAX_ORDER {
        return Err(Failure::unsupported(
            TailsError::OrderTooLarge {
                got: job.order,
                max: laptail::MAX_ORDER,
            }
            .to_string(),
        ));
    }
    let character = if job.summand.exact_moment_order().is_some() {
        let moments = job.summand.exact_moments(job.order).map_err(Failure::from)?;
        let l = laptail::compound::laplace_character(&moments, job.order)
            .map_err(|e| Failure::validation(e.to_string()))?;
        compound_character(&job.count, &l).map_err(|e| Failure::validation(e.to_string()))?
    } else {
        if job.count.is_formal() {
            return Err(Failure::from(TailsError::InexactMoments(
                job.summand.alpha().to_string(),
            )));
        }
        let moments = job.summand.numeric_moments(job.order);
        let l = laptail::compound::laplace_character(&moments, job.order)
            .map_err(|e| Failure::validation(e.to_string()))?;
        let op = match &job.count {
            CountSpec::Poisson { rate: Some(a) } => {
                laptail::compound::poisson_compound_character(&l, &a.to_f64())
            }
            CountSpec::Geometric { ratio: Some(_) } => {
                let b = job.count.geometric_odds().expect("numeric geometric");
                laptail::compound::geometric_compound_character(&l, &b.to_f64())
            }
            CountSpec::Degenerate { n } => {
                Ok(laptail::compound::degenerate_compound_character(*n, &l))
            }
            CountSpec::Custom { pmf } => {
                Ok(laptail::compound::custom_compound_character(pmf, &l))
            }
            _ => unreachable!("formal handled above"),
        }
        .map_err(|e| Failure::validation(e.to_string()))?;
        CompoundCharacter::Numeric(op)
    };

    match job.format {
        Format::Text => println!("{}", character.render()),
        Format::Json => {
            let doc = match &character {
                CompoundCharacter::Exact(op) => CharacterDoc {
                    order: op.order(),
                    param_symbol: None,
                    coeffs: op.coeffs().iter().map(|c| c.to_string()).collect(),
                },
                CompoundCharacter::Symbolic { symbol, operator } => CharacterDoc {
                    order: operator.order(),
                    param_symbol: Some(symbol.as_str().to_string()),
                    coeffs: operator
                        .coeffs()
                        .iter()
                        .map(|c| c.render(symbol.as_str()))
                        .collect(),
                },
                CompoundCharacter::Numeric(op) => CharacterDoc {
                    order: op.order(),
                    param_symbol: None,
                    coeffs: op.coeffs().iter().map(|c| format!("{c}")).collect(),
                },
            };
            println!("{}", serde_json::to_string_pretty(&doc).expect("plain strings"));
        }
        Format::Csv => {
            return Err(Failure::unsupported(
                "character has no csv form; use text or json",
            ))
        }
    }
    Ok(())
}

fn build_expansion(job: &Job) -> Result<Expansion, Failure> {
    expansion(&job.summand, &job.count, job.order).map_err(Failure::from)
}

fn cmd_expand(args: &JobArgs) -> Result<(), Failure> {
    let job = resolve_job(args, Format::Text)?;
    let e = build_expansion(&job)?;
    match job.format {
        Format::Text => println!("{}", e.render_text()),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&e.to_doc()).expect("plain strings")
        ),
        Format::Csv => {
            return Err(Failure::unsupported(
                "expand has no csv form; use text or json",
            ))
        }
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<(), Failure> {
    let text = match &args.input {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Failure::validation(format!("cannot read input: {e}")))?,
        None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Failure::validation(format!("cannot read standard input: {e}")))?;
            buf
        }
    };
    let doc: ExpansionDoc = serde_json::from_str(&text)
        .map_err(|e| Failure::validation(format!("expansion document: {e}")))?;
    let e = Expansion::from_doc(&doc).map_err(Failure::validation)?;
    let value = e.evaluate(args.t, args.param).map_err(Failure::from)?;
    println!("{value}");
    Ok(())
}

fn cmd_verify(args: &JobArgs) -> Result<(), Failure> {
    let job = resolve_job(args, Format::Csv)?;
    if job.count.is_formal() {
        return Err(Failure::validation(
            "verify needs a numeric count parameter (--param)",
        ));
    }
    if job.t_grid.is_empty() {
        return Err(Failure::validation("field t: at least one point required"));
    }
    let e = build_expansion(&job)?;
    let report = error_report(&e, &job.summand, &job.count, &job.t_grid, job.delta)
        .map_err(Failure::from)?;
    match job.format {
        Format::Csv | Format::Text => print!("{}", report.to_csv()),
        Format::Json => println!("{}", report.to_json()),
    }
    for check in &report.checks {
        eprintln!(
            "check {} at t = {}: {} ({})",
            check.name,
            check.t,
            if check.passed { "pass" } else { "FAIL" },
            check.detail
        );
    }
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::verification("certified checks failed"))
    }
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let alpha = parse_rational("alpha", &args.alpha)?;
    let summand = SummandSpec::new(alpha).map_err(|e| Failure::validation(e.to_string()))?;
    let report = summand.validate();
    for c in &report.conditions {
        println!(
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::validation(format!(
            "summand family not admissible: {}",
            report.failure_summary()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Character(args) => cmd_character(args),
        Command::Expand(args) => cmd_expand(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
