//! Command-line front end for the exact identifiability certificates.
//!
//! Exit codes: 0 when every requested certificate or check passes, 1 when a
//! mathematical check fails, 2 on invalid input.

mod checks;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use terracini::field::{is_prime_u64, FieldChoice};
use terracini::ranges::{
    figure_tables, general_d_table, general_d_table_to_csv, gnuplot_script, range_rows_to_csv,
};
use terracini::secant::{check_skewness, random_terracini_probe, ProblemParams, TangentReport};
use terracini::witness::{binomial_set, identifiability_certificate};
use terracini::{Error, MixtureModel, PrimeField, Rationals, Verdict};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
const PRIME_ENV_VAR: &str = "SECANT_WITNESS_PRIME";

#[derive(Parser)]
#[command(
    name = "terracini",
    version,
    about = "Exact certificates for identifiability of sums of powers of quadratics \
             and the moments of centered Gaussian mixtures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the tangent spaces at a witness tuple are skew.
    CheckSkew(CheckSkewArgs),
    /// Run the full witness certificate: skewness plus the first-order
    /// contact-locus check at every point of the binomial set.
    ContactLocus(ContactLocusArgs),
    /// Emit the identifiability-range tables.
    Ranges(RangesArgs),
    /// Compute the moment form of a mixture model file.
    Moments(MomentsArgs),
    /// Run the bundled verification suite of desk-scale claims.
    VerifyPaper(VerifyPaperArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Rational,
    Prime,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WitnessKind {
    /// The binomial set B_n of binom(n,2)+1 quadratics.
    Binomial,
    /// Random integer forms, maximizing rank over several trials.
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Human,
}

#[derive(Args)]
struct CheckSkewArgs {
    /// Number of variables.
    #[arg(long)]
    n: usize,
    /// Degree of the base forms.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Power applied to each base form.
    #[arg(long, default_value_t = 3)]
    d: u32,
    /// Number of summands; defaults to binom(n,2)+1.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, value_enum, default_value_t = WitnessKind::Binomial)]
    witness: WitnessKind,
    /// Trials for the random witness.
    #[arg(long, default_value_t = 3)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coefficient field; binomial witnesses default to an exact rational
    /// certificate, random probes to the fast prime field.
    #[arg(long, value_enum)]
    field: Option<FieldArg>,
    /// Guard on n for the binomial witness (cost grows like n^6).
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct ContactLocusArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = FieldArg::Rational)]
    field: FieldArg,
    /// Guard on n (cost grows like n^6).
    #[arg(long, default_value_t = 8)]
    max_n: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct RangesArgs {
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long, default_value_t = 3)]
    d: u32,
    #[arg(long, default_value_t = 40)]
    n_max: usize,
    /// Tabulate the minimal viable n per power d instead of per-n rows.
    #[arg(long)]
    general_d: bool,
    /// Largest power for the --general-d table.
    #[arg(long, default_value_t = 20)]
    d_max: u32,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    output: Option<std::path::PathBuf>,
    /// Also write a gnuplot script plotting the emitted CSV.
    #[arg(long)]
    emit_gnuplot: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct MomentsArgs {
    /// Mixture model JSON file.
    #[arg(long)]
    model_file: std::path::PathBuf,
    /// Moment order (odd orders give the zero form).
    #[arg(long)]
    order: u32,
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyLevel {
    /// Prime-field ranks plus all integer-bound checks.
    Quick,
    /// Everything, with the rational certificates.
    Full,
}

#[derive(Args)]
struct VerifyPaperArgs {
    #[arg(long, value_enum, default_value_t = VerifyLevel::Quick)]
    level: VerifyLevel,
    #[arg(long, default_value_t = 20240612)]
    seed: u64,
    /// Fault-injection hook for testing the harness itself.
    #[arg(long, hide = true)]
    inject_fault: Option<String>,
}

/// JSON envelope embedded in every machine-readable output.
#[derive(Serialize)]
struct Envelope<T: Serialize> {
    tool_version: &'static str,
    seed: Option<u64>,
    field: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    prime: Option<u64>,
    params: serde_json::Value,
    report: T,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<u8, Error> {
    let prime = witness_prime()?;
    match cli.command {
        Command::CheckSkew(args) => cmd_check_skew(args, prime),
        Command::ContactLocus(args) => cmd_contact_locus(args, prime),
        Command::Ranges(args) => cmd_ranges(args),
        Command::Moments(args) => cmd_moments(args),
        Command::VerifyPaper(args) => checks::cmd_verify_paper(
            args.level == VerifyLevel::Full,
            args.seed,
            prime,
            args.inject_fault.as_deref(),
        ),
    }
}

/// The prime-field modulus, honoring the environment override.
fn witness_prime() -> Result<u64, Error> {
    match std::env::var(PRIME_ENV_VAR) {
        Ok(value) => {
            let p: u64 = value.parse().map_err(|_| {
                Error::InvalidInput(format!("{PRIME_ENV_VAR} must be an integer, got {value:?}"))
            })?;
            if p <= (1 << 31) || !is_prime_u64(p) {
                return Err(Error::InvalidInput(format!(
                    "{PRIME_ENV_VAR}={p} must be a prime exceeding 2^31"
                )));
            }
            Ok(p)
        }
        Err(_) => Ok(terracini::DEFAULT_WITNESS_PRIME),
    }
}

fn emit(output: Option<&std::path::Path>, text: &str) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| {
                    if text.ends_with('\n') {
                        Ok(())
                    } else {
                        stdout.write_all(b"\n")
                    }
                })
                .map_err(|e| Error::InvalidInput(format!("cannot write to stdout: {e}")))
        }
    }
}

fn json_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn cmd_check_skew(args: CheckSkewArgs, prime: u64) -> Result<u8, Error> {
    let default_m = if args.n >= 2 {
        args.n * (args.n - 1) / 2 + 1
    } else {
        1
    };
    let m = args.m.unwrap_or(default_m);
    let params = ProblemParams::new(args.n, args.k, args.d, m)?;
    let (report, seed): (TangentReport, Option<u64>) = match args.witness {
        WitnessKind::Binomial => {
            if args.k != 2 {
                return Err(Error::InvalidInput(
                    "the binomial witness consists of quadratics; use --witness random for k != 2"
                        .into(),
                ));
            }
            if args.n > args.max_n {
                return Err(Error::InvalidInput(format!(
                    "n = {} exceeds the guard --max-n {}; raise it explicitly",
                    args.n, args.max_n
                )));
            }
            if m != default_m {
                return Err(Error::InvalidInput(format!(
                    "the binomial witness has exactly binom(n,2)+1 = {default_m} points"
                )));
            }
            let field = args.field.unwrap_or(FieldArg::Rational);
            let report = match field {
                FieldArg::Rational => {
                    check_skewness(&binomial_set(Rationals, args.n)?.forms, args.d)?
                }
                FieldArg::Prime => {
                    check_skewness(&binomial_set(PrimeField::new(prime)?, args.n)?.forms, args.d)?
                }
            };
            (report, None)
        }
        WitnessKind::Random => {
            let field = args.field.unwrap_or(FieldArg::Prime);
            let choice = match field {
                FieldArg::Rational => FieldChoice::Rational,
                FieldArg::Prime => FieldChoice::Prime(prime),
            };
            let report = random_terracini_probe(params, args.trials, args.seed, choice)?;
            (report, Some(args.seed))
        }
    };

    let skew = report.skew;
    let field_label = report.field_used.to_string();
    match args.format {
        OutputFormat::Json => {
            let envelope = Envelope {
                tool_version: TOOL_VERSION,
                seed,
                field: field_label.clone(),
                prime: (field_label == "prime-field").then_some(prime),
                params: serde_json::to_value(report.params).unwrap(),
                report: &report,
            };
            emit(args.output.as_deref(), &json_string(&envelope))?;
        }
        OutputFormat::Human => {
            let text = format!(
                "tangent rank {} of expected {} over {} variables ({}): {}",
                report.rank,
                report.expected,
                report.params.n,
                field_label,
                if skew { "skew" } else { "NOT skew" }
            );
            emit(args.output.as_deref(), &text)?;
        }
        OutputFormat::Csv => {
            return Err(Error::InvalidInput(
                "check-skew has no CSV form; use json or human".into(),
            ))
        }
    }
    Ok(if skew { 0 } else { 1 })
}

fn cmd_contact_locus(args: ContactLocusArgs, prime: u64) -> Result<u8, Error> {
    if args.n > args.max_n {
        return Err(Error::InvalidInput(format!(
            "n = {} exceeds the guard --max-n {}; raise it explicitly",
            args.n, args.max_n
        )));
    }
    let verdict = match args.field {
        FieldArg::Rational => identifiability_certificate(Rationals, args.n)?,
        FieldArg::Prime => identifiability_certificate(PrimeField::new(prime)?, args.n)?,
    };
    let field_label = match args.field {
        FieldArg::Rational => "rational",
        FieldArg::Prime => "prime-field",
    };
    match args.format {
        OutputFormat::Json => {
            let envelope = Envelope {
                tool_version: TOOL_VERSION,
                seed: None,
                field: field_label.to_string(),
                prime: (args.field == FieldArg::Prime).then_some(prime),
                params: serde_json::json!({"n": args.n, "k": 2, "d": 3, "m": verdict.m}),
                report: &verdict,
            };
            emit(args.output.as_deref(), &json_string(&envelope))?;
        }
        OutputFormat::Human => {
            let text = format!(
                "witness certificate at n={}: skew rank {} of {}, contact kernel dims {:?} -> {}",
                verdict.n,
                verdict.skew_rank,
                verdict.expected,
                verdict.contact_kernel_dims,
                verdict.verdict
            );
            emit(args.output.as_deref(), &text)?;
        }
        OutputFormat::Csv => {
            return Err(Error::InvalidInput(
                "contact-locus has no CSV form; use json or human".into(),
            ))
        }
    }
    Ok(if verdict.verdict == Verdict::Pass { 0 } else { 1 })
}

fn cmd_ranges(args: RangesArgs) -> Result<u8, Error> {
    let (csv, json_value, human) = if args.general_d {
        let rows = general_d_table(args.d_max)?;
        let csv = general_d_table_to_csv(&rows);
        let json: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "d": r.d,
                    "minimal_n": r.minimal_n,
                    "m_bound": r.m_bound.as_ref().map(|b| b.to_string()),
                })
            })
            .collect();
        let human = rows
            .iter()
            .map(|r| match (&r.minimal_n, &r.m_bound) {
                (Some(n), Some(b)) => format!("d={}: identifiable from n={} (m <= {})", r.d, n, b),
                _ => format!("d={}: no identifiability range (squares)", r.d),
            })
            .collect::<Vec<_>>()
            .join("\n");
        (csv, serde_json::Value::Array(json), human)
    } else {
        let rows = figure_tables(args.k, args.d, args.n_max)?;
        let csv = range_rows_to_csv(&rows);
        let json: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "n": r.n,
                    "k": r.k,
                    "d": r.d,
                    "cond1_bound": r.cond1_bound.as_ref().map(|b| b.to_string()),
                    "cond2_bound": r.cond2_bound.as_ref().map(|b| b.to_string()),
                    "expected_generic_rank": r.expected_generic_rank.to_string(),
                    "regime": r.regime,
                })
            })
            .collect();
        let human = rows
            .iter()
            .map(|r| {
                format!(
                    "n={:>3}  cond1={:>6}  cond2={:>6}  expected-rank={:>8}  [{}]",
                    r.n,
                    r.cond1_bound.as_ref().map_or("-".into(), |b| b.to_string()),
                    r.cond2_bound.as_ref().map_or("-".into(), |b| b.to_string()),
                    r.expected_generic_rank.to_string(),
                    r.regime
                )
            })
            .collect::<Vec<_>>()
            .join("\n");
        (csv, serde_json::Value::Array(json), human)
    };

    match args.format {
        OutputFormat::Csv => emit(args.output.as_deref(), &csv)?,
        OutputFormat::Human => emit(args.output.as_deref(), &human)?,
        OutputFormat::Json => {
            let envelope = Envelope {
                tool_version: TOOL_VERSION,
                seed: None,
                field: "rational".to_string(),
                prime: None,
                params: serde_json::json!({
                    "k": args.k, "d": args.d,
                    "n_max": args.n_max, "general_d": args.general_d,
                    "d_max": args.d_max,
                }),
                report: json_value,
            };
            emit(args.output.as_deref(), &json_string(&envelope))?;
        }
    }

    if let Some(script_path) = args.emit_gnuplot {
        let csv_name = args
            .output
            .as_ref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "ranges.csv".to_string());
        std::fs::write(&script_path, gnuplot_script(&csv_name)).map_err(|e| {
            Error::InvalidInput(format!("cannot write {}: {e}", script_path.display()))
        })?;
    }
    Ok(0)
}

fn cmd_moments(args: MomentsArgs) -> Result<u8, Error> {
    let text = std::fs::read_to_string(&args.model_file).map_err(|e| {
        Error::InvalidInput(format!("cannot read {}: {e}", args.model_file.display()))
    })?;
    let model: MixtureModel = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("malformed model file: {e}")))?;
    let form = terracini::gaussmix::mixture_moment_form(&model, args.order);
    let envelope = Envelope {
        tool_version: TOOL_VERSION,
        seed: None,
        field: "rational".to_string(),
        prime: None,
        params: serde_json::json!({
            "order": args.order,
            "n": model.n_vars(),
            "m": model.len(),
        }),
        report: &form,
    };
    emit(args.output.as_deref(), &json_string(&envelope))?;
    Ok(0)
}
