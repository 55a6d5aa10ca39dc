//! `rsos` — certify that a polynomial (or rational function) has NO
//! representation as a fraction of sums of squares with denominator terms of
//! bounded degree, producing an exact rational certificate that an
//! independent exact verifier re-checks.
//!
//! Exit codes: 0 certified / verification accepted; 1 verification rejected;
//! 2 inconclusive (no certificate found — NOT a membership proof); 3
//! precision or iteration budget exhausted; 64 usage or input parse error;
//! 65 bad certificate file; 70 internal error.

mod certfile;

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_traits::Signed;

use rsos_core::poly::{
    ess_polynomial, ill_posed, motzkin, parse_polynomial, terms_up_to, Exponent, Polynomial,
    TermSet,
};
use rsos_core::rationalize::{
    blend_and_round, CertBody, Certificate, Fingerprint, Provenance, RoundError, RoundPolicy,
};
use rsos_core::sdp::{
    assemble_polynomial_instance, assemble_rational_instance, RationalAssembly, SdpInstance,
};
use rsos_core::solver::{
    solve_with_escalation, strictly_feasible_point, SolveError, SolveStatus, SolverParams,
};
use rsos_core::verify::{spot_check_linear_form, verify_certificate, VerifyError};
use rsos_core::Rat;

const EXIT_OK: i32 = 0;
const EXIT_REJECTED: i32 = 1;
const EXIT_INCONCLUSIVE: i32 = 2;
const EXIT_PRECISION: i32 = 3;
const EXIT_USAGE: i32 = 64;
const EXIT_BAD_CERT_FILE: i32 = 65;
const EXIT_INTERNAL: i32 = 70;

#[derive(Parser)]
#[command(
    name = "rsos",
    version,
    about = "Exact certificates that a polynomial or rational function is not a fraction of sums of squares with bounded denominator degree"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a certificate and write it after exact verification
    Certify(Box<CertifyArgs>),
    /// Re-check a certificate file with exact rational arithmetic
    Verify(VerifyArgs),
    /// Print a generated example polynomial to standard output
    Generate(GenerateArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// Read f from a polynomial text file (requires --vars)
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Even symmetric sextic f_{N,K}
    #[arg(long, num_args = 2, value_names = ["N", "K"])]
    ess: Option<Vec<usize>>,
    /// The Motzkin polynomial (n = 2)
    #[arg(long)]
    motzkin: bool,
    /// Ill-posed family (1-EPS^2) x1^2 + x2^2 - 2 x1 x2, EPS rational
    #[arg(long, value_name = "EPS")]
    illposed: Option<String>,
    /// Number of variables
    #[arg(long, value_name = "N")]
    vars: Option<usize>,
    /// Denominator degree bound 2E (even: denominators are squares)
    #[arg(long, value_name = "2E")]
    den_degree: u32,
    /// File of denominator exponent vectors (one per line, space-separated),
    /// restricting T to a subset of the degree-E terms
    #[arg(long, value_name = "FILE")]
    den_terms: Option<PathBuf>,
    /// Rational-function mode: file with the denominator polynomial g
    /// (g must be positive semidefinite; this is not checked)
    #[arg(long, value_name = "FILE")]
    rational_den: Option<PathBuf>,
    /// Working precision in decimal digits (minimum 16)
    #[arg(long, default_value_t = 30)]
    digits: u32,
    /// Big-M trace bound as a rational, e.g. 1000000 or 1/100
    #[arg(long, value_name = "M")]
    big_m: Option<String>,
    /// Iteration budget for the interior-point solver
    #[arg(long, default_value_t = 600)]
    max_iters: u32,
    /// Seed recorded in the certificate and used by downstream spot checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output certificate path
    #[arg(long, value_name = "CERT")]
    out: PathBuf,
    /// Print solver iteration records to standard error
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate file to check
    #[arg(long, value_name = "CERT")]
    cert: PathBuf,
    /// Number of randomized linear-form spot checks after acceptance
    #[arg(long, default_value_t = 100, value_name = "T")]
    spot_checks: u32,
    /// Seed for the spot checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    /// Family name: motzkin | ess | illposed
    family: String,
    /// Family parameters: `ess N K`, `illposed EPS`
    params: Vec<String>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match cli.command {
        Command::Certify(args) => cmd_certify(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Generate(args) => cmd_generate(&args),
    };
    std::process::exit(code);
}

fn usage_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn internal_error(msg: impl std::fmt::Display) -> i32 {
    eprintln!("internal error: {msg}");
    EXIT_INTERNAL
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

fn cmd_certify(args: &CertifyArgs) -> i32 {
    let (f, n) = match build_input_polynomial(args) {
        Ok(pair) => pair,
        Err(code) => return code,
    };
    if args.den_degree % 2 != 0 {
        return usage_error(
            "--den-degree is the degree bound of the squared denominators and must be even",
        );
    }
    let e = args.den_degree / 2;
    let t = match build_denominator_terms(args, n, e) {
        Ok(t) => t,
        Err(code) => return code,
    };
    let g = match &args.rational_den {
        None => None,
        Some(path) => match read_polynomial_file(path, n) {
            Ok(g) => Some(g),
            Err(code) => return code,
        },
    };

    // Assemble; in the rational case the support precheck can already settle
    // the question.
    let instance: SdpInstance = match &g {
        None => match assemble_polynomial_instance(&f, &t, true) {
            Ok(inst) => inst,
            Err(e) => return usage_error(e),
        },
        Some(g) => match assemble_rational_instance(&f, g, &t) {
            Ok(RationalAssembly::Instance(inst)) => inst,
            Ok(RationalAssembly::Obstruction(obstruction)) => {
                let cert = Certificate {
                    fingerprint: Fingerprint::for_rational_obstruction(&f, g, &t),
                    body: CertBody::SupportObstruction {
                        witness: obstruction.witness,
                    },
                    provenance: provenance_for(args, Rat::from_integer(0.into())),
                };
                return finish_certificate(cert, args);
            }
            Err(e) => return usage_error(e),
        },
    };

    let mut params = SolverParams::for_instance(&instance);
    params.precision_digits = args.digits;
    params.max_iterations = args.max_iters;
    if let Some(m) = &args.big_m {
        match Rat::from_str(m) {
            Ok(v) if v.is_positive() => params.big_m = v,
            _ => return usage_error(format!("--big-m must be a positive rational, got {m:?}")),
        }
    }

    eprintln!(
        "instance: numerator block {0}x{0}, denominator block {1}x{1}, {2} constraint monomials",
        instance.k1(),
        instance.k2(),
        instance.m()
    );

    let outcome = match solve_with_escalation(&instance, &params, 6) {
        Ok(outcome) => outcome,
        Err(SolveError::InvalidParams(msg)) => return usage_error(msg),
        Err(SolveError::NotStrictlyFeasible(msg)) => {
            return usage_error(format!(
                "{msg}; the rational-function mode requires a PSD denominator polynomial g"
            ))
        }
        Err(e @ SolveError::IterationLimit { .. }) => {
            eprintln!("solver gave up: {e}");
            return EXIT_PRECISION;
        }
        Err(e) => return internal_error(e),
    };
    if args.verbose {
        for record in &outcome.iterations {
            eprintln!("{record}");
        }
    }
    match outcome.status {
        SolveStatus::CertificateCandidateFound => {}
        SolveStatus::NoCertificateFound => {
            eprintln!(
                "inconclusive: the dual objective stayed at {:.3e} (>= -margin); \
                 this does NOT prove a representation exists",
                approx(&outcome.s)
            );
            return EXIT_INCONCLUSIVE;
        }
        SolveStatus::PrecisionExhausted => {
            eprintln!(
                "precision exhausted after escalations (reached {} digits)",
                outcome.digits_used
            );
            return EXIT_PRECISION;
        }
    }
    eprintln!(
        "certificate candidate: s = {:.6e} after {} iterations at {} digits",
        approx(&outcome.s),
        outcome.iterations.len(),
        outcome.digits_used
    );

    let strict = match strictly_feasible_point(&instance) {
        Ok(p) => p,
        Err(e) => return internal_error(e),
    };
    let provenance = provenance_for(args, params.big_m.clone());
    let cert = match blend_and_round(
        (&outcome.y, &outcome.s),
        (&strict.0, &strict.1),
        &instance,
        &RoundPolicy::standard(),
        &provenance,
    ) {
        Ok(cert) => cert,
        Err(RoundError::AllRoundingFailed { tightest_failure }) => {
            eprintln!("rounding failed at every denominator bound: {tightest_failure}");
            return EXIT_PRECISION;
        }
        Err(e) => return internal_error(e),
    };
    finish_certificate(cert, args)
}

/// Final gate before anything is written: a full independent verification
/// that re-derives the basis from the fingerprint.
fn finish_certificate(cert: Certificate, args: &CertifyArgs) -> i32 {
    let report = match verify_certificate(&cert) {
        Ok(report) => report,
        Err(e) => return internal_error(e),
    };
    if !report.accepted {
        return internal_error(format!(
            "produced certificate failed its own exact verification: {}",
            report.summary
        ));
    }
    let text = certfile::write_certificate(&cert);
    if let Err(e) = fs::write(&args.out, text) {
        eprintln!("error: cannot write {}: {e}", args.out.display());
        return EXIT_INTERNAL;
    }
    eprintln!("{}", report.summary);
    println!("certified: wrote {}", args.out.display());
    EXIT_OK
}

fn provenance_for(args: &CertifyArgs, big_m: Rat) -> Provenance {
    let mut prov = Provenance::new(args.digits, big_m, args.seed);
    if let Ok(epoch) = std::env::var("SOURCE_DATE_EPOCH") {
        prov.created_unix = epoch.parse().ok();
    }
    prov
}

fn approx(v: &Rat) -> f64 {
    num_traits::ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
}

fn build_input_polynomial(args: &CertifyArgs) -> Result<(Polynomial, usize), i32> {
    let mut selectors = 0;
    selectors += usize::from(args.input.is_some());
    selectors += usize::from(args.ess.is_some());
    selectors += usize::from(args.motzkin);
    selectors += usize::from(args.illposed.is_some());
    if selectors != 1 {
        return Err(usage_error(
            "exactly one of --input, --ess, --motzkin, --illposed must be given",
        ));
    }
    let check_vars = |expected: usize| -> Result<(), i32> {
        match args.vars {
            None => Ok(()),
            Some(v) if v == expected => Ok(()),
            Some(v) => Err(usage_error(format!(
                "--vars {v} conflicts with the selected family (n = {expected})"
            ))),
        }
    };
    if args.motzkin {
        check_vars(2)?;
        return Ok((motzkin(), 2));
    }
    if let Some(eps_text) = &args.illposed {
        check_vars(2)?;
        let eps = Rat::from_str(eps_text)
            .map_err(|_| usage_error(format!("--illposed needs a rational, got {eps_text:?}")))?;
        return Ok((ill_posed(&eps), 2));
    }
    if let Some(nk) = &args.ess {
        let (n, k) = (nk[0], nk[1]);
        check_vars(n)?;
        let f = ess_polynomial(n, k).map_err(|e| usage_error(e))?;
        return Ok((f, n));
    }
    let path = args.input.as_ref().expect("selector counted");
    let Some(n) = args.vars else {
        return Err(usage_error("--input requires --vars"));
    };
    let f = read_polynomial_file(path, n)?;
    if f.is_zero() {
        return Err(usage_error("the zero polynomial cannot be certified"));
    }
    Ok((f, n))
}

fn read_polynomial_file(path: &PathBuf, n: usize) -> Result<Polynomial, i32> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage_error(format!("cannot read {}: {e}", path.display())))?;
    parse_polynomial(text.trim(), n)
        .map_err(|e| usage_error(format!("{}: {e}", path.display())))
}

fn build_denominator_terms(args: &CertifyArgs, n: usize, e: u32) -> Result<TermSet, i32> {
    let Some(path) = &args.den_terms else {
        return Ok(terms_up_to(n, e));
    };
    let text = fs::read_to_string(path)
        .map_err(|er| usage_error(format!("cannot read {}: {er}", path.display())))?;
    let mut exps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let entries: Result<Vec<u32>, _> = trimmed.split_whitespace().map(|w| w.parse()).collect();
        let entries = entries.map_err(|_| {
            usage_error(format!(
                "{}:{}: exponent entries must be integers",
                path.display(),
                i + 1
            ))
        })?;
        if entries.len() != n {
            return Err(usage_error(format!(
                "{}:{}: exponent has {} entries, expected {n}",
                path.display(),
                i + 1,
                entries.len()
            )));
        }
        let exp = Exponent::new(entries);
        if exp.total_degree() > e {
            return Err(usage_error(format!(
                "{}:{}: term degree {} exceeds the bound E = {e}",
                path.display(),
                i + 1,
                exp.total_degree()
            )));
        }
        exps.push(exp);
    }
    if exps.is_empty() {
        return Err(usage_error(format!(
            "{}: no denominator terms",
            path.display()
        )));
    }
    TermSet::from_exponents(n, exps).map_err(|e| usage_error(e))
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(args: &VerifyArgs) -> i32 {
    let text = match fs::read_to_string(&args.cert) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.cert.display());
            return EXIT_BAD_CERT_FILE;
        }
    };
    let cert = match certfile::parse_certificate(&text) {
        Ok(cert) => cert,
        Err(e) => {
            eprintln!("bad certificate file: {e}");
            return EXIT_BAD_CERT_FILE;
        }
    };
    let report = match verify_certificate(&cert) {
        Ok(report) => report,
        Err(VerifyError::MissingMoment(e)) => {
            eprintln!("bad certificate file: {e}");
            return EXIT_BAD_CERT_FILE;
        }
        Err(VerifyError::Rebuild(e)) => {
            eprintln!("bad certificate file: cannot rebuild the instance: {e}");
            return EXIT_BAD_CERT_FILE;
        }
        Err(e @ VerifyError::FingerprintMismatch(_)) => {
            eprintln!("rejected: {e}");
            return EXIT_REJECTED;
        }
        Err(e) => return internal_error(e),
    };
    if !report.accepted {
        eprintln!("rejected: {}", report.summary);
        return EXIT_REJECTED;
    }
    match &cert.body {
        CertBody::Farkas { .. } => {
            let spots = match spot_check_linear_form(&cert, args.spot_checks, args.seed) {
                Ok(spots) => spots,
                Err(e) => return internal_error(e),
            };
            if !spots.passed() {
                for v in &spots.violations {
                    eprintln!("spot check violation: {v}");
                }
                eprintln!("rejected: linear-form spot checks contradicted the block checks");
                return EXIT_REJECTED;
            }
            println!(
                "accepted: {} ({} spot checks passed)",
                report.summary, spots.trials
            );
        }
        CertBody::SupportObstruction { .. } => {
            println!("accepted: {}", report.summary);
        }
    }
    EXIT_OK
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn cmd_generate(args: &GenerateArgs) -> i32 {
    match args.family.as_str() {
        "motzkin" => {
            if !args.params.is_empty() {
                return usage_error("motzkin takes no parameters");
            }
            println!("{}", motzkin());
            EXIT_OK
        }
        "ess" => {
            if args.params.len() != 2 {
                return usage_error("usage: generate ess N K");
            }
            let (Ok(n), Ok(k)) = (args.params[0].parse(), args.params[1].parse()) else {
                return usage_error("ess parameters must be integers");
            };
            match ess_polynomial(n, k) {
                Ok(f) => {
                    println!("{f}");
                    EXIT_OK
                }
                Err(e) => usage_error(e),
            }
        }
        "illposed" => {
            if args.params.len() != 1 {
                return usage_error("usage: generate illposed EPS");
            }
            match Rat::from_str(&args.params[0]) {
                Ok(eps) => {
                    println!("{}", ill_posed(&eps));
                    EXIT_OK
                }
                Err(_) => usage_error(format!(
                    "illposed needs a rational parameter, got {:?}",
                    args.params[0]
                )),
            }
        }
        other => usage_error(format!(
            "unknown family {other:?} (expected motzkin, ess, or illposed)"
        )),
    }
}
