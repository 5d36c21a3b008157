//! Command-line front end. [`run`] does all the work and returns the exit
//! code with the captured output, so tests can drive it without a process.
//!
//! Exit codes: 0 success or "yes", 1 a semantic "no", 2 invalid input,
//! 3 internal invariant violation or oracle mismatch.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::abgroup::{format_tuple, int_to_json, parse_group, HodgeVector};
use crate::classify::{admissible_at_prime, decide_group, enumerate_groups, Verdict};
use crate::error::{Error, Result};
use crate::lattice::oracle::check_depth;
use crate::lattice::{run_oracle, witness_for, OracleOptions};
use crate::numeric::{factorize, int, is_prime, Integer};
use crate::polynomial::{detect_shape, validate_weil, WeilPolynomial};

/// The bundled corpus, one `q:coeffs` entry per line.
pub const CORPUS: &str = include_str!("../data/corpus.txt");

/// Largest prime the corpus runner checks with the oracle.
pub const CORPUS_PRIME_BOUND: u32 = 50;

#[derive(Debug, Parser)]
#[command(
    name = "abelsurf",
    version,
    about = "Groups of rational points in an isogeny class of abelian surfaces over a finite field"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate the Weil polynomial and show its factorization shape
    Classify(PolyArgs),
    /// List every group of points in the isogeny class
    Groups(PolyArgs),
    /// Decide whether one group occurs
    Check {
        #[command(flatten)]
        poly: PolyArgs,
        /// Cyclic orders, e.g. "2,4"
        #[arg(long)]
        group: String,
    },
    /// Compare the theorem with a brute-force lattice enumeration at one prime
    Oracle {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        ell: String,
        /// Defaults to ord_ell f(1) + 1
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Also allow primes dividing q
        #[arg(long)]
        formal: bool,
    },
    /// Print a lattice realizing one ell-part, as the matrix of 1 - F
    Witness {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long)]
        ell: String,
        /// Four exponents, e.g. "0,0,1,1"
        #[arg(long)]
        exponents: String,
        /// Search depth for square-free polynomials
        #[arg(long)]
        depth: Option<u32>,
    },
    /// Classify every corpus entry and cross-check it with the oracle
    Corpus {
        /// Corpus file; the bundled corpus is used when omitted
        #[arg(long)]
        file: Option<std::path::PathBuf>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Also check primes dividing q
        #[arg(long)]
        formal: bool,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct PolyArgs {
    #[arg(long)]
    q: String,
    /// Five coefficients, highest degree first
    #[arg(long, conflicts_with_all = ["a1", "a2"])]
    poly: Option<String>,
    #[arg(long, allow_negative_numbers = true, requires = "a2")]
    a1: Option<String>,
    #[arg(long, allow_negative_numbers = true, requires = "a1")]
    a2: Option<String>,
    #[arg(long)]
    json: bool,
}

/// Exit code plus captured streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

fn parse_int(s: &str, what: &str) -> Result<Integer> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: {s:?} is not an integer")))
}

fn parse_prime(s: &str) -> Result<Integer> {
    let ell = parse_int(s, "--ell")?;
    if !is_prime(&ell) {
        return Err(Error::InvalidArgument(format!("--ell {ell} is not prime")));
    }
    Ok(ell)
}

/// Parses `--poly` or `--a1/--a2` and validates the result.
fn weil_from_args(a: &PolyArgs) -> Result<WeilPolynomial> {
    let q = parse_int(&a.q, "--q")?;
    let coeffs = match (&a.poly, &a.a1, &a.a2) {
        (Some(p), _, _) => p
            .split(',')
            .map(|t| parse_int(t, "--poly"))
            .collect::<Result<Vec<_>>>()?,
        (None, Some(a1), Some(a2)) => {
            let (a1, a2) = (parse_int(a1, "--a1")?, parse_int(a2, "--a2")?);
            vec![int(1), a1.clone(), a2, &q * &a1, &q * &q]
        }
        _ => {
            return Err(Error::InvalidArgument(
                "give either --poly or both --a1 and --a2".into(),
            ))
        }
    };
    validate_weil(&q, &coeffs)
}

fn parse_exponents(s: &str, ell: &Integer) -> Result<HodgeVector> {
    let exps = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("bad exponent {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HodgeVector::new(ell.clone(), exps))
}

fn poly_json(w: &WeilPolynomial) -> Value {
    json!(w.descending().iter().map(int_to_json).collect::<Vec<_>>())
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Inadmissible(_) | Error::DepthExhausted(_) => 1,
        Error::InternalInvariant(_) => 3,
        _ => 2,
    }
}

fn error_outcome(e: &Error, json: bool) -> Outcome {
    let code = exit_code_for(e);
    if json {
        let body = json!({"error": e.code(), "message": e.to_string()});
        Outcome {
            code,
            stdout: format!("{body}\n"),
            stderr: String::new(),
        }
    } else {
        Outcome {
            code,
            stdout: String::new(),
            stderr: format!("error: {}: {e}\n", e.code()),
        }
    }
}

fn cmd_classify(a: &PolyArgs) -> Result<Outcome> {
    let w = weil_from_args(a)?;
    let shape = detect_shape(&w)?;
    let f1 = w.value_at_one();
    let fac = factorize(&f1)?;
    if a.json {
        let body = json!({
            "q": int_to_json(&w.q),
            "poly": poly_json(&w),
            "valid": true,
            "case": shape.case_number(),
            "factors": shape.factors_string(),
            "f1": int_to_json(&f1),
            "f1_factorization": fac.0.iter().map(|(p, e)| json!([int_to_json(p), e])).collect::<Vec<_>>(),
        });
        return Ok(Outcome::ok(0, format!("{body}\n")));
    }
    let mut out = String::new();
    writeln!(out, "polynomial: {}", w.poly()).ok();
    writeln!(out, "q: {} = {}^{}", w.q, w.p, w.n).ok();
    writeln!(out, "valid: yes").ok();
    writeln!(out, "case: {}", shape.case_number()).ok();
    writeln!(out, "factors: {}", shape.factors_string()).ok();
    writeln!(out, "f(1): {f1} = {fac}").ok();
    Ok(Outcome::ok(0, out))
}

fn cmd_groups(a: &PolyArgs) -> Result<Outcome> {
    let w = weil_from_args(a)?;
    let r = enumerate_groups(&w)?;
    if a.json {
        return Ok(Outcome::ok(0, format!("{}\n", r.to_json())));
    }
    let mut out = String::new();
    for g in &r.groups {
        writeln!(out, "{g}").ok();
    }
    Ok(Outcome::ok(0, out))
}

fn cmd_check(a: &PolyArgs, group: &str) -> Result<Outcome> {
    let w = weil_from_args(a)?;
    let g = parse_group(group)?;
    let verdict = decide_group(&w, &g)?;
    let code = if verdict.is_yes() { 0 } else { 1 };
    if a.json {
        let body = match &verdict {
            Verdict::Yes => json!({"group": g.to_json(), "verdict": "yes"}),
            Verdict::No(r) => json!({"group": g.to_json(), "verdict": "no", "reason": r.to_json()}),
        };
        return Ok(Outcome::ok(code, format!("{body}\n")));
    }
    let line = match verdict {
        Verdict::Yes => "YES".to_string(),
        Verdict::No(r) => format!("NO: {r}"),
    };
    Ok(Outcome::ok(code, format!("{line}\n")))
}

/// Oracle versus theorem at one prime: `(matched, report json, text)`.
fn oracle_compare(
    w: &WeilPolynomial,
    ell: &Integer,
    opts: &OracleOptions,
) -> Result<(bool, Value, String)> {
    if let Some(d) = opts.depth {
        check_depth(ell, d)?;
    }
    let report = run_oracle(w, ell, opts)?;
    let shape = detect_shape(w)?;
    let expected: Vec<Vec<u64>> = admissible_at_prime(w, &shape, ell)?
        .admissible
        .into_iter()
        .map(|h| h.exponents)
        .collect();
    let realized: Vec<Vec<u64>> = report.realized.keys().cloned().collect();
    let matched = realized == expected;

    let mut body = report.to_json();
    body["expected"] = json!(expected);
    body["match"] = json!(matched);
    let tuples = |vs: &[Vec<u64>]| vs.iter().map(|v| format_tuple(v)).collect::<Vec<_>>().join(" ");
    let mut text = String::new();
    writeln!(text, "ell: {ell}").ok();
    writeln!(text, "depth: {}", report.depth).ok();
    writeln!(text, "lattices: {} ({})", report.lattice_count, report.reduction.as_str()).ok();
    if report.formal {
        writeln!(text, "formal: ell divides q").ok();
    }
    writeln!(text, "realized: {}", tuples(&realized)).ok();
    writeln!(text, "expected: {}", tuples(&expected)).ok();
    writeln!(text, "{}", if matched { "MATCH" } else { "MISMATCH" }).ok();
    Ok((matched, body, text))
}

fn cmd_oracle(a: &PolyArgs, ell: &str, opts: OracleOptions) -> Result<Outcome> {
    let w = weil_from_args(a)?;
    let ell = parse_prime(ell)?;
    let (matched, body, text) = oracle_compare(&w, &ell, &opts)?;
    let code = if matched { 0 } else { 3 };
    Ok(Outcome::ok(code, if a.json { format!("{body}\n") } else { text }))
}

fn cmd_witness(a: &PolyArgs, ell: &str, exponents: &str, depth: Option<u32>) -> Result<Outcome> {
    let w = weil_from_args(a)?;
    let ell = parse_prime(ell)?;
    if let Some(d) = depth {
        check_depth(&ell, d)?;
    }
    let hv = parse_exponents(exponents, &ell)?;
    let wit = witness_for(&w, &ell, &hv, depth)?;
    if a.json {
        return Ok(Outcome::ok(0, format!("{}\n", wit.to_json())));
    }
    let mut out = String::new();
    writeln!(out, "construction: {}", wit.construction).ok();
    writeln!(out, "matrix of 1 - F:").ok();
    write!(out, "{}", wit.matrix).ok();
    if !out.ends_with('\n') {
        out.push('\n');
    }
    writeln!(out, "charpoly: {}", wit.charpoly).ok();
    let snf: Vec<String> = wit.snf.iter().map(ToString::to_string).collect();
    writeln!(out, "snf: {}", snf.join(",")).ok();
    writeln!(out, "{}-part: {}", ell, wit.target.tuple_string()).ok();
    Ok(Outcome::ok(0, out))
}

/// One corpus entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub line: usize,
    pub q: Integer,
    pub coeffs: Vec<Integer>,
}

/// Parses `q:c4,c3,c2,c1,c0` lines; `#` starts a comment.
pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (q, cs) = line
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("corpus line {}: expected q:coeffs", i + 1)))?;
        let coeffs = cs
            .split(',')
            .map(|t| parse_int(t, "corpus coefficient"))
            .collect::<Result<Vec<_>>>()?;
        out.push(CorpusEntry {
            line: i + 1,
            q: parse_int(q, "corpus q")?,
            coeffs,
        });
    }
    Ok(out)
}

/// Primes `ℓ ≤ bound` dividing `f(1)`; those dividing `q` only when `formal`.
pub fn oracle_primes(w: &WeilPolynomial, bound: u32, formal: bool) -> Result<Vec<Integer>> {
    Ok(factorize(&w.value_at_one())?
        .primes()
        .filter(|l| **l <= int(bound as i64))
        .filter(|l| formal || !(&w.q % *l).is_zero())
        .cloned()
        .collect())
}

fn cmd_corpus(file: Option<&std::path::Path>, jobs: Option<usize>, formal: bool, json: bool) -> Result<Outcome> {
    let text = match file {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", p.display())))?,
        None => CORPUS.to_string(),
    };
    let entries = parse_corpus(&text)?;
    let mut all_ok = true;
    let mut out = String::new();
    let mut rows = Vec::new();
    for entry in entries {
        let w = validate_weil(&entry.q, &entry.coeffs)?;
        let r = enumerate_groups(&w)?;
        let groups: Vec<String> = r.groups.iter().map(ToString::to_string).collect();
        writeln!(
            out,
            "q={} poly={} case={} groups={}",
            w.q,
            w.poly().to_descending_string(),
            r.shape.case_number(),
            groups.join(" ")
        )
        .ok();
        let mut checks = Vec::new();
        for ell in oracle_primes(&w, CORPUS_PRIME_BOUND, formal)? {
            let opts = OracleOptions {
                depth: None,
                jobs,
                formal,
            };
            let (matched, body, _) = oracle_compare(&w, &ell, &opts)?;
            all_ok &= matched;
            writeln!(
                out,
                "  ell={} depth={} lattices={} {}",
                ell,
                body["depth"],
                body["lattice_count"],
                if matched { "MATCH" } else { "MISMATCH" }
            )
            .ok();
            checks.push(body);
        }
        rows.push(json!({
            "line": entry.line,
            "classification": r.to_json(),
            "oracle": checks,
        }));
    }
    let code = if all_ok { 0 } else { 3 };
    if json {
        let body = json!({"entries": rows, "all_match": all_ok});
        return Ok(Outcome::ok(code, format!("{body}\n")));
    }
    writeln!(out, "{}", if all_ok { "ALL MATCH" } else { "MISMATCH" }).ok();
    Ok(Outcome::ok(code, out))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(0, text)
            };
        }
    };
    let json = match &cli.command {
        Command::Classify(p) | Command::Groups(p) => p.json,
        Command::Check { poly, .. } | Command::Oracle { poly, .. } | Command::Witness { poly, .. } => {
            poly.json
        }
        Command::Corpus { json, .. } => *json,
    };
    let result = match &cli.command {
        Command::Classify(p) => cmd_classify(p),
        Command::Groups(p) => cmd_groups(p),
        Command::Check { poly, group } => cmd_check(poly, group),
        Command::Oracle {
            poly,
            ell,
            depth,
            jobs,
            formal,
        } => cmd_oracle(
            poly,
            ell,
            OracleOptions {
                depth: *depth,
                jobs: *jobs,
                formal: *formal,
            },
        ),
        Command::Witness {
            poly,
            ell,
            exponents,
            depth,
        } => cmd_witness(poly, ell, exponents, *depth),
        Command::Corpus {
            file,
            jobs,
            formal,
            json,
        } => cmd_corpus(file.as_deref(), *jobs, *formal, *json),
    };
    result.unwrap_or_else(|e| error_outcome(&e, json))
}
