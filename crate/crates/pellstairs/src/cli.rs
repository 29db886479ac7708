//! Command-line front end: point queries, interval scans with plot-data
//! emission, verification suites, obstruction searches, and ECH
//! sequences.
//!
//! Exit codes: 0 on success, 1 on usage or parse errors, 2 on verification
//! failure.

use crate::capacity::{
    c_closed_form, c_from_obstructions, exact_search_bound, table_rows, CapacityValue, Source,
};
use crate::ech::{cube_identity_d, dominates, Dominance, EchSequence};
use crate::exactnum::{parse_rational, Rational};
use crate::exclass::{enumerate_e7, intersection_ok, is_in_e, max_steps};
use crate::pell::{alpha, beta, class_e_alpha, class_e_beta};
use crate::search::{inter_sol_less1, inter_sol_less2, interval_proof_bound, sol_less};
use crate::obstruction::mu;
use crate::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

#[derive(Parser, Debug)]
#[command(
    name = "pellstairs",
    about = "Exact symplectic embedding capacities of 4d ellipsoids into cubes",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Search,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate c(a) at a rational point ("p/q", "7", or "6+1/5").
    Capacity {
        a: String,
        /// Degree budget for the search evaluator (default: the exact bound).
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
    },
    /// Emit c(a) on every reduced fraction in [lo, hi] with bounded
    /// denominator, as CSV or JSON plot data.
    Scan {
        lo: String,
        hi: String,
        /// Largest denominator in the Farey grid.
        #[arg(long, default_value_t = 32)]
        denominator_limit: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
        format: OutputFormat,
        /// Allow denominator limits above 256.
        #[arg(long)]
        force: bool,
        /// Write to a file instead of stdout.
        #[arg(long)]
        output: Option<std::path::PathBuf>,
    },
    /// Run a verification suite; exits 2 on any failure.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long)]
        d_max: Option<u64>,
    },
    /// Search for obstructive classes at a point, or sweep an interval
    /// ("interval K"); prints a JSON report.
    Search {
        /// A rational point, or the two words "interval K".
        #[arg(num_args = 1..=2)]
        query: Vec<String>,
        /// Degree budget (defaults to the applicable analytic bound).
        #[arg(long, short = 'D')]
        bound: Option<u64>,
    },
    /// ECH capacity sequences and the dominance test.
    Ech {
        #[command(subcommand)]
        what: EchCommand,
    },
}

#[derive(Subcommand, Debug)]
enum EchCommand {
    /// First k_max capacities of the ellipsoid E(a,b) as CSV.
    Ellipsoid {
        a: String,
        b: String,
        #[arg(long, default_value_t = 50)]
        k_max: usize,
    },
    /// First k_max capacities of the polydisc P(a,b) as CSV.
    Polydisc {
        a: String,
        b: String,
        #[arg(long, default_value_t = 50)]
        k_max: usize,
    },
    /// Check c^k(E(ea,eb)) <= c^k(P(pa,pb)) for k <= k_max.
    Dominates {
        ea: String,
        eb: String,
        pa: String,
        pb: String,
        #[arg(long, default_value_t = 100)]
        k_max: usize,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(Error::Parse(msg)) | Err(Error::Domain(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Capacity { a, bound, method } => cmd_capacity(&a, bound, method),
        Command::Scan {
            lo,
            hi,
            denominator_limit,
            format,
            force,
            output,
        } => cmd_scan(&lo, &hi, denominator_limit, format, force, output),
        Command::Verify {
            suite,
            n_max,
            k_max,
            d_max,
        } => cmd_verify(&suite, n_max, k_max, d_max),
        Command::Search { query, bound } => cmd_search(&query, bound),
        Command::Ech { what } => cmd_ech(what),
    }
}

fn render(value: &CapacityValue) -> String {
    let exact = value.exact_text();
    let shown = if matches!(value.source, Source::Volume) && value.value.is_rational() {
        format!("{exact} = sqrt({})", value.squared())
    } else {
        exact
    };
    format!(
        "{shown} ~ {} ({})",
        value.value.to_decimal(12),
        value.source
    )
}

fn cmd_capacity(a: &str, bound: Option<u64>, method: Method) -> Result<i32> {
    let a = parse_rational(a)?;
    if a < Rational::one() {
        return Err(Error::Domain(format!("capacity needs a >= 1, got {a}")));
    }
    match method {
        Method::Closed => {
            let c = c_closed_form(&a)?;
            println!("c({a}) = {}", render(&c));
        }
        Method::Search => {
            let d = match bound {
                Some(d) => d,
                None => exact_search_bound(&a)?,
            };
            let c = c_from_obstructions(&a, d)?;
            let tag = match c.exactness {
                crate::capacity::Exactness::Exact => "exact",
                crate::capacity::Exactness::LowerBound => "lower bound",
            };
            println!("c({a}) >= {} [{tag}, degrees <= {d}]", render(&c));
        }
        Method::Both => {
            let closed = c_closed_form(&a)?;
            let d = match bound {
                Some(d) => d,
                None => exact_search_bound(&a)?,
            };
            let searched = c_from_obstructions(&a, d)?;
            let verdict = if closed.value == searched.value {
                "agree"
            } else {
                "DISAGREE"
            };
            println!("closed form: c({a}) = {}", render(&closed));
            println!("search:      c({a}) = {}", render(&searched));
            println!("{verdict}");
            if verdict == "DISAGREE" {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct ScanRow {
    a_num: String,
    a_den: String,
    c_exact: String,
    c_float: String,
    source: String,
}

/// All reduced fractions in [lo, hi] with denominator at most `limit`,
/// in increasing order.
fn farey_grid(lo: &Rational, hi: &Rational, limit: u64) -> Vec<Rational> {
    let mut grid: Vec<Rational> = Vec::new();
    for q in 1..=limit {
        let qi = BigInt::from(q);
        let p_lo = (lo * Rational::from_integer(qi.clone())).ceil().to_integer();
        let p_hi = (hi * Rational::from_integer(qi.clone())).floor().to_integer();
        let mut p = p_lo;
        while p <= p_hi {
            if p.gcd(&qi).is_one() {
                grid.push(Rational::new(p.clone(), qi.clone()));
            }
            p += 1;
        }
    }
    grid.sort();
    grid.dedup();
    grid
}

fn cmd_scan(
    lo: &str,
    hi: &str,
    limit: u64,
    format: OutputFormat,
    force: bool,
    output: Option<std::path::PathBuf>,
) -> Result<i32> {
    let lo = parse_rational(lo)?;
    let hi = parse_rational(hi)?;
    if lo < Rational::one() || lo >= hi {
        return Err(Error::Domain(format!(
            "scan needs 1 <= lo < hi, got [{lo}, {hi}]"
        )));
    }
    if limit > 256 && !force {
        return Err(Error::Domain(format!(
            "denominator limit {limit} exceeds 256; pass --force to override"
        )));
    }
    let rows: Vec<ScanRow> = farey_grid(&lo, &hi, limit)
        .par_iter()
        .map(|a| {
            let c = c_closed_form(a).expect("a >= 1 on the grid");
            ScanRow {
                a_num: a.numer().to_string(),
                a_den: a.denom().to_string(),
                c_exact: c.exact_text(),
                c_float: c.value.to_decimal(12),
                source: c.source.to_string(),
            }
        })
        .collect();

    let mut out: Box<dyn Write> = match output {
        Some(path) => Box::new(std::fs::File::create(path).map_err(|e| {
            Error::Domain(format!("cannot create output file: {e}"))
        })?),
        None => Box::new(std::io::stdout()),
    };
    match format {
        OutputFormat::Csv => {
            writeln!(out, "a_num,a_den,c_exact,c_float,source").unwrap();
            for row in &rows {
                // The source column may contain commas; keep it quoted.
                writeln!(
                    out,
                    "{},{},{},{},\"{}\"",
                    row.a_num, row.a_den, row.c_exact, row.c_float, row.source
                )
                .unwrap();
            }
        }
        OutputFormat::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&rows).unwrap()).unwrap();
        }
    }
    Ok(0)
}

struct SuiteReport {
    passed: usize,
    failed: usize,
}

impl SuiteReport {
    fn new() -> Self {
        SuiteReport {
            passed: 0,
            failed: 0,
        }
    }

    fn check(&mut self, label: &str, ok: bool) {
        if ok {
            self.passed += 1;
            println!("[ok]   {label}");
        } else {
            self.failed += 1;
            println!("[FAIL] {label}");
        }
    }

    fn code(&self) -> i32 {
        println!("{}/{} checks passed", self.passed, self.passed + self.failed);
        if self.failed == 0 {
            0
        } else {
            2
        }
    }
}

fn cmd_verify(
    suite: &str,
    n_max: Option<u32>,
    k_max: Option<usize>,
    d_max: Option<u64>,
) -> Result<i32> {
    let _ = d_max;
    let mut report = SuiteReport::new();
    match suite {
        "staircase" => {
            let n_max = n_max.unwrap_or(8);
            for n in 0..=n_max {
                let a = class_e_alpha(n)?;
                report.check(
                    &format!("E(alpha_{n}) = {a} is exceptional"),
                    is_in_e(&a, max_steps()),
                );
                let b = class_e_beta(n)?;
                report.check(
                    &format!("E(beta_{n}) = {b} is exceptional"),
                    is_in_e(&b, max_steps()),
                );
                let ca = c_closed_form(&alpha(n))?;
                report.check(
                    &format!("c(alpha_{n})^2 = alpha_{n}/2"),
                    ca.squared() == alpha(n) / crate::exactnum::rat(2, 1),
                );
                let cb = c_closed_form(&beta(n))?;
                report.check(
                    &format!("c(beta_{n})^2 = alpha_{}/2", n + 1),
                    cb.squared() == alpha(n + 1) / crate::exactnum::rat(2, 1),
                );
            }
        }
        "e7" => {
            let classes = enumerate_e7(max_steps());
            report.check(
                &format!("{}/10 classes reproduced", classes.len()),
                classes.len() == 10,
            );
            let mut all_ok = true;
            for (i, a) in classes.iter().enumerate() {
                for b in &classes[i + 1..] {
                    all_ok &= intersection_ok(a, b);
                }
            }
            report.check("all pairs meet positivity of intersections", all_ok);
        }
        "ech" => {
            let k_max = k_max.unwrap_or(1000);
            let one = crate::exactnum::rat_int(1);
            let two = crate::exactnum::rat_int(2);
            let mut e12 = EchSequence::ellipsoid(one.clone(), two.clone())?;
            let mut cube = EchSequence::polydisc(one.clone(), one.clone())?;
            let mut identity = true;
            for k in 1..=k_max {
                let d = crate::exactnum::rat_int(cube_identity_d(k as u64)? as i64);
                identity &= e12.entry(k)? == d && cube.entry(k)? == d;
            }
            report.check(
                &format!("c^k(E(1,2)) = c^k(C(1)) = closed form for k <= {k_max}"),
                identity,
            );
            let mut fwd = EchSequence::ellipsoid(one.clone(), two.clone())?;
            let mut bwd = EchSequence::polydisc(one.clone(), one.clone())?;
            report.check(
                &format!("E(1,2) dominated by C(1) up to {k_max}"),
                dominates(&mut fwd, &mut bwd, k_max) == Dominance::DominatedUpTo(k_max),
            );
        }
        "tables" => {
            for row in table_rows() {
                let ok = mu(&row.cls, &row.x)? == row.c_at_x && is_in_e(&row.cls, max_steps());
                report.check(&format!("row x = {}: {} gives {}", row.x, row.cls, row.c_at_x), ok);
            }
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown suite {other:?}; expected staircase | e7 | ech | tables"
            )));
        }
    }
    Ok(report.code())
}

fn cmd_search(query: &[String], bound: Option<u64>) -> Result<i32> {
    match query {
        [point] => {
            let a = parse_rational(point)?;
            let d = match bound {
                Some(d) => d,
                None => exact_search_bound(&a)?,
            };
            let report = sol_less(&a, d)?;
            println!("{}", serde_json::to_string_pretty(&report.to_json()).unwrap());
        }
        [word, k] if word == "interval" => {
            let k: u32 = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad interval index {k:?}")))?;
            let d1 = match bound {
                Some(d) => d,
                None => interval_proof_bound(k, 1)?,
            };
            let d2 = match bound {
                Some(d) => d,
                None => interval_proof_bound(k, 2)?,
            };
            let r1 = inter_sol_less1(k, d1)?;
            let r2 = inter_sol_less2(k, d2)?;
            let doc = serde_json::json!([r1.to_json(), r2.to_json()]);
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        _ => {
            return Err(Error::Parse(
                "expected a rational point or: interval K".into(),
            ));
        }
    }
    Ok(0)
}

fn print_sequence(seq: &mut EchSequence, k_max: usize) {
    println!("k,value,value_float");
    for k in 1..=k_max {
        let v = seq.entry(k).expect("k >= 1");
        let vf = crate::exactnum::QuadExt::rational(v.clone()).to_decimal(12);
        println!("{k},{v},{vf}");
    }
}

fn cmd_ech(what: EchCommand) -> Result<i32> {
    match what {
        EchCommand::Ellipsoid { a, b, k_max } => {
            let mut seq = EchSequence::ellipsoid(parse_rational(&a)?, parse_rational(&b)?)?;
            print_sequence(&mut seq, k_max);
        }
        EchCommand::Polydisc { a, b, k_max } => {
            let mut seq = EchSequence::polydisc(parse_rational(&a)?, parse_rational(&b)?)?;
            print_sequence(&mut seq, k_max);
        }
        EchCommand::Dominates {
            ea,
            eb,
            pa,
            pb,
            k_max,
        } => {
            let mut e = EchSequence::ellipsoid(parse_rational(&ea)?, parse_rational(&eb)?)?;
            let mut p = EchSequence::polydisc(parse_rational(&pa)?, parse_rational(&pb)?)?;
            match dominates(&mut e, &mut p, k_max) {
                Dominance::DominatedUpTo(k) => {
                    println!("dominated for all k <= {k}");
                }
                Dominance::ViolatedAt(k) => {
                    println!("violated at k = {k}");
                    return Ok(2);
                }
            }
        }
    }
    Ok(0)
}

/// Public wrapper around the Farey grid for tests and library callers.
pub fn scan_grid(lo: &Rational, hi: &Rational, limit: u64) -> Vec<Rational> {
    farey_grid(lo, hi, limit)
}
