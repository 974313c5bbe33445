//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 usage, 3 resource or precision limits.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::two_term;
use crate::error::{Error, Result};
use crate::exact::{
    r_count, summatory_direct, summatory_enumerate, summatory_fast, summatory_recursive, summatory_split_s2,
};
use crate::expsum::{lemma3_sum, lemma3_sum_with, t_sum, vdc_bound, ExpSumConfig};
use crate::instance::Instance;
use crate::precision::{PrecReal, MIN_PRECISION};
use crate::residual::{self as scan_io, fit_exponent, Grid, ScanOptions, Which};
use crate::verify;

pub const PRECISION_ENV: &str = "SUMPOWERS_PRECISION";

#[derive(Debug, Parser)]
#[command(name = "sumpowers", version, about = "Counts of x_1^k + ... + x_s^k <= x: exact, asymptotic and residual")]
pub struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = 128)]
    pub precision: usize,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Run instances with k < 4 or s > k + 1; output is marked exploratory.
    #[arg(long, global = true)]
    pub allow_outside_theorem: bool,
    /// Seed for synthetic data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fast,
    Direct,
    Split,
    Recursive,
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Dyadic,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Column {
    TwoTerm,
    MainOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

/// An integer cutoff; real input is floored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cutoff {
    pub value: u64,
    pub floored: bool,
}

fn parse_cutoff(s: &str) -> std::result::Result<Cutoff, String> {
    if let Ok(value) = s.parse::<u64>() {
        return Ok(Cutoff { value, floored: false });
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 && v < 2f64.powi(64) => {
            Ok(Cutoff { value: v.floor() as u64, floored: v.fract() != 0.0 })
        }
        _ => Err(format!("`{s}` is not a non-negative number below 2^64")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Number of representations of n.
    Count {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, value_parser = parse_cutoff)]
        n: Cutoff,
    },
    /// Number of representations of all m <= x.
    Summatory {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, value_parser = parse_cutoff)]
        x: Cutoff,
        #[arg(long, value_enum, default_value_t = Method::Fast)]
        method: Method,
    },
    /// Main term, second term and their difference at x.
    Asymptotic {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        x: String,
    },
    /// Exact counts against the asymptotic terms over a grid of cutoffs.
    Scan {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, value_parser = parse_cutoff)]
        x_min: Cutoff,
        #[arg(long, value_parser = parse_cutoff)]
        x_max: Cutoff,
        #[arg(long, value_enum, default_value_t = GridKind::Dyadic)]
        grid: GridKind,
        /// Points per octave of a geometric grid.
        #[arg(long, default_value_t = 4)]
        per_octave: u32,
    },
    /// Log-log slope of residuals read from scan CSV, or of synthetic data.
    Fit {
        #[arg(long, conflicts_with = "synthetic_slope", required_unless_present = "synthetic_slope")]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Column::TwoTerm)]
        column: Column,
        /// Fit sups over [2^j, 2^(j+1)) instead of every point.
        #[arg(long)]
        window_sup: bool,
        /// Fit x^slope times seeded multiplicative noise.
        #[arg(long)]
        synthetic_slope: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 32)]
        points: usize,
    },
    /// One exponential sum block with its second-derivative bound.
    Expsum {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        h: i64,
        /// Use H = x^a in place of the default truncation.
        #[arg(long)]
        h_exponent: Option<f64>,
    },
    /// Sum of the sawtooth over the k-th roots of x - l^k.
    Lemma3 {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        nu: Option<f64>,
    },
    /// Run the self-check suite.
    Verify {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        /// Replace the integer root with one that is wrong at exact powers.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInstance(_)
        | Error::InvalidArgument(_)
        | Error::Domain(_)
        | Error::DegenerateFit(_)
        | Error::Csv(_)
        | Error::Json(_) => 2,
        Error::Audit(_) | Error::EnvelopeViolation { .. } => 1,
        Error::ResourceLimit { .. } | Error::Precision { .. } | Error::Quadrature { .. } | Error::Io(_) => 3,
    }
}

/// Parses arguments, configures the thread pool and runs one command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            log::warn!("thread pool already configured: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn instance(cli: &Cli, k: u32, s: u32) -> Result<Instance> {
    let inst = Instance::new(k, s)?;
    gate(cli, inst.theorem_valid(), &format!("k = {k}, s = {s}"))?;
    Ok(inst)
}

fn gate(cli: &Cli, valid: bool, what: &str) -> Result<()> {
    if valid {
        return Ok(());
    }
    if !cli.allow_outside_theorem {
        return Err(Error::InvalidArgument(format!(
            "{what} is outside k >= 4, 2 <= s <= k + 1; pass --allow-outside-theorem to run it anyway"
        )));
    }
    eprintln!("WARNING: {what} is outside k >= 4, 2 <= s <= k + 1; results are exploratory");
    Ok(())
}

fn cutoff(c: Cutoff, name: &str) -> u64 {
    if c.floored {
        eprintln!("warning: {name} floored to {}", c.value);
    }
    c.value
}

fn sink(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.output {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Writes one serializable record as JSON, or as a header plus one row.
fn emit_record<T: Serialize>(cli: &Cli, default: Format, value: &T, row: &[(&str, String)]) -> Result<()> {
    let mut out = sink(cli)?;
    match cli.format.unwrap_or(default) {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
        }
        f => {
            let delimiter = if f == Format::Tsv { b'\t' } else { b',' };
            let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(out);
            w.write_record(row.iter().map(|(k, _)| *k))?;
            w.write_record(row.iter().map(|(_, v)| v.as_str()))?;
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_line(cli: &Cli, line: &str) -> Result<()> {
    let mut out = sink(cli)?;
    writeln!(out, "{line}")?;
    out.flush()?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<u8> {
    let p = cli.precision;
    if p < MIN_PRECISION {
        return Err(Error::InvalidArgument(format!("precision {p} is below {MIN_PRECISION} bits")));
    }
    match &cli.command {
        Command::Count { k, s, n } => {
            let inst = Instance::new(*k, *s)?;
            emit_line(cli, &r_count(inst, cutoff(*n, "n")).to_string())?;
        }
        Command::Summatory { k, s, x, method } => {
            let inst = Instance::new(*k, *s)?;
            let x = cutoff(*x, "x");
            let v = match method {
                Method::Fast => summatory_fast(inst, x)?,
                Method::Direct => summatory_direct(inst, x)?,
                Method::Split if *s == 2 => summatory_split_s2(*k, x)?,
                Method::Split => return Err(Error::InvalidArgument("the split method needs s = 2".into())),
                Method::Recursive => summatory_recursive(inst, x)?,
                Method::Enumerate => summatory_enumerate(inst, x),
            };
            emit_line(cli, &v.to_string())?;
        }
        Command::Asymptotic { k, s, x } => {
            let inst = instance(cli, *k, *s)?;
            let xr = PrecReal::parse(x, p)?;
            if !xr.is_positive() {
                return Err(Error::InvalidArgument(format!("x = {x} must be positive")));
            }
            let est = two_term(inst, &xr, p)?;
            let row = [
                ("k", k.to_string()),
                ("s", s.to_string()),
                ("x", est.x.to_decimal()),
                ("main", est.main_term.to_decimal()),
                ("second", est.second_term.to_decimal()),
                ("two_term", est.two_term_value.to_decimal()),
                ("predicted_exponent", est.predicted_error_exponent.to_string()),
            ];
            emit_record(cli, Format::Json, &est, &row)?;
        }
        Command::Scan { k, s, x_min, x_max, grid, per_octave } => {
            let inst = instance(cli, *k, *s)?;
            let grid = match grid {
                GridKind::Dyadic => Grid::Dyadic,
                GridKind::Geometric => Grid::per_octave(*per_octave),
            };
            let opts = ScanOptions { precision: p, ..ScanOptions::default() };
            let scan = scan_io::scan(inst, cutoff(*x_min, "x-min"), cutoff(*x_max, "x-max"), grid, &opts)?;
            let out = sink(cli)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => scan_io::write_csv(&scan, out)?,
                Format::Tsv => scan_io::write_tsv(&scan, out)?,
                Format::Json => scan_io::write_json(&scan, out)?,
            }
        }
        Command::Fit { input, column, window_sup, synthetic_slope, noise, points } => {
            let fit = match (input, synthetic_slope) {
                (Some(path), _) => {
                    let records = scan_io::read_csv(BufReader::new(File::open(path)?), p)?;
                    let which = match column {
                        Column::TwoTerm => Which::TwoTerm,
                        Column::MainOnly => Which::MainOnly,
                    };
                    if *window_sup {
                        let values: Vec<(u64, f64)> =
                            records.iter().map(|r| (r.x, r.residual(which).abs().to_f64())).collect();
                        let sups = scan_io::window_sup_values(&values);
                        fit_exponent(&sups.iter().map(|w| (w.x_window as f64, w.sup)).collect::<Vec<_>>())?
                    } else {
                        let pts: Vec<(f64, f64)> = records
                            .iter()
                            .map(|r| (r.x as f64, r.residual(which).abs().to_f64()))
                            .filter(|&(_, y)| y > 0.0)
                            .collect();
                        fit_exponent(&pts)?
                    }
                }
                (None, Some(slope)) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
                    let n = (*points).max(2);
                    let pts: Vec<(f64, f64)> = (0..n)
                        .map(|i| {
                            let x = 2f64.powf(10.0 + 14.0 * i as f64 / (n - 1) as f64);
                            let eps = if *noise > 0.0 { rng.gen_range(-noise..*noise) } else { 0.0 };
                            (x, x.powf(*slope) * (1.0 + eps))
                        })
                        .collect();
                    fit_exponent(&pts)?
                }
                (None, None) => unreachable!("clap requires one source"),
            };
            let row = [
                ("slope", fit.slope.to_string()),
                ("intercept", fit.intercept.to_string()),
                ("points_used", fit.points_used.to_string()),
                ("max_abs_residual_of_fit", fit.max_abs_residual_of_fit.to_string()),
            ];
            emit_record(cli, Format::Json, &fit, &row)?;
        }
        Command::Expsum { k, x, m, h, h_exponent } => {
            gate(cli, *k >= 4, &format!("k = {k}"))?;
            let mut cfg = ExpSumConfig::new(*x, *k, *m, *h)?.with_precision(p);
            if let Some(a) = h_exponent {
                cfg = cfg.with_h_exponent(*a)?;
            }
            let t = t_sum(&cfg)?;
            let vdc = vdc_bound(&cfg)?;
            #[derive(Serialize)]
            struct Out<'a> {
                config: &'a ExpSumConfig,
                sum: crate::expsum::ComplexVal,
                norm: f64,
                bound: crate::expsum::VdcBound,
            }
            let row = [
                ("x", x.to_string()),
                ("k", k.to_string()),
                ("m", cfg.m.to_string()),
                ("m_prime", cfg.m_prime.to_string()),
                ("h", h.to_string()),
                ("re", t.re.to_string()),
                ("im", t.im.to_string()),
                ("norm", t.norm().to_string()),
                ("bound", vdc.bound.to_string()),
            ];
            emit_record(cli, Format::Json, &Out { config: &cfg, sum: t, norm: t.norm(), bound: vdc }, &row)?;
        }
        Command::Lemma3 { k, x, nu } => {
            gate(cli, *k >= 4, &format!("k = {k}"))?;
            let sum = match nu {
                Some(nu) => lemma3_sum_with(*x, *k, *nu, Some(p))?,
                None => lemma3_sum(*x, *k)?,
            };
            match cli.format {
                None => emit_line(cli, &sum.total.to_decimal())?,
                Some(_) => {
                    let row = [
                        ("x", x.to_string()),
                        ("k", k.to_string()),
                        ("nu", sum.nu.to_string()),
                        ("value", sum.total.to_decimal()),
                        ("terms", sum.terms.to_string()),
                    ];
                    emit_record(cli, Format::Json, &sum, &row)?;
                }
            }
        }
        Command::Verify { level, inject_fault } => {
            let level = match level {
                LevelArg::Quick => verify::Level::Quick,
                LevelArg::Full => verify::Level::Full,
            };
            let report = verify::run(level, *inject_fault);
            let mut out = sink(cli)?;
            if cli.format != Some(Format::Json) {
                for c in &report.checks {
                    writeln!(out, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
                }
            }
            serde_json::to_writer(&mut out, &report)?;
            writeln!(out)?;
            out.flush()?;
            return Ok(if report.passed { 0 } else { 1 });
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoffs_floor_reals() {
        assert_eq!(parse_cutoff("9").unwrap(), Cutoff { value: 9, floored: false });
        assert_eq!(parse_cutoff("9.7").unwrap(), Cutoff { value: 9, floored: true });
        assert_eq!(parse_cutoff("1e3").unwrap(), Cutoff { value: 1000, floored: false });
        assert!(parse_cutoff("-1").is_err());
        assert!(parse_cutoff("nan").is_err());
    }

    #[test]
    fn arguments_parse() {
        let cli =
            Cli::try_parse_from(["sumpowers", "scan", "--k", "4", "--s", "2", "--x-min", "1024", "--x-max", "2048"])
                .unwrap();
        assert_eq!(cli.precision, 128);
        assert!(matches!(cli.command, Command::Scan { grid: GridKind::Dyadic, .. }));
        assert!(Cli::try_parse_from(["sumpowers", "fit"]).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::InvalidArgument(String::new())), 2);
        assert_eq!(exit_code(&Error::Audit(String::new())), 1);
        assert_eq!(exit_code(&Error::Precision { bound: 1.0, required: 0.1, precision: 64 }), 3);
    }
}
