//! Residuals of the asymptotic formulas against exact summatory values, and
//! power-law fits of their growth.
//!
//! The residual oscillates through zero, so growth is measured on the
//! largest `|residual|` inside each dyadic window `[2^j, 2^{j+1})` rather
//! than on raw values.

mod io;

pub use io::{read_csv, write_csv, write_json, write_tsv, ScanRow};

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{main_only_error_exponent, predicted_error_exponent, TwoTermModel};
use crate::error::{Error, Result};
use crate::exact::{summatory_direct_with, Counter, RecursiveCounter, TableOptions};
use crate::instance::Instance;
use crate::natcount::NatCount;
use crate::precision::{PrecReal, DEFAULT_PRECISION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Grid {
    /// `x_min 2^i`.
    Dyadic,
    /// `round(x_min r^i)`, duplicates removed.
    Geometric { ratio: f64 },
}

impl Grid {
    /// `r = 2^{1/n}`: `n` points per octave.
    pub fn per_octave(n: u32) -> Self {
        Grid::Geometric { ratio: 2f64.powf(1.0 / f64::from(n)) }
    }

    pub fn points(&self, x_min: u64, x_max: u64) -> Result<Vec<u64>> {
        if x_min < 2 || x_min >= x_max {
            return Err(Error::InvalidArgument(format!("grid needs 2 <= x_min < x_max, got [{x_min}, {x_max}]")));
        }
        let ratio = match *self {
            Grid::Dyadic => 2.0,
            Grid::Geometric { ratio } if ratio > 1.0 && ratio.is_finite() => ratio,
            Grid::Geometric { ratio } => {
                return Err(Error::InvalidArgument(format!("geometric ratio must exceed 1, got {ratio}")))
            }
        };
        let mut out: Vec<u64> = Vec::new();
        let base = x_min as f64;
        // powi carries ~1e-15 relative error per step; the slack keeps an exact x_max
        let limit = x_max as f64 * (1.0 + 1e-12);
        for i in 0i32.. {
            let v = base * ratio.powi(i);
            if v > limit {
                break;
            }
            let x = (v.round() as u64).min(x_max);
            if out.last() != Some(&x) {
                out.push(x);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub x: u64,
    pub exact: NatCount,
    #[serde(serialize_with = "ser_decimal")]
    pub main: PrecReal,
    #[serde(serialize_with = "ser_decimal")]
    pub second: PrecReal,
    #[serde(serialize_with = "ser_decimal")]
    pub two_term: PrecReal,
    /// `exact - (main - second)`.
    #[serde(serialize_with = "ser_decimal")]
    pub residual_two: PrecReal,
    /// `exact - main`.
    #[serde(serialize_with = "ser_decimal")]
    pub residual_main_only: PrecReal,
}

impl PartialEq for ScanRecord {
    fn eq(&self, o: &Self) -> bool {
        self.x == o.x
            && self.exact == o.exact
            && self.main == o.main
            && self.second == o.second
            && self.two_term == o.two_term
            && self.residual_two == o.residual_two
            && self.residual_main_only == o.residual_main_only
    }
}

fn ser_decimal<S: serde::Serializer>(v: &PrecReal, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&v.to_decimal())
}

impl ScanRecord {
    pub fn residual(&self, which: Which) -> &PrecReal {
        match which {
            Which::TwoTerm => &self.residual_two,
            Which::MainOnly => &self.residual_main_only,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditEntry {
    pub x: u64,
    pub fast: NatCount,
    pub direct: NatCount,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualScan {
    pub instance: Instance,
    pub grid: Grid,
    pub precision: usize,
    /// Set for instances outside the proved range; no claim attaches to them.
    pub exploratory: bool,
    pub audit: Vec<AuditEntry>,
    /// Ascending in `x`.
    pub records: Vec<ScanRecord>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub precision: usize,
    /// Budget for the table built by the audit.
    pub table: TableOptions,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { precision: DEFAULT_PRECISION, table: TableOptions::default() }
    }
}

/// Exact value at every grid point by splitting (`s = 2`) or recursion
/// (`s != 2`), each point independent.
fn exact_values(inst: Instance, xs: &[u64], counter: Counter) -> Result<Vec<NatCount>> {
    if inst.s() == 2 {
        return xs.par_iter().map(|&x| counter.summatory_split_s2(inst.k(), x)).collect();
    }
    xs.par_iter().map_init(|| RecursiveCounter::new(counter, inst.k()), |rc, &x| rc.summatory(inst.s(), x)).collect()
}

/// Residual records on `grid` over `[x_min, x_max]`.
pub fn scan(inst: Instance, x_min: u64, x_max: u64, grid: Grid, opts: &ScanOptions) -> Result<ResidualScan> {
    scan_with_counter(inst, x_min, x_max, grid, opts, Counter::default())
}

/// As [`scan`] with the fast exact path driven by `counter`; the audit
/// always uses the table.
pub fn scan_with_counter(
    inst: Instance,
    x_min: u64,
    x_max: u64,
    grid: Grid,
    opts: &ScanOptions,
    counter: Counter,
) -> Result<ResidualScan> {
    let xs = grid.points(x_min, x_max)?;
    let exact = exact_values(inst, &xs, counter)?;

    let mut audit = Vec::new();
    for (&x, fast) in xs.iter().zip(&exact).take(2) {
        let direct = summatory_direct_with(inst, x, &opts.table)?;
        if &direct != fast {
            return Err(Error::Audit(format!("{inst} at x = {x}: fast path {fast}, table {direct}")));
        }
        audit.push(AuditEntry { x, fast: fast.clone(), direct });
    }

    let p = opts.precision;
    let model = TwoTermModel::new(inst, p)?;
    let records = xs
        .par_iter()
        .zip(exact.into_par_iter())
        .map(|(&x, exact)| {
            let est = model.evaluate(&PrecReal::from_u64(x, p))?;
            let e = PrecReal::from_natcount(&exact, p);
            Ok(ScanRecord {
                x,
                residual_two: e.sub(&est.two_term_value),
                residual_main_only: e.sub(&est.main_term),
                exact,
                main: est.main_term,
                second: est.second_term,
                two_term: est.two_term_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualScan { instance: inst, grid, precision: p, exploratory: !inst.theorem_valid(), audit, records })
}

/// Scan of an instance with `s >= k + 2`, where no error exponent is claimed.
pub fn probe_beyond_theorem(k: u32, s: u32, x_max: u64, opts: &ScanOptions) -> Result<ResidualScan> {
    if s < k + 2 {
        return Err(Error::InvalidArgument(format!(
            "probe needs s >= k + 2; (k={k}, s={s}) belongs to an ordinary scan"
        )));
    }
    let inst = Instance::new(k, s)?;
    let mut out = scan(inst, 1 << 10, x_max, Grid::Dyadic, opts)?;
    out.exploratory = true;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    TwoTerm,
    MainOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowSup {
    /// Left end `2^j` of the window.
    pub x_window: u64,
    /// Grid point where the maximum is attained.
    pub x_at_sup: u64,
    pub sup: f64,
    pub points: usize,
}

/// Largest `|residual|` in every dyadic window that holds records. Windows
/// whose maximum is zero are dropped.
pub fn window_sup(scan: &ResidualScan, which: Which) -> Result<Vec<WindowSup>> {
    if scan.records.len() < 4 {
        return Err(Error::InvalidArgument(format!("window maxima need >= 4 records, got {}", scan.records.len())));
    }
    let values: Vec<(u64, f64)> = scan.records.iter().map(|r| (r.x, r.residual(which).abs().to_f64())).collect();
    Ok(window_sup_values(&values))
}

/// [`window_sup`] on raw `(x, |value|)` pairs with `x >= 1`.
pub fn window_sup_values(values: &[(u64, f64)]) -> Vec<WindowSup> {
    let mut out: Vec<WindowSup> = Vec::new();
    for &(x, v) in values {
        let window = 1u64 << (63 - x.leading_zeros());
        match out.last_mut() {
            Some(w) if w.x_window == window => {
                w.points += 1;
                if v > w.sup {
                    w.sup = v;
                    w.x_at_sup = x;
                }
            }
            _ => out.push(WindowSup { x_window: window, x_at_sup: x, sup: v, points: 1 }),
        }
    }
    out.retain(|w| {
        if w.sup > 0.0 {
            true
        } else {
            log::info!("dropping window at {} with zero maximum", w.x_window);
            false
        }
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    /// Largest `|log y - (intercept + slope log x)|`.
    pub max_abs_residual_of_fit: f64,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_exponent(points: &[(f64, f64)]) -> Result<ExponentFit> {
    if points.len() < 4 {
        return Err(Error::DegenerateFit(format!("need >= 4 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::DegenerateFit(format!("nonpositive or nonfinite point ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all x equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_abs_residual_of_fit = logs.iter().map(|p| (p.1 - intercept - slope * p.0).abs()).fold(0.0, f64::max);
    Ok(ExponentFit { slope, intercept, points_used: logs.len(), max_abs_residual_of_fit })
}

/// Fit of the window maxima of one residual column.
pub fn fit_windows(scan: &ResidualScan, which: Which) -> Result<ExponentFit> {
    let pts: Vec<(f64, f64)> = window_sup(scan, which)?.iter().map(|w| (w.x_window as f64, w.sup)).collect();
    fit_exponent(&pts)
}

#[derive(Debug, Clone, Serialize)]
pub struct SecondTermBenefit {
    pub slope_main_only: f64,
    pub slope_two_term: f64,
    #[serde(serialize_with = "ser_rational")]
    pub predicted_main_only: Rational64,
    #[serde(serialize_with = "ser_rational")]
    pub predicted_two_term: Rational64,
    pub fit_main_only: ExponentFit,
    pub fit_two_term: ExponentFit,
}

fn ser_rational<S: serde::Serializer>(v: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Fitted growth of both residual columns beside their predicted exponents.
pub fn second_term_benefit(inst: Instance, scan: &ResidualScan) -> Result<SecondTermBenefit> {
    if scan.instance != inst {
        return Err(Error::InvalidArgument(format!("scan is for {}, not {inst}", scan.instance)));
    }
    let fit_main_only = fit_windows(scan, Which::MainOnly)?;
    let fit_two_term = fit_windows(scan, Which::TwoTerm)?;
    Ok(SecondTermBenefit {
        slope_main_only: fit_main_only.slope,
        slope_two_term: fit_two_term.slope,
        predicted_main_only: main_only_error_exponent(inst),
        predicted_two_term: predicted_error_exponent(inst),
        fit_main_only,
        fit_two_term,
    })
}
