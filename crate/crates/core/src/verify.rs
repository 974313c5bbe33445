//! Self-checks: exact cross-algorithm agreement, special-function identities,
//! truncation bounds and an end-to-end scan. Each check reports a named
//! pass/fail line; the suite passes only if every check does.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::asymptotics::{beta_gamma_check, gamma_hp};
use crate::error::Result;
use crate::exact::{build_table, Counter, RecursiveCounter, RootFn};
use crate::instance::Instance;
use crate::natcount::NatCount;
use crate::precision::PrecReal;
use crate::residual::{fit_exponent, scan_with_counter, Grid, ScanOptions};
use crate::sawtooth::{b1_fourier_remainder, dist_to_nearest_int};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub fault_injected: bool,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
}

/// First disagreement found by [`oracle_equivalence`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    /// The algorithm that disagreed with the table.
    pub algorithm: &'static str,
    pub k: u32,
    pub s: u32,
    pub x: u64,
    pub expected: NatCount,
    pub got: NatCount,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub comparisons: u64,
    pub mismatch: Option<Mismatch>,
}

/// Compares table sums with the recursive counter (and the splitting
/// identity when `s = 2`) at every `1 <= x <= x_max`, stopping at the first
/// disagreement.
pub fn oracle_equivalence(
    ks: std::ops::RangeInclusive<u32>,
    ss: std::ops::RangeInclusive<u32>,
    x_max: u64,
    counter: Counter,
) -> Result<OracleReport> {
    let mut comparisons = 0;
    for k in ks {
        for s in ss.clone() {
            let inst = Instance::new(k, s)?;
            let direct = build_table(inst, x_max)?.cumulative();
            let mut rec = RecursiveCounter::new(counter, k);
            for x in 1..=x_max {
                let expected = &direct[x as usize];
                let mut check = |algorithm: &'static str, got: NatCount| {
                    comparisons += 1;
                    (&got != expected).then(|| Mismatch { algorithm, k, s, x, expected: expected.clone(), got })
                };
                if s == 2 {
                    if let Some(m) = check("summatory_split_s2", counter.summatory_split_s2(k, x)?) {
                        return Ok(OracleReport { comparisons, mismatch: Some(m) });
                    }
                }
                if let Some(m) = check("summatory_recursive", rec.summatory(s, x)?) {
                    return Ok(OracleReport { comparisons, mismatch: Some(m) });
                }
            }
        }
    }
    Ok(OracleReport { comparisons, mismatch: None })
}

/// Integer root that is one too small at exact k-th powers.
pub fn faulty_root(n: u64, k: u32) -> u64 {
    let r = crate::exact::kth_root_u64(n, k);
    if r > 0 && u128::from(r).checked_pow(k) == Some(u128::from(n)) {
        r - 1
    } else {
        r
    }
}

pub const FAULTY_ROOT: RootFn = faulty_root;

fn check(name: &str, outcome: Result<(bool, String)>) -> CheckResult {
    match outcome {
        Ok((passed, detail)) => CheckResult { name: name.to_string(), passed, detail },
        Err(e) => CheckResult { name: name.to_string(), passed: false, detail: format!("error: {e}") },
    }
}

fn oracle_check(x_max: u64, counter: Counter) -> Result<(bool, String)> {
    let r = oracle_equivalence(2..=5, 2..=5, x_max, counter)?;
    Ok(match r.mismatch {
        None => (true, format!("{} comparisons up to x = {x_max}", r.comparisons)),
        Some(m) => (
            false,
            format!(
                "{} disagrees with the table at (k={}, s={}, x={}): {} vs {}",
                m.algorithm, m.k, m.s, m.x, m.got, m.expected
            ),
        ),
    })
}

fn identity_check() -> Result<(bool, String)> {
    let bar = 2f64.powi(-120);
    let mut worst = 0.0f64;
    for k in 2..=10 {
        for s in 1..=k + 1 {
            worst = worst.max(beta_gamma_check(k, s, 128)?.to_f64());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_rec = 0.0f64;
    for _ in 0..100 {
        let a = PrecReal::from_f64(rng.gen_range(1e-3..20.0), 128);
        let lhs = gamma_hp(&a.add(&PrecReal::one(128)), 128)?;
        let rhs = a.mul(&gamma_hp(&a, 128)?);
        worst_rec = worst_rec.max(lhs.relative_error_to(&rhs));
    }
    let half = gamma_hp(&PrecReal::ratio(1, 2, 128), 128)?;
    let pi_err = half.mul(&half).relative_error_to(&PrecReal::pi(128));
    let passed = worst < bar && worst_rec < bar && pi_err < bar;
    Ok((passed, format!("beta/gamma {worst:.2e}, recurrence {worst_rec:.2e}, gamma(1/2)^2 {pi_err:.2e}")))
}

fn fourier_check() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 200 {
        let alpha: f64 = rng.gen_range(-100.0..100.0);
        if dist_to_nearest_int(alpha) < 1e-3 {
            continue;
        }
        n += 1;
        for h in [10.0, 100.0, 1000.0] {
            let t = b1_fourier_remainder(alpha, h)?;
            worst = worst.max(t.remainder / t.bound);
        }
    }
    Ok((worst <= 5.0, format!("largest remainder/bound {worst:.3}")))
}

fn fit_check() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for slope in [0.1875, 0.25] {
        let pts: Vec<(f64, f64)> =
            (0..10).map(|i| 10f64.powf(i as f64 * 6.0 / 9.0)).map(|x| (x, x.powf(slope))).collect();
        worst = worst.max((fit_exponent(&pts)?.slope - slope).abs());
    }
    Ok((worst < 1e-6, format!("largest slope error {worst:.2e}")))
}

fn scan_check(counter: Counter) -> Result<(bool, String)> {
    let inst = Instance::new(4, 2)?;
    let s = scan_with_counter(inst, 1 << 10, 1 << 20, Grid::Dyadic, &ScanOptions::default(), counter)?;
    Ok((
        s.records.len() == 11,
        format!("{} records, audit at x = {:?}", s.records.len(), s.audit.iter().map(|a| a.x).collect::<Vec<_>>()),
    ))
}

/// Runs the suite. With `inject_fault` the exact counters use
/// [`faulty_root`], which the cross-checks must detect.
pub fn run(level: Level, inject_fault: bool) -> VerifyReport {
    let counter = if inject_fault { Counter::with_root(FAULTY_ROOT) } else { Counter::default() };
    let oracle_x = match level {
        Level::Quick => 2_000,
        Level::Full => 10_000,
    };
    let mut checks = vec![
        check("exact oracle equivalence", oracle_check(oracle_x, counter)),
        check("gamma and beta identities", identity_check()),
        check("fourier truncation of b1", fourier_check()),
        check("synthetic exponent fit", fit_check()),
    ];
    if level == Level::Full {
        checks.push(check("scan k=4 s=2 to 2^20", scan_check(counter)));
    }
    let passed = checks.iter().all(|c| c.passed);
    VerifyReport { level, fault_injected: inject_fault, checks, passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn faulty_root_is_off_at_powers_only() {
        assert_eq!(faulty_root(16, 4), 1);
        assert_eq!(faulty_root(17, 4), 2);
        assert_eq!(faulty_root(15, 4), 1);
        assert_eq!(faulty_root(0, 3), 0);
    }

    #[test]
    fn oracle_agrees_and_fault_is_named() {
        let ok = oracle_equivalence(2..=3, 2..=3, 300, Counter::default()).unwrap();
        assert!(ok.mismatch.is_none());
        let bad = oracle_equivalence(2..=3, 2..=3, 300, Counter::with_root(FAULTY_ROOT)).unwrap();
        assert_eq!(bad.mismatch.unwrap().algorithm, "summatory_split_s2");
    }

    #[test]
    fn quick_suite() {
        let r = run(Level::Quick, false);
        assert!(r.passed, "{:#?}", r.checks);
        let r = run(Level::Quick, true);
        assert!(!r.passed);
        assert!(r.checks[0].detail.contains("summatory_split_s2"));
    }
}
