//! Gamma and Beta at arbitrary precision.
//!
//! The argument is shifted up to `z = a + N` with `z` proportional to the
//! working precision, `ln Gamma(z)` is summed from the Stirling series, and
//! the shift is undone by dividing by `a (a+1) ... (a+N-1)`. With
//! `z >= wp/4` the series terms fall below `2^-wp` long before the series
//! starts to diverge. Results carry relative error at most `2^(-p+2)`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::precision::{PrecReal, GUARD_BITS};

/// Even-index Bernoulli numbers kept in the table: `B_2 .. B_{2 * MAX_TERMS}`.
const MAX_TERMS: usize = 160;

fn bernoulli_even() -> &'static [BigRational] {
    static TABLE: OnceLock<Vec<BigRational>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n_max = 2 * MAX_TERMS;
        // B_n = -1/(n+1) * sum_{j<n} C(n+1, j) B_j
        let mut b: Vec<BigRational> = Vec::with_capacity(n_max + 1);
        b.push(BigRational::one());
        for n in 1..=n_max {
            if n > 1 && n % 2 == 1 {
                b.push(BigRational::zero());
                continue;
            }
            let mut binom = BigInt::one(); // C(n+1, 0)
            let mut acc = BigRational::zero();
            for (j, bj) in b.iter().enumerate() {
                if !bj.is_zero() {
                    acc += BigRational::from_integer(binom.clone()) * bj;
                }
                binom = binom * BigInt::from(n + 1 - j) / BigInt::from(j + 1);
            }
            b.push(-acc / BigRational::from_integer(BigInt::from(n + 1)));
        }
        (1..=MAX_TERMS).map(|j| b[2 * j].clone()).collect()
    })
}

fn rational_to_prec(r: &BigRational, p: usize) -> PrecReal {
    PrecReal::from_bigint(r.numer(), p + 8).div(&PrecReal::from_bigint(r.denom(), p + 8)).with_precision(p)
}

/// `ln Gamma(z)` for large positive `z` from the Stirling series, or `None`
/// if the table runs out before the terms drop below `2^-wp`.
fn ln_gamma_stirling(z: &PrecReal, wp: usize) -> Result<Option<PrecReal>> {
    let half = PrecReal::ratio(1, 2, wp);
    let two_pi = PrecReal::pi(wp).mul_u64(2);
    let mut acc = z.sub(&half).mul(&z.ln()?).sub(z).add(&half.mul(&two_pi.ln()?));
    let tol_exp = -(wp as f64) - 4.0;
    let scale = acc.log2_abs().unwrap_or(0.0).max(0.0);
    let z_inv = PrecReal::one(wp).div(z);
    let z_inv2 = z_inv.mul(&z_inv);
    let mut zpow = z_inv; // z^-(2j-1)
    for (idx, b) in bernoulli_even().iter().enumerate() {
        let j = (idx + 1) as u64;
        let coeff = rational_to_prec(b, wp).div_u64(2 * j * (2 * j - 1));
        let term = coeff.mul(&zpow);
        acc = acc.add(&term);
        match term.log2_abs() {
            Some(l) if l > tol_exp + scale => {}
            _ => return Ok(Some(acc)),
        }
        zpow = zpow.mul(&z_inv2);
    }
    Ok(None)
}

/// `Gamma(a)` for real `a > 0`, rounded to `p` bits.
pub fn gamma_hp(a: &PrecReal, p: usize) -> Result<PrecReal> {
    if !a.is_positive() {
        return Err(Error::Domain(format!("Gamma evaluated at nonpositive argument {a}")));
    }
    let wp = p.max(a.precision()) + GUARD_BITS + 8;
    let a = a.with_precision(wp);
    let mut target = (wp / 4).max(16) as u64;
    loop {
        let a_f = a.to_f64();
        let shift = if a_f >= target as f64 { 0 } else { (target as f64 - a_f).ceil() as u64 };
        let z = a.add(&PrecReal::from_u64(shift, wp));
        if let Some(lg) = ln_gamma_stirling(&z, wp)? {
            let mut prod = PrecReal::one(wp);
            for i in 0..shift {
                prod = prod.mul(&a.add(&PrecReal::from_u64(i, wp)));
            }
            return Ok(lg.exp().div(&prod).with_precision(p));
        }
        target *= 2;
    }
}

/// `Gamma(num / den)`, with the argument itself formed at working precision.
pub fn gamma_ratio(num: u64, den: u64, p: usize) -> Result<PrecReal> {
    if den == 0 {
        return Err(Error::InvalidArgument("zero denominator".into()));
    }
    let wp = p + GUARD_BITS + 8;
    let a = PrecReal::from_u64(num, wp).div(&PrecReal::from_u64(den, wp));
    gamma_hp(&a, p)
}

/// `B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)`.
pub fn beta_hp(a: &PrecReal, b: &PrecReal, p: usize) -> Result<PrecReal> {
    let wp = p + 8;
    let ga = gamma_hp(a, wp)?;
    let gb = gamma_hp(b, wp)?;
    let gab = gamma_hp(&a.with_precision(wp + GUARD_BITS).add(&b.with_precision(wp + GUARD_BITS)), wp)?;
    Ok(ga.mul(&gb).div(&gab).with_precision(p))
}
