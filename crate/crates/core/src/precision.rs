//! Fixed-precision binary floating point on top of `astro-float`.
//!
//! A [`PrecReal`] carries its precision in bits. Binary operations produce the
//! larger of the two operand precisions and round to nearest-even, so a
//! single operation has relative error at most `2^-p`. Elementary functions
//! (`ln`, `exp`, powers) are evaluated with 32 guard bits and then rounded;
//! their relative error is within `2^(-p+1)` unless stated otherwise.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::natcount::NatCount;

pub const DEFAULT_PRECISION: usize = 128;
pub const MIN_PRECISION: usize = 53;
/// Extra bits carried through elementary functions before the final rounding.
pub const GUARD_BITS: usize = 32;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    // Per-thread constant cache (pi, ln 2, ...): no sharing across threads.
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Clone)]
pub struct PrecReal {
    value: BigFloat,
    precision: usize,
}

impl PrecReal {
    fn wrap(value: BigFloat, precision: usize) -> Self {
        Self { value, precision }
    }

    fn rounded(mut value: BigFloat, precision: usize) -> Self {
        // Only fails for NaN/Inf, which carry their own flavor.
        let _ = value.set_precision(precision, RM);
        Self { value, precision }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn zero(p: usize) -> Self {
        Self::wrap(BigFloat::from_u8(0, p), p)
    }

    pub fn one(p: usize) -> Self {
        Self::wrap(BigFloat::from_u8(1, p), p)
    }

    pub fn from_u64(v: u64, p: usize) -> Self {
        Self::rounded(BigFloat::from_u64(v, 64.max(p)), p)
    }

    pub fn from_i64(v: i64, p: usize) -> Self {
        Self::rounded(BigFloat::from_i64(v, 64.max(p)), p)
    }

    pub fn from_u128(v: u128, p: usize) -> Self {
        Self::rounded(BigFloat::from_u128(v, 128.max(p)), p)
    }

    /// Exact when `p >= 53`.
    pub fn from_f64(v: f64, p: usize) -> Self {
        Self::rounded(BigFloat::from_f64(v, 64.max(p)), p)
    }

    pub fn from_biguint(v: &BigUint, p: usize) -> Self {
        let digits = v.to_u64_digits();
        if digits.len() <= 2 {
            let lo = digits.first().copied().unwrap_or(0) as u128;
            let hi = digits.get(1).copied().unwrap_or(0) as u128;
            return Self::from_u128(hi << 64 | lo, p);
        }
        // little-endian words read as 0.m * 2^(64 len), normalized by the constructor
        let acc = BigFloat::from_words(&digits, Sign::Pos, (64 * digits.len()) as i32);
        Self::rounded(acc, p)
    }

    pub fn from_bigint(v: &BigInt, p: usize) -> Self {
        let mag = Self::from_biguint(v.magnitude(), p);
        if v.is_negative() {
            -mag
        } else {
            mag
        }
    }

    pub fn from_natcount(v: &NatCount, p: usize) -> Self {
        match v {
            NatCount::Small(s) => Self::from_u64(*s, p),
            NatCount::Big(b) => Self::from_biguint(b, p),
        }
    }

    /// `num / den` correctly rounded to `p` bits.
    pub fn ratio(num: i64, den: i64, p: usize) -> Self {
        assert!(den != 0, "zero denominator");
        let wp = p + GUARD_BITS;
        let n = BigFloat::from_i64(num, wp);
        let d = BigFloat::from_i64(den, wp);
        Self::rounded(n.div(&d, wp, RM), p)
    }

    pub fn pi(p: usize) -> Self {
        let v = with_consts(|cc| cc.pi(p + GUARD_BITS, RM));
        Self::rounded(v, p)
    }

    /// Parse a decimal literal such as `"3.14159"` or `"1.5e-7"`.
    pub fn parse(s: &str, p: usize) -> Result<Self> {
        let v = with_consts(|cc| BigFloat::parse(s.trim(), Radix::Dec, p, RM, cc));
        if v.is_nan() || v.is_inf() {
            return Err(Error::InvalidArgument(format!("not a finite real: {s:?}")));
        }
        Ok(Self::wrap(v, p))
    }

    /// Same value rounded to `p` bits.
    pub fn with_precision(&self, p: usize) -> Self {
        Self::rounded(self.value.clone(), p)
    }

    fn out_prec(&self, other: &Self) -> usize {
        self.precision.max(other.precision)
    }

    pub fn add(&self, other: &Self) -> Self {
        let p = self.out_prec(other);
        Self::wrap(self.value.add(&other.value, p, RM), p)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let p = self.out_prec(other);
        Self::wrap(self.value.sub(&other.value, p, RM), p)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let p = self.out_prec(other);
        Self::wrap(self.value.mul(&other.value, p, RM), p)
    }

    pub fn div(&self, other: &Self) -> Self {
        let p = self.out_prec(other);
        Self::wrap(self.value.div(&other.value, p, RM), p)
    }

    /// Sum with no rounding at all; the result precision grows as needed.
    pub fn add_exact(&self, other: &Self) -> Self {
        // astro-float's full-precision add drops the other operand when one is zero
        if self.is_zero() {
            return Self::wrap(other.value.clone(), self.out_prec(other));
        }
        if other.is_zero() {
            return Self::wrap(self.value.clone(), self.out_prec(other));
        }
        let v = self.value.add_full_prec(&other.value);
        let p = v.precision().unwrap_or(self.precision).max(self.out_prec(other));
        Self::wrap(v, p)
    }

    pub fn mul_u64(&self, m: u64) -> Self {
        self.mul(&Self::from_u64(m, self.precision))
    }

    pub fn div_u64(&self, d: u64) -> Self {
        self.div(&Self::from_u64(d, self.precision))
    }

    pub fn ln(&self) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::Domain(format!("logarithm of nonpositive value {self}")));
        }
        let wp = self.precision + GUARD_BITS;
        let v = with_consts(|cc| self.value.ln(wp, RM, cc));
        Ok(Self::rounded(v, self.precision))
    }

    pub fn exp(&self) -> Self {
        let wp = self.precision + GUARD_BITS;
        let v = with_consts(|cc| self.value.exp(wp, RM, cc));
        Self::rounded(v, self.precision)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Domain(format!("square root of negative value {self}")));
        }
        Ok(Self::rounded(self.value.sqrt(self.precision + GUARD_BITS, RM), self.precision))
    }

    pub fn powi(&self, n: usize) -> Self {
        Self::rounded(self.value.powi(n, self.precision + GUARD_BITS, RM), self.precision)
    }

    /// `self^(num/den)` for positive `self`, as `exp((num/den) ln self)` with
    /// the exponent kept exact until the final multiplication.
    pub fn pow_ratio(&self, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("zero exponent denominator".into()));
        }
        if num == 0 {
            return Ok(Self::one(self.precision));
        }
        // 1 ulp of the logarithm costs |ln x| ulps after exp; the guard bits cover it.
        let wp = self.precision + GUARD_BITS;
        let x = self.with_precision(wp);
        let ln = x.ln()?;
        let scaled = ln.mul(&Self::from_i64(num, wp)).div(&Self::from_i64(den, wp));
        Ok(scaled.exp().with_precision(self.precision))
    }

    /// Real k-th root of a positive value by Newton iteration from an f64 seed.
    pub fn kth_root(&self, k: u32) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Domain(format!("root of negative value {self}")));
        }
        if self.is_zero() || k == 1 {
            return Ok(self.clone());
        }
        let p = self.precision;
        let wp = p + 16;
        let seed = self.to_f64().powf(1.0 / f64::from(k));
        if !seed.is_finite() || seed == 0.0 {
            return self.pow_ratio(1, i64::from(k));
        }
        let a = self.with_precision(wp);
        let kk = Self::from_u64(u64::from(k), wp);
        let km1 = Self::from_u64(u64::from(k - 1), wp);
        let mut r = Self::from_f64(seed, wp);
        // the seed has ~50 good bits and each step doubles them
        let mut good = 48usize;
        loop {
            let rk1 = r.powi(k as usize - 1);
            r = km1.mul(&r).add(&a.div(&rk1)).div(&kk);
            good *= 2;
            if good > wp + 8 {
                break;
            }
        }
        Ok(r.with_precision(p))
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.value.abs(), self.precision)
    }

    pub fn floor(&self) -> Self {
        Self::wrap(self.value.floor(), self.precision)
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn frac_floor(&self) -> Self {
        let f = self.value.sub(&self.value.floor(), self.precision, RM);
        Self::wrap(f, self.precision)
    }

    pub fn is_integer(&self) -> bool {
        self.value.is_int()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.value.is_zero() && self.value.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.value.is_zero() && self.value.is_positive()
    }

    /// Nearest `f64` (up to one double rounding).
    pub fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_inf() {
            return if self.value.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let Some((words, _, sign, exp, _)) = self.value.as_raw_parts() else {
            return f64::NAN;
        };
        if self.value.is_zero() || words.is_empty() {
            return 0.0;
        }
        // value = 0.m * 2^exp with the top word normalized
        let hi = words[words.len() - 1] as f64;
        let lo = if words.len() > 1 { words[words.len() - 2] as f64 } else { 0.0 };
        let e = exp;
        let mag = hi * pow2(e - 64) + lo * pow2(e - 128);
        if sign == Sign::Neg {
            -mag
        } else {
            mag
        }
    }

    /// Relative difference `|self - other| / |other|`, as f64.
    pub fn relative_error_to(&self, other: &Self) -> f64 {
        let p = self.out_prec(other) + GUARD_BITS;
        let d = self.with_precision(p).sub(&other.with_precision(p)).abs();
        if other.is_zero() {
            return d.to_f64();
        }
        d.div(&other.with_precision(p).abs()).to_f64()
    }

    /// Base-2 logarithm of `|self|`, approximately; `None` for zero.
    pub fn log2_abs(&self) -> Option<f64> {
        if self.is_zero() {
            return None;
        }
        let (words, _, _, exp, _) = self.value.as_raw_parts()?;
        let hi = words[words.len() - 1] as f64 / pow2(64);
        Some(f64::from(exp) + hi.log2())
    }

    /// Decimal scientific notation with every significant digit the precision
    /// supports; [`PrecReal::parse`] at the same precision recovers the value.
    pub fn to_decimal(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        // The formatter emits about p*log10(2) digits, slightly too few to
        // round-trip; widening first (exactly) adds the missing digits.
        let wide = self.with_precision(self.precision + 64);
        with_consts(|cc| wide.value.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }

    pub fn inner(&self) -> &BigFloat {
        &self.value
    }
}

fn pow2(e: i32) -> f64 {
    if e < -1000 {
        2f64.powi(-1000) * 2f64.powi(e + 1000)
    } else {
        2f64.powi(e)
    }
}

impl PartialEq for PrecReal {
    fn eq(&self, other: &Self) -> bool {
        self.value.cmp(&other.value) == Some(0)
    }
}

impl PartialOrd for PrecReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.value.cmp(&other.value).map(|c| c.cmp(&0))
    }
}

impl fmt::Display for PrecReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal())
    }
}

impl fmt::Debug for PrecReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PrecReal({}, {} bits)", self.to_decimal(), self.precision)
    }
}

impl Neg for PrecReal {
    type Output = PrecReal;

    fn neg(self) -> PrecReal {
        Self::wrap(self.value.neg(), self.precision)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&PrecReal> for &PrecReal {
            type Output = PrecReal;

            fn $method(self, rhs: &PrecReal) -> PrecReal {
                PrecReal::$method(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn to_f64_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let v: f64 = rng.gen_range(-1e6..1e6) * 10f64.powi(rng.gen_range(-30..30));
            assert_eq!(PrecReal::from_f64(v, 128).to_f64(), v);
        }
        assert_eq!(PrecReal::zero(64).to_f64(), 0.0);
        assert_eq!(PrecReal::from_u64(u64::MAX, 128).to_f64(), u64::MAX as f64);
    }

    #[test]
    fn ratio_and_pi() {
        let third = PrecReal::ratio(1, 3, 200);
        let back = third.mul_u64(3);
        assert!(back.relative_error_to(&PrecReal::one(200)) < 2f64.powi(-198));
        let pi = PrecReal::pi(128);
        assert!((pi.to_f64() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn pow_ratio_matches_integer_powers() {
        let x = PrecReal::from_u64(1 << 20, 128);
        let r = x.pow_ratio(3, 4).unwrap();
        assert!(r.relative_error_to(&PrecReal::from_u64(1 << 15, 128)) < 2f64.powi(-126));
        assert_eq!(x.pow_ratio(0, 4).unwrap(), PrecReal::one(128));
    }

    #[test]
    fn kth_root_newton() {
        let y = PrecReal::from_u64(1_000_000 - 81, 160);
        let r = y.kth_root(4).unwrap();
        let back = r.powi(4);
        assert!(back.relative_error_to(&y) < 2f64.powi(-155));
        assert_eq!(PrecReal::from_u64(625, 100).kth_root(4).unwrap().to_f64(), 5.0);
    }

    #[test]
    fn floor_and_fraction() {
        let v = PrecReal::from_f64(-2.25, 64);
        assert_eq!(v.floor().to_f64(), -3.0);
        assert_eq!(v.frac_floor().to_f64(), 0.75);
        assert!(PrecReal::from_u64(7, 64).is_integer());
    }

    #[test]
    fn biguint_conversion() {
        let b = BigUint::from(3u32).pow(100);
        let v = PrecReal::from_biguint(&b, 256);
        let expect = PrecReal::from_u64(3, 256).powi(100);
        assert!(v.relative_error_to(&expect) < 2f64.powi(-250));
        let wide: BigUint = BigUint::from(7u32).pow(200) << 300;
        let a = PrecReal::from_biguint(&(&wide + 1u32), 1024);
        let b = PrecReal::from_biguint(&wide, 1024);
        assert_eq!(a.sub(&b), PrecReal::one(1024));
    }

    #[test]
    fn add_exact_keeps_every_bit() {
        let half = PrecReal::ratio(-1, 2, 80);
        assert_eq!(PrecReal::zero(80).add_exact(&half), half);
        assert_eq!(half.add_exact(&PrecReal::zero(80)), half);
        let tiny = PrecReal::one(64).div(&PrecReal::from_u128(1u128 << 100, 64));
        let big = PrecReal::from_u64(1 << 40, 64);
        let sum = big.add_exact(&tiny);
        assert_eq!(sum.sub(&big.with_precision(sum.precision())), tiny);
    }

    #[test]
    fn decimal_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in [53, 64, 128, 200] {
            for _ in 0..200 {
                let v =
                    PrecReal::from_f64(rng.gen_range(-1e9..1e9), p).div(&PrecReal::from_u64(rng.gen_range(1..1000), p));
                let s = v.to_decimal();
                let back = PrecReal::parse(&s, p).unwrap();
                assert_eq!(back, v, "{s} at {p} bits");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(PrecReal::from_i64(-1, 64).ln().is_err());
        assert!(PrecReal::zero(64).ln().is_err());
        assert!(PrecReal::from_i64(-4, 64).sqrt().is_err());
        assert!(PrecReal::parse("abc", 64).is_err());
    }
}
