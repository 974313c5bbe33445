//! The exponential sums `T(M, h) = sum_{M < m <= M'} e(h (x - m^k)^{1/k})`,
//! their second-derivative bound, and the cancellation sum
//! `sum_{2 m^k <= x} B1((x - m^k)^{1/k})` split into dyadic blocks.
//!
//! Cutoffs `x` are `f64` values in `(1, 2^53)`. Integer ranges are derived
//! with exact integer arithmetic, so the largest summation index
//! `floor((x/2)^{1/k})` is never off by one.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::kth_root_u64;
use crate::precision::PrecReal;
use crate::sawtooth::b1_hp;

/// Largest admissible cutoff; every integer below it is an exact `f64`.
pub const MAX_X: f64 = 9_007_199_254_740_992.0;

/// Required absolute accuracy of a phase modulo 1.
pub const PHASE_TOLERANCE: f64 = 1e-6;

/// Samples of `|f''|` taken per block by [`vdc_bound`].
pub const ENVELOPE_SAMPLES: usize = 65;

/// Relative slack allowed in the envelope comparison for `f64` rounding.
const ENVELOPE_SLACK: f64 = 1e-12;

fn check_x(x: f64, k: u32) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("exponent k must be >= 2, got {k}")));
    }
    if !(x > 1.0 && x < MAX_X) {
        return Err(Error::InvalidArgument(format!("cutoff x must lie in (1, 2^53), got {x}")));
    }
    Ok(())
}

fn bits(v: f64) -> usize {
    if v < 1.0 {
        1
    } else {
        v.log2().floor() as usize + 1
    }
}

/// `bits(x) (1 + 1/k) + bits(h) + 40`: enough for `h (x - m^k)^{1/k}` to be
/// known modulo 1 far below [`PHASE_TOLERANCE`] even where the root is
/// closest to an integer.
pub fn phase_precision(x: f64, k: u32, h: i64) -> usize {
    let bx = bits(x) as f64;
    (bx * (1.0 + 1.0 / f64::from(k))).ceil() as usize + bits(h.unsigned_abs() as f64) + 40
}

/// `(x/2)^{1/k}` and the largest integer `m` with `2 m^k <= x`.
pub fn block_cap(x: f64, k: u32) -> (f64, u64) {
    let m_max = kth_root_u64((x.floor() as u64) / 2, k);
    let exact = u128::from(m_max).checked_pow(k).is_some_and(|p| (2 * p) as f64 == x);
    let cap = if exact { m_max as f64 } else { (x / 2.0).powf(1.0 / f64::from(k)) };
    (cap, m_max)
}

/// `x^{3/(2k^2)}`.
pub fn default_big_h(x: f64, k: u32) -> f64 {
    let k = f64::from(k);
    x.powf(3.0 / (2.0 * k * k))
}

/// `x^{(k-1)/k^2}`.
pub fn default_nu(x: f64, k: u32) -> f64 {
    let k = f64::from(k);
    x.powf((k - 1.0) / (k * k))
}

/// Open interval `(1/k^2, (k-2)/k^2)` of admissible exponents `A` in `H = x^A`.
pub fn admissible_h_exponents(k: u32) -> (f64, f64) {
    let k2 = f64::from(k * k);
    (1.0 / k2, (f64::from(k) - 2.0) / k2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexVal {
    pub re: f64,
    pub im: f64,
}

impl ComplexVal {
    pub const ZERO: ComplexVal = ComplexVal { re: 0.0, im: 0.0 };

    /// `e(t) = exp(2 pi i t)`.
    pub fn unit(t: f64) -> Self {
        let (s, c) = (2.0 * std::f64::consts::PI * t).sin_cos();
        Self { re: c, im: s }
    }

    pub fn norm(&self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re, im: -self.im }
    }
}

impl std::ops::Add for ComplexVal {
    type Output = ComplexVal;

    fn add(self, rhs: ComplexVal) -> ComplexVal {
        ComplexVal { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

/// One block `(M, M']` of the sum together with its frequency and truncation
/// parameters.
#[derive(Debug, Clone, Serialize)]
pub struct ExpSumConfig {
    pub x: f64,
    pub k: u32,
    pub m: f64,
    /// `min(2M, (x/2)^{1/k})`.
    pub m_prime: f64,
    pub h: i64,
    pub big_h: f64,
    pub nu: f64,
    /// Working precision for phases.
    pub precision: usize,
    m_max: u64,
    upper_is_cap: bool,
}

impl ExpSumConfig {
    /// Block starting at `M` with frequency `h`; `H`, `nu` and the precision
    /// take their defaults.
    pub fn new(x: f64, k: u32, m: f64, h: i64) -> Result<Self> {
        check_x(x, k)?;
        let (cap, m_max) = block_cap(x, k);
        if !(m > 0.0 && m <= cap) {
            return Err(Error::InvalidArgument(format!("block start M = {m} outside (0, {cap}]")));
        }
        let upper_is_cap = 2.0 * m >= cap;
        Ok(Self {
            x,
            k,
            m,
            m_prime: if upper_is_cap { cap } else { 2.0 * m },
            h,
            big_h: default_big_h(x, k),
            nu: default_nu(x, k),
            precision: phase_precision(x, k, h),
            m_max,
            upper_is_cap,
        })
    }

    /// `H = x^A`, with `A` strictly inside [`admissible_h_exponents`].
    pub fn with_h_exponent(mut self, a: f64) -> Result<Self> {
        let (lo, hi) = admissible_h_exponents(self.k);
        if !(a > lo && a < hi) {
            return Err(Error::InvalidArgument(format!("H exponent {a} outside ({lo}, {hi}) for k = {}", self.k)));
        }
        self.big_h = self.x.powf(a);
        Ok(self)
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_precision(mut self, p: usize) -> Self {
        self.precision = p;
        self
    }

    /// First and last integer in `(M, M']`; empty when `first > last`.
    pub fn integer_range(&self) -> (u64, u64) {
        let first = self.m.floor() as u64 + 1;
        let last = if self.upper_is_cap { self.m_max } else { (self.m_prime.floor() as u64).min(self.m_max) };
        (first, last)
    }
}

/// `(x - m^k)^{1/k}` at `p` bits, plus the exact value when it is an integer.
struct Root {
    value: PrecReal,
    integer: Option<u64>,
}

fn root_hp(x: f64, k: u32, m: u64, p: usize) -> Root {
    let mk = u128::from(m).checked_pow(k).expect("m^k <= x/2 < 2^53");
    if x.fract() == 0.0 {
        let y = x as u64 - mk as u64;
        let r = kth_root_u64(y, k);
        if u128::from(r).checked_pow(k) == Some(u128::from(y)) {
            return Root { value: PrecReal::from_u64(r, p), integer: Some(r) };
        }
        return Root {
            value: PrecReal::from_u64(y, p.max(64)).kth_root(k).expect("positive").with_precision(p),
            integer: None,
        };
    }
    // x carries at most 53 significant bits above 2^-52 x; 128 bits hold x - m^k exactly
    let wide = p.max(128);
    let y = PrecReal::from_f64(x, wide).sub(&PrecReal::from_u128(mk, wide));
    Root { value: y.kth_root(k).expect("positive").with_precision(p), integer: None }
}

fn check_phase(theta_abs: f64, p: usize) -> Result<()> {
    let bound = theta_abs * 2f64.powi(-(p as i32) + 2);
    if bound > PHASE_TOLERANCE {
        return Err(Error::Precision { bound, required: PHASE_TOLERANCE, precision: p });
    }
    Ok(())
}

/// Direct evaluation of `T(M, h)` in ascending `m`.
pub fn t_sum(cfg: &ExpSumConfig) -> Result<ComplexVal> {
    let (first, last) = cfg.integer_range();
    if first > last {
        return Ok(ComplexVal::ZERO);
    }
    if cfg.h == 0 {
        return Ok(ComplexVal { re: (last - first + 1) as f64, im: 0.0 });
    }
    let p = cfg.precision;
    check_phase(cfg.x.powf(1.0 / f64::from(cfg.k)) * cfg.h.unsigned_abs() as f64, p)?;
    let h = PrecReal::from_i64(cfg.h, p);
    let mut acc = ComplexVal::ZERO;
    for m in first..=last {
        let root = root_hp(cfg.x, cfg.k, m, p);
        let term = match root.integer {
            Some(_) => ComplexVal { re: 1.0, im: 0.0 },
            None => ComplexVal::unit(root.value.mul(&h).frac_floor().to_f64()),
        };
        acc = acc + term;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VdcBound {
    /// `(k-1) |h| x^{1/k - 1} M^{k-2}`.
    pub mu: f64,
    /// `2^{k - 1/k}`.
    pub eta: f64,
    /// `mu^{-1/2} + (M' - M) eta mu^{1/2}`.
    pub bound: f64,
    /// Smallest and largest sampled `|f''| / mu`.
    pub ratio_min: f64,
    pub ratio_max: f64,
}

/// `|f''(a)|` for `f(a) = h (x - a^k)^{1/k}`.
pub fn phase_second_derivative(x: f64, k: u32, h: i64, a: f64) -> f64 {
    let kf = f64::from(k);
    (kf - 1.0) * h.unsigned_abs() as f64 * x * a.powi(k as i32 - 2) * (x - a.powi(k as i32)).powf(1.0 / kf - 2.0)
}

/// Second-derivative bound for `T(M, h)`, after confirming on
/// [`ENVELOPE_SAMPLES`] points of `[M, M']` that `mu <= |f''| <= eta mu`.
pub fn vdc_bound(cfg: &ExpSumConfig) -> Result<VdcBound> {
    if cfg.h == 0 {
        return Err(Error::InvalidArgument("second-derivative bound needs h != 0".into()));
    }
    let kf = f64::from(cfg.k);
    let mu = (kf - 1.0) * cfg.h.unsigned_abs() as f64 * cfg.x.powf(1.0 / kf - 1.0) * cfg.m.powi(cfg.k as i32 - 2);
    let eta = 2f64.powf(kf - 1.0 / kf);
    let bound = mu.powf(-0.5) + (cfg.m_prime - cfg.m) * eta * mu.sqrt();
    let (lower, upper) = (mu * (1.0 - ENVELOPE_SLACK), eta * mu * (1.0 + ENVELOPE_SLACK));
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = 0.0f64;
    for i in 0..ENVELOPE_SAMPLES {
        let t = i as f64 / (ENVELOPE_SAMPLES - 1) as f64;
        let alpha = cfg.m + t * (cfg.m_prime - cfg.m);
        let value = phase_second_derivative(cfg.x, cfg.k, cfg.h, alpha);
        if !(value >= lower && value <= upper) {
            return Err(Error::EnvelopeViolation { alpha, value, lower: mu, upper: eta * mu });
        }
        ratio_min = ratio_min.min(value / mu);
        ratio_max = ratio_max.max(value / mu);
    }
    Ok(VdcBound { mu, eta, bound, ratio_min, ratio_max })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicCover {
    /// `(x/2)^{1/k}`.
    pub cap: f64,
    /// `floor((x/2)^{1/k})`, the last summation index.
    pub m_max: u64,
    /// The initial segment is `(0, nu]`.
    pub nu: f64,
    /// `(M, M')` with `M = nu 2^j < cap` and `M' = min(2M, cap)`, ascending.
    pub blocks: Vec<(f64, f64)>,
}

pub fn dyadic_blocks(x: f64, k: u32, nu: f64) -> Result<DyadicCover> {
    check_x(x, k)?;
    let (cap, m_max) = block_cap(x, k);
    if !(nu >= 1.0 && nu <= cap) {
        return Err(Error::InvalidArgument(format!("nu = {nu} outside [1, {cap}]")));
    }
    let mut blocks = Vec::new();
    let mut m = nu;
    while m < cap {
        blocks.push((m, (2.0 * m).min(cap)));
        m *= 2.0;
    }
    Ok(DyadicCover { cap, m_max, nu, blocks })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockSum {
    pub m: f64,
    pub m_prime: f64,
    pub first: u64,
    pub last: u64,
    #[serde(serialize_with = "ser_f64_of")]
    pub sum: PrecReal,
}

fn ser_f64_of<S: serde::Serializer>(v: &PrecReal, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(v.to_f64())
}

/// The cancellation sum, with its decomposition. Every partial sum is an
/// exact sum of the individually rounded `B1` values, so
/// `total == initial + sum(blocks)` holds exactly.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma3Sum {
    pub x: f64,
    pub k: u32,
    pub nu: f64,
    pub precision: usize,
    #[serde(serialize_with = "ser_f64_of")]
    pub initial: PrecReal,
    pub blocks: Vec<BlockSum>,
    #[serde(serialize_with = "ser_f64_of")]
    pub total: PrecReal,
    pub terms: u64,
    /// Terms whose root is an exact integer (`B1 = -1/2`).
    pub integer_roots: u64,
}

impl Lemma3Sum {
    pub fn value(&self) -> f64 {
        self.total.to_f64()
    }
}

struct RangeSum {
    sum: PrecReal,
    integer_roots: u64,
}

fn b1_range(x: f64, k: u32, first: u64, last: u64, p: usize) -> RangeSum {
    let mut sum = PrecReal::zero(p);
    let mut integer_roots = 0;
    for m in first..=last {
        let root = root_hp(x, k, m, p);
        let term = match root.integer {
            Some(_) => {
                integer_roots += 1;
                PrecReal::ratio(-1, 2, p)
            }
            None => b1_hp(&root.value),
        };
        sum = sum.add_exact(&term);
    }
    RangeSum { sum, integer_roots }
}

/// `sum_{2 m^k <= x} B1((x - m^k)^{1/k})` with the default `nu`.
pub fn lemma3_sum(x: f64, k: u32) -> Result<Lemma3Sum> {
    check_x(x, k)?;
    let (cap, _) = block_cap(x, k);
    lemma3_sum_with(x, k, default_nu(x, k).min(cap.max(1.0)), None)
}

/// As [`lemma3_sum`] with an explicit `nu` and optional working precision.
pub fn lemma3_sum_with(x: f64, k: u32, nu: f64, precision: Option<usize>) -> Result<Lemma3Sum> {
    check_x(x, k)?;
    let p = precision.unwrap_or_else(|| phase_precision(x, k, 1));
    check_phase(x.powf(1.0 / f64::from(k)), p)?;
    let (cap, m_max) = block_cap(x, k);
    if m_max == 0 {
        let zero = PrecReal::zero(p);
        return Ok(Lemma3Sum {
            x,
            k,
            nu,
            precision: p,
            initial: zero.clone(),
            blocks: Vec::new(),
            total: zero,
            terms: 0,
            integer_roots: 0,
        });
    }
    let cover = dyadic_blocks(x, k, nu.min(cap))?;
    let init_last = (cover.nu.floor() as u64).min(m_max);
    let initial = b1_range(x, k, 1, init_last, p);

    let ranges: Vec<(f64, f64, u64, u64)> = cover
        .blocks
        .iter()
        .map(|&(m, m_prime)| {
            let cfg = ExpSumConfig::new(x, k, m, 1)?;
            let (first, last) = cfg.integer_range();
            Ok((m, m_prime, first, last))
        })
        .collect::<Result<_>>()?;
    let sums: Vec<RangeSum> = ranges.par_iter().map(|&(_, _, first, last)| b1_range(x, k, first, last, p)).collect();

    let mut total = initial.sum.clone();
    let mut integer_roots = initial.integer_roots;
    let mut blocks = Vec::with_capacity(sums.len());
    for ((m, m_prime, first, last), s) in ranges.into_iter().zip(sums) {
        total = total.add_exact(&s.sum);
        integer_roots += s.integer_roots;
        blocks.push(BlockSum { m, m_prime, first, last, sum: s.sum });
    }
    Ok(Lemma3Sum { x, k, nu: cover.nu, precision: p, initial: initial.sum, blocks, total, terms: m_max, integer_roots })
}
