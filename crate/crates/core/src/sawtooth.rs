//! Periodic Bernoulli functions and the truncated Fourier series of `B1`.
//!
//! `B1(a) = a - floor(a) - 1/2` takes the value `-1/2` at integers (the left
//! limit is `+1/2`). `B2` is its antiderivative vanishing at integers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::precision::PrecReal;

/// Fractional part in `[0, 1)`.
fn frac(alpha: f64) -> f64 {
    let f = alpha - alpha.floor();
    // alpha slightly below an integer can round up to exactly 1
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

pub fn b1(alpha: f64) -> f64 {
    frac(alpha) - 0.5
}

pub fn b2(alpha: f64) -> f64 {
    let f = frac(alpha);
    (f * f - f) / 2.0
}

/// `B1` of a high-precision argument, rounded to the argument's precision.
pub fn b1_hp(alpha: &PrecReal) -> PrecReal {
    alpha.frac_floor().sub(&PrecReal::ratio(1, 2, alpha.precision()))
}

/// Distance from `alpha` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_nearest_int(alpha: f64) -> f64 {
    let f = frac(alpha);
    f.min(1.0 - f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SawtoothValue {
    pub alpha: f64,
    pub b1: f64,
    pub b2: f64,
    /// `||alpha||`.
    pub dist: f64,
}

impl SawtoothValue {
    pub fn at(alpha: f64) -> Self {
        Self { alpha, b1: b1(alpha), b2: b2(alpha), dist: dist_to_nearest_int(alpha) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierTruncation {
    /// `-sum_{0 < |h| <= H} e(h alpha) / (2 pi i h)`.
    pub approx: f64,
    /// `min(1, 1/(H ||alpha||))`, equal to 1 when `||alpha|| = 0`.
    pub bound: f64,
    /// `|B1(alpha) - approx|`.
    pub remainder: f64,
}

/// Partial Fourier sum of `B1` over `0 < |h| <= H`. Conjugate pairs combine
/// to `-sum_{h=1}^{floor H} sin(2 pi h alpha) / (pi h)`.
pub fn b1_fourier_remainder(alpha: f64, big_h: f64) -> Result<FourierTruncation> {
    if !(big_h >= 2.0 && big_h.is_finite()) {
        return Err(Error::InvalidArgument(format!("truncation H must be finite and >= 2, got {big_h}")));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
    }
    let f = frac(alpha);
    let terms = big_h.floor() as u64;
    let two_pi_f = 2.0 * std::f64::consts::PI * f;
    let mut approx = 0.0;
    for h in (1..=terms).rev() {
        let hf = h as f64;
        approx -= (two_pi_f * hf).sin() / (std::f64::consts::PI * hf);
    }
    let dist = f.min(1.0 - f);
    let bound = if dist == 0.0 { 1.0 } else { (1.0 / (big_h * dist)).min(1.0) };
    Ok(FourierTruncation { approx, bound, remainder: (b1(alpha) - approx).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::tanh_sinh;
    use proptest::prelude::*;

    #[test]
    fn b1_values() {
        assert_eq!(b1(0.5), 0.0);
        assert_eq!(b1(3.75), 0.25);
        assert_eq!(b1(7.0), -0.5);
        assert_eq!(b1(-0.25), 0.25);
        assert_eq!(b1(-1e-30), -0.5);
    }

    #[test]
    fn b2_values() {
        assert_eq!(b2(0.0), 0.0);
        assert_eq!(b2(1.0), 0.0);
        assert_eq!(b2(0.5), -0.125);
    }

    #[test]
    fn b2_is_integral_of_b1() {
        // b1 is smooth on each unit interval; integrate piecewise
        let mut acc = 0.0;
        let mut prev = 0.0;
        for i in 1..=20 {
            let a = i as f64 * 0.25;
            // nodes never touch the endpoints, so the jump at integers is invisible
            acc += tanh_sinh(|t, _| b1(t), prev, a, 1e-14).unwrap().value;
            prev = a;
            assert!((acc - b2(a)).abs() < 1e-12, "a={a}: {acc} vs {}", b2(a));
        }
    }

    #[test]
    fn fourier_at_integers_and_half() {
        let t = b1_fourier_remainder(3.0, 50.0).unwrap();
        assert!(t.approx.abs() < 1e-12);
        assert_eq!(t.bound, 1.0);
        assert!((t.remainder - 0.5).abs() < 1e-12);
        let t = b1_fourier_remainder(0.5, 100.0).unwrap();
        assert!(t.approx.abs() < 1e-12 && t.remainder < 1e-12);
    }

    #[test]
    fn fourier_at_three_tenths() {
        let t = b1_fourier_remainder(0.3, 1e4).unwrap();
        assert!(t.remainder <= 5.0 * t.bound, "{t:?}");
        assert!((t.bound - 1.0 / 3000.0).abs() < 1e-15);
    }

    #[test]
    fn fourier_converges_in_h() {
        for alpha in [0.1, 0.137, 0.29, 0.5, 0.71, 0.9] {
            let mut last = f64::INFINITY;
            for h in [10.0, 1e2, 1e3, 1e4] {
                let t = b1_fourier_remainder(alpha, h).unwrap();
                // 1e-12 absorbs rounding noise where the series is exact (alpha = 1/2)
                assert!(t.remainder <= 2.0 * last + 1e-12, "alpha={alpha} H={h}");
                assert!(t.remainder <= 5.0 * t.bound);
                last = t.remainder;
            }
        }
    }

    #[test]
    fn fourier_rejects_small_h() {
        assert!(b1_fourier_remainder(0.3, 1.5).is_err());
        assert!(b1_fourier_remainder(f64::NAN, 10.0).is_err());
    }

    #[test]
    fn b1_hp_matches() {
        let a = PrecReal::parse("12.375", 128).unwrap();
        assert_eq!(b1_hp(&a).to_f64(), -0.125);
        assert_eq!(b1_hp(&PrecReal::from_u64(9, 128)).to_f64(), -0.5);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn periodic(alpha in -1e6f64..1e6) {
            let shifted = alpha + 1.0;
            // the shift itself rounds, so compare with the rounding of alpha's offset
            prop_assert!((b1(shifted) - b1(alpha)).abs() < 1e-9 || (b1(shifted) - b1(alpha)).abs() > 1.0 - 1e-9);
            prop_assert!((b2(shifted) - b2(alpha)).abs() < 1e-9);
        }

        #[test]
        fn ranges(alpha in -1e6f64..1e6) {
            let v = SawtoothValue::at(alpha);
            prop_assert!((-0.5..0.5).contains(&v.b1));
            prop_assert!((-0.125..=0.0).contains(&v.b2));
            prop_assert!((0.0..=0.5).contains(&v.dist));
        }
    }
}
