//! Two-term asymptotic for the summatory function and the Gamma/Beta
//! identities behind it.
//!
//! For an instance `(k, s)`
//!
//! ```text
//! S(x) = c1 x^{s/k} - c2 x^{(s-1)/k} + O(x^{((s-1)k-1)/k^2})
//! c1 = Gamma(1 + 1/k)^s / Gamma(1 + s/k)
//! c2 = (s/2) Gamma(1 + 1/k)^{s-1} / Gamma(1 + (s-1)/k)
//! ```
//!
//! where the error exponent is proved for `k >= 4, 2 <= s <= k + 1`.
//! Coefficients are meaningful for every `k >= 2, s >= 1`; estimates carry
//! the instance's validity flag instead of refusing.

mod gamma;
mod quadrature;

pub use gamma::{beta_hp, gamma_hp, gamma_ratio};
pub use quadrature::{tanh_sinh, Quadrature};

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::precision::{PrecReal, GUARD_BITS};

/// Working precision for coefficients that are rounded to `p` at the end.
fn coeff_wp(p: usize) -> usize {
    p + 8
}

fn gamma_one_plus_inv_k(k: u32, wp: usize) -> Result<PrecReal> {
    gamma_ratio(u64::from(k) + 1, u64::from(k), wp)
}

/// `Gamma(1 + 1/k)^s / Gamma(1 + s/k)`.
pub fn main_coeff(inst: Instance, p: usize) -> Result<PrecReal> {
    let (k, s) = (u64::from(inst.k()), u64::from(inst.s()));
    let wp = coeff_wp(p);
    let g = gamma_one_plus_inv_k(inst.k(), wp)?;
    let den = gamma_ratio(k + s, k, wp)?;
    Ok(g.powi(s as usize).div(&den).with_precision(p))
}

/// `(s/2) Gamma(1 + 1/k)^{s-1} / Gamma(1 + (s-1)/k)`, a positive magnitude.
pub fn second_coeff(inst: Instance, p: usize) -> Result<PrecReal> {
    let (k, s) = (u64::from(inst.k()), u64::from(inst.s()));
    let wp = coeff_wp(p);
    let g = gamma_one_plus_inv_k(inst.k(), wp)?;
    let den = gamma_ratio(k + s - 1, k, wp)?;
    Ok(g.powi(s as usize - 1).mul_u64(s).div_u64(2).div(&den).with_precision(p))
}

/// `((s-1)k - 1) / k^2`, the error exponent of the two-term formula.
pub fn predicted_error_exponent(inst: Instance) -> Rational64 {
    let (k, s) = (i64::from(inst.k()), i64::from(inst.s()));
    Rational64::new((s - 1) * k - 1, k * k)
}

/// `(s-1)/k`, the error exponent when only the main term is subtracted.
pub fn main_only_error_exponent(inst: Instance) -> Rational64 {
    Rational64::new(i64::from(inst.s()) - 1, i64::from(inst.k()))
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticEstimate {
    pub instance: Instance,
    #[serde(serialize_with = "ser_decimal")]
    pub x: PrecReal,
    #[serde(serialize_with = "ser_decimal")]
    pub main_term: PrecReal,
    #[serde(serialize_with = "ser_decimal")]
    pub second_term: PrecReal,
    /// `main_term - second_term`.
    #[serde(serialize_with = "ser_decimal")]
    pub two_term_value: PrecReal,
    #[serde(serialize_with = "ser_rational")]
    pub predicted_error_exponent: Rational64,
    pub theorem_valid: bool,
}

fn ser_decimal<S: serde::Serializer>(v: &PrecReal, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&v.to_decimal())
}

fn ser_rational<S: serde::Serializer>(v: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Coefficients of one instance, computed once and evaluated at many `x`.
#[derive(Debug, Clone)]
pub struct TwoTermModel {
    instance: Instance,
    precision: usize,
    main_coeff: PrecReal,
    second_coeff: PrecReal,
}

impl TwoTermModel {
    pub fn new(inst: Instance, p: usize) -> Result<Self> {
        let wp = p + GUARD_BITS;
        Ok(Self {
            instance: inst,
            precision: p,
            main_coeff: main_coeff(inst, wp)?,
            second_coeff: second_coeff(inst, wp)?,
        })
    }

    pub fn instance(&self) -> Instance {
        self.instance
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn main_coeff(&self) -> PrecReal {
        self.main_coeff.with_precision(self.precision)
    }

    pub fn second_coeff(&self) -> PrecReal {
        self.second_coeff.with_precision(self.precision)
    }

    /// Both terms at `x > 0`. Powers are `exp(e ln x)` with the rational
    /// exponent applied exactly; every output is within `2^(-p+2)` relative.
    pub fn evaluate(&self, x: &PrecReal) -> Result<AsymptoticEstimate> {
        if !x.is_positive() {
            return Err(Error::Domain(format!("asymptotic evaluated at nonpositive x = {x}")));
        }
        let p = self.precision;
        let wp = p + GUARD_BITS;
        let (k, s) = (u64::from(self.instance.k()), u64::from(self.instance.s()));
        let ln_x = x.with_precision(wp + 16).ln()?;
        let power = |num: u64| ln_x.mul_u64(num).div_u64(k).with_precision(wp).exp();
        let main = self.main_coeff.mul(&power(s)).with_precision(p);
        let second = self.second_coeff.mul(&power(s - 1)).with_precision(p);
        Ok(AsymptoticEstimate {
            instance: self.instance,
            x: x.clone(),
            two_term_value: main.sub(&second),
            main_term: main,
            second_term: second,
            predicted_error_exponent: predicted_error_exponent(self.instance),
            theorem_valid: self.instance.theorem_valid(),
        })
    }
}

/// `c1 x^{s/k} - c2 x^{(s-1)/k}` at `p` bits.
pub fn two_term(inst: Instance, x: &PrecReal, p: usize) -> Result<AsymptoticEstimate> {
    TwoTermModel::new(inst, p)?.evaluate(x)
}

/// Coefficients as written for the diagonal case `s = k`:
/// `Gamma(1 + 1/k)^k` and `(k/2) Gamma(1 + 1/k)^{k-1} / Gamma(2 - 1/k)`.
pub fn diagonal_coeffs(k: u32, p: usize) -> Result<(PrecReal, PrecReal)> {
    let wp = coeff_wp(p);
    let g = gamma_one_plus_inv_k(k, wp)?;
    let kk = u64::from(k);
    let main = g.powi(k as usize);
    let second = g.powi(k as usize - 1).mul_u64(kk).div_u64(2).div(&gamma_ratio(2 * kk - 1, kk, wp)?);
    Ok((main.with_precision(p), second.with_precision(p)))
}

/// `|(1/k) B(1/k, s/k + 1) - Gamma(1 + 1/k) Gamma(1 + s/k) / Gamma(1 + (s+1)/k)|`,
/// both sides evaluated independently at `p` bits.
pub fn beta_gamma_check(k: u32, s: u32, p: usize) -> Result<PrecReal> {
    Instance::new(k, s)?;
    let (k, s) = (u64::from(k), u64::from(s));
    let wp = p + GUARD_BITS;
    let a = PrecReal::from_u64(1, wp).div_u64(k);
    let b = PrecReal::from_u64(s + k, wp).div_u64(k);
    let lhs = beta_hp(&a, &b, p)?.div_u64(k);
    let rhs = gamma_ratio(k + 1, k, p)?.mul(&gamma_ratio(k + s, k, p)?).div(&gamma_ratio(k + s + 1, k, p)?);
    Ok(lhs.sub(&rhs).abs())
}

/// `(1/k) B(1/k, 1/k + 1) x^{2/k}`, the area under `(x - a^k)^{1/k}` on
/// `[0, x^{1/k}]`.
pub fn area_closed_form(k: u32, x: &PrecReal, p: usize) -> Result<PrecReal> {
    Instance::new(k, 2)?;
    let kk = u64::from(k);
    let wp = p + GUARD_BITS;
    let a = PrecReal::from_u64(1, wp).div_u64(kk);
    let b = PrecReal::from_u64(kk + 1, wp).div_u64(kk);
    let beta = beta_hp(&a, &b, wp)?.div_u64(kk);
    Ok(beta.mul(&x.with_precision(wp).pow_ratio(2, i64::from(k))?).with_precision(p))
}

#[derive(Debug, Clone)]
pub struct AreaQuadrature {
    /// Carries `f64` accuracy regardless of its nominal precision.
    pub value: PrecReal,
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Quadrature tolerance for [`area_quadrature_s2`], relative to the unit area.
pub const AREA_TOLERANCE: f64 = 1e-12;

/// `int_0^{x^{1/k}} (x - a^k)^{1/k} da` by tanh-sinh after scaling to
/// `x^{2/k} int_0^1 (1 - u^k)^{1/k} du`.
pub fn area_quadrature_s2(k: u32, x: &PrecReal, p: usize) -> Result<AreaQuadrature> {
    Instance::new(k, 2)?;
    if !x.is_positive() {
        return Err(Error::Domain(format!("area evaluated at nonpositive x = {x}")));
    }
    let kf = f64::from(k);
    let integrand = |u: f64, c: f64| -> f64 {
        // 1 - u^k = (1 - u)(1 + u + ... + u^{k-1}) keeps relative accuracy near u = 1
        let one_minus = if u > 0.5 {
            let mut geo = 0.0;
            let mut up = 1.0;
            for _ in 0..k {
                geo += up;
                up *= u;
            }
            c * geo
        } else {
            1.0 - u.powi(k as i32)
        };
        one_minus.max(0.0).powf(1.0 / kf)
    };
    let q = tanh_sinh(integrand, 0.0, 1.0, AREA_TOLERANCE)?;
    let scale = x.with_precision(p + GUARD_BITS).pow_ratio(2, i64::from(k))?;
    Ok(AreaQuadrature {
        value: PrecReal::from_f64(q.value, p).mul(&scale).with_precision(p),
        error_estimate: q.error_estimate * scale.to_f64(),
        evaluations: q.evaluations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub monotone: bool,
    /// Smallest sampled `a` at which the derivative is negative.
    pub first_violation: Option<f64>,
    /// `(x - x^{(k-1)/k})^{1/k}`, the right end of the sampled range.
    pub eta: f64,
    pub points: usize,
}

/// Sign of `d/da [s a^{k-1} (x - a^k)^{s/k - 1}]` on a uniform grid of
/// `grid_points` samples over `[0, eta]`. The derivative equals
/// `s a^{k-2} (x - a^k)^{s/k-2} ((k-1)x + (1-s)a^k)`, so only the last factor
/// matters. Any `s >= 1` is accepted; for `s > k` the sign can fail.
pub fn integrand_monotone_check(k: u32, s: u32, x: f64, grid_points: usize) -> Result<MonotoneReport> {
    Instance::new(k, s)?;
    if !(x > 1.0 && x.is_finite()) {
        return Err(Error::Domain(format!("monotonicity check needs finite x > 1, got {x}")));
    }
    if grid_points < 2 {
        return Err(Error::InvalidArgument("need at least 2 grid points".into()));
    }
    let kf = f64::from(k);
    let eta = (x - x.powf((kf - 1.0) / kf)).powf(1.0 / kf);
    let bracket = |a: f64| (kf - 1.0) * x + (1.0 - f64::from(s)) * a.powi(k as i32);
    let first_violation =
        (0..grid_points).map(|i| eta * i as f64 / (grid_points - 1) as f64).find(|&a| bracket(a) < 0.0);
    Ok(MonotoneReport { monotone: first_violation.is_none(), first_violation, eta, points: grid_points })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAMMA_FIVE_QUARTERS: &str = "0.906402477055477077982671288966918000748791920720016366858344";
    const MAIN_K3_S2: &str = "0.883319375142724978656844749824219351285934269101278765063453";
    const GAMMA_FIVE_QUARTERS_POW4: &str = "0.674969789311173012118949843735498535657052004772265478746048";
    const MAIN_K4_S2: &str = "0.927037338650685959216925173597630023108799411760883452792964";
    const SECOND_K4_S4: &str = "1.62049683794659550553796151411512182307737722464571571375835";
    const MAIN_K4_S3: &str = "0.810248418973297752768980757057560911538688612322857856879177";
    const SECOND_K4_S3: &str = "1.39055600797602893882538776039644503466319911764132517918945";
    const AREA_K3_X8: &str = "3.53327750057089991462737899929687740514373707640511506025381";
    const TWO_TERM_K4_S2_2P20: &str = "917.286234778302422238131377763973143663410597643144655659995";

    fn inst(k: u32, s: u32) -> Instance {
        Instance::new(k, s).unwrap()
    }

    fn reference(s: &str) -> PrecReal {
        PrecReal::parse(s, 256).unwrap()
    }

    const BAR: f64 = 1.0 / (1u128 << 122) as f64;

    #[test]
    fn main_coefficient_values() {
        assert!(main_coeff(inst(3, 2), 128).unwrap().relative_error_to(&reference(MAIN_K3_S2)) < BAR);
        assert!(main_coeff(inst(4, 2), 128).unwrap().relative_error_to(&reference(MAIN_K4_S2)) < BAR);
        assert!(main_coeff(inst(4, 3), 128).unwrap().relative_error_to(&reference(MAIN_K4_S3)) < BAR);
        assert!(main_coeff(inst(4, 4), 128).unwrap().relative_error_to(&reference(GAMMA_FIVE_QUARTERS_POW4)) < BAR);
        for k in 2..8 {
            let one = main_coeff(inst(k, 1), 128).unwrap();
            assert!(one.relative_error_to(&PrecReal::one(128)) < BAR);
        }
    }

    #[test]
    fn second_coefficient_values() {
        assert!(second_coeff(inst(4, 3), 128).unwrap().relative_error_to(&reference(SECOND_K4_S3)) < BAR);
        assert!(second_coeff(inst(4, 4), 128).unwrap().relative_error_to(&reference(SECOND_K4_S4)) < BAR);
        let s2 = second_coeff(inst(4, 2), 128).unwrap();
        assert!(s2.relative_error_to(&PrecReal::one(128)) < BAR);
        // k = s = 3: three halves of the k = 3, s = 2 main coefficient
        let c = second_coeff(inst(3, 3), 128).unwrap();
        let expect = reference(MAIN_K3_S2).mul_u64(3).div_u64(2);
        assert!(c.relative_error_to(&expect) < BAR);
    }

    #[test]
    fn exponents() {
        assert_eq!(predicted_error_exponent(inst(4, 2)), Rational64::new(3, 16));
        assert_eq!(predicted_error_exponent(inst(5, 6)), Rational64::new(24, 25));
        assert_eq!(predicted_error_exponent(inst(4, 3)), Rational64::new(7, 16));
        assert_eq!(main_only_error_exponent(inst(4, 2)), Rational64::new(1, 4));
        assert_eq!(main_only_error_exponent(inst(5, 2)), Rational64::new(1, 5));
    }

    #[test]
    fn two_term_at_one_and_at_2_20() {
        let e = two_term(inst(4, 2), &PrecReal::one(128), 128).unwrap();
        let expect =
            reference(GAMMA_FIVE_QUARTERS).powi(2).div(&gamma_ratio(3, 2, 256).unwrap()).sub(&PrecReal::one(256));
        assert!(e.two_term_value.relative_error_to(&expect) < BAR * 8.0);
        assert_eq!(e.two_term_value, e.main_term.sub(&e.second_term));
        let e = two_term(inst(4, 2), &PrecReal::from_u64(1 << 20, 128), 128).unwrap();
        assert!(e.two_term_value.relative_error_to(&reference(TWO_TERM_K4_S2_2P20)) < BAR);
        assert!(e.theorem_valid);
        assert!(two_term(inst(4, 2), &PrecReal::zero(128), 128).is_err());
    }

    #[test]
    fn diagonal_matches_general_form() {
        for k in 2..=8 {
            let (main, second) = diagonal_coeffs(k, 128).unwrap();
            assert!(main.relative_error_to(&main_coeff(inst(k, k), 128).unwrap()) < BAR);
            assert!(second.relative_error_to(&second_coeff(inst(k, k), 128).unwrap()) < BAR);
        }
    }

    #[test]
    fn beta_gamma_identity_holds() {
        let bar = 2f64.powi(-120);
        for k in 2..=10 {
            for s in 1..=k + 1 {
                let d = beta_gamma_check(k, s, 128).unwrap().to_f64();
                assert!(d < bar, "k={k} s={s} discrepancy {d:e}");
            }
        }
    }

    #[test]
    fn area_quadrature_against_closed_form() {
        let x = PrecReal::one(128);
        let q = area_quadrature_s2(2, &x, 128).unwrap();
        assert!((q.value.to_f64() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        for k in 2..=10 {
            let q = area_quadrature_s2(k, &x, 128).unwrap();
            let c = area_closed_form(k, &x, 128).unwrap();
            assert!((q.value.to_f64() - c.to_f64()).abs() < 1e-12, "k={k}");
            assert!(q.error_estimate < 1e-12);
        }
        let x8 = PrecReal::from_u64(8, 128);
        assert!(area_closed_form(3, &x8, 128).unwrap().relative_error_to(&reference(AREA_K3_X8)) < BAR);
        let q = area_quadrature_s2(3, &x8, 128).unwrap();
        assert!((q.value.to_f64() - 3.5332775005709).abs() < 1e-11);
    }

    #[test]
    fn area_k4_is_second_coefficient_shape() {
        // (1/4) B(1/4, 5/4) = Gamma(5/4)^2 / Gamma(3/2)
        let c = area_closed_form(4, &PrecReal::one(128), 128).unwrap();
        assert!(c.relative_error_to(&reference(MAIN_K4_S2)) < BAR);
    }

    #[test]
    fn monotone_inside_fails_outside() {
        assert!(integrand_monotone_check(4, 2, 1e6, 1000).unwrap().monotone);
        assert!(integrand_monotone_check(4, 4, 1e6, 1000).unwrap().monotone);
        let r = integrand_monotone_check(4, 6, 1e6, 1000).unwrap();
        assert!(!r.monotone);
        let a = r.first_violation.unwrap();
        assert!(3.0 * 1e6 - 5.0 * a.powi(4) < 0.0 && a <= r.eta);
        // s = k + 1 holds while x <= k^k
        assert!(integrand_monotone_check(4, 5, 200.0, 1000).unwrap().monotone);
        assert!(!integrand_monotone_check(4, 5, 1e6, 1000).unwrap().monotone);
    }

    #[test]
    fn quarter_gamma_by_quadrature() {
        // Gamma(1/4) = 4 Gamma(5/4) = 4 int_0^inf exp(-u^4) du; substitute u = v / (1 - v)
        let f = |v: f64, c: f64| {
            let u = v / c;
            if u > 8.0 {
                return 0.0;
            }
            (-(u.powi(4))).exp() / (c * c)
        };
        let q = tanh_sinh(f, 0.0, 1.0, 1e-14).unwrap();
        let g = gamma_ratio(5, 4, 128).unwrap().to_f64();
        assert!((q.value - g).abs() < 1e-13);
    }
}
