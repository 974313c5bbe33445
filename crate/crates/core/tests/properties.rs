use proptest::prelude::*;

use sumpowers::asymptotics::{gamma_hp, main_coeff, second_coeff, two_term};
use sumpowers::exact::{
    build_table, r_count, summatory_direct, summatory_enumerate, summatory_enumerate_partitioned, summatory_recursive,
    summatory_split_s2,
};
use sumpowers::expsum::{default_nu, dyadic_blocks, lemma3_sum, vdc_bound, ExpSumConfig};
use sumpowers::residual::{fit_exponent, scan, Grid, ScanOptions};
use sumpowers::sawtooth::{b1, b1_fourier_remainder, dist_to_nearest_int};
use sumpowers::{Instance, PrecReal};

fn instance() -> impl Strategy<Value = Instance> {
    (2u32..=6, 1u32..=5).prop_map(|(k, s)| Instance::new(k, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_algorithms_agree(inst in instance(), x in 0u64..3000) {
        let direct = summatory_direct(inst, x).unwrap();
        prop_assert_eq!(&direct, &summatory_recursive(inst, x).unwrap());
        prop_assert_eq!(&direct, &summatory_enumerate(inst, x));
        if inst.s() == 2 {
            prop_assert_eq!(&direct, &summatory_split_s2(inst.k(), x).unwrap());
        }
    }

    #[test]
    fn increments_are_representation_counts(inst in instance(), x in 1u64..3000) {
        let hi = summatory_recursive(inst, x).unwrap();
        let lo = summatory_recursive(inst, x - 1).unwrap();
        prop_assert!(lo <= hi);
        let mut lo_plus = lo.clone();
        lo_plus += &r_count(inst, x);
        prop_assert_eq!(lo_plus, hi);
        prop_assert_eq!(build_table(inst, x).unwrap().get(x), r_count(inst, x));
    }

    #[test]
    fn no_representations_below_s(inst in instance(), n in 0u64..6) {
        if n < u64::from(inst.s()) {
            prop_assert_eq!(r_count(inst, n), 0u64);
        }
    }

    #[test]
    fn partitioned_enumeration_is_exact(inst in instance(), x in 0u64..5000, parts in 1usize..9) {
        prop_assert_eq!(summatory_enumerate_partitioned(inst, x, parts), summatory_enumerate(inst, x));
    }

    #[test]
    fn two_term_is_main_minus_second(k in 4u32..=8, s_off in 0u32..8, x in 16u64..1u64 << 40) {
        let inst = Instance::new(k, 2 + s_off % k).unwrap();
        prop_assert!(main_coeff(inst, 128).unwrap().is_positive());
        prop_assert!(second_coeff(inst, 128).unwrap().is_positive());
        let x1 = PrecReal::from_u64(x, 128);
        let x2 = PrecReal::from_u64(2 * x, 128);
        let e1 = two_term(inst, &x1, 128).unwrap();
        let e2 = two_term(inst, &x2, 128).unwrap();
        prop_assert_eq!(e1.two_term_value.clone(), e1.main_term.sub(&e1.second_term));
        let r1 = e1.main_term.div(&e1.second_term);
        let r2 = e2.main_term.div(&e2.second_term);
        prop_assert!(r2.sub(&r1).is_positive());
    }

    #[test]
    fn fourier_remainder_within_bound(alpha in -1e4f64..1e4, h in 2.0f64..5e3) {
        prop_assume!(dist_to_nearest_int(alpha) >= 1e-3);
        let t = b1_fourier_remainder(alpha, h).unwrap();
        prop_assert!(t.remainder <= 5.0 * t.bound);
        prop_assert!((t.remainder - (b1(alpha) - t.approx).abs()).abs() < 1e-12);
    }

    #[test]
    fn blocks_tile_the_range(x in 1e3f64..9e15, k in 4u32..=7) {
        let cover = dyadic_blocks(x, k, default_nu(x, k).min((x / 2.0).powf(1.0 / f64::from(k)))).unwrap();
        let mut edge = cover.nu;
        for &(m, m_prime) in &cover.blocks {
            prop_assert_eq!(m, edge);
            prop_assert!(m_prime > m && m_prime <= 2.0 * m);
            edge = m_prime;
        }
        prop_assert!(edge >= cover.cap || cover.blocks.is_empty() && cover.nu >= cover.cap);
    }

    #[test]
    fn sawtooth_sum_is_initial_plus_blocks(x in 1e3f64..1e9, k in 4u32..=6) {
        let s = lemma3_sum(x.floor(), k).unwrap();
        let mut acc = s.initial.clone();
        for b in &s.blocks {
            acc = acc.add_exact(&b.sum);
        }
        prop_assert_eq!(acc, s.total.clone());
        let terms: u64 = s.blocks.iter().map(|b| b.last + 1 - b.first).sum::<u64>() + s.nu.floor() as u64;
        prop_assert_eq!(terms, s.terms);
    }

    #[test]
    fn envelope_holds(j in 12u32..=40, k in 4u32..=6, pick in 0usize..64, h in 1i64..4) {
        let x = f64::from(2u32).powi(j as i32);
        let cover = dyadic_blocks(x, k, default_nu(x, k)).unwrap();
        prop_assume!(!cover.blocks.is_empty());
        let (m, _) = cover.blocks[pick % cover.blocks.len()];
        let b = vdc_bound(&ExpSumConfig::new(x, k, m, h).unwrap()).unwrap();
        prop_assert!(b.ratio_min >= 1.0 - 1e-12 && b.ratio_max <= b.eta * (1.0 + 1e-12));
    }

    #[test]
    fn planted_slopes_are_recovered(slope in -1.0f64..2.0, scale in 1e-3f64..1e3) {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| 10f64.powf(f64::from(i) * 6.0 / 9.0)).map(|x| (x, scale * x.powf(slope))).collect();
        let fit = fit_exponent(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-6);
        prop_assert!((fit.intercept - scale.ln()).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gamma_recurrence(a in 1e-9f64..=20.0) {
        let a = PrecReal::from_f64(a, 128);
        let lhs = gamma_hp(&a.add(&PrecReal::one(128)), 128).unwrap();
        let rhs = a.mul(&gamma_hp(&a, 128).unwrap());
        prop_assert!(lhs.relative_error_to(&rhs) < 2f64.powi(-120));
    }
}

#[test]
fn scans_are_deterministic_and_consistent() {
    let inst = Instance::new(5, 3).unwrap();
    let opts = ScanOptions::default();
    let a = scan(inst, 1 << 10, 1 << 17, Grid::per_octave(4), &opts).unwrap();
    let b = scan(inst, 1 << 10, 1 << 17, Grid::per_octave(4), &opts).unwrap();
    assert_eq!(a.records, b.records);
    for r in &a.records {
        let gap = r.residual_main_only.sub(&r.residual_two).add(&r.second);
        assert!(gap.to_f64().abs() <= r.second.to_f64() * 2f64.powi(-120), "x = {}", r.x);
    }
}
