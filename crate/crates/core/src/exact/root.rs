//! Floors of k-th roots by integer Newton iteration.
//!
//! Nothing here touches floating point: the counting identities are exact and
//! a rounded `powf` is off by one near perfect powers.

use num_bigint::BigUint;
use num_traits::One;

use crate::natcount::NatCount;

/// `r` with `r^k <= n < (r+1)^k`.
pub fn integer_kth_root(n: &NatCount, k: u32) -> NatCount {
    assert!(k >= 1, "root degree must be positive");
    match n {
        NatCount::Small(v) => NatCount::Small(kth_root_u64(*v, k)),
        NatCount::Big(v) => NatCount::from_big(kth_root_big(v, k)),
    }
}

/// `r^k`, or `None` once it exceeds `u128`.
#[inline]
pub fn checked_pow_u128(r: u128, k: u32) -> Option<u128> {
    r.checked_pow(k)
}

/// Machine-word variant of [`integer_kth_root`].
pub fn kth_root_u64(n: u64, k: u32) -> u64 {
    assert!(k >= 1, "root degree must be positive");
    if k == 1 || n < 2 {
        return n;
    }
    if k >= 64 {
        // 2^64 > n, so the root is 1.
        return 1;
    }
    let n128 = u128::from(n);
    let bits = 64 - n.leading_zeros();
    // Start above the root; Newton then decreases monotonically onto the floor.
    let mut r: u128 = 1 << bits.div_ceil(k);
    let km1 = u128::from(k - 1);
    loop {
        let q = match checked_pow_u128(r, k - 1) {
            Some(p) => n128 / p,
            None => 0,
        };
        let next = (km1 * r + q) / u128::from(k);
        if next >= r {
            break;
        }
        r = next;
    }
    while checked_pow_u128(r, k).is_none_or(|p| p > n128) {
        r -= 1;
    }
    while checked_pow_u128(r + 1, k).is_some_and(|p| p <= n128) {
        r += 1;
    }
    r as u64
}

/// Arbitrary-size variant of [`integer_kth_root`].
pub fn kth_root_big(n: &BigUint, k: u32) -> BigUint {
    assert!(k >= 1, "root degree must be positive");
    let two = BigUint::from(2u32);
    if k == 1 || *n < two {
        return n.clone();
    }
    let bits = n.bits();
    let mut r = BigUint::one() << bits.div_ceil(u64::from(k));
    let km1 = BigUint::from(k - 1);
    let kb = BigUint::from(k);
    loop {
        let next = (&km1 * &r + n / r.pow(k - 1)) / &kb;
        if next >= r {
            break;
        }
        r = next;
    }
    while r.pow(k) > *n {
        r -= 1u32;
    }
    while (&r + 1u32).pow(k) <= *n {
        r += 1u32;
    }
    r
}

/// Whether `n` is `r^k` for some integer `r`.
pub fn is_perfect_power_u64(n: u64, k: u32) -> bool {
    let r = kth_root_u64(n, k);
    checked_pow_u128(u128::from(r), k) == Some(u128::from(n))
}
