//! Exact values of `r_{k,s}(n)` and of the summatory function
//! `S_{k,s}(x) = sum_{m <= x} r_{k,s}(m)` by independent routes.

use std::collections::HashMap;

use rayon::prelude::*;

use super::root::kth_root_u64;
use super::table::{build_table, build_table_with, TableOptions};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::natcount::NatCount;

/// Floor-of-root function used by the root-based counters.
pub type RootFn = fn(u64, u32) -> u64;

/// Number of ordered `s`-tuples of positive integers whose k-th powers sum to `n`.
pub fn r_count(inst: Instance, n: u64) -> NatCount {
    count_exact(inst.k(), inst.s(), n)
}

fn count_exact(k: u32, s: u32, n: u64) -> NatCount {
    if s == 1 {
        let r = kth_root_u64(n, k);
        return NatCount::from((n >= 1 && u128::from(r).pow(k) == u128::from(n)) as u64);
    }
    // the other s - 1 coordinates need at least 1 each
    if n < u64::from(s) {
        return NatCount::ZERO;
    }
    let top = kth_root_u64(n - u64::from(s - 1), k);
    (1..=top).map(|x1| count_exact(k, s - 1, n - x1.pow(k))).sum()
}

/// Summatory value from the convolution table.
pub fn summatory_direct(inst: Instance, x: u64) -> Result<NatCount> {
    if x == 0 {
        return Ok(NatCount::ZERO);
    }
    Ok(build_table(inst, x)?.total())
}

pub fn summatory_direct_with(inst: Instance, x: u64, opts: &TableOptions) -> Result<NatCount> {
    if x == 0 {
        return Ok(NatCount::ZERO);
    }
    Ok(build_table_with(inst, x, opts)?.total())
}

/// Summatory value by enumerating lattice points `x_1^k + ... + x_s^k <= x`
/// with every coordinate at least 1. Work grows like the answer.
pub fn summatory_enumerate(inst: Instance, x: u64) -> NatCount {
    enumerate_le(inst.k(), inst.s(), x)
}

fn enumerate_le(k: u32, s: u32, x: u64) -> NatCount {
    if s == 0 {
        return NatCount::from(1);
    }
    if x < u64::from(s) {
        return NatCount::ZERO;
    }
    if s == 1 {
        return NatCount::from(kth_root_u64(x, k));
    }
    let top = kth_root_u64(x - u64::from(s - 1), k);
    (1..=top).map(|l| enumerate_le(k, s - 1, x - l.pow(k))).sum()
}

/// Root-based counters: the splitting identity for two summands and the
/// recursion on the last coordinate for more.
///
/// The root function is a parameter so verification can run the counters
/// against a deliberately broken root and confirm that the cross-checks
/// notice.
#[derive(Clone, Copy)]
pub struct Counter {
    root: RootFn,
}

impl Default for Counter {
    fn default() -> Self {
        Self { root: kth_root_u64 }
    }
}

impl std::fmt::Debug for Counter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Counter").finish_non_exhaustive()
    }
}

impl Counter {
    pub fn with_root(root: RootFn) -> Self {
        Self { root }
    }

    fn root(&self, n: u64, k: u32) -> u64 {
        (self.root)(n, k)
    }

    /// `2 * sum_{m <= (x/2)^{1/k}} floor((x - m^k)^{1/k}) - floor((x/2)^{1/k})^2`.
    ///
    /// Lattice points in the first quadrant under `X^k + Y^k = x`, split by
    /// whether one or both coordinates are at most `(x/2)^{1/k}`. Costs
    /// `O(x^{1/k})` root evaluations.
    pub fn summatory_split_s2(&self, k: u32, x: u64) -> Result<NatCount> {
        if k < 2 {
            return Err(Error::InvalidInstance(format!("exponent k = {k} must be at least 2")));
        }
        // floor((x/2)^{1/k}) = floor(floor(x/2)^{1/k})
        let t = self.root(x / 2, k);
        let mut acc: u128 = 0;
        for m in 1..=t {
            acc += u128::from(self.root(x - m.pow(k), k));
        }
        let total = 2 * acc;
        let square = u128::from(t) * u128::from(t);
        // a broken root function can push this negative; report zero rather than wrap
        Ok(NatCount::from_u128(total.saturating_sub(square)))
    }

    /// Summatory value through `S_{s+1}(x) = sum_{l <= x^{1/k}} S_s(x - l^k)`,
    /// bottoming out in [`Counter::summatory_split_s2`].
    pub fn summatory_recursive(&self, inst: Instance, x: u64) -> Result<NatCount> {
        RecursiveCounter::new(*self, inst.k()).summatory(inst.s(), x)
    }
}

/// [`Counter::summatory_recursive`] with a memo of intermediate values that
/// persists across calls for a fixed exponent.
#[derive(Debug)]
pub struct RecursiveCounter {
    counter: Counter,
    k: u32,
    memo: HashMap<(u32, u64), NatCount>,
}

impl RecursiveCounter {
    pub fn new(counter: Counter, k: u32) -> Self {
        Self { counter, k, memo: HashMap::new() }
    }

    pub fn summatory(&mut self, s: u32, x: u64) -> Result<NatCount> {
        if self.k < 2 {
            return Err(Error::InvalidInstance(format!("exponent k = {} must be at least 2", self.k)));
        }
        match s {
            0 => Err(Error::InvalidInstance("summand count must be at least 1".into())),
            1 => Ok(NatCount::from(self.counter.root(x, self.k))),
            2 => self.counter.summatory_split_s2(self.k, x),
            _ => {
                if x < u64::from(s) {
                    return Ok(NatCount::ZERO);
                }
                if let Some(v) = self.memo.get(&(s, x)) {
                    return Ok(v.clone());
                }
                let top = self.counter.root(x, self.k);
                let mut acc = NatCount::ZERO;
                for l in 1..=top {
                    let Some(rest) = l.checked_pow(self.k).and_then(|p| x.checked_sub(p)) else {
                        break;
                    };
                    acc += &self.summatory(s - 1, rest)?;
                }
                self.memo.insert((s, x), acc.clone());
                Ok(acc)
            }
        }
    }
}

pub fn summatory_split_s2(k: u32, x: u64) -> Result<NatCount> {
    Counter::default().summatory_split_s2(k, x)
}

pub fn summatory_recursive(inst: Instance, x: u64) -> Result<NatCount> {
    Counter::default().summatory_recursive(inst, x)
}

/// Fastest exact route: splitting for `s = 2`, recursion for `s > 2`.
pub fn summatory_fast(inst: Instance, x: u64) -> Result<NatCount> {
    match inst.s() {
        2 => summatory_split_s2(inst.k(), x),
        _ => summatory_recursive(inst, x),
    }
}

/// Lattice enumeration with the first coordinate's range cut into `parts`
/// contiguous pieces counted independently and added.
pub fn summatory_enumerate_partitioned(inst: Instance, x: u64, parts: usize) -> NatCount {
    let (k, s) = (inst.k(), inst.s());
    if s == 1 || x < u64::from(s) {
        return summatory_enumerate(inst, x);
    }
    let top = kth_root_u64(x - u64::from(s - 1), k);
    let parts = parts.max(1) as u64;
    let step = top.div_ceil(parts).max(1);
    let ranges: Vec<(u64, u64)> =
        (0..parts).map(|i| (1 + i * step, ((i + 1) * step).min(top))).filter(|(a, b)| a <= b).collect();
    let partials: Vec<NatCount> =
        ranges.par_iter().map(|&(a, b)| (a..=b).map(|l| enumerate_le(k, s - 1, x - l.pow(k))).sum()).collect();
    partials.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(k: u32, s: u32) -> Instance {
        Instance::new(k, s).unwrap()
    }

    /// Every tuple in `[1, bound]^s`, checked one by one.
    fn brute_r(k: u32, s: u32, n: u64) -> u64 {
        let bound = (1..).take_while(|b: &u64| b.pow(k) <= n).last().unwrap_or(0);
        let mut idx = vec![1u64; s as usize];
        if bound == 0 {
            return 0;
        }
        let mut count = 0;
        loop {
            if idx.iter().map(|v| v.pow(k)).sum::<u64>() == n {
                count += 1;
            }
            let mut pos = 0;
            loop {
                if pos == idx.len() {
                    return count;
                }
                idx[pos] += 1;
                if idx[pos] <= bound {
                    break;
                }
                idx[pos] = 1;
                pos += 1;
            }
        }
    }

    #[test]
    fn r_count_examples() {
        assert_eq!(r_count(inst(3, 3), 3), 1);
        assert_eq!(brute_r(3, 2, 9), 2);
        assert_eq!(r_count(inst(3, 2), 9), 2);
        assert_eq!(brute_r(2, 2, 50), 3);
        assert_eq!(r_count(inst(2, 2), 50), 3);
        assert_eq!(r_count(inst(4, 2), 1), 0);
    }

    #[test]
    fn r_count_matches_brute_force() {
        for k in 2..=4 {
            for s in 1..=4 {
                for n in 0..=300 {
                    assert_eq!(r_count(inst(k, s), n), brute_r(k, s, n), "k={k} s={s} n={n}");
                }
            }
        }
    }

    #[test]
    fn r_count_zero_below_s() {
        for s in 1..6 {
            for n in 0..u64::from(s) {
                assert!(r_count(inst(3, s), n).is_zero());
            }
        }
    }

    #[test]
    fn summatory_examples() {
        assert_eq!(summatory_direct(inst(2, 2), 10).unwrap(), 6);
        assert_eq!(summatory_direct(inst(4, 2), 1).unwrap(), 0);
        assert_eq!(summatory_direct(inst(3, 3), 3).unwrap(), 1);
        assert_eq!(summatory_direct(inst(3, 3), 0).unwrap(), 0);
        assert_eq!(summatory_enumerate(inst(2, 2), 10), 6);
    }

    #[test]
    fn split_examples() {
        // 2 * (floor(sqrt 9) + floor(sqrt 6)) - floor(sqrt 5)^2 = 10 - 4
        assert_eq!(summatory_split_s2(2, 10).unwrap(), 6);
        assert_eq!(summatory_split_s2(4, 2).unwrap(), 1);
        assert_eq!(summatory_split_s2(4, 1).unwrap(), 0);
        let brute: u64 = (1..=100).map(|n| brute_r(3, 2, n)).sum();
        assert_eq!(summatory_split_s2(3, 100).unwrap(), brute);
        assert_eq!(summatory_direct(inst(3, 2), 100).unwrap(), brute);
    }

    #[test]
    fn recursive_examples() {
        // S_2(9) + S_2(2) = 3 + 1
        assert_eq!(summatory_split_s2(3, 9).unwrap(), 3);
        assert_eq!(summatory_split_s2(3, 2).unwrap(), 1);
        assert_eq!(summatory_recursive(inst(3, 3), 10).unwrap(), 4);
        assert_eq!(summatory_recursive(inst(4, 3), 3).unwrap(), 1);
        let brute: u64 = (1..=20).map(|n| brute_r(2, 4, n)).sum();
        assert_eq!(summatory_recursive(inst(2, 4), 20).unwrap(), brute);
        assert_eq!(summatory_direct(inst(2, 4), 20).unwrap(), brute);
    }

    #[test]
    fn enumeration_and_table_agree() {
        for k in 2..=5 {
            for s in 1..=4 {
                let t = build_table(inst(k, s), 2000).unwrap().cumulative();
                for x in (0..=2000).step_by(37) {
                    assert_eq!(summatory_enumerate(inst(k, s), x), t[x as usize], "k={k} s={s} x={x}");
                }
            }
        }
    }

    #[test]
    fn shared_memo_gives_same_answers() {
        let mut shared = RecursiveCounter::new(Counter::default(), 2);
        for x in (0..3000).rev().step_by(11) {
            let fresh = summatory_recursive(inst(2, 5), x).unwrap();
            assert_eq!(shared.summatory(5, x).unwrap(), fresh);
        }
    }

    #[test]
    fn partitioned_enumeration_is_deterministic() {
        let seq = summatory_enumerate(inst(3, 3), 50_000);
        for parts in [1, 2, 3, 7, 100] {
            assert_eq!(summatory_enumerate_partitioned(inst(3, 3), 50_000, parts), seq);
        }
    }

    #[test]
    fn monotone_in_x() {
        let mut prev = NatCount::ZERO;
        for x in 0..2000 {
            let v = summatory_fast(inst(3, 3), x).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn large_cutoff_split() {
        // u64 range with k = 4: about 2 * 2^15 roots
        let x = 1u64 << 62;
        let v = summatory_split_s2(4, x).unwrap();
        let rec = summatory_recursive(inst(4, 2), x).unwrap();
        assert_eq!(v, rec);
        assert!(v.to_f64() > 0.8 * (x as f64).sqrt());
    }
}
