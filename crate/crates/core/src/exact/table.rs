//! Dense tables of `r_{k,s}(m)` for `1 <= m <= x`, built by repeated additive
//! convolution with the indicator of positive k-th powers.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::natcount::NatCount;

/// Cells per work unit; 32K words is 256 KiB, about one L2 cache.
pub const DEFAULT_CHUNK: usize = 1 << 15;

/// One gibibyte.
pub const DEFAULT_MEMORY_BUDGET: u128 = 1 << 30;

#[derive(Debug, Clone)]
pub struct TableOptions {
    pub memory_budget_bytes: u128,
    pub chunk_len: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self { memory_budget_bytes: DEFAULT_MEMORY_BUDGET, chunk_len: DEFAULT_CHUNK }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cells {
    Word(Vec<u64>),
    Big(Vec<BigUint>),
}

/// `r_{k,s}(m)` for every `0 <= m <= limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountTable {
    instance: Instance,
    limit: u64,
    cells: Cells,
}

impl CountTable {
    pub fn instance(&self) -> Instance {
        self.instance
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `r_{k,s}(m)`; zero for `m = 0`.
    ///
    /// # Panics
    /// When `m > limit`.
    pub fn get(&self, m: u64) -> NatCount {
        assert!(m <= self.limit, "index {m} beyond table limit {}", self.limit);
        match &self.cells {
            Cells::Word(v) => NatCount::Small(v[m as usize]),
            Cells::Big(v) => NatCount::from_big(v[m as usize].clone()),
        }
    }

    /// Whether the cells had to be promoted to arbitrary-size integers.
    pub fn is_promoted(&self) -> bool {
        matches!(self.cells, Cells::Big(_))
    }

    /// Sum of all entries, the summatory value at `limit`.
    pub fn total(&self) -> NatCount {
        match &self.cells {
            Cells::Word(v) => NatCount::from_u128(v.iter().map(|&c| u128::from(c)).sum()),
            Cells::Big(v) => NatCount::from_big(v.iter().sum()),
        }
    }

    /// Running sums: entry `x` is the summatory value at `x`.
    pub fn cumulative(&self) -> Vec<NatCount> {
        let mut acc = NatCount::ZERO;
        (0..=self.limit)
            .map(|m| {
                acc += &self.get(m);
                acc.clone()
            })
            .collect()
    }

    /// Nonzero entries as `(m, r(m))`.
    pub fn nonzero(&self) -> Vec<(u64, NatCount)> {
        (0..=self.limit).map(|m| (m, self.get(m))).filter(|(_, c)| !c.is_zero()).collect()
    }
}

/// Positive k-th powers not exceeding `x`, ascending.
pub fn powers_up_to(k: u32, x: u64) -> Vec<u64> {
    (1u64..)
        .map(|m| u128::from(m).checked_pow(k))
        .take_while(|p| p.is_some_and(|p| p <= u128::from(x)))
        .map(|p| p.unwrap() as u64)
        .collect()
}

pub fn build_table(inst: Instance, x: u64) -> Result<CountTable> {
    build_table_with(inst, x, &TableOptions::default())
}

pub fn build_table_with(inst: Instance, x: u64, opts: &TableOptions) -> Result<CountTable> {
    if x < 1 {
        return Err(Error::InvalidArgument("table limit must be at least 1".into()));
    }
    let len = usize::try_from(x)
        .ok()
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Error::InvalidArgument(format!("table limit {x} does not fit in memory")))?;
    check_budget(x, len, 8, opts)?;
    let chunk = opts.chunk_len.max(1);

    let powers = powers_up_to(inst.k(), x);
    let mut layer = vec![0u64; len];
    for &p in &powers {
        layer[p as usize] = 1;
    }
    let mut cells = Cells::Word(layer);

    for _ in 1..inst.s() {
        cells = match cells {
            Cells::Word(prev) => {
                // Every new cell is a sub-sum of the previous layer, so a
                // layer total within u64 rules out overflow anywhere.
                let total: u128 = prev.iter().map(|&c| u128::from(c)).sum();
                if total <= u128::from(u64::MAX) {
                    Cells::Word(convolve_words(&prev, &powers, chunk))
                } else {
                    check_budget(x, len, 48, opts)?;
                    let prev: Vec<BigUint> = prev.into_iter().map(BigUint::from).collect();
                    Cells::Big(convolve_big(&prev, &powers, chunk))
                }
            }
            Cells::Big(prev) => Cells::Big(convolve_big(&prev, &powers, chunk)),
        };
    }
    Ok(CountTable { instance: inst, limit: x, cells })
}

fn check_budget(x: u64, len: usize, bytes_per_cell: u128, opts: &TableOptions) -> Result<()> {
    // two live layers during a convolution step
    let needed = 2 * bytes_per_cell * len as u128;
    if needed > opts.memory_budget_bytes {
        return Err(Error::ResourceLimit { limit: x, needed, budget: opts.memory_budget_bytes });
    }
    Ok(())
}

fn convolve_words(prev: &[u64], powers: &[u64], chunk: usize) -> Vec<u64> {
    let mut out = vec![0u64; prev.len()];
    out.par_chunks_mut(chunk).enumerate().for_each(|(ci, block)| {
        let base = ci * chunk;
        let end = base + block.len();
        for &p in powers {
            let p = p as usize;
            if p >= end {
                break;
            }
            let start = base.max(p);
            let src = &prev[start - p..end - p];
            for (dst, &v) in block[start - base..].iter_mut().zip(src) {
                *dst += v;
            }
        }
    });
    out
}

fn convolve_big(prev: &[BigUint], powers: &[u64], chunk: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::default(); prev.len()];
    out.par_chunks_mut(chunk).enumerate().for_each(|(ci, block)| {
        let base = ci * chunk;
        let end = base + block.len();
        for &p in powers {
            let p = p as usize;
            if p >= end {
                break;
            }
            let start = base.max(p);
            for m in start..end {
                block[m - base] += &prev[m - p];
            }
        }
    });
    out
}
