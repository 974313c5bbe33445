use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exponent `k` together with a number of summands `s`.
///
/// `theorem_valid` records whether the pair lies in the range `k >= 4`,
/// `2 <= s <= k + 1` where the two-term asymptotic is proved. Pairs outside
/// that range are still accepted; results computed for them are exploratory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Instance {
    k: u32,
    s: u32,
    theorem_valid: bool,
}

impl Instance {
    pub fn new(k: u32, s: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInstance(format!("exponent k = {k} must be at least 2")));
        }
        if s < 1 {
            return Err(Error::InvalidInstance(format!("summand count s = {s} must be at least 1")));
        }
        Ok(Self { k, s, theorem_valid: k >= 4 && (2..=k + 1).contains(&s) })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn theorem_valid(&self) -> bool {
        self.theorem_valid
    }

    /// The same exponent with a different number of summands.
    pub fn with_s(&self, s: u32) -> Result<Self> {
        Self::new(self.k, s)
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, s={})", self.k, self.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem_range() {
        for k in 2..12 {
            for s in 1..15 {
                let inst = Instance::new(k, s).unwrap();
                assert_eq!(inst.theorem_valid(), k >= 4 && s >= 2 && s <= k + 1, "{inst}");
            }
        }
    }

    #[test]
    fn rejects_small_parameters() {
        assert!(Instance::new(1, 2).is_err());
        assert!(Instance::new(3, 0).is_err());
    }
}
