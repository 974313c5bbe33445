use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Exact nonnegative integer.
///
/// Values that fit a machine word stay in a `u64`; arithmetic that would
/// overflow promotes to a `BigUint`. Equality and ordering are by value,
/// independent of representation.
#[derive(Clone, Debug)]
pub enum NatCount {
    Small(u64),
    Big(BigUint),
}

impl NatCount {
    pub const ZERO: NatCount = NatCount::Small(0);

    pub fn from_u128(v: u128) -> Self {
        match u64::try_from(v) {
            Ok(small) => NatCount::Small(small),
            Err(_) => NatCount::Big(BigUint::from(v)),
        }
    }

    pub fn from_big(v: BigUint) -> Self {
        match v.to_u64() {
            Some(small) => NatCount::Small(small),
            None => NatCount::Big(v),
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            NatCount::Small(v) => Some(*v),
            NatCount::Big(v) => v.to_u64(),
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        match self {
            NatCount::Small(v) => BigUint::from(*v),
            NatCount::Big(v) => v.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            NatCount::Small(v) => *v as f64,
            NatCount::Big(v) => v.to_f64().unwrap_or(f64::INFINITY),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            NatCount::Small(v) => *v == 0,
            NatCount::Big(v) => v.is_zero(),
        }
    }

    /// `self - rhs`, or `None` when the result would be negative.
    pub fn checked_sub(&self, rhs: &NatCount) -> Option<NatCount> {
        match (self, rhs) {
            (NatCount::Small(a), NatCount::Small(b)) => a.checked_sub(*b).map(NatCount::Small),
            _ => {
                let (a, b) = (self.to_biguint(), rhs.to_biguint());
                (a >= b).then(|| NatCount::from_big(a - b))
            }
        }
    }
}

impl Default for NatCount {
    fn default() -> Self {
        NatCount::ZERO
    }
}

impl From<u64> for NatCount {
    fn from(v: u64) -> Self {
        NatCount::Small(v)
    }
}

impl From<BigUint> for NatCount {
    fn from(v: BigUint) -> Self {
        NatCount::from_big(v)
    }
}

impl PartialEq for NatCount {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for NatCount {}

impl PartialEq<u64> for NatCount {
    fn eq(&self, other: &u64) -> bool {
        self.to_u64() == Some(*other)
    }
}

impl Ord for NatCount {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NatCount::Small(a), NatCount::Small(b)) => a.cmp(b),
            _ => self.to_biguint().cmp(&other.to_biguint()),
        }
    }
}

impl PartialOrd for NatCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&NatCount> for &NatCount {
    type Output = NatCount;

    fn add(self, rhs: &NatCount) -> NatCount {
        match (self, rhs) {
            (NatCount::Small(a), NatCount::Small(b)) => match a.checked_add(*b) {
                Some(v) => NatCount::Small(v),
                None => NatCount::Big(BigUint::from(*a) + *b),
            },
            (NatCount::Big(a), NatCount::Small(b)) | (NatCount::Small(b), NatCount::Big(a)) => NatCount::Big(a + *b),
            (NatCount::Big(a), NatCount::Big(b)) => NatCount::Big(a + b),
        }
    }
}

impl Add for NatCount {
    type Output = NatCount;

    fn add(self, rhs: NatCount) -> NatCount {
        &self + &rhs
    }
}

impl AddAssign<&NatCount> for NatCount {
    fn add_assign(&mut self, rhs: &NatCount) {
        if let (NatCount::Small(a), NatCount::Small(b)) = (&mut *self, rhs) {
            if let Some(v) = a.checked_add(*b) {
                *a = v;
                return;
            }
        }
        *self = &*self + rhs;
    }
}

impl AddAssign<u64> for NatCount {
    fn add_assign(&mut self, rhs: u64) {
        *self += &NatCount::Small(rhs);
    }
}

impl Mul<u64> for &NatCount {
    type Output = NatCount;

    fn mul(self, rhs: u64) -> NatCount {
        match self {
            NatCount::Small(a) => NatCount::from_u128(u128::from(*a) * u128::from(rhs)),
            NatCount::Big(a) => NatCount::from_big(a * rhs),
        }
    }
}

impl Sum for NatCount {
    fn sum<I: Iterator<Item = NatCount>>(iter: I) -> Self {
        let mut acc = NatCount::ZERO;
        for v in iter {
            acc += &v;
        }
        acc
    }
}

impl<'a> Sum<&'a NatCount> for NatCount {
    fn sum<I: Iterator<Item = &'a NatCount>>(iter: I) -> Self {
        let mut acc = NatCount::ZERO;
        for v in iter {
            acc += v;
        }
        acc
    }
}

impl fmt::Display for NatCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatCount::Small(v) => write!(f, "{v}"),
            NatCount::Big(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for NatCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidArgument(format!("not a nonnegative integer: {s:?}")));
        }
        match s.parse::<u64>() {
            Ok(v) => Ok(NatCount::Small(v)),
            Err(_) => {
                BigUint::from_str(s).map(NatCount::from_big).map_err(|e| Error::InvalidArgument(format!("{s:?}: {e}")))
            }
        }
    }
}

// Serialized as decimal strings: summatory values exceed the 53-bit range that
// JSON consumers can hold in a number.
impl Serialize for NatCount {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NatCount {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_promotes_on_overflow() {
        let a = NatCount::Small(u64::MAX);
        let b = &a + &NatCount::Small(2);
        assert!(matches!(b, NatCount::Big(_)));
        assert_eq!(b.to_string(), "18446744073709551617");
        assert_eq!(b.checked_sub(&NatCount::Small(2)), Some(NatCount::Small(u64::MAX)));
    }

    #[test]
    fn equality_ignores_representation() {
        assert_eq!(NatCount::Big(BigUint::from(7u32)), NatCount::Small(7));
        assert!(NatCount::Small(3) < NatCount::Big(BigUint::from(u128::MAX)));
    }

    #[test]
    fn parse_and_serialize() {
        let v: NatCount = "340282366920938463463374607431768211455".parse().unwrap();
        assert_eq!(v, NatCount::from_u128(u128::MAX));
        assert_eq!(serde_json::to_string(&v).unwrap(), "\"340282366920938463463374607431768211455\"");
        assert!("-3".parse::<NatCount>().is_err());
        assert!("".parse::<NatCount>().is_err());
    }

    #[test]
    fn sub_never_negative() {
        assert_eq!(NatCount::Small(2).checked_sub(&NatCount::Small(3)), None);
    }
}
