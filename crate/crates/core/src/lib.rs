//! Exact and asymptotic counts of positive integer points with
//! `x_1^k + ... + x_s^k <= x`, with the sawtooth and exponential-sum checks
//! behind the error term and tools to measure residual growth.

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod exact;
pub mod expsum;
pub mod instance;
pub mod natcount;
pub mod precision;
pub mod residual;
pub mod sawtooth;
pub mod verify;

pub use error::{Error, Result};
pub use instance::Instance;
pub use natcount::NatCount;
pub use precision::PrecReal;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/index.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/exact.md")]
    pub struct ExactCounting;
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    pub struct Asymptotics;
    #[doc = include_str!("../../../book/src/sawtooth.md")]
    pub struct Sawtooth;
    #[doc = include_str!("../../../book/src/residuals.md")]
    pub struct Residuals;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct CommandLine;
}
