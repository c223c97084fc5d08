//! Digital over-the-air computation toolkit.
//!
//! * [`symfunc`]: symmetric functions on quantization histograms.
//! * [`sampling`]: pyramid sampling sets Ω_p, transition sets, the sampling
//!   and majority operators, and the δ/ε trade-off metrics.
//! * [`design`]: max–min constellation design and overlap verification.
//! * [`modulations`]: PAM, QAM, hexagonal and PSK constellations.
//! * [`channel`]: quantization, MAC superposition with AWGN, and decoders.
//! * [`harness`]: Monte Carlo MSE estimation and figure presets.

pub mod channel;
pub mod combinatorics;
pub mod constellation;
pub mod design;
pub mod error;
pub mod exec;
pub mod harness;
pub mod modulations;
pub mod sampling;
pub mod symfunc;

pub use constellation::{Constellation, PowerConvention};
pub use error::{Error, Result};
pub use exec::Workers;
pub use symfunc::{FunctionKind, FunctionSpec, Histogram};

use num_bigint::BigUint;

/// Size caps for exhaustive enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest histogram set (or transition set) that may be enumerated.
    pub enumeration_cap: u64,
    /// Largest input space `q^K` for brute-force Lipschitz constants,
    /// which compare every pair of inputs.
    pub lipschitz_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { enumeration_cap: 5_000_000, lipschitz_cap: 4096 }
    }
}

impl Limits {
    pub(crate) fn check(&self, size: &BigUint, what: impl FnOnce() -> String) -> Result<()> {
        if *size > BigUint::from(self.enumeration_cap) {
            return Err(Error::Capacity { what: what(), size: size.to_string(), cap: self.enumeration_cap });
        }
        Ok(())
    }
}
