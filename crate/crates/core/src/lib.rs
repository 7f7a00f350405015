//! Pulse-driven central spin coupled to a quadrupolar nuclear ensemble.
//!
//! The crate builds hyperfine baths, reduces the flip-flop dynamics onto a
//! chain of collective nuclear states, runs the write/read memory protocol and
//! checks the reduction against brute-force evolution for small ensembles.

pub mod bath;
pub mod chain;
pub mod dynamics;
pub mod error;
pub mod inhomogeneity;
pub mod linalg;
pub mod numeric;
pub mod oracle;
pub mod pulse;
pub mod rng;
pub mod spin;
pub mod spinwave;
pub mod sweep;

pub use chain::{ChainBasis, ChainRates};
pub use dynamics::{FidelityReport, HybridDensity, HybridState};
pub use bath::{BathParams, HyperfineBath, NuclearConfiguration};
pub use error::{Error, Result};
pub use pulse::{FourierPair, PulseSchedule};
pub use spin::Spin;
pub use spinwave::{ModeCouplings, Sign};
pub use sweep::SweepResult;
