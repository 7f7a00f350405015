use thiserror::Error;

/// Errors raised by the simulation kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("lattice box contains no sites above the coupling floor")]
    DegenerateLattice,

    #[error("polarisation {0} >= 1 has no finite spin temperature; use the fully polarised configuration")]
    FullPolarisation(f64),

    #[error("level m = {m} is not in the spin-{spin} manifold")]
    InvalidLevel { m: f64, spin: f64 },

    #[error("spin-wave mode ζ={0} is decoupled (angular prefactor vanishes on every site)")]
    ModeDecoupled(u8),

    #[error("no upward transitions available from this configuration (Ω₊ = 0)")]
    NoUpwardTransitions,

    #[error("harmonic ℓ={0} must be odd")]
    EvenHarmonic(u32),

    #[error("truncation exceeded: boundary weight {occupation:.3e} > tolerance {tol:.3e} at k*={k_star}")]
    TruncationExceeded { k_star: usize, occupation: f64, tol: f64 },

    #[error("truncation depth would exceed hard cap {cap}")]
    TruncationCap { cap: usize },

    #[error("flat fidelity landscape: upward coupling rate is zero")]
    FlatLandscape,

    #[error("Hilbert-space dimension {dim} exceeds oracle cap (N={sites}, max {max_sites})")]
    DimensionCap { dim: usize, sites: usize, max_sites: usize },

    #[error("closed-form chain elements require I = 3/2, got I = {0}")]
    UnsupportedSpin(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
