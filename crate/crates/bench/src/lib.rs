//! Shared fixtures for the kernel benchmarks.

use magnon_core::bath::{sample_thermal_configuration, HyperfineBath};
use magnon_core::spinwave::unit_mode_couplings;
use magnon_core::{ModeCouplings, NuclearConfiguration, Spin};

/// Uniform bath and a thermal configuration drawn from a fixed seed.
pub fn fixture(n: usize, polarisation: f64) -> (HyperfineBath, NuclearConfiguration) {
    let bath = HyperfineBath::uniform(n, 65_000.0, Spin::THREE_HALVES).expect("bath");
    let config = sample_thermal_configuration(polarisation, Spin::THREE_HALVES, n, 11).expect("config");
    (bath, config)
}

/// Mode couplings with unit angular prefactors at `ω_Z^n = 50`.
pub fn mode(bath: &HyperfineBath, zeta: u8) -> ModeCouplings {
    unit_mode_couplings(bath, 50.0, zeta).expect("mode")
}
