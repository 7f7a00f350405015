//! Modulation functions of the eight-pulse cycle, their Fourier series and the
//! resonance condition that selects one collective nuclear transition.
//!
//! Time is measured in µs and frequencies are angular (rad/µs, quoted as MHz).

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{invalid, Error, Result};
use crate::spin::Spin;

/// Toggling-frame sign of `S_x` on each quarter-`τ` segment of one period `2τ`.
const H_X: [i8; 8] = [0, 0, -1, 1, 0, 0, 1, -1];

/// `sin(kπ/4)` for `k = 0..8`, written out so multiples of π/4 are exact.
const SIN_QUARTER: [f64; 8] = [0.0, FRAC_1_SQRT_2, 1.0, FRAC_1_SQRT_2, 0.0, -FRAC_1_SQRT_2, -1.0, -FRAC_1_SQRT_2];

fn sin_quarter(k: u64) -> f64 {
    SIN_QUARTER[(k % 8) as usize]
}

fn cos_quarter(k: u64) -> f64 {
    SIN_QUARTER[((k + 2) % 8) as usize]
}

/// Segment index `0..8` of `t` within its period.
fn segment(t: f64, tau: f64) -> usize {
    let s = (t / tau).rem_euclid(2.0);
    ((s * 4.0).floor() as usize).min(7)
}

/// `(h_x(t), h_y(t))` for delay `tau`, with `h_y(t) = h_x(t + τ/2)`.
pub fn modulation_value(t: f64, tau: f64) -> (i8, i8) {
    let hx = H_X[segment(t, tau)];
    let hy = H_X[segment(t + 0.5 * tau, tau)];
    (hx, hy)
}

/// Cosine and sine coefficients of `h_x` at harmonic `ω_l = πl/τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierPair {
    pub p: f64,
    pub q: f64,
}

/// Fourier coefficients of `h_x` by exact integration over the eight segments.
///
/// With `s = t/τ`, `P_l = ∫₀² h(s) cos(πls) ds` and the segment boundaries
/// sit at multiples of 1/4, so every term is a sine or cosine of `lkπ/4`.
pub fn fourier_coefficients(l: u32) -> FourierPair {
    if l == 0 || l % 2 == 0 {
        return FourierPair { p: 0.0, q: 0.0 };
    }
    let l = l as u64;
    let (mut p, mut q) = (0.0, 0.0);
    for (k, &h) in H_X.iter().enumerate() {
        if h == 0 {
            continue;
        }
        let (a, b) = (l * k as u64, l * (k as u64 + 1));
        p += h as f64 * (sin_quarter(b) - sin_quarter(a));
        q += h as f64 * (cos_quarter(a) - cos_quarter(b));
    }
    let norm = PI * l as f64;
    FourierPair { p: p / norm, q: q / norm }
}

/// Effective flip-flop strength `𝒜'` produced by harmonic `ell`.
///
/// Keeping only the resonant terms leaves `𝒜/2·√(P² + Q²)` once the electron
/// axes are rotated so that the coupling takes the `S_±` form.
pub fn effective_coupling_at(a_zeta: f64, ell: u32) -> Result<f64> {
    if ell % 2 == 0 {
        return Err(Error::EvenHarmonic(ell));
    }
    let c = fourier_coefficients(ell);
    Ok(0.5 * a_zeta * c.p.hypot(c.q))
}

/// `𝒜'` for the default harmonic `ℓ* = 3`, i.e. `(2+√2)/(3π)·𝒜`.
pub fn effective_coupling(a_zeta: f64) -> f64 {
    a_zeta * effective_scale()
}

/// `(2+√2)/(3π)`.
pub fn effective_scale() -> f64 {
    (2.0 + 2f64.sqrt()) / (3.0 * PI)
}

/// Delay `τ = ℓπ/(ζω + δ)` that puts harmonic `ell` on the `ζ` transition.
pub fn resonance_delay(zeta: u8, omega_zn: f64, ell: u32, delta: f64) -> Result<f64> {
    if ell % 2 == 0 {
        return Err(Error::EvenHarmonic(ell));
    }
    let w = zeta as f64 * omega_zn + delta;
    if !(w > 0.0) {
        return Err(invalid("delta", format!("ζω + δ = {w} must be positive")));
    }
    Ok(ell as f64 * PI / w)
}

/// Shift `(ζ² − 2Iζ)Δ_Q` of the `Δm = ζ` transition out of `m = -I`.
pub fn quadrupolar_shift(spin: Spin, zeta: u8, delta_q: f64) -> f64 {
    let z = zeta as f64;
    (z * z - 2.0 * spin.value() * z) * delta_q
}

/// A tuned pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub tau: f64,
    pub ell_star: u32,
    pub zeta: u8,
    pub delta: f64,
}

impl PulseSchedule {
    pub fn tuned(zeta: u8, omega_zn: f64, ell_star: u32, delta: f64) -> Result<Self> {
        let tau = resonance_delay(zeta, omega_zn, ell_star, delta)?;
        Ok(Self { tau, ell_star, zeta, delta })
    }

    /// Harmonics `ℓ` for which `ω_ℓ` hits `ω` to within `rel_tol`.
    pub fn resonant_harmonics(&self, omega: f64, max_ell: u32, rel_tol: f64) -> Vec<u32> {
        (1..=max_ell)
            .step_by(2)
            .filter(|&l| ((PI * l as f64 / self.tau) - omega).abs() <= rel_tol * omega)
            .collect()
    }
}
