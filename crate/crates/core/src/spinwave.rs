//! Ladder prefactors of the collective operators `Φ_ζ^±` and the mode-resolved
//! coupling strengths.
//!
//! `Φ_1^+ = Σ_j a_{1,j}(I_+ I_z + I_z I_+)_j` and `Φ_2^+ = Σ_j a_{2,j}(I_+)²_j`
//! each raise one site by `ζ`; acting on `|m⟩` they produce `P_+^{(ζ)}(m)|m+ζ⟩`.

use serde::{Deserialize, Serialize};

use crate::bath::HyperfineBath;
use crate::error::{invalid, Error, Result};
use crate::numeric::compensated_sum;
use crate::spin::Spin;

/// Direction of a collective ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

fn ladder(spin: Spin, m: f64, s: f64) -> f64 {
    (spin.casimir() - m * (m + s)).max(0.0).sqrt()
}

/// `P_±^{(ζ)}(m)`: matrix element of the single-site `ζ`-raising (lowering) operator.
pub fn ladder_prefactor(zeta: u8, sign: Sign, m: f64, spin: Spin) -> Result<f64> {
    spin.index_of(m)?;
    let s = sign.value();
    match zeta {
        1 => Ok((2.0 * m + s) * ladder(spin, m, s)),
        2 => Ok(ladder(spin, m, s) * ladder(spin, m + s, s)),
        _ => Err(invalid("zeta", format!("mode index must be 1 or 2, got {zeta}"))),
    }
}

/// Prefactor table indexed by level (`0 ↔ m = -I`).
pub fn prefactor_table(zeta: u8, sign: Sign, spin: Spin) -> Result<Vec<f64>> {
    spin.levels().map(|m| ladder_prefactor(zeta, sign, m, spin)).collect()
}

/// Collective strength and per-site weights of mode `ζ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCouplings {
    pub zeta: u8,
    /// `𝒜_ζ` in MHz.
    pub a_zeta: f64,
    /// `a_{ζ,j}`, summing to 1.
    pub a_mode: Vec<f64>,
}

impl ModeCouplings {
    /// Mode with explicit weights, normalised to unit sum.
    pub fn from_weights(zeta: u8, a_zeta: f64, weights: &[f64]) -> Result<Self> {
        let total = compensated_sum(weights.iter().copied());
        if total == 0.0 {
            return Err(Error::ModeDecoupled(zeta));
        }
        Ok(Self { zeta, a_zeta, a_mode: weights.iter().map(|w| w / total).collect() })
    }

    pub fn sum_sq(&self) -> f64 {
        compensated_sum(self.a_mode.iter().map(|a| a * a))
    }
}

fn angular(zeta: u8, theta: f64) -> f64 {
    let s = match zeta {
        1 => (2.0 * theta).sin(),
        _ => theta.sin().powi(2),
    };
    if s.abs() < 1e-12 {
        0.0
    } else {
        s
    }
}

/// `𝒜_ζ = ½Σ_j A^j B_Q^j s_ζ(θ^j)/ω` and `a_{ζ,j} ∝ A^j B_Q^j s_ζ(θ^j)`.
pub fn mode_couplings(bath: &HyperfineBath, omega_zn: f64, zeta: u8) -> Result<ModeCouplings> {
    if !(omega_zn > 0.0) {
        return Err(invalid("omega_zn", "must be positive"));
    }
    if zeta != 1 && zeta != 2 {
        return Err(invalid("zeta", format!("mode index must be 1 or 2, got {zeta}")));
    }
    let w: Vec<f64> = (0..bath.len())
        .map(|j| bath.hyperfine(j) * bath.b_q.at(j) * angular(zeta, bath.theta.at(j)) / omega_zn)
        .collect();
    if w.iter().all(|x| *x == 0.0) {
        return Err(Error::ModeDecoupled(zeta));
    }
    let a_zeta = 0.5 * compensated_sum(w.iter().copied());
    ModeCouplings::from_weights(zeta, a_zeta, &w)
}

/// Mode with both angular prefactors set to one, as used for the figure sweeps.
pub fn unit_mode_couplings(bath: &HyperfineBath, omega_zn: f64, zeta: u8) -> Result<ModeCouplings> {
    if !(omega_zn > 0.0) {
        return Err(invalid("omega_zn", "must be positive"));
    }
    if zeta != 1 && zeta != 2 {
        return Err(invalid("zeta", format!("mode index must be 1 or 2, got {zeta}")));
    }
    let w: Vec<f64> = (0..bath.len()).map(|j| bath.hyperfine(j) * bath.b_q.at(j) / omega_zn).collect();
    let a_zeta = 0.5 * compensated_sum(w.iter().copied());
    ModeCouplings::from_weights(zeta, a_zeta, &w)
}

/// `F_ζ`: `(1−2I)√(2I)` for ζ=1 and `2√(I(2I−1))` for ζ=2.
pub fn mode_factor(zeta: u8, spin: Spin) -> f64 {
    let i = spin.value();
    match zeta {
        1 => (1.0 - 2.0 * i) * (2.0 * i).sqrt(),
        _ => 2.0 * (i * (2.0 * i - 1.0)).sqrt(),
    }
}

/// Collective rate `g_ζ = |F_ζ|·𝒜'·√(Σa²)`.
pub fn collective_rate(zeta: u8, spin: Spin, a_zeta_prime: f64, sum_a_sq: f64) -> f64 {
    mode_factor(zeta, spin).abs() * a_zeta_prime * sum_a_sq.sqrt()
}
