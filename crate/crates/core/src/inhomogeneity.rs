//! Quadrupolar inhomogeneity at full polarisation.
//!
//! With every nucleus in `m = -I`, one flip-flop creates a single spin-wave
//! excitation. Site `j` excited by `ζ` picks up a phase from its own
//! quadrupolar shift, which dephases the bright mode `Σ_j a_j|j⟩` into the
//! dark modes orthogonal to it.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::dynamics::SIX_STATES;
use crate::error::{invalid, Result};
use crate::linalg::{expm_multiply, C64};
use crate::numeric::{compensated_sum, mean_std};
use crate::rng::{child_seed, stream};
use crate::spin::Spin;
use crate::spinwave::{ladder_prefactor, Sign};
use crate::sweep::SweepResult;

/// Per-site quadrupolar shifts `Δ_Q^j` (MHz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadrupoleShifts {
    pub delta_q: Vec<f64>,
    pub sigma: f64,
    pub mean: f64,
}

pub fn sample_shifts_with<R: Rng + ?Sized>(sigma: f64, mean: f64, n: usize, rng: &mut R) -> Result<QuadrupoleShifts> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", "must be finite and non-negative"));
    }
    let delta_q = if sigma == 0.0 {
        vec![mean; n]
    } else {
        let normal = Normal::new(mean, sigma).map_err(|e| invalid("sigma", e.to_string()))?;
        (0..n).map(|_| normal.sample(rng)).collect()
    };
    Ok(QuadrupoleShifts { delta_q, sigma, mean })
}

/// I.i.d. normal shifts reproducible from `seed`.
pub fn sample_shifts(sigma: f64, mean: f64, n: usize, seed: u64) -> Result<QuadrupoleShifts> {
    sample_shifts_with(sigma, mean, n, &mut stream(seed, 0))
}

/// Which phase the excited site accumulates per unit shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseConvention {
    /// `ζ² Δ_Q^j`.
    #[default]
    Squared,
    /// `(ζ² − 2Iζ) Δ_Q^j`, the shift of the `−I → −I+ζ` transition.
    Transition,
}

impl PhaseConvention {
    pub fn factor(self, zeta: u8, spin: Spin) -> f64 {
        let z = zeta as f64;
        match self {
            PhaseConvention::Squared => z * z,
            PhaseConvention::Transition => z * z - 2.0 * spin.value() * z,
        }
    }
}

/// `⟨1|e^{−iH_Q t}|1⟩ = Σ_j a_j² e^{−iζ²Δ_j t} / Σ_j a_j²`.
pub fn survival_amplitude(shifts: &QuadrupoleShifts, a: &[f64], zeta: u8, t: f64) -> C64 {
    let z2 = (zeta as f64).powi(2);
    let norm = compensated_sum(a.iter().map(|x| x * x));
    let re = compensated_sum(a.iter().zip(&shifts.delta_q).map(|(x, d)| x * x * (z2 * d * t).cos()));
    let im = compensated_sum(a.iter().zip(&shifts.delta_q).map(|(x, d)| -x * x * (z2 * d * t).sin()));
    C64::new(re / norm, im / norm)
}

/// Electron plus one excitation: basis `|↑,0⟩` (index 0) and `|↓,j⟩`
/// (indices `1..=N`). `|↓,0⟩` is decoupled and kept implicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationModel {
    /// Coupling of `|↑,0⟩` to `|↓,j⟩`; `√Σg² = 𝒢₊`.
    pub g: Vec<f64>,
    /// Energy of `|↓,j⟩`.
    pub eps: Vec<f64>,
    pub g_plus: f64,
}

impl SingleExcitationModel {
    pub fn new(a: &[f64], g_plus: f64, site_energy: Vec<f64>) -> Result<Self> {
        if a.len() != site_energy.len() {
            return Err(invalid("shifts", "one shift per site required"));
        }
        let norm = compensated_sum(a.iter().map(|x| x * x)).sqrt();
        if !(norm > 0.0) {
            return Err(invalid("a", "couplings vanish"));
        }
        Ok(Self { g: a.iter().map(|x| g_plus * x / norm).collect(), eps: site_energy, g_plus })
    }

    /// Model for `shifts` under `convention`.
    pub fn from_shifts(
        a: &[f64],
        g_plus: f64,
        shifts: &QuadrupoleShifts,
        zeta: u8,
        spin: Spin,
        convention: PhaseConvention,
    ) -> Result<Self> {
        let f = convention.factor(zeta, spin);
        Self::new(a, g_plus, shifts.delta_q.iter().map(|d| f * d).collect())
    }

    pub fn dim(&self) -> usize {
        self.g.len() + 1
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let mut top = C64::new(0.0, 0.0);
        for j in 0..self.g.len() {
            top += x[j + 1] * self.g[j];
            y[j + 1] = x[0] * self.g[j] + x[j + 1] * self.eps[j];
        }
        y[0] = top;
    }

    /// Off-diagonal part has norm `‖g‖₂`, the diagonal `max |ε|`.
    fn norm_bound(&self) -> f64 {
        let g = compensated_sum(self.g.iter().map(|x| x * x)).sqrt();
        g + self.eps.iter().fold(0.0_f64, |m, e| m.max(e.abs()))
    }

    pub fn evolve(&self, v: &[C64], t: f64) -> Vec<C64> {
        expm_multiply(|x, y| self.apply(x, y), self.norm_bound(), v, t)
    }

    /// Write/read fidelity for input `(α, β)` given the two propagated vectors.
    fn cycle(c: &[C64], d: &[C64], alpha: C64, beta: C64) -> f64 {
        let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
        let written = b2 * a2 * c[0].norm_sqr();
        let dark: f64 = d[1..].iter().map(|x| x.norm_sqr()).sum();
        written + (d[0] * a2 - b2).norm_sqr() + a2 * b2 * dark
    }

    /// Per-state fidelities for the six inputs.
    ///
    /// The write leaves `αc₀|0⟩` with the electron up and `αΣc_j|j⟩ + β|0⟩`
    /// with it down. After re-initialising to `|↓⟩` only the excited part
    /// evolves, giving `d = U(t2) Σ c_j|↓,j⟩`.
    pub fn six_state_fidelity(&self, t1: f64, t2: f64) -> [f64; 6] {
        let mut start = vec![C64::new(0.0, 0.0); self.dim()];
        start[0] = C64::new(1.0, 0.0);
        let c = self.evolve(&start, t1);
        let mut excited = c.clone();
        excited[0] = C64::new(0.0, 0.0);
        let d = self.evolve(&excited, t2);
        SIX_STATES.map(|(a, b)| Self::cycle(&c, &d, a, b))
    }
}

/// Six-state mean transfer fidelity against `σ/𝒢₊` at `t1 = t2 = π/(2𝒢₊)`.
///
/// Rates are in units of `𝒢₊ = 1`. Columns `fid_zζ_mean`, `fid_zζ_std`.
pub fn transfer_fidelity_vs_sigma(
    a: &[f64],
    sigma_grid: &[f64],
    zeta: u8,
    spin: Spin,
    convention: PhaseConvention,
    n_realisations: usize,
    seed: u64,
) -> Result<SweepResult> {
    if n_realisations == 0 {
        return Err(invalid("n_realisations", "must be positive"));
    }
    let t = FRAC_PI_2;
    let (mut means, mut stds) = (Vec::new(), Vec::new());
    for (i, &sigma) in sigma_grid.iter().enumerate() {
        let values: Vec<f64> = (0..n_realisations)
            .into_par_iter()
            .map(|r| {
                let mut rng = stream(child_seed(seed, i as u64), r as u64);
                let shifts = sample_shifts_with(sigma, 0.0, a.len(), &mut rng)?;
                let model = SingleExcitationModel::from_shifts(a, 1.0, &shifts, zeta, spin, convention)?;
                Ok(model.six_state_fidelity(t, t).iter().sum::<f64>() / 6.0)
            })
            .collect::<Result<_>>()?;
        let (m, s) = mean_std(&values);
        means.push(m);
        stds.push(s);
    }
    let mut out = SweepResult::new("sigma_over_g", sigma_grid.to_vec());
    out.push(format!("fid_z{zeta}_mean"), means);
    out.push(format!("fid_z{zeta}_std"), stds);
    out.meta("n_sites", a.len());
    out.meta("n_realisations", n_realisations);
    out.meta("seed", seed);
    Ok(out)
}

/// Couplings of the spin-wave modes to `|0⟩` through `Φ_ζ^−`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarkModeReport {
    /// Largest `|⟨0|Φ^−|α⟩|` over the dark modes `α ≠ 1`.
    pub max_dark: f64,
    /// `⟨0|Φ^−|1⟩` for the bright mode.
    pub bright: f64,
    /// `Σ_α |⟨0|Φ^−|α⟩|²`.
    pub total_sq: f64,
}

/// Complete `ν_1 = a/|a|` to an orthonormal basis with a Householder
/// reflection and evaluate every mode's coupling to the polarised state.
pub fn dark_mode_check(a: &[f64], zeta: u8, spin: Spin) -> Result<DarkModeReport> {
    let n = a.len();
    let norm = compensated_sum(a.iter().map(|x| x * x)).sqrt();
    if n == 0 || !(norm > 0.0) {
        return Err(invalid("a", "need at least one non-zero coupling"));
    }
    let prefactor = ladder_prefactor(zeta, Sign::Minus, -spin.value() + zeta as f64, spin)?;
    let nu: Vec<f64> = a.iter().map(|x| x / norm).collect();
    // H = I − 2wwᵀ/(wᵀw), w = e₁ + s·ν with s = sign(ν₁), so H e₁ = −s·ν.
    let s = if nu[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w: Vec<f64> = nu.iter().map(|x| s * x).collect();
    w[0] += 1.0;
    let ww = compensated_sum(w.iter().map(|x| x * x));
    let wa = compensated_sum(w.iter().zip(a).map(|(x, y)| x * y));
    // Column α of H dotted with a: a_α − 2 w_α (w·a)/(w·w).
    let coupling = |alpha: usize| prefactor * (a[alpha] - 2.0 * w[alpha] * wa / ww);
    let bright = -s * coupling(0);
    let mut max_dark: f64 = 0.0;
    let mut total = bright * bright;
    for alpha in 1..n {
        let c = coupling(alpha);
        max_dark = max_dark.max(c.abs());
        total += c * c;
    }
    Ok(DarkModeReport { max_dark, bright, total_sq: total })
}
