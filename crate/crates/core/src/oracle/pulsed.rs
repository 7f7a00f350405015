//! Explicit composition of the eight-pulse cycle on the full space.
//!
//! Free evolution between pulses uses
//! `H' = ω ΣI_z + S_z[2ΣA^j I_z^j − Σ_ζ 𝒜_ζ(Φ_ζ^+ + Φ_ζ^−)]`;
//! pulses are instantaneous electron rotations `e^{−iφS_q}`. The `I_z²`
//! quadrupolar shift is left out.

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use super::space::{effective_hamiltonian, FullStateVector, ProductSpace};
use crate::bath::{HyperfineBath, NuclearConfiguration, SiteField};
use crate::chain::omega_rates;
use crate::error::{invalid, Error, Result};
use crate::linalg::{cdot, expm_multiply, SymmetricPropagator, C64};
use crate::pulse::PulseSchedule;
use crate::spin::Spin;
use crate::spinwave::{mode_couplings, ModeCouplings};

pub const MAX_PULSED_SITES: usize = 4;

type M2 = Matrix2<C64>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli(axis: usize) -> M2 {
    match axis {
        0 => M2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        1 => M2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        _ => M2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    }
}

/// `e^{−iφS_q}` for axis 0 = x, 1 = y, 2 = z.
fn rotation(axis: usize, phi: f64) -> M2 {
    M2::identity() * c((phi / 2.0).cos(), 0.0) - pauli(axis) * c(0.0, (phi / 2.0).sin())
}

/// Pulse group applied before each quarter segment of a cycle.
fn segment_pulses() -> [M2; 4] {
    let (x, y) = (0, 1);
    [
        rotation(y, FRAC_PI_2),
        rotation(x, -PI),
        rotation(x, FRAC_PI_2) * rotation(y, FRAC_PI_2),
        rotation(y, PI),
    ]
}

/// Accumulated pulse frame on each segment, and the closing pulse.
fn cycle_pulses() -> ([M2; 4], M2) {
    let mut frames = [M2::identity(); 4];
    let mut acc = M2::identity();
    for (f, p) in frames.iter_mut().zip(segment_pulses()) {
        acc = p * acc;
        *f = acc;
    }
    (frames, rotation(0, FRAC_PI_2))
}

/// Toggling-frame image of `S_z` on each of the eight segments of two cycles
/// and the resonant coupling it produces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ToggleCoupling {
    /// `(h_x, h_y, h_z)` per quarter segment.
    pub h: [[f64; 3]; 8],
    /// Coefficient of `𝒜_ζ Φ^+ S_−` in the period average.
    pub c_minus: C64,
    /// Coefficient of the counter-rotating `𝒜_ζ Φ^+ S_+`.
    pub c_plus: C64,
    /// Residual `S_z` coefficient.
    pub c_z: C64,
}

impl ToggleCoupling {
    /// Electron-frame angle `φ` with `𝒜_ζ c_− = |𝒜_ζ c_−| e^{iφ}`.
    pub fn phase(&self) -> f64 {
        self.c_minus.arg()
    }
}

/// Period average of `−h(t) e^{iζωt}` for delay `tau`.
pub fn toggling_coupling(zeta: u8, omega_zn: f64, tau: f64) -> ToggleCoupling {
    let (frames, close) = cycle_pulses();
    let full = close * frames[3];
    let sz = pauli(2) * c(0.5, 0.0);
    let w = zeta as f64 * omega_zn;
    let mut h = [[0.0; 3]; 8];
    let mut cs = [c(0.0, 0.0); 3];
    for s in 0..8 {
        let q = if s < 4 { frames[s] } else { frames[s - 4] * full };
        let toggled = q.adjoint() * sz * q;
        let (a, b) = (s as f64 * tau / 4.0, (s + 1) as f64 * tau / 4.0);
        let seg = (C64::from_polar(1.0, w * b) - C64::from_polar(1.0, w * a)) / c(0.0, w);
        for axis in 0..3 {
            // Tr(Q†S_zQ σ_α) = h_α.
            h[s][axis] = (toggled * pauli(axis)).trace().re;
            cs[axis] -= seg * h[s][axis] / (2.0 * tau);
        }
    }
    let i = c(0.0, 1.0);
    ToggleCoupling {
        h,
        c_minus: (cs[0] + i * cs[1]) / 2.0,
        c_plus: (cs[0] - i * cs[1]) / 2.0,
        c_z: cs[2],
    }
}

/// Small ensemble for the pulsed oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulsedSetup {
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub spin: Spin,
    pub omega_zn: f64,
    pub b_q: f64,
    pub theta: f64,
    pub a_total: f64,
}

impl PulsedSetup {
    /// Choose `A_total` so that `𝒢₊` of mode `zeta` at full polarisation is `ω/ratio`.
    pub fn calibrated(weights: Vec<f64>, omega_zn: f64, b_q: f64, theta: f64, zeta: u8, ratio: f64) -> Result<Self> {
        if weights.len() > MAX_PULSED_SITES {
            let d = Spin::THREE_HALVES.multiplicity().pow(weights.len() as u32);
            return Err(Error::DimensionCap { dim: 2 * d, sites: weights.len(), max_sites: MAX_PULSED_SITES });
        }
        if !(ratio > 0.0) {
            return Err(invalid("ratio", "must be positive"));
        }
        let mut s = Self { weights, spin: Spin::THREE_HALVES, omega_zn, b_q, theta, a_total: 1.0 };
        let g = s.g_plus(zeta)?;
        s.a_total = omega_zn / ratio / g;
        Ok(s)
    }

    fn bath(&self) -> Result<HyperfineBath> {
        Ok(HyperfineBath::from_weights(self.weights.clone(), self.a_total, self.spin)?
            .with_quadrupole(SiteField::Uniform(self.b_q), SiteField::Uniform(self.theta)))
    }

    pub fn mode(&self, zeta: u8) -> Result<ModeCouplings> {
        mode_couplings(&self.bath()?, self.omega_zn, zeta)
    }

    /// `𝒢₊` at full polarisation.
    pub fn g_plus(&self, zeta: u8) -> Result<f64> {
        let config = NuclearConfiguration::fully_polarised(self.spin, self.weights.len());
        Ok(omega_rates(&config, &self.mode(zeta)?)?.g_plus)
    }

    fn space(&self) -> Result<ProductSpace> {
        ProductSpace::new(self.spin, self.weights.len(), MAX_PULSED_SITES)
    }

    /// Dense `H'` on `{↑,↓} ⊗ nuclei`.
    pub fn hamiltonian(&self) -> Result<DMatrix<f64>> {
        let space = self.space()?;
        let bath = self.bath()?;
        let n = space.dim;
        let zeeman = space.iz_diagonal(&vec![self.omega_zn; space.n_sites]);
        let hyper: Vec<f64> = (0..bath.len()).map(|j| 2.0 * bath.hyperfine(j)).collect();
        let overhauser = space.iz_diagonal(&hyper);
        let mut nuclear = DMatrix::<f64>::zeros(n, n);
        for zeta in [1u8, 2] {
            let mode = match self.mode(zeta) {
                Ok(m) => m,
                Err(Error::ModeDecoupled(_)) => continue,
                Err(e) => return Err(e),
            };
            let phi = space.phi_plus(zeta, &mode.a_mode)?.to_dense();
            nuclear -= (&phi + phi.transpose()) * mode.a_zeta;
        }
        for i in 0..n {
            nuclear[(i, i)] += overhauser[i];
        }
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for (e, sz) in [(0usize, 0.5), (1, -0.5)] {
            let mut block = h.view_mut((e * n, e * n), (n, n));
            block += &nuclear * sz;
            for i in 0..n {
                block[(i, i)] += zeeman[i];
            }
        }
        Ok(h)
    }
}

fn electron_op(m: &M2, n: usize) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..n {
                out[(a * n + i, b * n + i)] = m[(a, b)];
            }
        }
    }
    out
}

/// One cycle `U_𝒞` and the closing frame `R_𝒞` (electron only).
fn cycle_unitary(setup: &PulsedSetup, tau: f64) -> Result<(DMatrix<C64>, M2)> {
    let n = setup.space()?.dim;
    let u0 = SymmetricPropagator::new(setup.hamiltonian()?).unitary(tau / 4.0);
    let seq = segment_pulses();
    let mut u = electron_op(&seq[0], n);
    for p in &seq[1..] {
        u = electron_op(p, n) * &u0 * u;
    }
    u = electron_op(&rotation(0, FRAC_PI_2), n) * &u0 * u;
    let (frames, close) = cycle_pulses();
    Ok((u, close * frames[3]))
}

fn apply_dense(m: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|k| m[(r, k)] * v[k]).sum()).collect()
}

/// `U_𝒞^{2n}(α|↑⟩+β|↓⟩)|M⟩` in the lab frame.
pub fn exact_pulsed_evolution(
    config: &NuclearConfiguration,
    setup: &PulsedSetup,
    schedule: &PulseSchedule,
    n_cycles: usize,
    alpha: C64,
    beta: C64,
) -> Result<FullStateVector> {
    let space = setup.space()?;
    let mut psi = FullStateVector::product(&space, config, alpha, beta)?;
    if n_cycles == 0 {
        return Ok(psi);
    }
    let (u, _) = cycle_unitary(setup, schedule.tau)?;
    for _ in 0..2 * n_cycles {
        psi.amplitudes = apply_dense(&u, &psi.amplitudes);
    }
    Ok(psi)
}

/// Pulsed-versus-effective comparison at the quarter flip-flop period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloquetReport {
    pub zeta: u8,
    pub overlap: f64,
    pub t: f64,
    pub n_cycles: usize,
    pub phase: f64,
    /// `|c_+| / |c_−|` of the toggling-frame average.
    pub counter_rotating: f64,
    /// `|c_−|`, expected `(2+√2)/(3π)`.
    pub coupling_scale: f64,
    /// Nuclear excitation from `|↑M⟩` on resonance.
    pub transfer_resonant: f64,
    /// Same with `τ` scaled by `detune`.
    pub transfer_detuned: f64,
    pub norm_error: f64,
}

/// `1 − ⟨M|ρ_n|M⟩` after `2n` cycles of delay `tau` starting from `|↑M⟩`.
fn nuclear_excitation(setup: &PulsedSetup, config: &NuclearConfiguration, tau: f64, n: usize) -> Result<f64> {
    let schedule = PulseSchedule { tau, ell_star: 3, zeta: 0, delta: 0.0 };
    let psi = exact_pulsed_evolution(config, setup, &schedule, n, c(1.0, 0.0), c(0.0, 0.0))?;
    Ok(1.0 - psi.nuclear_population(setup.space()?.index_of(config)?))
}

/// Run the Floquet validation for mode `zeta` from full polarisation.
pub fn floquet_check(setup: &PulsedSetup, zeta: u8, detune: f64) -> Result<FloquetReport> {
    let space = setup.space()?;
    let config = NuclearConfiguration::fully_polarised(setup.spin, setup.weights.len());
    let schedule = PulseSchedule::tuned(zeta, setup.omega_zn, 3, 0.0)?;
    let tau = schedule.tau;
    let mode = setup.mode(zeta)?;
    let g = omega_rates(&config, &mode)?.g_plus;
    let n = ((FRAC_PI_2 / g) / (2.0 * tau)).round().max(1.0) as usize;
    let t = 2.0 * n as f64 * tau;

    let toggle = toggling_coupling(zeta, setup.omega_zn, tau);
    let phase = toggle.phase();
    let (alpha, beta) = (c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0));

    // Pulsed state, taken to the toggling frame and the H₀ interaction picture.
    let lab = exact_pulsed_evolution(&config, setup, &schedule, n, alpha, beta)?;
    let (_, full) = cycle_unitary(setup, tau)?;
    let mut frame = M2::identity();
    for _ in 0..2 * n {
        frame = full * frame;
    }
    let mut psi = apply_dense(&electron_op(&frame.adjoint(), space.dim), &lab.amplitudes);
    let zeeman = space.iz_diagonal(&vec![setup.omega_zn; space.n_sites]);
    for (i, a) in psi.iter_mut().enumerate() {
        *a *= C64::from_polar(1.0, zeeman[i % space.dim] * t);
    }

    // U_z e^{−iH t} U_z† with U_z = e^{−iφS_z}.
    let h = effective_hamiltonian(&space, &mode)?;
    let mut start = FullStateVector::product(&space, &config, alpha, beta)?.amplitudes;
    let rot = |v: &mut [C64], s: f64| {
        let d = v.len() / 2;
        for (i, a) in v.iter_mut().enumerate() {
            let sz = if i < d { 0.5 } else { -0.5 };
            *a *= C64::from_polar(1.0, -s * phase * sz);
        }
    };
    rot(&mut start, -1.0);
    let mut reference = expm_multiply(|x, y| h.apply(x, y), h.norm_bound(), &start, t);
    rot(&mut reference, 1.0);

    let transfer_resonant = nuclear_excitation(setup, &config, tau, n)?;
    let detuned_tau = tau * detune;
    let n_detuned = (t / (2.0 * detuned_tau)).round().max(1.0) as usize;
    let transfer_detuned = nuclear_excitation(setup, &config, detuned_tau, n_detuned)?;

    let scale = toggle.c_minus.norm();
    Ok(FloquetReport {
        zeta,
        overlap: cdot(&reference, &psi).norm(),
        t,
        n_cycles: n,
        phase,
        counter_rotating: toggle.c_plus.norm() / scale,
        coupling_scale: scale,
        transfer_resonant,
        transfer_detuned,
        norm_error: (lab.norm() - 1.0).abs(),
    })
}

/// Number of delays `τ` in the sweep at which some odd harmonic hits `ω` and
/// another hits `2ω` within relative tolerance `rel_tol`.
pub fn resonance_selectivity(omega_zn: f64, max_ell: u32, n_tau: usize, rel_tol: f64) -> Result<usize> {
    let mut taus = Vec::new();
    for zeta in [1u8, 2] {
        for ell in (1..=max_ell).step_by(2) {
            taus.push(PulseSchedule::tuned(zeta, omega_zn, ell, 0.0)?.tau);
        }
    }
    let hi = max_ell as f64 * PI / omega_zn;
    taus.extend((1..=n_tau).map(|i| hi * i as f64 / n_tau as f64));
    let search = 4 * max_ell + 1;
    Ok(taus
        .iter()
        .filter(|&&tau| {
            let s = PulseSchedule { tau, ell_star: 1, zeta: 1, delta: 0.0 };
            !s.resonant_harmonics(omega_zn, search, rel_tol).is_empty()
                && !s.resonant_harmonics(2.0 * omega_zn, search, rel_tol).is_empty()
        })
        .count())
}
