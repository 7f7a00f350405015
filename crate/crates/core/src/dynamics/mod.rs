//! Hybrid electron–chain evolution and the write/read memory protocol.
//!
//! The hybrid basis is `{↑, ↓} ⊗ {nuclear chain states}`. Nuclear states are
//! `E_k` for even depth (shared by both branches) and `P_k`, `M_k` for odd
//! depth on the `+` and `−` branch. The flip-flop Hamiltonian couples
//!
//! * `+` branch: `|↑,E_k⟩ ↔ |↓,P_{k+1}⟩` (k even), `|↓,P_k⟩ ↔ |↑,E_{k+1}⟩` (k odd)
//! * `−` branch: `|↓,E_k⟩ ↔ |↑,M_{k+1}⟩` (k even), `|↑,M_k⟩ ↔ |↓,E_{k+1}⟩` (k odd)
//!
//! so `|↑,P_k⟩` and `|↓,M_k⟩` are never reached from `|M⟩` and stay stationary.

mod protocol;
mod sweeps;

pub use protocol::{
    average_fidelity, optimize_transfer_times, write_read_cycle, write_read_density, FidelityReport,
    TransferOptimum, SIX_STATES,
};
pub use sweeps::{coupling_vs_zeeman, fidelity_vs_polarisation, FidelitySweepOptions};

use nalgebra::DMatrix;

use crate::chain::ChainBasis;
use crate::error::{invalid, Error, Result};
use crate::linalg::{SymmetricPropagator, C64};
use crate::spinwave::Sign;

/// Electron spin label; also the block index in the hybrid layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Electron {
    Up = 0,
    Down = 1,
}

/// A nuclear chain state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NuclearState {
    Even(usize),
    Plus(usize),
    Minus(usize),
}

impl NuclearState {
    pub fn depth(self) -> usize {
        match self {
            NuclearState::Even(k) | NuclearState::Plus(k) | NuclearState::Minus(k) => k,
        }
    }

    /// Nuclear state at depth `k` on `branch`.
    pub fn on_branch(branch: Sign, k: usize) -> Self {
        match (k % 2, branch) {
            (0, _) => NuclearState::Even(k),
            (_, Sign::Plus) => NuclearState::Plus(k),
            (_, Sign::Minus) => NuclearState::Minus(k),
        }
    }
}

/// Index bookkeeping for `{↑,↓} ⊗ chain`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HybridLayout {
    pub k_star: usize,
    offsets: Vec<usize>,
    n_nuc: usize,
}

impl HybridLayout {
    pub fn new(k_star: usize) -> Self {
        let mut offsets = Vec::with_capacity(k_star + 1);
        let mut n = 0;
        for k in 0..=k_star {
            offsets.push(n);
            n += if k % 2 == 0 { 1 } else { 2 };
        }
        Self { k_star, offsets, n_nuc: n }
    }

    pub fn n_nuclear(&self) -> usize {
        self.n_nuc
    }

    pub fn dim(&self) -> usize {
        2 * self.n_nuc
    }

    pub fn nuclear_index(&self, s: NuclearState) -> usize {
        match s {
            NuclearState::Even(k) | NuclearState::Plus(k) => self.offsets[k],
            NuclearState::Minus(k) => self.offsets[k] + 1,
        }
    }

    pub fn index(&self, e: Electron, s: NuclearState) -> usize {
        e as usize * self.n_nuc + self.nuclear_index(s)
    }

    /// Hybrid states linked by depth `k → k+1` on `branch`.
    pub fn link(&self, branch: Sign, k: usize) -> (usize, usize) {
        let lower = NuclearState::on_branch(branch, k);
        let upper = NuclearState::on_branch(branch, k + 1);
        // The electron label of the lower state: ↑ on even + depths, ↓ on odd +
        // depths, mirrored on the − branch.
        let e_lower = match (branch, k % 2) {
            (Sign::Plus, 0) | (Sign::Minus, 1) => Electron::Up,
            _ => Electron::Down,
        };
        let e_upper = match e_lower {
            Electron::Up => Electron::Down,
            Electron::Down => Electron::Up,
        };
        (self.index(e_lower, lower), self.index(e_upper, upper))
    }

    /// The hybrid state at the truncation boundary on `branch` that couples outward.
    pub fn boundary(&self, branch: Sign) -> usize {
        let k = self.k_star;
        let e = match (branch, k % 2) {
            (Sign::Plus, 0) | (Sign::Minus, 1) => Electron::Up,
            _ => Electron::Down,
        };
        self.index(e, NuclearState::on_branch(branch, k))
    }
}

/// Dense real-symmetric flip-flop Hamiltonian on the hybrid layout.
pub fn chain_hamiltonian(chain: &ChainBasis) -> (HybridLayout, DMatrix<f64>) {
    let layout = HybridLayout::new(chain.k_star);
    let mut h = DMatrix::zeros(layout.dim(), layout.dim());
    for branch in [Sign::Plus, Sign::Minus] {
        for k in 0..chain.k_star {
            let (a, b) = layout.link(branch, k);
            let w = chain.links(branch)[k];
            h[(a, b)] += w;
            h[(b, a)] += w;
        }
    }
    (layout, h)
}

/// Pure hybrid state.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridState {
    pub amplitudes: Vec<C64>,
    pub time: f64,
}

impl HybridState {
    /// `(α|↑⟩ + β|↓⟩) ⊗ |M⟩`.
    pub fn initial(layout: &HybridLayout, alpha: C64, beta: C64) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); layout.dim()];
        amplitudes[layout.index(Electron::Up, NuclearState::Even(0))] = alpha;
        amplitudes[layout.index(Electron::Down, NuclearState::Even(0))] = beta;
        Self { amplitudes, time: 0.0 }
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::cnorm(&self.amplitudes)
    }
}

/// Density matrix on the hybrid layout.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridDensity {
    pub rho: DMatrix<C64>,
    pub time: f64,
}

impl HybridDensity {
    pub fn pure(state: &HybridState) -> Self {
        let v = DMatrix::from_column_slice(state.amplitudes.len(), 1, &state.amplitudes);
        Self { rho: &v * v.adjoint(), time: state.time }
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// Reduced nuclear density matrix.
    pub fn trace_electron(&self) -> DMatrix<C64> {
        let n = self.rho.nrows() / 2;
        self.rho.view((0, 0), (n, n)) + self.rho.view((n, n), (n, n))
    }

    /// Reduced electron density matrix.
    pub fn trace_nuclear(&self) -> DMatrix<C64> {
        let n = self.rho.nrows() / 2;
        let mut out = DMatrix::zeros(2, 2);
        for a in 0..2 {
            for b in 0..2 {
                out[(a, b)] = (0..n).map(|i| self.rho[(a * n + i, b * n + i)]).sum();
            }
        }
        out
    }

    /// `|↓⟩⟨↓| ⊗ ρ_n`.
    pub fn reinitialise_down(nuclear: &DMatrix<C64>, time: f64) -> Self {
        let n = nuclear.nrows();
        let mut rho = DMatrix::zeros(2 * n, 2 * n);
        rho.view_mut((n, n), (n, n)).copy_from(nuclear);
        Self { rho, time }
    }
}

/// Exact propagator for one chain, plus boundary weights for truncation monitoring.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub layout: HybridLayout,
    pub chain: ChainBasis,
    eig: SymmetricPropagator,
    boundary: Vec<(usize, f64)>,
}

impl Propagator {
    pub fn new(chain: &ChainBasis) -> Self {
        let (layout, h) = chain_hamiltonian(chain);
        let g = chain.g_plus();
        let boundary = [Sign::Plus, Sign::Minus]
            .iter()
            .map(|&b| {
                let w = chain.links(b)[chain.k_star];
                let rel = if g > 0.0 { w / g } else { w };
                (layout.boundary(b), rel * rel)
            })
            .collect();
        Self { layout, chain: chain.clone(), eig: SymmetricPropagator::new(h), boundary }
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// `exp(−iHt)ψ` without truncation checks.
    pub fn apply(&self, psi: &[C64], t: f64) -> Vec<C64> {
        self.eig.apply(psi, t)
    }

    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        self.eig.unitary(t)
    }

    /// Population at the boundary weighted by `(outgoing link / 𝒢₊)²`.
    pub fn boundary_occupation(&self, psi: &[C64]) -> f64 {
        self.boundary.iter().map(|&(i, w)| w * psi[i].norm_sqr()).sum()
    }

    fn boundary_occupation_density(&self, rho: &DMatrix<C64>) -> f64 {
        self.boundary.iter().map(|&(i, w)| w * rho[(i, i)].re).sum()
    }

    /// Evolve for `t`, checking the boundary at `MONITOR_POINTS` times along the way.
    pub fn evolve(&self, state: &HybridState, t: f64, tol: f64) -> Result<(HybridState, f64)> {
        let mut worst: f64 = 0.0;
        let mut out = state.amplitudes.clone();
        for i in 1..=MONITOR_POINTS {
            out = self.apply(&state.amplitudes, t * i as f64 / MONITOR_POINTS as f64);
            worst = worst.max(self.boundary_occupation(&out));
        }
        if worst > tol {
            return Err(Error::TruncationExceeded { k_star: self.layout.k_star, occupation: worst, tol });
        }
        Ok((HybridState { amplitudes: out, time: state.time + t }, worst))
    }

    /// `U ρ U†` with the same boundary check at the end time.
    pub fn evolve_density(&self, state: &HybridDensity, t: f64, tol: f64) -> Result<(HybridDensity, f64)> {
        let u = self.unitary(t);
        let rho = &u * &state.rho * u.adjoint();
        let occ = self.boundary_occupation_density(&rho);
        if occ > tol {
            return Err(Error::TruncationExceeded { k_star: self.layout.k_star, occupation: occ, tol });
        }
        Ok((HybridDensity { rho, time: state.time + t }, occ))
    }
}

/// Number of equally spaced checkpoints used by [`Propagator::evolve`].
pub const MONITOR_POINTS: usize = 8;

/// Default boundary tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Evolve a pure state on `chain`.
pub fn evolve(state: &HybridState, chain: &ChainBasis, t: f64, tol: f64) -> Result<(HybridState, f64)> {
    if state.amplitudes.len() != HybridLayout::new(chain.k_star).dim() {
        return Err(invalid("state", "dimension does not match the chain"));
    }
    Propagator::new(chain).evolve(state, t, tol)
}
