//! Brute-force validators over the full Zeeman product space.
//!
//! `space` holds the product basis, the collective operators and Krylov
//! evolution under the effective flip-flop Hamiltonian. `pulsed` composes the
//! explicit eight-pulse cycle. This module compares both against the chain
//! reduction.

mod pulsed;
mod space;

pub use pulsed::{
    exact_pulsed_evolution, floquet_check, resonance_selectivity, toggling_coupling, FloquetReport, PulsedSetup,
    ToggleCoupling, MAX_PULSED_SITES,
};
pub use space::{
    closed_form_state, effective_hamiltonian, exact_effective_evolution, lanczos, FullStateVector, LanczosChain,
    ProductSpace, MAX_SITES,
};

use serde::Serialize;

use crate::bath::NuclearConfiguration;
use crate::chain::{closed_form_chain, omega_rates, uniform_chain, ChainBasis, TRUNCATION_CAP};
use crate::dynamics::{Electron, HybridLayout, NuclearState, Propagator};
use crate::error::Result;
use crate::linalg::{cdot, expm_multiply, C64};
use crate::spinwave::{ModeCouplings, Sign};

/// Electron label of the depth-`k` hybrid state on `branch`.
fn electron_at(branch: Sign, k: usize) -> Electron {
    match (branch, k % 2) {
        (Sign::Plus, 0) | (Sign::Minus, 1) => Electron::Up,
        _ => Electron::Down,
    }
}

/// Chain built by Lanczos from `|↑M⟩` and `|↓M⟩` in the full space, with
/// the full-space image of every chain state.
#[derive(Debug, Clone)]
pub struct ExactChain {
    pub chain: ChainBasis,
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
}

impl ExactChain {
    pub fn new(config: &NuclearConfiguration, mode: &ModeCouplings, max_depth: usize) -> Result<Self> {
        let space = ProductSpace::new(config.spin, config.len(), MAX_SITES)?;
        let h = effective_hamiltonian(&space, mode)?;
        let m = space.index_of(config)?;
        let run = |e: usize| {
            let mut start = vec![0.0; 2 * space.dim];
            start[e * space.dim + m] = 1.0;
            lanczos(&h, &start, max_depth)
        };
        let (p, q) = (run(0), run(1));
        let depth = p.vectors.len().max(q.vectors.len()).max(2);
        let pad = |mut v: Vec<f64>| {
            v.resize(depth, 0.0);
            v
        };
        let chain = ChainBasis::new(pad(p.links), pad(q.links))?;
        Ok(Self { chain, plus: p.vectors, minus: q.vectors })
    }

    /// Full-space vector for chain amplitudes laid out as in [`HybridLayout`].
    pub fn embed(&self, layout: &HybridLayout, amps: &[C64]) -> Vec<C64> {
        let dim = self.plus[0].len();
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (branch, vecs) in [(Sign::Plus, &self.plus), (Sign::Minus, &self.minus)] {
            for (k, v) in vecs.iter().enumerate() {
                let a = amps[layout.index(electron_at(branch, k), NuclearState::on_branch(branch, k))];
                out.iter_mut().zip(v).for_each(|(o, x)| *o += a * x);
            }
        }
        out
    }
}

/// Full-space images of the closed-form chain states up to `k_star`.
pub fn embed_closed_form(
    config: &NuclearConfiguration,
    mode: &ModeCouplings,
    layout: &HybridLayout,
    amps: &[C64],
) -> Result<Vec<C64>> {
    let space = ProductSpace::new(config.spin, config.len(), MAX_SITES)?;
    let n = space.dim;
    let mut out = vec![C64::new(0.0, 0.0); 2 * n];
    for branch in [Sign::Plus, Sign::Minus] {
        for k in 0..=layout.k_star {
            let e = electron_at(branch, k);
            let a = amps[layout.index(e, NuclearState::on_branch(branch, k))];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            let v = closed_form_state(&space, config, mode, branch, k)?;
            let off = e as usize * n;
            out[off..off + n].iter_mut().zip(&v).for_each(|(o, x)| *o += a * x);
        }
    }
    Ok(out)
}

/// Largest `1 − |⟨ψ_exact|ψ_chain⟩|` over a time grid, per chain variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    /// Lanczos chain: the orthonormal states generated by repeated `Φ^±`.
    pub exact: f64,
    pub closed_form: f64,
    pub uniform: f64,
    pub k_star_exact: usize,
    pub k_star_closed: usize,
}

/// Compare chain evolutions of `(α|↑⟩+β|↓⟩)|M⟩` with full-space evolution (`N ≤ 6`).
pub fn chain_vs_exact_report(
    config: &NuclearConfiguration,
    mode: &ModeCouplings,
    alpha: C64,
    beta: C64,
    t_grid: &[f64],
) -> Result<ChainReport> {
    let space = ProductSpace::new(config.spin, config.len(), MAX_SITES)?;
    let h = effective_hamiltonian(&space, mode)?;
    let psi0 = FullStateVector::product(&space, config, alpha, beta)?.amplitudes;

    let exact = ExactChain::new(config, mode, TRUNCATION_CAP)?;
    // Beyond 2N + 1 every closed-form state is empty.
    let k_closed = (2 * config.len() + 1).min(TRUNCATION_CAP);
    let closed = closed_form_chain(config, mode, k_closed)?;
    let uniform = uniform_chain(&omega_rates(config, mode)?, k_closed)?;

    let deviation = |chain: &ChainBasis, embed: &dyn Fn(&HybridLayout, &[C64]) -> Result<Vec<C64>>| -> Result<f64> {
        let prop = Propagator::new(chain);
        let layout = &prop.layout;
        let mut start = vec![C64::new(0.0, 0.0); layout.dim()];
        start[layout.index(Electron::Up, NuclearState::Even(0))] = alpha;
        start[layout.index(Electron::Down, NuclearState::Even(0))] = beta;
        let mut worst: f64 = 0.0;
        for &t in t_grid {
            let reference = expm_multiply(|x, y| h.apply(x, y), h.norm_bound(), &psi0, t);
            let amps = prop.apply(&start, t);
            let image = embed(layout, &amps)?;
            worst = worst.max(1.0 - cdot(&reference, &image).norm());
        }
        Ok(worst)
    };
    let by_closed_form = |l: &HybridLayout, a: &[C64]| embed_closed_form(config, mode, l, a);
    Ok(ChainReport {
        exact: deviation(&exact.chain, &|l, a| Ok(exact.embed(l, a)))?,
        closed_form: deviation(&closed, &by_closed_form)?,
        uniform: deviation(&uniform, &by_closed_form)?,
        k_star_exact: exact.chain.k_star,
        k_star_closed: k_closed,
    })
}

/// Orthonormality and selection-rule checks on the closed-form chain states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructureReport {
    /// `max |G − I|` over the non-empty nuclear chain states.
    pub gram_deviation: f64,
    /// Largest `|⟨s'|Φ^±|s⟩|` between states whose depths differ by other than one.
    pub selection_violation: f64,
    pub n_states: usize,
}

/// Structural checks in the product basis; `N ≤ max_sites`.
pub fn chain_structure(
    config: &NuclearConfiguration,
    mode: &ModeCouplings,
    k_star: usize,
    max_sites: usize,
) -> Result<StructureReport> {
    let space = ProductSpace::new(config.spin, config.len(), max_sites)?;
    let mut states: Vec<(usize, Vec<f64>)> = Vec::new();
    for k in 0..=k_star {
        let branches: &[Sign] = if k % 2 == 0 { &[Sign::Plus] } else { &[Sign::Plus, Sign::Minus] };
        for &b in branches {
            let v = closed_form_state(&space, config, mode, b, k)?;
            if v.iter().any(|x| *x != 0.0) {
                states.push((k, v));
            }
        }
    }
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut gram: f64 = 0.0;
    for (i, (_, a)) in states.iter().enumerate() {
        for (j, (_, b)) in states.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            gram = gram.max((dot(a, b) - target).abs());
        }
    }
    let phi = space.phi_plus(mode.zeta, &mode.a_mode)?;
    let phi_t = phi.transpose();
    let mut img = vec![0.0; space.dim];
    let mut violation: f64 = 0.0;
    for op in [&phi, &phi_t] {
        for (k, s) in &states {
            op.apply_real(s, &mut img);
            for (k2, s2) in &states {
                if k.abs_diff(*k2) != 1 {
                    violation = violation.max(dot(s2, &img).abs());
                }
            }
        }
    }
    Ok(StructureReport { gram_deviation: gram, selection_violation: violation, n_states: states.len() })
}
