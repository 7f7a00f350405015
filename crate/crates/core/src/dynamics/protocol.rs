use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::DMatrix;
use serde::Serialize;

use super::{Electron, HybridDensity, HybridState, NuclearState, Propagator};
use crate::error::{Error, Result};
use crate::linalg::C64;

const R: f64 = FRAC_1_SQRT_2;

/// The six cardinal input states `(α, β)`.
pub const SIX_STATES: [(C64, C64); 6] = [
    (C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
    (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
    (C64::new(R, 0.0), C64::new(R, 0.0)),
    (C64::new(R, 0.0), C64::new(-R, 0.0)),
    (C64::new(R, 0.0), C64::new(0.0, R)),
    (C64::new(R, 0.0), C64::new(0.0, -R)),
];

/// Write and read amplitudes for the two basis inputs, from which any
/// `(α, β)` follows by linearity.
struct Cycle {
    n: usize,
    // U(t1)|↑,0⟩ and U(t1)|↓,0⟩.
    write: [Vec<C64>; 2],
    // U(t2)|↓⟩⊗X for X = (↑ part of write[0]), (↑ part of write[1]), (↓ part of write[0]), (↓ part of write[1]).
    read: [Vec<C64>; 4],
}

impl Cycle {
    fn new(prop: &Propagator, t1: f64, t2: f64) -> Self {
        let l = &prop.layout;
        let n = l.n_nuclear();
        let basis = |e: Electron| {
            let mut v = vec![C64::new(0.0, 0.0); l.dim()];
            v[l.index(e, NuclearState::Even(0))] = C64::new(1.0, 0.0);
            prop.apply(&v, t1)
        };
        let write = [basis(Electron::Up), basis(Electron::Down)];
        let reinit = |part: &[C64]| {
            let mut v = vec![C64::new(0.0, 0.0); 2 * n];
            v[n..].copy_from_slice(part);
            prop.apply(&v, t2)
        };
        let read = [
            reinit(&write[0][..n]),
            reinit(&write[1][..n]),
            reinit(&write[0][n..]),
            reinit(&write[1][n..]),
        ];
        Self { n, write, read }
    }

    /// Fidelity and worst boundary occupation for input `(α, β)`.
    fn evaluate(&self, prop: &Propagator, alpha: C64, beta: C64) -> (f64, f64) {
        let combine = |x: &[C64], y: &[C64]| -> Vec<C64> { x.iter().zip(y).map(|(a, b)| alpha * a + beta * b).collect() };
        let written = combine(&self.write[0], &self.write[1]);
        let read_up = combine(&self.read[0], &self.read[1]);
        let read_dn = combine(&self.read[2], &self.read[3]);
        let n = self.n;
        let project = |r: &[C64]| -> f64 {
            (0..n).map(|i| (alpha.conj() * r[i] - beta.conj() * r[n + i]).norm_sqr()).sum()
        };
        let fidelity = project(&read_up) + project(&read_dn);
        let occ = prop
            .boundary_occupation(&written)
            .max(prop.boundary_occupation(&read_up) + prop.boundary_occupation(&read_dn));
        (fidelity, occ)
    }
}

fn check(prop: &Propagator, occ: f64, tol: f64) -> Result<()> {
    if occ > tol {
        return Err(Error::TruncationExceeded { k_star: prop.layout.k_star, occupation: occ, tol });
    }
    Ok(())
}

/// Fidelity `⟨φ'|ρ_e|φ'⟩` of one write (t1) / re-initialise / read (t2) cycle,
/// with `φ' = α|↑⟩ − β|↓⟩`.
pub fn write_read_cycle(prop: &Propagator, alpha: C64, beta: C64, t1: f64, t2: f64, tol: f64) -> Result<f64> {
    let (f, occ) = Cycle::new(prop, t1, t2).evaluate(prop, alpha, beta);
    check(prop, occ, tol)?;
    Ok(f)
}

/// Same protocol carried out on density matrices: evolve, trace out the
/// electron, re-initialise it in `|↓⟩`, evolve, trace out the nuclei.
pub fn write_read_density(prop: &Propagator, alpha: C64, beta: C64, t1: f64, t2: f64, tol: f64) -> Result<f64> {
    let start = HybridDensity::pure(&HybridState::initial(&prop.layout, alpha, beta));
    let (written, _) = prop.evolve_density(&start, t1, tol)?;
    let reset = HybridDensity::reinitialise_down(&written.trace_electron(), written.time);
    let (read, _) = prop.evolve_density(&reset, t2, tol)?;
    let rho_e = read.trace_nuclear();
    let phi = DMatrix::from_column_slice(2, 1, &[alpha, -beta]);
    Ok((phi.adjoint() * rho_e * phi)[(0, 0)].re)
}

/// Per-state and mean fidelity over the six cardinal inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub t1: f64,
    pub t2: f64,
    pub per_state: [f64; 6],
    pub mean: f64,
}

pub fn average_fidelity(prop: &Propagator, t1: f64, t2: f64, tol: f64) -> Result<FidelityReport> {
    let cycle = Cycle::new(prop, t1, t2);
    let mut per_state = [0.0; 6];
    for (slot, &(a, b)) in per_state.iter_mut().zip(SIX_STATES.iter()) {
        let (f, occ) = cycle.evaluate(prop, a, b);
        check(prop, occ, tol)?;
        *slot = f;
    }
    let mean = per_state.iter().sum::<f64>() / 6.0;
    Ok(FidelityReport { t1, t2, per_state, mean })
}

/// Maximiser of the six-state mean fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransferOptimum {
    pub t1: f64,
    pub t2: f64,
    pub fidelity: f64,
    /// `π/(2𝒢₊)`.
    pub t0: f64,
}

const SEARCH_LO: f64 = 0.8;
const SEARCH_HI: f64 = 1.6;
const SEARCH_GRID: usize = 33;
const SEARCH_REL_TOL: f64 = 1e-4;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn maximise<F: FnMut(f64) -> Result<f64>>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)> {
    let h = (hi - lo) / (SEARCH_GRID - 1) as f64;
    let mut best = (lo, f64::NEG_INFINITY);
    let mut best_i = 0;
    for i in 0..SEARCH_GRID {
        let x = lo + h * i as f64;
        let y = f(x)?;
        if y > best.1 {
            best = (x, y);
            best_i = i;
        }
    }
    let (mut a, mut b) = ((lo + h * best_i as f64 - h).max(lo), (lo + h * best_i as f64 + h).min(hi));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    for (x, y) in [(c, fc), (d, fd)] {
        if y > best.1 {
            best = (x, y);
        }
    }
    Ok(best)
}

/// Coordinate search over `t1` then `t2` (two passes) in `[0.8, 1.6]·π/(2𝒢₊)`.
pub fn optimize_transfer_times(prop: &Propagator, tol: f64) -> Result<TransferOptimum> {
    let g = prop.chain.g_plus();
    if !(g > 0.0) {
        return Err(Error::FlatLandscape);
    }
    let t0 = FRAC_PI_2 / g;
    let (lo, hi) = (SEARCH_LO * t0, SEARCH_HI * t0);
    let step = SEARCH_REL_TOL * t0;
    let (mut t1, mut t2) = (t0, t0);
    let mut fidelity = average_fidelity(prop, t1, t2, tol)?.mean;
    for _ in 0..2 {
        let (x, y) = maximise(|x| Ok(average_fidelity(prop, x, t2, tol)?.mean), lo, hi, step)?;
        if y > fidelity {
            t1 = x;
            fidelity = y;
        }
        let (x, y) = maximise(|x| Ok(average_fidelity(prop, t1, x, tol)?.mean), lo, hi, step)?;
        if y > fidelity {
            t2 = x;
            fidelity = y;
        }
    }
    Ok(TransferOptimum { t1, t2, fidelity, t0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::uniform_links;

    #[test]
    fn no_evolution_gives_one_half() {
        let p = Propagator::new(&uniform_links(1.0, 0.3, 4).unwrap());
        let r = average_fidelity(&p, 0.0, 0.0, 1e-8).unwrap();
        assert!((r.mean - 0.5).abs() < 1e-12);
        for ((_, b), f) in SIX_STATES.iter().zip(r.per_state) {
            assert!((f - b.norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn density_path_agrees() {
        let p = Propagator::new(&uniform_links(1.0, 0.4, 8).unwrap());
        for &(a, b) in &SIX_STATES {
            let x = write_read_cycle(&p, a, b, 1.7, 1.9, 1e-3).unwrap();
            let y = write_read_density(&p, a, b, 1.7, 1.9, 1e-3).unwrap();
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rate_is_flat() {
        let p = Propagator::new(&uniform_links(0.0, 0.0, 2).unwrap());
        assert_eq!(optimize_transfer_times(&p, 1.0), Err(Error::FlatLandscape));
    }
}
