use super::uniform_links;
use crate::dynamics::{Electron, HybridLayout, NuclearState, Propagator};
use crate::error::{invalid, Error, Result};
use crate::linalg::{overlap_deviation, C64};

/// Hard cap on the truncation depth.
pub const TRUNCATION_CAP: usize = 64;

const TIME_POINTS: usize = 64;

fn basis_states(layout: &HybridLayout) -> [Vec<C64>; 2] {
    [Electron::Up, Electron::Down].map(|e| {
        let mut v = vec![C64::new(0.0, 0.0); layout.dim()];
        v[layout.index(e, NuclearState::Even(0))] = C64::new(1.0, 0.0);
        v
    })
}

fn max_boundary(k: usize, leakage: f64, horizon: f64) -> Result<f64> {
    let prop = Propagator::new(&uniform_links(1.0, leakage, k)?);
    let mut worst: f64 = 0.0;
    for v in basis_states(&prop.layout) {
        for i in 1..=TIME_POINTS {
            let psi = prop.apply(&v, horizon * i as f64 / TIME_POINTS as f64);
            worst = worst.max(prop.boundary_occupation(&psi));
        }
    }
    Ok(worst)
}

/// Largest end-state deviation between depth `k` and the deeper `k2` chain.
fn doubling_deviation(k: usize, k2: usize, leakage: f64, horizon: f64) -> Result<f64> {
    let small = Propagator::new(&uniform_links(1.0, leakage, k)?);
    let large = Propagator::new(&uniform_links(1.0, leakage, k2)?);
    let mut worst: f64 = 0.0;
    for (vs, vl) in basis_states(&small.layout).iter().zip(basis_states(&large.layout).iter()) {
        let ps = small.apply(vs, horizon);
        let pl = large.apply(vl, horizon);
        let mut embedded = vec![C64::new(0.0, 0.0); large.dim()];
        for e in [Electron::Up, Electron::Down] {
            for depth in 0..=k {
                let states: &[NuclearState] = if depth % 2 == 0 {
                    &[NuclearState::Even(depth)]
                } else {
                    &[NuclearState::Plus(depth), NuclearState::Minus(depth)]
                };
                for &s in states {
                    embedded[large.layout.index(e, s)] = ps[small.layout.index(e, s)];
                }
            }
        }
        worst = worst.max(overlap_deviation(&pl, &embedded).abs());
    }
    Ok(worst)
}

/// Smallest depth whose weighted boundary occupation stays below `tol` over
/// `[0, horizon]` (in units of `1/𝒢₊`), confirmed against a chain twice as deep.
pub fn select_truncation(leakage: f64, horizon: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    if !(leakage >= 0.0 && leakage.is_finite()) {
        return Err(invalid("leakage", "must be finite and non-negative"));
    }
    if !(horizon >= 0.0) {
        return Err(invalid("horizon", "must be non-negative"));
    }
    let passes = |k: usize| -> Result<bool> { Ok(max_boundary(k, leakage, horizon)? < tol) };
    // Exponential search for a passing depth, then bisect.
    let mut hi = 1;
    while !passes(hi)? {
        if hi >= TRUNCATION_CAP {
            return Err(Error::TruncationCap { cap: TRUNCATION_CAP });
        }
        hi = (hi * 2).min(TRUNCATION_CAP);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut k = hi;
    loop {
        let k2 = (2 * k).min(TRUNCATION_CAP);
        if k2 == k || doubling_deviation(k, k2, leakage, horizon)? < tol {
            return Ok(k);
        }
        if k >= TRUNCATION_CAP {
            return Err(Error::TruncationCap { cap: TRUNCATION_CAP });
        }
        k += 1;
    }
}
