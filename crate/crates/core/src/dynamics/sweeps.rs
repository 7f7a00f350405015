use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use super::{optimize_transfer_times, Propagator, DEFAULT_TOL};
use crate::bath::HyperfineBath;
use crate::chain::{omega_rates, select_truncation, uniform_chain};
use crate::error::{invalid, Result};
use crate::numeric::{compensated_sum, mean_std};
use crate::pulse::effective_coupling;
use crate::spinwave::ModeCouplings;
use crate::sweep::SweepResult;

/// Monte Carlo settings for the fidelity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FidelitySweepOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// Boundary-occupation tolerance for truncation and evolution.
    pub tol: f64,
}

impl Default for FidelitySweepOptions {
    fn default() -> Self {
        Self { n_samples: 100, seed: 0, tol: DEFAULT_TOL }
    }
}

/// Transfer-time search window upper edge, in units of `π/(2𝒢₊)`.
const WINDOW: f64 = 1.6;

struct Sample {
    fidelity: f64,
    t1_rel: f64,
    t2_rel: f64,
}

fn sample(bath: &HyperfineBath, mode: &ModeCouplings, p: f64, i: usize, s: usize, opts: &FidelitySweepOptions) -> Result<Sample> {
    let config = crate::chain::ensemble_draw(bath, p, opts.seed, i, s)?;
    let rates = omega_rates(&config, mode)?;
    // Write and read together span at most twice the search window.
    let horizon = 2.0 * WINDOW * FRAC_PI_2;
    let k_star = select_truncation(rates.leakage, horizon, opts.tol)?;
    let prop = Propagator::new(&uniform_chain(&rates, k_star)?);
    let opt = optimize_transfer_times(&prop, opts.tol)?;
    Ok(Sample { fidelity: opt.fidelity, t1_rel: opt.t1 / opt.t0, t2_rel: opt.t2 / opt.t0 })
}

/// Optimised six-state write/read fidelity against polarisation.
///
/// Each sample draws a thermal configuration, builds the uniform chain from
/// its rates, picks the truncation depth and optimises `(t1, t2)`. Columns:
/// `fid_zζ_mean`, `fid_zζ_std`, `t1_zζ_rel`, `t2_zζ_rel` (mean optimal times
/// over `π/(2𝒢₊)`) and `t_zζ_rel_max` (largest optimal time in the ensemble).
pub fn fidelity_vs_polarisation(
    bath: &HyperfineBath,
    mode: &ModeCouplings,
    p_grid: &[f64],
    opts: &FidelitySweepOptions,
) -> Result<SweepResult> {
    if opts.n_samples == 0 {
        return Err(invalid("n_samples", "must be positive"));
    }
    let z = mode.zeta;
    let mut cols: [Vec<f64>; 5] = Default::default();
    for (i, &p) in p_grid.iter().enumerate() {
        let samples: Vec<Sample> = (0..opts.n_samples)
            .into_par_iter()
            .map(|s| sample(bath, mode, p, i, s, opts))
            .collect::<Result<_>>()?;
        let (fm, fs) = mean_std(&samples.iter().map(|x| x.fidelity).collect::<Vec<_>>());
        let n = samples.len() as f64;
        cols[0].push(fm);
        cols[1].push(fs);
        cols[2].push(compensated_sum(samples.iter().map(|x| x.t1_rel)) / n);
        cols[3].push(compensated_sum(samples.iter().map(|x| x.t2_rel)) / n);
        cols[4].push(samples.iter().map(|x| x.t1_rel.max(x.t2_rel)).fold(0.0, f64::max));
    }
    let mut out = SweepResult::new("P", p_grid.to_vec());
    let [a, b, c, d, e] = cols;
    out.push(format!("fid_z{z}_mean"), a);
    out.push(format!("fid_z{z}_std"), b);
    out.push(format!("t1_z{z}_rel"), c);
    out.push(format!("t2_z{z}_rel"), d);
    out.push(format!("t_z{z}_rel_max"), e);
    out.meta("n_sites", bath.len());
    out.meta("n_samples", opts.n_samples);
    out.meta("seed", opts.seed);
    Ok(out)
}

/// Collective coupling `𝒢₊` (MHz) against nuclear Zeeman energy with the
/// angular prefactors set to one, for each polarisation in `p_values`.
///
/// Column `g_plus_p{P}` holds the ensemble-mean rate at polarisation `P`.
pub fn coupling_vs_zeeman(
    bath: &HyperfineBath,
    zeta: u8,
    omega_grid: &[f64],
    p_values: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<SweepResult> {
    if omega_grid.iter().any(|w| !(*w > 0.0)) {
        return Err(invalid("omega", "Zeeman energies must be positive"));
    }
    if n_samples == 0 {
        return Err(invalid("n_samples", "must be positive"));
    }
    // With unit angular factors the mode weights are A^j B_Q^j up to 1/ω.
    let weights: Vec<f64> = (0..bath.len()).map(|j| bath.hyperfine(j) * bath.b_q.at(j)).collect();
    let half_sum = 0.5 * compensated_sum(weights.iter().copied());
    let unit = ModeCouplings::from_weights(zeta, 1.0, &weights)?;
    let mut out = SweepResult::new("omega_zn", omega_grid.to_vec());
    for (i, &p) in p_values.iter().enumerate() {
        let omegas: Vec<f64> = (0..n_samples)
            .into_par_iter()
            .map(|s| {
                let config = crate::chain::ensemble_draw(bath, p, seed, i, s)?;
                Ok(omega_rates(&config, &unit)?.omega_plus)
            })
            .collect::<Result<_>>()?;
        let mean_omega = compensated_sum(omegas.iter().copied()) / omegas.len() as f64;
        let g: Vec<f64> = omega_grid.iter().map(|w| effective_coupling(half_sum / w) * mean_omega).collect();
        out.push(format!("g_plus_p{p}"), g);
    }
    out.meta("zeta", zeta);
    out.meta("n_sites", bath.len());
    out.meta("n_samples", n_samples);
    out.meta("seed", seed);
    Ok(out)
}
