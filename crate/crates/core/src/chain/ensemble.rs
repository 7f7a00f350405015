use rayon::prelude::*;

use super::omega_rates;
use crate::bath::{sample_thermal_configuration_with, HyperfineBath, NuclearConfiguration};
use crate::error::{invalid, Result};
use crate::numeric::mean_std;
use crate::rng::{child_seed, stream};
use crate::spinwave::ModeCouplings;
use crate::sweep::SweepResult;

/// Minimum Monte Carlo sample count per grid point.
pub const MIN_SAMPLES: usize = 100;

/// Thermal configuration for sample `s` of grid point `i`.
pub(crate) fn draw(bath: &HyperfineBath, polarisation: f64, seed: u64, i: usize, s: usize) -> Result<NuclearConfiguration> {
    let mut rng = stream(child_seed(seed, i as u64), s as u64);
    sample_thermal_configuration_with(polarisation, bath.spin, bath.len(), &mut rng)
}

/// Leakage factor `𝒢₋/𝒢₊` against polarisation for each mode.
///
/// All modes see the same configurations. Columns per mode `ζ`:
/// `leak_zζ_mean`, `leak_zζ_rsd` (relative standard deviation over the
/// ensemble) and `leak_zζ_rse` (relative standard error of the mean). With two
/// modes the paired difference (second minus first) and its standard error
/// are appended.
pub fn ensemble_leakage(
    bath: &HyperfineBath,
    modes: &[ModeCouplings],
    p_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<SweepResult> {
    if n_samples < MIN_SAMPLES {
        return Err(invalid("n_samples", format!("need at least {MIN_SAMPLES} samples, got {n_samples}")));
    }
    if modes.is_empty() {
        return Err(invalid("modes", "need at least one mode"));
    }
    let mut per_point: Vec<Vec<Vec<f64>>> = Vec::with_capacity(p_grid.len());
    for (i, &p) in p_grid.iter().enumerate() {
        let samples: Vec<Vec<f64>> = (0..n_samples)
            .into_par_iter()
            .map(|s| {
                let config = draw(bath, p, seed, i, s)?;
                modes.iter().map(|m| Ok(omega_rates(&config, m)?.leakage)).collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        per_point.push(samples);
    }

    let mut out = SweepResult::new("P", p_grid.to_vec());
    let column = |mode: usize| -> Vec<(f64, f64)> {
        per_point
            .iter()
            .map(|samples| mean_std(&samples.iter().map(|v| v[mode]).collect::<Vec<_>>()))
            .collect()
    };
    let stats: Vec<Vec<(f64, f64)>> = (0..modes.len()).map(column).collect();
    let rel = |(m, s): (f64, f64)| if m > 0.0 { s / m } else { 0.0 };
    let root_n = (n_samples as f64).sqrt();
    for (m, st) in modes.iter().zip(&stats) {
        out.push(format!("leak_z{}_mean", m.zeta), st.iter().map(|x| x.0).collect());
    }
    for (m, st) in modes.iter().zip(&stats) {
        out.push(format!("leak_z{}_rsd", m.zeta), st.iter().map(|&x| rel(x)).collect());
    }
    for (m, st) in modes.iter().zip(&stats) {
        out.push(format!("leak_z{}_rse", m.zeta), st.iter().map(|&x| rel(x) / root_n).collect());
    }
    if modes.len() == 2 {
        let diff: Vec<(f64, f64)> = per_point
            .iter()
            .map(|samples| mean_std(&samples.iter().map(|v| v[1] - v[0]).collect::<Vec<_>>()))
            .collect();
        let (a, b) = (modes[0].zeta, modes[1].zeta);
        out.push(format!("diff_z{b}_z{a}_mean"), diff.iter().map(|x| x.0).collect());
        out.push(format!("diff_z{b}_z{a}_se"), diff.iter().map(|x| x.1 / root_n).collect());
    }
    out.meta("n_sites", bath.len());
    out.meta("n_samples", n_samples);
    out.meta("seed", seed);
    Ok(out)
}
