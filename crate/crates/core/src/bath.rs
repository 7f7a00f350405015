//! Hyperfine coupling distributions and thermal nuclear configurations.
//!
//! The electron density is a separable Gaussian sampled on a cubic lattice;
//! each lattice site carries one nucleus whose normalised coupling `a_j` is
//! proportional to the density at that site. Thermal configurations follow a
//! spin-temperature ansatz: every site draws its Zeeman level independently
//! from `p(m) ∝ exp(-β m)`.

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::compensated_sum;
use crate::spin::Spin;

/// Geometry and energy scales of the dot. Lengths in nm, energies in MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BathParams {
    pub l_x: f64,
    pub l_y: f64,
    pub l_z: f64,
    pub lattice_spacing: f64,
    /// Half-width of the lattice box per axis, in units of that axis' Gaussian width.
    pub extent_sigmas: f64,
    pub spin: Spin,
    /// `Σ_j A^j`.
    pub a_total: f64,
    pub b_q: f64,
    pub theta: f64,
    pub omega_zn: f64,
    pub omega_ze: f64,
    /// Sites with `a_j < site_floor · max(a)` are dropped before renormalising.
    pub site_floor: f64,
}

impl Default for BathParams {
    fn default() -> Self {
        Self {
            l_x: 10.0,
            l_y: 10.0,
            l_z: 1.0,
            lattice_spacing: 0.5,
            extent_sigmas: 2.0,
            spin: Spin::THREE_HALVES,
            a_total: 65_000.0,
            b_q: 1.5,
            // Both angular prefactors at unity magnitude would need two angles;
            // the default maximises sin²θ.
            theta: std::f64::consts::FRAC_PI_2,
            omega_zn: 50.0,
            omega_ze: 25_000.0,
            site_floor: 1e-9,
        }
    }
}

impl BathParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l_x", self.l_x),
            ("l_y", self.l_y),
            ("l_z", self.l_z),
            ("lattice_spacing", self.lattice_spacing),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.extent_sigmas >= 2.0) {
            return Err(invalid(
                "extent_sigmas",
                format!("box must span at least 4 standard deviations per axis, got half-width {}σ", self.extent_sigmas),
            ));
        }
        if !(self.omega_zn > 0.0) {
            return Err(invalid("omega_zn", "must be positive"));
        }
        if !(self.b_q.abs() / self.omega_zn < 1.0) {
            return Err(invalid("b_q", "B_Q/ω_Z^n must be below 1 (perturbative regime)"));
        }
        if !(self.a_total > 0.0) {
            return Err(invalid("a_total", "must be positive"));
        }
        if !(self.site_floor >= 0.0 && self.site_floor < 1.0) {
            return Err(invalid("site_floor", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// A quantity that is either common to every site or given per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SiteField {
    Uniform(f64),
    PerSite(Vec<f64>),
}

impl SiteField {
    pub fn at(&self, j: usize) -> f64 {
        match self {
            SiteField::Uniform(v) => *v,
            SiteField::PerSite(v) => v[j],
        }
    }
}

/// Normalised hyperfine coefficients of the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperfineBath {
    pub a: Vec<f64>,
    pub inv_participation: f64,
    pub a_total: f64,
    pub spin: Spin,
    pub b_q: SiteField,
    pub theta: SiteField,
}

impl HyperfineBath {
    /// Normalise arbitrary positive weights into a bath.
    pub fn from_weights(weights: Vec<f64>, a_total: f64, spin: Spin) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::DegenerateLattice);
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(invalid("a", "hyperfine weights must be positive"));
        }
        let total = compensated_sum(weights.iter().copied());
        let a: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let inv_participation = compensated_sum(a.iter().map(|x| x * x));
        Ok(Self {
            a,
            inv_participation,
            a_total,
            spin,
            b_q: SiteField::Uniform(1.5),
            theta: SiteField::Uniform(std::f64::consts::FRAC_PI_2),
        })
    }

    /// `N` equal couplings `a_j = 1/N`.
    pub fn uniform(n: usize, a_total: f64, spin: Spin) -> Result<Self> {
        Self::from_weights(vec![1.0; n], a_total, spin)
    }

    pub fn with_quadrupole(mut self, b_q: SiteField, theta: SiteField) -> Self {
        self.b_q = b_q;
        self.theta = theta;
        self
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Bare hyperfine constant `A^j` of site `j`.
    pub fn hyperfine(&self, j: usize) -> f64 {
        self.a_total * self.a[j]
    }
}

/// Unnormalised Gaussian electron density at `r` (nm).
pub fn gaussian_density(r: [f64; 3], widths: [f64; 3]) -> f64 {
    r.iter()
        .zip(widths)
        .map(|(x, l)| (-x * x / (2.0 * l * l)).exp())
        .product()
}

/// Lattice coordinates along one axis: `i·s` for `|i·s| <= extent·L`.
fn axis_points(width: f64, spacing: f64, extent: f64) -> Vec<f64> {
    let n = (extent * width / spacing + 1e-9).floor() as i64;
    (-n..=n).map(|i| i as f64 * spacing).collect()
}

/// Build a bath by sampling the Gaussian density at explicit site positions.
pub fn bath_from_positions(positions: &[[f64; 3]], params: &BathParams) -> Result<HyperfineBath> {
    let widths = [params.l_x, params.l_y, params.l_z];
    let raw: Vec<f64> = positions.iter().map(|&r| gaussian_density(r, widths)).collect();
    let max = raw.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::DegenerateLattice);
    }
    let kept: Vec<f64> = raw.into_iter().filter(|w| *w >= params.site_floor * max && *w > 0.0).collect();
    Ok(HyperfineBath::from_weights(kept, params.a_total, params.spin)?.with_quadrupole(
        SiteField::Uniform(params.b_q),
        SiteField::Uniform(params.theta),
    ))
}

/// Hyperfine distribution from a Gaussian electron density on a cubic lattice.
pub fn build_gaussian_bath(params: &BathParams) -> Result<HyperfineBath> {
    params.validate()?;
    let s = params.lattice_spacing;
    let xs = axis_points(params.l_x, s, params.extent_sigmas);
    let ys = axis_points(params.l_y, s, params.extent_sigmas);
    let zs = axis_points(params.l_z, s, params.extent_sigmas);
    let mut positions = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &x in &xs {
        for &y in &ys {
            for &z in &zs {
                positions.push([x, y, z]);
            }
        }
    }
    bath_from_positions(&positions, params)
}

/// Number of lattice sites in the box of `params` at spacing `spacing`.
pub fn lattice_site_count(params: &BathParams, spacing: f64) -> usize {
    [params.l_x, params.l_y, params.l_z]
        .iter()
        .map(|&l| axis_points(l, spacing, params.extent_sigmas).len())
        .product()
}

/// Largest lattice spacing whose box holds at least `n` sites.
pub fn spacing_for_site_count(params: &BathParams, n: usize) -> f64 {
    let e = 2.0 * params.extent_sigmas;
    let volume = e * params.l_x * e * params.l_y * e * params.l_z;
    let guess = (volume / n.max(1) as f64).cbrt();
    let (mut lo, mut hi) = (guess / 4.0, guess * 4.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lattice_site_count(params, mid) >= n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// A nuclear product state `|m_1, …, m_N⟩`, stored as level indices (`0 ↔ m = -I`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NuclearConfiguration {
    pub spin: Spin,
    levels: Vec<u8>,
}

impl NuclearConfiguration {
    pub fn from_levels(spin: Spin, levels: Vec<u8>) -> Result<Self> {
        if let Some(&bad) = levels.iter().find(|&&k| k as u32 > spin.twice()) {
            return Err(Error::InvalidLevel { m: spin.level(bad), spin: spin.value() });
        }
        Ok(Self { spin, levels })
    }

    pub fn from_m(spin: Spin, m: &[f64]) -> Result<Self> {
        let levels = m.iter().map(|&x| spin.index_of(x)).collect::<Result<Vec<_>>>()?;
        Ok(Self { spin, levels })
    }

    /// Every site in `m = -I`.
    pub fn fully_polarised(spin: Spin, n: usize) -> Self {
        Self { spin, levels: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn levels(&self) -> &[u8] {
        &self.levels
    }

    pub fn m(&self, j: usize) -> f64 {
        self.spin.level(self.levels[j])
    }

    /// `-Σ m_j / (N I)`; +1 when every site sits in `m = -I`.
    pub fn polarisation(&self) -> f64 {
        let total = compensated_sum((0..self.len()).map(|j| self.m(j)));
        -total / (self.len() as f64 * self.spin.value())
    }
}

/// Single-site Boltzmann weights `p(m) ∝ exp(-β m)`, ordered from `m = -I`.
pub fn level_probabilities(beta: f64, spin: Spin) -> Vec<f64> {
    let ms: Vec<f64> = spin.levels().collect();
    let shift = ms.iter().map(|m| -beta * m).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ms.iter().map(|m| (-beta * m - shift).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

fn mean_m(beta: f64, spin: Spin) -> (f64, f64) {
    let p = level_probabilities(beta, spin);
    let mean: f64 = spin.levels().zip(&p).map(|(m, q)| m * q).sum();
    let var: f64 = spin.levels().zip(&p).map(|(m, q)| (m - mean) * (m - mean) * q).sum();
    (mean, var)
}

/// Inverse spin temperature β for which `⟨m⟩ = -I·P`.
pub fn solve_spin_temperature(polarisation: f64, spin: Spin) -> Result<f64> {
    if polarisation >= 1.0 {
        return Err(Error::FullPolarisation(polarisation));
    }
    if !(polarisation > -1.0) {
        return Err(invalid("P", format!("polarisation {polarisation} outside (-1, 1)")));
    }
    if polarisation == 0.0 {
        return Ok(0.0);
    }
    let target = -spin.value() * polarisation;
    // ⟨m⟩(β) is strictly decreasing; bracket then safeguarded Newton.
    let sign = polarisation.signum();
    let (mut lo, mut hi) = (0.0_f64, sign);
    while (mean_m(hi, spin).0 - target) * sign > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi.abs() > 1e6 {
            return Err(invalid("P", "spin temperature out of range"));
        }
    }
    let mut beta = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (m, var) = mean_m(beta, spin);
        let f = m - target;
        if f.abs() < 1e-14 {
            break;
        }
        if f * sign > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        let newton = beta + f / var;
        beta = if var > 0.0 && (newton - lo) * (newton - hi) < 0.0 { newton } else { 0.5 * (lo + hi) };
    }
    Ok(beta)
}

/// Draw an i.i.d. thermal configuration using the supplied generator.
pub fn sample_thermal_configuration_with<R: Rng + ?Sized>(
    polarisation: f64,
    spin: Spin,
    n: usize,
    rng: &mut R,
) -> Result<NuclearConfiguration> {
    if polarisation == 1.0 {
        return Ok(NuclearConfiguration::fully_polarised(spin, n));
    }
    let beta = solve_spin_temperature(polarisation, spin)?;
    let p = level_probabilities(beta, spin);
    let dist = WeightedIndex::new(&p).map_err(|e| invalid("P", e.to_string()))?;
    let levels = (0..n).map(|_| dist.sample(rng) as u8).collect();
    Ok(NuclearConfiguration { spin, levels })
}

/// Thermal configuration reproducible from `seed`.
pub fn sample_thermal_configuration(
    polarisation: f64,
    spin: Spin,
    n: usize,
    seed: u64,
) -> Result<NuclearConfiguration> {
    sample_thermal_configuration_with(polarisation, spin, n, &mut crate::rng::stream(seed, 0))
}
