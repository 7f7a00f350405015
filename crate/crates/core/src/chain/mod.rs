//! Chain-of-states reduction of the flip-flop dynamics.
//!
//! Starting from a product state `|M⟩`, repeated application of `Φ^±`
//! generates two chains. Odd depths carry net magnetisation `±ζ` relative to
//! `M`; even depths carry none and are shared between the branches. With the
//! electron label attached every hybrid state stays orthogonal.

mod elements;
mod ensemble;
mod truncation;

pub use elements::{closed_form_links, exact_chain_element, slot_counts, slot_weights, SlotSums};
pub use ensemble::{ensemble_leakage, MIN_SAMPLES};
pub(crate) use ensemble::draw as ensemble_draw;
pub use truncation::{select_truncation, TRUNCATION_CAP};

use serde::{Deserialize, Serialize};

use crate::bath::NuclearConfiguration;
use crate::error::{invalid, Error, Result};
use crate::numeric::compensated_sum;
use crate::pulse::effective_coupling;
use crate::spinwave::{prefactor_table, ModeCouplings, Sign};

/// Upward and downward collective matrix elements of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainRates {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub g_plus: f64,
    pub g_minus: f64,
    pub leakage: f64,
}

/// `Ω_± = √(Σ_j [a_{ζ,j} P_±(m_j)]²)` and `𝒢_± = (2+√2)/(3π)·𝒜_ζ·Ω_±`.
pub fn omega_rates(config: &NuclearConfiguration, mode: &ModeCouplings) -> Result<ChainRates> {
    if config.len() != mode.a_mode.len() {
        return Err(invalid("config", "configuration and mode sizes differ"));
    }
    let up = prefactor_table(mode.zeta, Sign::Plus, config.spin)?;
    let down = prefactor_table(mode.zeta, Sign::Minus, config.spin)?;
    let levels = config.levels();
    let sum = |table: &[f64]| {
        compensated_sum(mode.a_mode.iter().zip(levels).map(|(a, &k)| (a * table[k as usize]).powi(2)))
    };
    let omega_plus = sum(&up).sqrt();
    let omega_minus = sum(&down).sqrt();
    if omega_plus == 0.0 {
        return Err(Error::NoUpwardTransitions);
    }
    let scale = effective_coupling(mode.a_zeta);
    Ok(ChainRates {
        omega_plus,
        omega_minus,
        g_plus: scale * omega_plus,
        g_minus: scale * omega_minus,
        leakage: omega_minus / omega_plus,
    })
}

/// Truncated union chain.
///
/// `plus[k]` and `minus[k]` are the couplings (MHz) of the link from depth `k`
/// to `k+1` on each branch. Both vectors have length `k_star + 1`; the last
/// entry is the link leaving the truncated space, used only to weight the
/// boundary occupation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainBasis {
    pub k_star: usize,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
}

impl ChainBasis {
    pub fn new(plus: Vec<f64>, minus: Vec<f64>) -> Result<Self> {
        if plus.len() != minus.len() || plus.len() < 2 {
            return Err(invalid("links", "branches need equal length and k* >= 1"));
        }
        if plus.iter().chain(&minus).any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(invalid("links", "couplings must be finite and non-negative"));
        }
        Ok(Self { k_star: plus.len() - 1, plus, minus })
    }

    pub fn g_plus(&self) -> f64 {
        self.plus[0]
    }

    pub fn g_minus(&self) -> f64 {
        self.minus[0]
    }

    pub fn leakage(&self) -> f64 {
        self.minus[0] / self.plus[0]
    }

    pub fn links(&self, branch: Sign) -> &[f64] {
        match branch {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    /// Coupling between depths `k` and `k_prime` on `branch`; zero unless adjacent.
    pub fn element(&self, branch: Sign, k: usize, k_prime: usize) -> f64 {
        if k.abs_diff(k_prime) != 1 || k.max(k_prime) > self.k_star {
            return 0.0;
        }
        self.links(branch)[k.min(k_prime)]
    }

    /// Net magnetisation of the depth-`k` nuclear state relative to `M`, in units of `ζ`.
    pub fn magnetisation(branch: Sign, k: usize) -> i32 {
        if k % 2 == 0 {
            0
        } else {
            branch.value() as i32
        }
    }
}

/// Chain with every upward link `𝒢₊` and every downward link `𝒢₋`.
pub fn uniform_chain(rates: &ChainRates, k_star: usize) -> Result<ChainBasis> {
    uniform_links(rates.g_plus, rates.g_minus, k_star)
}

/// Uniform chain from the two rates directly.
pub fn uniform_links(g_plus: f64, g_minus: f64, k_star: usize) -> Result<ChainBasis> {
    if k_star == 0 {
        return Err(invalid("k_star", "must be at least 1"));
    }
    let alt = |a: f64, b: f64| (0..=k_star).map(|k| if k % 2 == 0 { a } else { b }).collect();
    ChainBasis::new(alt(g_plus, g_minus), alt(g_minus, g_plus))
}

/// Chain with closed-form elements (`I = 3/2`), scaled to MHz.
pub fn closed_form_chain(config: &NuclearConfiguration, mode: &ModeCouplings, k_star: usize) -> Result<ChainBasis> {
    let (plus, minus) = closed_form_links(config, mode, k_star)?;
    let scale = effective_coupling(mode.a_zeta);
    ChainBasis::new(plus.iter().map(|w| w * scale).collect(), minus.iter().map(|w| w * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::Spin;

    fn uniform_mode(n: usize) -> ModeCouplings {
        ModeCouplings::from_weights(2, 1.0, &vec![1.0; n]).unwrap()
    }

    #[test]
    fn fully_polarised_rates() {
        let c = NuclearConfiguration::fully_polarised(Spin::THREE_HALVES, 16);
        let r = omega_rates(&c, &uniform_mode(16)).unwrap();
        assert_eq!(r.omega_minus, 0.0);
        assert_eq!(r.leakage, 0.0);
        assert!((r.omega_plus - 12f64.sqrt() / 4.0).abs() < 1e-14);
    }

    #[test]
    fn top_of_ladder_has_no_upward_rate() {
        let c = NuclearConfiguration::from_m(Spin::THREE_HALVES, &[1.5, 0.5]).unwrap();
        assert_eq!(omega_rates(&c, &uniform_mode(2)), Err(Error::NoUpwardTransitions));
    }

    #[test]
    fn uniform_alternation() {
        let b = uniform_links(1.0, 0.3, 3).unwrap();
        assert_eq!(b.plus, vec![1.0, 0.3, 1.0, 0.3]);
        assert_eq!(b.minus, vec![0.3, 1.0, 0.3, 1.0]);
        assert_eq!(b.element(Sign::Plus, 2, 0), 0.0);
        assert_eq!(b.element(Sign::Minus, 2, 1), 1.0);
    }

    #[test]
    fn first_links_match_rates() {
        let c = NuclearConfiguration::from_m(Spin::THREE_HALVES, &[-1.5, -0.5, 0.5, 1.5, -1.5]).unwrap();
        let mode = ModeCouplings::from_weights(2, 1.0, &[0.3, 0.1, 0.2, 0.25, 0.15]).unwrap();
        let r = omega_rates(&c, &mode).unwrap();
        let (p, m) = closed_form_links(&c, &mode, 2).unwrap();
        assert!((p[0] - r.omega_plus).abs() < 1e-14);
        assert!((m[0] - r.omega_minus).abs() < 1e-14);
        // Depth 1 → 2 on the + branch only needs one down slot.
        assert!((p[1] - r.omega_minus).abs() < 1e-14);
        assert!((m[1] - r.omega_plus).abs() < 1e-14);
    }
}
