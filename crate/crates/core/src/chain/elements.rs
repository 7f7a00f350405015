//! Closed-form chain elements for `I = 3/2`.
//!
//! For `I = 3/2` every site can make at most one `ζ`-step up or one down, so
//! the chain state at depth `k` is the normalised superposition of all ways
//! to raise `p` sites and lower `q` others, with amplitude `Π a P₊ · Π a P₋`.
//! Its squared norm is the distinct-index sum `E(p, q)` over disjoint up-set
//! and down-set, evaluated by a DP over sites.

use crate::bath::NuclearConfiguration;
use crate::error::{Error, Result};
use crate::spin::Spin;
use crate::spinwave::{prefactor_table, ModeCouplings, Sign};

/// Per-site weights `u_j = (a_j P₊(m_j))²` and `v_j = (a_j P₋(m_j))²`.
pub fn slot_weights(config: &NuclearConfiguration, mode: &ModeCouplings) -> Result<(Vec<f64>, Vec<f64>)> {
    if config.len() != mode.a_mode.len() {
        return Err(crate::error::invalid("config", "configuration and mode sizes differ"));
    }
    let up = prefactor_table(mode.zeta, Sign::Plus, config.spin)?;
    let down = prefactor_table(mode.zeta, Sign::Minus, config.spin)?;
    let mut u = Vec::with_capacity(config.len());
    let mut v = Vec::with_capacity(config.len());
    for (a, &k) in mode.a_mode.iter().zip(config.levels()) {
        u.push((a * up[k as usize]).powi(2));
        v.push((a * down[k as usize]).powi(2));
    }
    Ok((u, v))
}

/// Up and down slot counts of the depth-`k` state on `branch`.
pub fn slot_counts(branch: Sign, k: usize) -> (usize, usize) {
    let (hi, lo) = (k.div_ceil(2), k / 2);
    match branch {
        Sign::Plus => (hi, lo),
        Sign::Minus => (lo, hi),
    }
}

/// Table of `E(p, q) / (U^p V^q)` for `p ≤ p_max`, `q ≤ q_max`.
///
/// Scaling by the totals `U = Σu`, `V = Σv` keeps entries in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct SlotSums {
    table: Vec<Vec<f64>>,
    pub u_total: f64,
    pub v_total: f64,
}

impl SlotSums {
    pub fn new(u: &[f64], v: &[f64], p_max: usize, q_max: usize) -> Self {
        let u_total: f64 = crate::numeric::compensated_sum(u.iter().copied());
        let v_total: f64 = crate::numeric::compensated_sum(v.iter().copied());
        let su = if u_total > 0.0 { 1.0 / u_total } else { 1.0 };
        let sv = if v_total > 0.0 { 1.0 / v_total } else { 1.0 };
        let mut e = vec![vec![0.0; q_max + 1]; p_max + 1];
        e[0][0] = 1.0;
        for (&uj, &vj) in u.iter().zip(v) {
            let (uj, vj) = (uj * su, vj * sv);
            if uj == 0.0 && vj == 0.0 {
                continue;
            }
            // Descending order so each site fills at most one slot.
            for p in (0..=p_max).rev() {
                for q in (0..=q_max).rev() {
                    let mut add = 0.0;
                    if p > 0 {
                        add += e[p - 1][q] * uj;
                    }
                    if q > 0 {
                        add += e[p][q - 1] * vj;
                    }
                    e[p][q] += add;
                }
            }
        }
        Self { table: e, u_total, v_total }
    }

    pub fn scaled(&self, p: usize, q: usize) -> f64 {
        self.table[p][q]
    }

    /// Element `⟨k+1|Φ^±|k⟩` between normalised closed-form states on `branch`.
    pub fn link(&self, branch: Sign, k: usize) -> f64 {
        let (p, q) = slot_counts(branch, k);
        let (p2, q2) = slot_counts(branch, k + 1);
        let base = self.scaled(p, q);
        let next = self.scaled(p2, q2);
        if base <= 0.0 || next <= 0.0 {
            return 0.0;
        }
        let (n_new, total) = if p2 > p { (p2, self.u_total) } else { (q2, self.v_total) };
        n_new as f64 * (total * next / base).sqrt()
    }
}

fn require_three_halves(spin: Spin) -> Result<()> {
    if spin != Spin::THREE_HALVES {
        return Err(Error::UnsupportedSpin(spin.value()));
    }
    Ok(())
}

/// Matrix element of `Φ^±` between closed-form chain states at depths `k` and `k_prime`.
///
/// Zero unless `|k − k'| = 1`.
pub fn exact_chain_element(
    config: &NuclearConfiguration,
    mode: &ModeCouplings,
    k: usize,
    k_prime: usize,
    branch: Sign,
) -> Result<f64> {
    require_three_halves(config.spin)?;
    if k.abs_diff(k_prime) != 1 {
        return Ok(0.0);
    }
    let lo = k.min(k_prime);
    let (u, v) = slot_weights(config, mode)?;
    let (p, q) = slot_counts(branch, lo + 1);
    Ok(SlotSums::new(&u, &v, p, q).link(branch, lo))
}

/// Closed-form link weights `(plus, minus)` for depths `0..=k_star`, the last
/// entry being the outgoing link from the truncation boundary.
pub fn closed_form_links(
    config: &NuclearConfiguration,
    mode: &ModeCouplings,
    k_star: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    require_three_halves(config.spin)?;
    let (u, v) = slot_weights(config, mode)?;
    let m = (k_star + 1).div_ceil(2);
    let sums = SlotSums::new(&u, &v, m, m);
    let plus = (0..=k_star).map(|k| sums.link(Sign::Plus, k)).collect();
    let minus = (0..=k_star).map(|k| sums.link(Sign::Minus, k)).collect();
    Ok((plus, minus))
}
