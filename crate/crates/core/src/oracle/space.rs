use serde::Serialize;

use crate::bath::NuclearConfiguration;
use crate::error::{invalid, Error, Result};
use crate::linalg::{cnorm, expm_multiply, Csr, C64};
use crate::pulse::effective_coupling;
use crate::spin::Spin;
use crate::spinwave::{prefactor_table, ModeCouplings, Sign};

/// Largest ensemble for the effective-Hamiltonian oracle.
pub const MAX_SITES: usize = 6;

/// Zeeman product basis `|m_1 … m_N⟩`, site 0 most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductSpace {
    pub spin: Spin,
    pub n_sites: usize,
    pub dim: usize,
}

impl ProductSpace {
    pub fn new(spin: Spin, n_sites: usize, max_sites: usize) -> Result<Self> {
        let d = spin.multiplicity();
        if n_sites > max_sites || n_sites == 0 {
            return Err(Error::DimensionCap { dim: 2 * d.pow(n_sites as u32), sites: n_sites, max_sites });
        }
        Ok(Self { spin, n_sites, dim: d.pow(n_sites as u32) })
    }

    fn stride(&self, j: usize) -> usize {
        self.spin.multiplicity().pow((self.n_sites - 1 - j) as u32)
    }

    pub fn level(&self, index: usize, j: usize) -> usize {
        (index / self.stride(j)) % self.spin.multiplicity()
    }

    pub fn index_of(&self, config: &NuclearConfiguration) -> Result<usize> {
        if config.len() != self.n_sites || config.spin != self.spin {
            return Err(invalid("config", "does not match the product space"));
        }
        Ok(config.levels().iter().enumerate().map(|(j, &k)| k as usize * self.stride(j)).sum())
    }

    /// `Φ_ζ^+ = Σ_j w_j (single-site ζ-raise)_j` as a real sparse matrix.
    pub fn phi_plus(&self, zeta: u8, weights: &[f64]) -> Result<Csr> {
        if weights.len() != self.n_sites {
            return Err(invalid("weights", "one weight per site required"));
        }
        let table = prefactor_table(zeta, Sign::Plus, self.spin)?;
        let top = self.spin.multiplicity();
        let mut t = Vec::new();
        for col in 0..self.dim {
            for (j, &w) in weights.iter().enumerate() {
                let k = self.level(col, j);
                let target = k + zeta as usize;
                if target < top && table[k] != 0.0 {
                    t.push((col + zeta as usize * self.stride(j), col, w * table[k]));
                }
            }
        }
        Ok(Csr::from_triplets(self.dim, t))
    }

    /// Diagonal of `Σ_j c_j I_z^j`.
    pub fn iz_diagonal(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| coeffs.iter().enumerate().map(|(j, c)| c * self.spin.level(self.level(i, j) as u8)).sum())
            .collect()
    }

    /// Embed a nuclear operator `X` as `X ⊗ |↓⟩⟨↑| + Xᵀ ⊗ |↑⟩⟨↓|` on `{↑,↓} ⊗ nuclei`
    /// (electron block index first, ↑ = 0).
    pub fn flip_flop(&self, x: &Csr) -> Csr {
        let n = self.dim;
        let mut t = Vec::with_capacity(2 * x.nnz());
        for r in 0..n {
            for (c, v) in x.row(r) {
                t.push((n + r, c, v));
                t.push((c, n + r, v));
            }
        }
        Csr::from_triplets(2 * n, t)
    }
}

/// Amplitudes over `{↑,↓} ⊗ (2I+1)^N`, electron block first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullStateVector {
    pub amplitudes: Vec<C64>,
    pub n_sites: usize,
    #[serde(skip)]
    pub spin: Spin,
}

impl FullStateVector {
    /// `(α|↑⟩ + β|↓⟩) ⊗ |M⟩`.
    pub fn product(space: &ProductSpace, config: &NuclearConfiguration, alpha: C64, beta: C64) -> Result<Self> {
        let i = space.index_of(config)?;
        let mut amplitudes = vec![C64::new(0.0, 0.0); 2 * space.dim];
        amplitudes[i] = alpha;
        amplitudes[space.dim + i] = beta;
        Ok(Self { amplitudes, n_sites: space.n_sites, spin: space.spin })
    }

    pub fn norm(&self) -> f64 {
        cnorm(&self.amplitudes)
    }

    /// Population left in nuclear product state `index`, summed over the electron.
    pub fn nuclear_population(&self, index: usize) -> f64 {
        let n = self.amplitudes.len() / 2;
        self.amplitudes[index].norm_sqr() + self.amplitudes[n + index].norm_sqr()
    }
}

/// `𝒜'(Φ^+S_− + Φ^−S_+)` on the full space.
pub fn effective_hamiltonian(space: &ProductSpace, mode: &ModeCouplings) -> Result<Csr> {
    let phi = space.phi_plus(mode.zeta, &mode.a_mode)?;
    Ok(space.flip_flop(&phi).scaled(effective_coupling(mode.a_zeta)))
}

/// `exp(−iHt)(α|↑⟩+β|↓⟩)|M⟩` under the effective flip-flop Hamiltonian, `N ≤ 6`.
pub fn exact_effective_evolution(
    config: &NuclearConfiguration,
    mode: &ModeCouplings,
    alpha: C64,
    beta: C64,
    t: f64,
) -> Result<FullStateVector> {
    let space = ProductSpace::new(config.spin, config.len(), MAX_SITES)?;
    let h = effective_hamiltonian(&space, mode)?;
    let mut psi = FullStateVector::product(&space, config, alpha, beta)?;
    psi.amplitudes = expm_multiply(|x, y| h.apply(x, y), h.norm_bound(), &psi.amplitudes, t);
    Ok(psi)
}

/// Orthonormal Krylov chain of one branch.
///
/// `links[k]` couples `vectors[k]` to `vectors[k+1]`; the final entry is the
/// coupling out of the last vector (zero once the space is exhausted).
#[derive(Debug, Clone)]
pub struct LanczosChain {
    pub vectors: Vec<Vec<f64>>,
    pub links: Vec<f64>,
    pub max_diagonal: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Lanczos on a real symmetric `h` from `start`, with full reorthogonalisation.
pub fn lanczos(h: &Csr, start: &[f64], max_depth: usize) -> LanczosChain {
    let scale = h.norm_bound().max(f64::MIN_POSITIVE);
    let norm = dot(start, start).sqrt();
    let mut vectors = vec![start.iter().map(|x| x / norm).collect::<Vec<_>>()];
    let mut links = Vec::new();
    let mut max_diagonal: f64 = 0.0;
    let mut w = vec![0.0; start.len()];
    loop {
        let k = vectors.len() - 1;
        h.apply_real(&vectors[k], &mut w);
        max_diagonal = max_diagonal.max(dot(&w, &vectors[k]).abs() / scale);
        for _ in 0..2 {
            for v in &vectors {
                let c = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let beta = dot(&w, &w).sqrt();
        if beta <= 1e-12 * scale {
            links.push(0.0);
            break;
        }
        links.push(beta);
        if k == max_depth {
            break;
        }
        vectors.push(w.iter().map(|x| x / beta).collect());
    }
    LanczosChain { vectors, links, max_diagonal }
}

/// Unit-norm closed-form chain state at depth `k` on `branch` in the product
/// basis: every way to raise `p` sites and lower `q` others, weighted by
/// `Π a P₊ · Π a P₋`. Returns zeros when no such assignment exists.
pub fn closed_form_state(
    space: &ProductSpace,
    config: &NuclearConfiguration,
    mode: &ModeCouplings,
    branch: Sign,
    k: usize,
) -> Result<Vec<f64>> {
    let (p, q) = crate::chain::slot_counts(branch, k);
    let up = prefactor_table(mode.zeta, Sign::Plus, space.spin)?;
    let down = prefactor_table(mode.zeta, Sign::Minus, space.spin)?;
    let base = space.index_of(config)?;
    let z = mode.zeta as usize;
    let mut out = vec![0.0; space.dim];
    // Depth-first over sites: (site, raised, lowered, index, amplitude).
    let mut stack = vec![(0usize, 0usize, 0usize, base, 1.0f64)];
    while let Some((j, r, l, idx, amp)) = stack.pop() {
        if j == space.n_sites {
            if r == p && l == q {
                out[idx] += amp;
            }
            continue;
        }
        let lvl = config.levels()[j] as usize;
        let a = mode.a_mode[j];
        stack.push((j + 1, r, l, idx, amp));
        if r < p && up[lvl] != 0.0 {
            stack.push((j + 1, r + 1, l, idx + z * space.stride(j), amp * a * up[lvl]));
        }
        if l < q && down[lvl] != 0.0 {
            stack.push((j + 1, r, l + 1, idx - z * space.stride(j), amp * a * down[lvl]));
        }
    }
    let n = dot(&out, &out).sqrt();
    if n > 0.0 {
        out.iter_mut().for_each(|x| *x /= n);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_minus_is_transpose() {
        let s = ProductSpace::new(Spin::THREE_HALVES, 2, 6).unwrap();
        let phi = s.phi_plus(1, &[0.6, 0.4]).unwrap();
        let d = phi.to_dense();
        // |−3/2, −3/2⟩ → 0.6 P₊(−3/2) |−1/2, −3/2⟩.
        let p = -2.0 * 3f64.sqrt();
        assert!((d[(4, 0)] - 0.6 * p).abs() < 1e-14);
        assert!((d[(1, 0)] - 0.4 * p).abs() < 1e-14);
        let ff = s.flip_flop(&phi).to_dense();
        assert_eq!(ff.clone(), ff.transpose());
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            ProductSpace::new(Spin::THREE_HALVES, 7, MAX_SITES),
            Err(Error::DimensionCap { sites: 7, .. })
        ));
    }

    #[test]
    fn lanczos_exhausts_two_level() {
        let s = ProductSpace::new(Spin::THREE_HALVES, 3, 6).unwrap();
        let mode = ModeCouplings::from_weights(2, 1.0, &[0.5, 0.3, 0.2]).unwrap();
        let h = effective_hamiltonian(&s, &mode).unwrap();
        let mut start = vec![0.0; 2 * s.dim];
        start[0] = 1.0;
        let c = lanczos(&h, &start, 64);
        assert_eq!(c.vectors.len(), 2);
        assert_eq!(c.links[1], 0.0);
        assert!(c.max_diagonal < 1e-15);
    }
}
