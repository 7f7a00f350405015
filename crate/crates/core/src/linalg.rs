//! Sparse matrices, Krylov propagation and dense symmetric propagators.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;

pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn cnorm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `1 − |⟨a|b⟩|` for normalised vectors.
pub fn overlap_deviation(a: &[C64], b: &[C64]) -> f64 {
    1.0 - cdot(a, b).norm()
}

/// Real sparse matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    /// Build from `(row, col, value)` triplets; duplicates are summed and zeros dropped.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indices.push(c);
            values.push(v);
            indptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self { n, indptr, indices, values };
        m.prune();
        m
    }

    fn prune(&mut self) {
        if self.values.iter().all(|v| *v != 0.0) {
            return;
        }
        let mut indptr = vec![0usize; self.n + 1];
        let (mut indices, mut values) = (Vec::new(), Vec::new());
        for r in 0..self.n {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != 0.0 {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| x[c] * v).sum();
        }
    }

    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| x[c] * v).sum();
        }
    }

    /// Largest absolute row sum, an upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.n).map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn scaled(mut self, s: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= s);
        self
    }

    pub fn transpose(&self) -> Self {
        let mut t = Vec::with_capacity(self.nnz());
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                t.push((c, r, v));
            }
        }
        Self::from_triplets(self.n, t)
    }

    pub fn add(&self, other: &Csr) -> Self {
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for m in [self, other] {
            for r in 0..m.n {
                for (c, v) in m.row(r) {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(self.n, t)
    }
}

const KRYLOV_DIM: usize = 30;
const STEP_NORM: f64 = 6.0;

/// `exp(−iHt)v` for Hermitian `H` given as a matrix-vector product.
///
/// `norm` must bound the spectral radius of `H`; the horizon is split so each
/// Krylov step covers `‖H‖·dt ≤ 6`, where a 30-dimensional space is accurate to
/// well below 1e-13.
pub fn expm_multiply<F>(apply: F, norm: f64, v: &[C64], t: f64) -> Vec<C64>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = v.len();
    let mut out = v.to_vec();
    if t == 0.0 || n == 0 {
        return out;
    }
    let steps = ((norm * t.abs()) / STEP_NORM).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let m_max = KRYLOV_DIM.min(n);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_max);
    let mut w = vec![C64::new(0.0, 0.0); n];
    for _ in 0..steps {
        let beta0 = cnorm(&out);
        if beta0 == 0.0 {
            return out;
        }
        basis.clear();
        basis.push(out.iter().map(|x| x / beta0).collect());
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        for j in 0..m_max {
            apply(&basis[j], &mut w);
            // Full reorthogonalisation, twice, keeps the basis orthonormal to rounding.
            let mut a = 0.0;
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = cdot(q, &w);
                    if i == j {
                        a += c.re;
                    }
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            alpha.push(a);
            let b = cnorm(&w);
            if j + 1 == m_max || b <= 1e-13 * norm.max(1e-300) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
        let m = alpha.len();
        let mut tri = DMatrix::zeros(m, m);
        for i in 0..m {
            tri[(i, i)] = alpha[i];
            if i + 1 < m {
                tri[(i, i + 1)] = beta[i];
                tri[(i + 1, i)] = beta[i];
            }
        }
        let eig = SymmetricEigen::new(tri);
        // c = V exp(−iΛdt) Vᵀ e_1 · β0
        let coeffs: Vec<C64> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| {
                        let ph = C64::from_polar(1.0, -eig.eigenvalues[k] * dt);
                        ph * eig.eigenvectors[(i, k)] * eig.eigenvectors[(0, k)]
                    })
                    .sum::<C64>()
                    * beta0
            })
            .collect();
        out.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for (c, q) in coeffs.iter().zip(&basis) {
            out.iter_mut().zip(q).for_each(|(x, y)| *x += c * y);
        }
    }
    out
}

/// Exact propagator `exp(−iHt)` of a dense real-symmetric `H`.
#[derive(Debug, Clone)]
pub struct SymmetricPropagator {
    pub eigenvalues: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl SymmetricPropagator {
    pub fn new(h: DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h);
        Self { eigenvalues: eig.eigenvalues.iter().copied().collect(), vectors: eig.eigenvectors }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn apply(&self, v: &[C64], t: f64) -> Vec<C64> {
        let n = self.dim();
        let vecs = &self.vectors;
        let coeffs: Vec<C64> = (0..n)
            .map(|k| {
                let c: C64 = (0..n).map(|i| v[i] * vecs[(i, k)]).sum();
                c * C64::from_polar(1.0, -self.eigenvalues[k] * t)
            })
            .collect();
        (0..n).map(|i| (0..n).map(|k| coeffs[k] * vecs[(i, k)]).sum()).collect()
    }

    /// Dense unitary `exp(−iHt)`.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        let n = self.dim();
        let v = self.vectors.map(|x| C64::new(x, 0.0));
        let mut scaled = v.clone();
        for k in 0..n {
            let ph = C64::from_polar(1.0, -self.eigenvalues[k] * t);
            scaled.column_mut(k).iter_mut().for_each(|x| *x *= ph);
        }
        scaled * v.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Csr {
        let mut t = Vec::new();
        for i in 0..n - 1 {
            let w = 1.0 + 0.1 * i as f64;
            t.push((i, i + 1, w));
            t.push((i + 1, i, w));
        }
        t.push((0, 0, 0.3));
        Csr::from_triplets(n, t)
    }

    #[test]
    fn krylov_matches_dense() {
        let h = chain(60);
        let mut v = vec![C64::new(0.0, 0.0); 60];
        v[0] = C64::new(0.6, 0.0);
        v[3] = C64::new(0.0, 0.8);
        let dense = SymmetricPropagator::new(h.to_dense()).apply(&v, 7.3);
        let kry = expm_multiply(|x, y| h.apply(x, y), h.norm_bound(), &v, 7.3);
        let err: f64 = dense.iter().zip(&kry).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11, "{err}");
        assert!((cnorm(&kry) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triplets_sum_and_prune() {
        let m = Csr::from_triplets(2, vec![(0, 1, 1.0), (0, 1, -1.0), (1, 0, 2.0), (1, 0, 0.5)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.to_dense()[(1, 0)], 2.5);
    }

    #[test]
    fn unitary_is_unitary() {
        let u = SymmetricPropagator::new(chain(8).to_dense()).unitary(1.7);
        let id = &u.adjoint() * &u;
        for i in 0..8 {
            for j in 0..8 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)] - C64::new(e, 0.0)).norm() < 1e-12);
            }
        }
    }
}
