use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::fock::{hermitian_eigen, unitary_from_generator, FockBasis, Operator};
use crate::polarization::PolarizationOps;

/// ξ(θ,φ) = −(θ/2)e^{−iφ}.
pub fn xi(theta: f64, phi: f64) -> C64 {
    C64::from_polar(-theta / 2.0, -phi)
}

/// D(θ,φ) = exp(ξP₊ − ξ*P₋), exponentiated block by block.
pub fn su2_displacement(theta: f64, phi: f64, ops: &PolarizationOps) -> Result<Operator> {
    let x = xi(theta, phi);
    let g = ops.pplus().lin_comb(x, ops.pminus(), -x.conj())?;
    unitary_from_generator(&g)
}

/// Fast evaluation of D(θ,φ) = e^{−iφP₀} e^{iθP₂} e^{iφP₀}.
///
/// P is a sum of commuting single-mode terms, so D factorizes over modes.
/// Each factor comes from the spectral decomposition of the one-mode P₂ on
/// its fixed-photon-number blocks and acts on the fibers of basis states
/// that differ only in that mode's polarization split.
#[derive(Debug, Clone)]
pub struct Rotator {
    basis: Arc<FockBasis>,
    /// Per photon number N: eigenvalues and eigenvectors of the one-mode P₂.
    p2: Vec<(Vec<f64>, DMatrix<C64>)>,
    /// Per mode: fibers (N, indices ordered by decreasing n⁺).
    fibers: Vec<Vec<(usize, Vec<usize>)>>,
}

impl Rotator {
    pub fn new(ops: &PolarizationOps) -> Rotator {
        Self::for_basis(ops.basis())
    }

    pub fn for_basis(basis: &Arc<FockBasis>) -> Rotator {
        let n_max = basis.n_max();
        let p2 = (0..=n_max)
            .map(|n| {
                // One-mode P₂ on the block (N,0), (N−1,1), …, (0,N).
                let d = n + 1;
                let mut m = DMatrix::<C64>::zeros(d, d);
                for k in 0..n {
                    // P₊ = a⁺₊a₋ maps (N−k−1, k+1) → (N−k, k).
                    let amp = (((n - k) * (k + 1)) as f64).sqrt();
                    m[(k, k + 1)] = C64::new(0.0, 0.5 * amp);
                    m[(k + 1, k)] = C64::new(0.0, -0.5 * amp);
                }
                hermitian_eigen(&m)
            })
            .collect();
        let fibers = (0..basis.m())
            .map(|j| {
                let (sp, sm) = (2 * j, 2 * j + 1);
                let mut out = Vec::new();
                for (i, occ) in basis.states().enumerate() {
                    if occ[sm] != 0 {
                        continue;
                    }
                    let n = occ[sp] as usize;
                    let mut o = occ.to_vec();
                    let idx = (0..=n)
                        .map(|k| {
                            o[sp] = (n - k) as u16;
                            o[sm] = k as u16;
                            basis.index_of(&o).expect("fiber stays in the block")
                        })
                        .collect::<Vec<_>>();
                    debug_assert_eq!(idx[0], i);
                    out.push((n, idx));
                }
                out
            })
            .collect();
        Rotator { basis: basis.clone(), p2, fibers }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    /// One-mode D(θ,φ) on the N-photon block.
    pub fn mode_matrix(&self, n: usize, theta: f64, phi: f64) -> DMatrix<C64> {
        let (vals, vecs) = &self.p2[n];
        let d = n + 1;
        let mid = DMatrix::from_fn(d, d, |a, b| {
            (0..d).map(|k| vecs[(a, k)] * C64::from_polar(1.0, theta * vals[k]) * vecs[(b, k)].conj()).sum::<C64>()
        });
        // P₀ = (n⁺ − n⁻)/2 = N/2 − k on entry k.
        let mu = |k: usize| n as f64 / 2.0 - k as f64;
        DMatrix::from_fn(d, d, |a, b| mid[(a, b)] * C64::from_polar(1.0, phi * (mu(b) - mu(a))))
    }

    /// D(θ,φ)|v⟩.
    pub fn apply(&self, theta: f64, phi: f64, v: &DVector<C64>) -> DVector<C64> {
        let mats: Vec<DMatrix<C64>> = (0..self.p2.len()).map(|n| self.mode_matrix(n, theta, phi)).collect();
        let mut w = v.clone();
        let mut buf = Vec::new();
        for fibers in &self.fibers {
            for (n, idx) in fibers {
                let m = &mats[*n];
                buf.clear();
                buf.extend(idx.iter().map(|&i| w[i]));
                for (a, &i) in idx.iter().enumerate() {
                    w[i] = (0..buf.len()).map(|b| m[(a, b)] * buf[b]).sum();
                }
            }
        }
        w
    }

    /// D(θ,φ) as an operator, one column per basis vector.
    pub fn displacement(&self, theta: f64, phi: f64) -> Operator {
        let dim = self.basis.dim();
        let mut t = Vec::new();
        for j in 0..dim {
            let mut e = DVector::zeros(dim);
            e[j] = C64::new(1.0, 0.0);
            for (i, x) in self.apply(theta, phi, &e).iter().enumerate() {
                if x.norm() > 1e-300 {
                    t.push((i, j, *x));
                }
            }
        }
        Operator::from_triplets(&self.basis, t).expect("indices lie in the basis")
    }
}

/// Polarization vectors η⁺ = (cos θ/2, e^{iφ} sin θ/2), η⁻ = (−e^{−iφ} sin θ/2, cos θ/2).
///
/// D a⁺_±(j) D† = η^±₊ a⁺₊(j) + η^±₋ a⁺₋(j).
pub fn eta(theta: f64, phi: f64) -> ([C64; 2], [C64; 2]) {
    let (s, c) = (theta / 2.0).sin_cos();
    (
        [C64::new(c, 0.0), C64::from_polar(s, phi)],
        [-C64::from_polar(s, -phi), C64::new(c, 0.0)],
    )
}
