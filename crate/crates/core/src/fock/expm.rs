use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::basis::FockBasis;
use super::operator::Operator;
use crate::error::{Error, Result};

/// Eigenvalues (ascending) and eigenvectors of a hermitian matrix.
///
/// Only the lower triangle's hermitian part is trusted; the input is symmetrized first.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

#[derive(Debug, Clone)]
struct Part {
    range: Range<usize>,
    values: Vec<f64>,
    vectors: DMatrix<C64>,
}

/// Spectral decomposition of a hermitian operator, split by photon-number
/// block whenever the operator conserves N.
#[derive(Debug, Clone)]
pub struct Spectral {
    basis: Arc<FockBasis>,
    parts: Vec<Part>,
    blockwise: bool,
}

impl Spectral {
    pub fn of(op: &Operator) -> Spectral {
        let basis = op.basis().clone();
        if op.is_block_diagonal() {
            let parts = (0..=basis.n_max())
                .map(|n| {
                    let (values, vectors) = hermitian_eigen(&op.block(n));
                    Part { range: basis.block(n), values, vectors }
                })
                .collect();
            Spectral { basis, parts, blockwise: true }
        } else {
            let (values, vectors) = hermitian_eigen(&op.to_dense());
            let parts = vec![Part { range: 0..basis.dim(), values, vectors }];
            Spectral { basis, parts, blockwise: false }
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.parts.iter().flat_map(|p| p.values.iter().copied()).collect()
    }

    /// Eigenvalues of the block with total photon number `n`.
    pub fn block_eigenvalues(&self, n: usize) -> Option<&[f64]> {
        self.blockwise.then(|| self.parts[n].values.as_slice())
    }

    /// f(A)|v⟩ without forming f(A).
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(v.len());
        for p in &self.parts {
            let seg = v.rows(p.range.start, p.range.len());
            if seg.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            let mut c = p.vectors.ad_mul(&seg);
            for (k, x) in c.iter_mut().enumerate() {
                *x *= f(p.values[k]);
            }
            out.rows_mut(p.range.start, p.range.len()).copy_from(&(&p.vectors * c));
        }
        out
    }

    /// f(A) as an operator.
    pub fn function(&self, f: impl Fn(f64) -> C64) -> Operator {
        let mats: Vec<DMatrix<C64>> = self
            .parts
            .iter()
            .map(|p| {
                let mut scaled = p.vectors.clone();
                for (k, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= f(p.values[k]);
                }
                scaled * p.vectors.adjoint()
            })
            .collect();
        if self.blockwise {
            Operator::from_blocks(&self.basis, mats).expect("block shapes follow the basis")
        } else {
            Operator::from_dense(&self.basis, mats.into_iter().next().unwrap()).expect("square matrix")
        }
    }
}

/// exp(G) for an anti-hermitian generator G, via the eigendecomposition of iG.
///
/// Number-conserving generators are exponentiated block by block, which is
/// exact under truncation. Other generators are exponentiated as truncated
/// matrices; use [`exp_action_padded`] when the exact action is needed.
pub fn unitary_from_generator(g: &Operator) -> Result<Operator> {
    let scale = g.max_abs();
    let deviation = g.anti_hermitian_deviation();
    if deviation > 1e-10 * scale {
        return Err(Error::NotAntiHermitian { deviation });
    }
    let h = g.scale(C64::new(0.0, 1.0));
    Ok(Spectral::of(&h).function(|l| C64::new(0.0, -l).exp()))
}

/// exp(G)|v⟩ by scaled Taylor series; G must be anti-hermitian.
///
/// Only the subspace reachable from the support of `v` through the
/// nonzero pattern of G takes part, which keeps selection-rule-limited
/// generators cheap on large bases.
pub fn exp_action(g: &Operator, v: &DVector<C64>) -> DVector<C64> {
    let dim = g.dim();
    let mut by_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
    for (i, j, x) in g.entries() {
        by_col[j].push((i, x));
    }
    let mut local = vec![usize::MAX; dim];
    let mut members: Vec<usize> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        if *x != C64::new(0.0, 0.0) {
            local[i] = members.len();
            members.push(i);
        }
    }
    let mut head = 0;
    while head < members.len() {
        let j = members[head];
        head += 1;
        for &(i, _) in &by_col[j] {
            if local[i] == usize::MAX {
                local[i] = members.len();
                members.push(i);
            }
        }
    }
    // Local rows of G: rows[li] = [(lj, x)].
    let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); members.len()];
    for (lj, &j) in members.iter().enumerate() {
        for &(i, x) in &by_col[j] {
            rows[local[i]].push((lj, x));
        }
    }
    // For an anti-hermitian matrix the spectral norm is bounded by the max row sum.
    let bound = rows.iter().map(|r| r.iter().map(|(_, x)| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    let steps = (bound / 0.5).ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let apply = |x: &[C64]| -> Vec<C64> {
        rows.iter().map(|r| r.iter().map(|&(j, a)| a * x[j]).sum::<C64>() * h).collect()
    };
    let mut w: Vec<C64> = members.iter().map(|&i| v[i]).collect();
    for _ in 0..steps {
        let mut term = w.clone();
        let mut acc = w.clone();
        let scale = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        for k in 1..60 {
            term = apply(&term);
            let inv = 1.0 / k as f64;
            let mut norm = 0.0;
            for (a, t) in acc.iter_mut().zip(term.iter_mut()) {
                *t *= inv;
                *a += *t;
                norm += t.norm_sqr();
            }
            if norm.sqrt() <= 1e-18 * scale {
                break;
            }
        }
        w = acc;
    }
    let mut out = DVector::zeros(dim);
    for (li, &i) in members.iter().enumerate() {
        out[i] = w[li];
    }
    out
}

/// Result of an exponential applied on an enlarged basis and projected back.
#[derive(Debug, Clone)]
pub struct PaddedAction {
    /// Projection onto the target basis, not renormalized.
    pub vector: DVector<C64>,
    /// Norm² that fell outside the target cutoff.
    pub leak: f64,
    /// Cutoff of the enlarged basis that was used.
    pub padded_n_max: usize,
}

/// exp(G)|v⟩ on the untruncated space, evaluated on an enlarged basis.
///
/// `generator` builds G on any basis with the target's mode count and
/// `reference` builds the initial vector there. The cutoff is raised until
/// the norm reaching the outermost two photon-number layers is below 1e-26,
/// so edge effects of the enlarged truncation are negligible. If the norm
/// outside the target cutoff already exceeds `leak_cap` by a margin that
/// edge effects cannot explain, the current estimate is returned early.
pub fn exp_action_padded(
    target: &Arc<FockBasis>,
    generator: impl Fn(&Arc<FockBasis>) -> Result<Operator>,
    reference: impl Fn(&Arc<FockBasis>) -> Result<DVector<C64>>,
    max_dim: usize,
    leak_cap: f64,
) -> Result<PaddedAction> {
    let mut pad = 8usize;
    loop {
        let n_pad = target.n_max() + pad;
        let big = FockBasis::build_with_limit(target.m(), n_pad, max_dim)?;
        let g = generator(&big)?;
        let w = exp_action(&g, &reference(&big)?);
        let edge: f64 = (n_pad.saturating_sub(1)..=n_pad)
            .flat_map(|n| big.block(n))
            .map(|i| w[i].norm_sqr())
            .sum();
        let vector = DVector::from_iterator(target.dim(), w.iter().take(target.dim()).copied());
        let leak = (w.norm_squared() - vector.norm_squared()).max(0.0);
        let clearly_over = leak > leak_cap && (edge < 1e-3 * leak || leak > 1e3 * leak_cap);
        if edge < 1e-26 || clearly_over {
            return Ok(PaddedAction { vector, leak, padded_n_max: n_pad });
        }
        pad += (pad / 2).max(8);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::ladder::{annihilation_op, creation_op};
    use crate::fock::Pol;

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(2.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(2, vals.iter().map(|&x| C64::new(x, 0.0))));
        assert!((&vecs * d * vecs.adjoint() - m).norm() < 1e-14);
    }

    #[test]
    fn zero_generator_is_identity() {
        let b = FockBasis::build(1, 3).unwrap();
        let u = unitary_from_generator(&Operator::zero(&b)).unwrap();
        assert!(u.max_diff(&Operator::identity(&b)).unwrap() < 1e-15);
    }

    #[test]
    fn rejects_hermitian_generator() {
        let b = FockBasis::build(1, 2).unwrap();
        let n = crate::fock::total_number_op(&b);
        assert!(matches!(unitary_from_generator(&n), Err(Error::NotAntiHermitian { .. })));
    }

    #[test]
    fn padded_coherent_state() {
        // exp(αa⁺ − α*a)|0⟩ has Poisson weights.
        let target = FockBasis::build(1, 6).unwrap();
        let alpha = C64::new(0.6, -0.3);
        let gen = |b: &Arc<FockBasis>| {
            let c = creation_op(b, 0, Pol::Plus)?;
            let a = annihilation_op(b, 0, Pol::Plus)?;
            c.lin_comb(alpha, &a, -alpha.conj())
        };
        let vac = |b: &Arc<FockBasis>| {
            let mut v = DVector::zeros(b.dim());
            v[0] = C64::new(1.0, 0.0);
            Ok(v)
        };
        let out = exp_action_padded(&target, gen, vac, 20_000, 1.0).unwrap();
        let mut fact = 1.0;
        let mut kept = 0.0;
        for n in 0..=6usize {
            if n > 0 {
                fact *= n as f64;
            }
            let want = (-alpha.norm_sqr() / 2.0).exp() * alpha.powu(n as u32) / fact.sqrt();
            let k = target.index_of(&[n as u16, 0]).unwrap();
            assert!((out.vector[k] - want).norm() < 1e-14, "n={n}");
            kept += want.norm_sqr();
        }
        assert!((out.leak - (1.0 - kept)).abs() < 1e-14);
    }
}
