//! Reference states |p,μ;n,λ⟩ and the thermal and phase-randomized mixtures.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{creation_op, hermitian_eigen, FockBasis, Pol, QuantumState};
use crate::halfint::HalfInt;
use crate::polarization::{x_plus, y_plus, PolarizationOps};
use crate::special::{factorial, ln_factorial};

/// Quantum numbers p, μ, n and, for two modes, t = (N(1) − N(2))/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PmuLabel {
    pub p: HalfInt,
    pub mu: HalfInt,
    pub n: usize,
    #[serde(default)]
    pub t: Option<HalfInt>,
}

impl PmuLabel {
    pub fn validate(&self, m: usize, n_max: usize) -> Result<()> {
        let p = self.p;
        let bad = |msg: String| Err(Error::LabelInvalid(msg));
        if p.twice() < 0 {
            return bad(format!("p = {p} is negative"));
        }
        if self.mu.abs() > p || p.sub_int(self.mu).is_none() {
            return bad(format!("μ = {} is not in -p..p for p = {p}", self.mu));
        }
        match m {
            1 => {
                if self.n as i32 != p.twice() {
                    return bad(format!("one mode needs n = 2p, got n = {} and p = {p}", self.n));
                }
                if self.t.is_some_and(|t| t.twice() != p.twice()) {
                    return bad("t is not a label for one mode".into());
                }
            }
            2 => {
                if (self.n as i32) < p.twice() || (self.n as i32 - p.twice()) % 2 != 0 {
                    return bad(format!("n = {} must be ≥ 2p with n − 2p even (p = {p})", self.n));
                }
                let t = self.t.ok_or_else(|| Error::LabelInvalid("two modes need the label t".into()))?;
                if t.abs() > p || p.sub_int(t).is_none() {
                    return bad(format!("t = {t} is not in -p..p for p = {p}"));
                }
            }
            _ => return bad(format!("closed-form labels exist only for m ≤ 2, got m = {m}")),
        }
        if self.n > n_max {
            return Err(Error::CutoffExceeded { needed: self.n, n_max });
        }
        Ok(())
    }
}

fn vacuum(basis: &FockBasis) -> DVector<C64> {
    let mut v = DVector::zeros(basis.dim());
    v[0] = C64::new(1.0, 0.0);
    v
}

fn apply_power(op: &crate::fock::Operator, k: usize, mut v: DVector<C64>) -> DVector<C64> {
    for _ in 0..k {
        v = op.apply(&v);
    }
    v
}

/// |pμ⟩ for one mode: [(p−μ)!(p+μ)!]^{-1/2} (a⁺₊)^{|μ|+μ}(a⁺₋)^{|μ|−μ}(Y⁺₁₁)^{p−|μ|}|0⟩.
pub fn pmu_state_m1(p: HalfInt, mu: HalfInt, basis: &Arc<FockBasis>) -> Result<QuantumState> {
    if basis.m() != 1 {
        return Err(Error::LabelInvalid(format!("pmu_state_m1 needs m = 1, got m = {}", basis.m())));
    }
    let label = PmuLabel { p, mu, n: p.twice().max(0) as usize, t: None };
    label.validate(1, basis.n_max())?;
    let amu = mu.abs();
    let up = amu.add_int(mu).unwrap() as usize;
    let down = amu.sub_int(mu).unwrap() as usize;
    let pairs = p.sub_int(amu).unwrap() as usize;
    let mut v = vacuum(basis);
    v = apply_power(&y_plus(basis, 0, 0)?, pairs, v);
    v = apply_power(&creation_op(basis, 0, Pol::Minus)?, down, v);
    v = apply_power(&creation_op(basis, 0, Pol::Plus)?, up, v);
    let pre = (factorial(p.sub_int(mu).unwrap() as usize) * factorial(p.add_int(mu).unwrap() as usize)).sqrt();
    QuantumState::pure(basis, v / C64::new(pre, 0.0))
}

/// Two-mode state |p,μ;n,t⟩ built from the terminating α-sum and (X⁺₁₂)^{n/2−p}.
pub fn pmu_state_m2(p: HalfInt, mu: HalfInt, n: usize, t: HalfInt, basis: &Arc<FockBasis>) -> Result<QuantumState> {
    if basis.m() != 2 {
        return Err(Error::LabelInvalid(format!("pmu_state_m2 needs m = 2, got m = {}", basis.m())));
    }
    PmuLabel { p, mu, n, t: Some(t) }.validate(2, basis.n_max())?;
    let v = pmu_vector_m2(p, mu, n, t, basis)?;
    QuantumState::pure(basis, v)
}

pub(crate) fn pmu_vector_m2(p: HalfInt, mu: HalfInt, n: usize, t: HalfInt, basis: &Arc<FockBasis>) -> Result<DVector<C64>> {
    let ppm = p.add_int(mu).unwrap();
    let pmm = p.sub_int(mu).unwrap();
    let ppt = p.add_int(t).unwrap();
    let pmt = p.sub_int(t).unwrap();
    let tmm = t.sub_int(mu).unwrap();
    let pairs = (n as i64 - p.twice() as i64) / 2;
    let ln_pre = 0.5
        * ((p.twice() as f64 + 1.0).ln() + ln_factorial(ppm as usize) + ln_factorial(pmm as usize)
            + ln_factorial(pmt as usize)
            + ln_factorial(ppt as usize)
            - ln_factorial((pairs + p.twice() as i64 + 1) as usize)
            - ln_factorial(pairs as usize));
    let mut v = DVector::zeros(basis.dim());
    for alpha in 0..=pmt.max(0) {
        let e = [ppm - alpha, tmm + alpha, alpha, pmt - alpha];
        if e.iter().any(|&x| x < 0) {
            continue;
        }
        let occ: Vec<u16> = e.iter().map(|&x| x as u16).collect();
        let idx = basis
            .index_of(&occ)
            .ok_or(Error::CutoffExceeded { needed: e.iter().sum::<i64>() as usize, n_max: basis.n_max() })?;
        // The monomial acting on |0⟩ gives √(Π n_k!) on the occupation state.
        let ln_mono: f64 = e.iter().map(|&x| 0.5 * ln_factorial(x as usize)).sum();
        let ln_den: f64 = e.iter().map(|&x| ln_factorial(x as usize)).sum();
        v[idx] += C64::new((ln_pre + ln_mono - ln_den).exp(), 0.0);
    }
    Ok(apply_power(&x_plus(basis, 0, 1)?, pairs as usize, v))
}

/// Orthonormal basis of {v in block n : P₀v = pv, P₊v = 0}, found numerically.
///
/// Serves as the extremal-vector set for any number of modes.
pub fn highest_weight_vectors(ops: &PolarizationOps, n: usize, p: HalfInt) -> Vec<DVector<C64>> {
    let basis = ops.basis();
    let range = basis.block(n);
    let p0 = ops.p0();
    let at = |twice: i32| -> Vec<usize> {
        range.clone().filter(|&i| (2.0 * p0.get(i, i).re).round() as i32 == twice).collect()
    };
    let cols = at(p.twice());
    if cols.is_empty() {
        return Vec::new();
    }
    let rows = at(p.twice() + 2);
    let pp = ops.pplus();
    let mut mtm = DMatrix::<C64>::zeros(cols.len(), cols.len());
    if !rows.is_empty() {
        let m = DMatrix::from_fn(rows.len(), cols.len(), |r, c| pp.get(rows[r], cols[c]));
        mtm = m.adjoint() * m;
    }
    let (vals, vecs) = hermitian_eigen(&mtm);
    let mut out = Vec::new();
    for (k, &l) in vals.iter().enumerate() {
        if l.abs() < 1e-9 {
            let mut v = DVector::zeros(basis.dim());
            for (c, &i) in cols.iter().enumerate() {
                v[i] = vecs[(c, k)];
            }
            out.push(v);
        }
    }
    out
}

/// Extremal vectors |p, ±p; n, λ⟩ for every admissible (n, λ) below the cutoff.
///
/// Closed forms are used for m ≤ 2; more modes fall back to [`highest_weight_vectors`].
pub fn sector_states(ops: &PolarizationOps, p: HalfInt, sign: Pol) -> Result<Vec<(usize, DVector<C64>)>> {
    let basis = ops.basis();
    let mu = match sign {
        Pol::Plus => p,
        Pol::Minus => p.neg(),
    };
    let mut out = Vec::new();
    if p.twice() < 0 {
        return Err(Error::LabelInvalid(format!("p = {p} is negative")));
    }
    let lowest = p.twice() as usize;
    match basis.m() {
        1 => {
            if lowest <= basis.n_max() {
                out.push((lowest, pmu_state_m1(p, mu, basis)?.amplitudes().unwrap().clone()));
            }
        }
        2 => {
            for n in (lowest..=basis.n_max()).step_by(2) {
                for tt in (-p.twice()..=p.twice()).step_by(2) {
                    out.push((n, pmu_vector_m2(p, mu, n, HalfInt::from_twice(tt), basis)?));
                }
            }
        }
        _ => {
            for n in (lowest..=basis.n_max()).step_by(2) {
                for v in highest_weight_vectors(ops, n, p) {
                    let v = match sign {
                        Pol::Plus => v,
                        Pol::Minus => lower_fully(ops, v, p.twice() as usize),
                    };
                    out.push((n, v));
                }
            }
        }
    }
    Ok(out)
}

fn lower_fully(ops: &PolarizationOps, mut v: DVector<C64>, steps: usize) -> DVector<C64> {
    for _ in 0..steps {
        v = ops.pminus().apply(&v);
    }
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

/// One-mode thermal state, weight (1 − e^{−β})² e^{−Nβ} on every Fock state.
pub fn thermal_density_m1(beta: f64, basis: &Arc<FockBasis>) -> Result<QuantumState> {
    if basis.m() != 1 {
        return Err(Error::ParamInvalid(format!("thermal state is defined for m = 1, got m = {}", basis.m())));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::ParamInvalid(format!("β must be positive and finite, got {beta}")));
    }
    let x = (-beta).exp();
    let norm = (1.0 - x) * (1.0 - x);
    let weights: Vec<f64> = (0..basis.dim()).map(|i| norm * x.powi(basis.total(i) as i32)).collect();
    // Exact tail: Σ_{N>n_max} (N+1)(1−x)²x^N = x^{K}(K + 1 − K x) with K = n_max + 1.
    let k = (basis.n_max() + 1) as f64;
    let tail = x.powf(k) * (k + 1.0 - k * x);
    if tail > 1e-10 {
        return Err(Error::TailTooLarge { leak: tail, tol: 1e-10 });
    }
    let kept: f64 = weights.iter().sum();
    let rho = DMatrix::from_diagonal(&DVector::from_iterator(
        basis.dim(),
        weights.iter().map(|w| C64::new(w / kept, 0.0)),
    ));
    Ok(QuantumState::mixed_unchecked(basis, rho, tail))
}

/// Single-mode coherent amplitudes e^{−|α|²/2} αⁿ/√n! for n = 0..=n_max.
pub(crate) fn coherent_amplitudes(alpha: C64, n_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * alpha / (n as f64).sqrt();
        out.push(c);
    }
    out
}

/// Product coherent state with amplitudes α per slot, truncated and renormalized.
///
/// Returns the state vector (unnormalized projection) and the exact leaked norm.
pub(crate) fn product_coherent(basis: &FockBasis, alphas: &[C64]) -> (DVector<C64>, f64) {
    let tables: Vec<Vec<C64>> = alphas.iter().map(|&a| coherent_amplitudes(a, basis.n_max())).collect();
    let v = DVector::from_iterator(
        basis.dim(),
        basis
            .states()
            .map(|occ| occ.iter().zip(&tables).map(|(&n, t)| t[n as usize]).product::<C64>()),
    );
    let leak = (1.0 - v.norm_squared()).max(0.0);
    (v, leak)
}

/// Phase average of the one-mode coherent state |α⁺ = α, α⁻ = α⟩ over the
/// relative phase: only components with equal n⁺ − n⁻ stay coherent.
pub fn phase_randomized_density(alpha: C64, basis: &Arc<FockBasis>) -> Result<QuantumState> {
    if basis.m() != 1 {
        return Err(Error::ParamInvalid(format!("phase-randomized state is defined for m = 1, got m = {}", basis.m())));
    }
    let (v, leak) = product_coherent(basis, &[alpha, alpha]);
    if leak > 1e-10 {
        return Err(Error::TailTooLarge { leak, tol: 1e-10 });
    }
    let v = &v / C64::new(v.norm(), 0.0);
    let diff: Vec<i32> = basis.states().map(|o| o[0] as i32 - o[1] as i32).collect();
    let dim = basis.dim();
    let rho = DMatrix::from_fn(dim, dim, |i, j| {
        if diff[i] == diff[j] {
            v[i] * v[j].conj()
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(QuantumState::mixed_unchecked(basis, rho, leak))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarization::{build_polarization_ops, Axis};

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    #[test]
    fn m1_examples() {
        let b = FockBasis::build(1, 4).unwrap();
        let s = pmu_state_m1(h(1), h(1), &b).unwrap();
        assert!((s.amplitudes().unwrap()[b.index_of(&[1, 0]).unwrap()].re - 1.0).abs() < 1e-15);
        let s = pmu_state_m1(h(2), h(0), &b).unwrap();
        assert!((s.amplitudes().unwrap()[b.index_of(&[1, 1]).unwrap()].re - 1.0).abs() < 1e-15);
        let ops = build_polarization_ops(&b).unwrap();
        assert!((s.mean(&ops.casimir).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(pmu_state_m1(h(2), h(1), &b), Err(Error::LabelInvalid(_))));
        assert!(matches!(pmu_state_m1(h(6), h(0), &b), Err(Error::CutoffExceeded { .. })));
    }

    #[test]
    fn m2_examples() {
        let b = FockBasis::build(2, 4).unwrap();
        let s = pmu_state_m2(h(0), h(0), 2, h(0), &b).unwrap();
        let x = x_plus(&b, 0, 1).unwrap().apply(&vacuum(&b)) / C64::new(2f64.sqrt(), 0.0);
        assert!((s.amplitudes().unwrap() - x).norm() < 1e-14);
        let s1 = pmu_state_m2(h(2), h(0), 2, h(0), &b).unwrap();
        assert!(s.inner(&s1).unwrap().norm() < 1e-14);
        assert!(matches!(pmu_state_m2(h(2), h(0), 2, h(4), &b), Err(Error::LabelInvalid(_))));
    }

    #[test]
    fn numeric_sectors_match_closed_forms() {
        let b = FockBasis::build(2, 4).unwrap();
        let ops = build_polarization_ops(&b).unwrap();
        for tp in 0..=4 {
            let p = h(tp);
            let closed = sector_states(&ops, p, Pol::Plus).unwrap();
            for n in (tp as usize..=4).step_by(2) {
                let num = highest_weight_vectors(&ops, n, p);
                let cl: Vec<&DVector<C64>> = closed.iter().filter(|(k, _)| *k == n).map(|(_, v)| v).collect();
                assert_eq!(num.len(), cl.len());
                // Same subspace: projector traces agree.
                let overlap: f64 = cl.iter().flat_map(|a| num.iter().map(move |b| a.dotc(b).norm_sqr())).sum();
                assert!((overlap - cl.len() as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn thermal_mean_and_tail() {
        let b = FockBasis::build(1, 60).unwrap();
        let ops = build_polarization_ops(&b).unwrap();
        let rho = thermal_density_m1(std::f64::consts::LN_2, &b).unwrap();
        assert!((rho.mean(ops.n()).unwrap() - 2.0).abs() < 1e-10);
        for a in Axis::ALL {
            assert!(rho.mean(ops.axis(a)).unwrap().abs() < 1e-14);
        }
        let small = FockBasis::build(1, 10).unwrap();
        assert!(matches!(thermal_density_m1(std::f64::consts::LN_2, &small), Err(Error::TailTooLarge { .. })));
        let cold = thermal_density_m1(50.0, &small).unwrap().density();
        assert!((cold[(0, 0)].re - 1.0).abs() < 1e-20);
    }

    #[test]
    fn phase_randomized_moments() {
        let b = FockBasis::build(1, 30).unwrap();
        let ops = build_polarization_ops(&b).unwrap();
        let alpha = C64::new(0.6, 0.3);
        let rho = phase_randomized_density(alpha, &b).unwrap();
        let n = rho.mean(ops.n()).unwrap();
        assert!((n - 2.0 * alpha.norm_sqr()).abs() < 1e-9);
        let prof = crate::polarization::variance_profile(&rho, &ops).unwrap();
        assert!((prof.sigma[0] - n / 4.0).abs() < 1e-9);
        for k in 1..3 {
            assert!((prof.sigma[k] - (n + n * n / 2.0) / 4.0).abs() < 1e-9);
        }
        let vac = phase_randomized_density(C64::new(0.0, 0.0), &b).unwrap().density();
        assert!((vac[(0, 0)].re - 1.0).abs() < 1e-15);
    }
}
