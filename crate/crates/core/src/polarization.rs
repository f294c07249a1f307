//! P-quasispin operators, biphoton generators and scalar polarization diagnostics.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation_op, creation_op, number_op, total_number_op, FockBasis, Operator, Pol, QuantumState, Spectral};

/// A component of the P-quasispin vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    P0,
    P1,
    P2,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::P0, Axis::P1, Axis::P2];

    pub fn index(self) -> usize {
        match self {
            Axis::P0 => 0,
            Axis::P1 => 1,
            Axis::P2 => 2,
        }
    }

    pub fn from_index(k: usize) -> Result<Axis> {
        match k {
            0 => Ok(Axis::P0),
            1 => Ok(Axis::P1),
            2 => Ok(Axis::P2),
            _ => Err(Error::ParamInvalid(format!("axis {k} is not one of 0, 1, 2"))),
        }
    }
}

/// P-quasispin operators of a single spatiotemporal mode or of the whole field.
#[derive(Debug, Clone)]
pub struct QuasispinSet {
    pub p0: Operator,
    pub pplus: Operator,
    pub pminus: Operator,
    pub p1: Operator,
    pub p2: Operator,
    pub n: Operator,
}

impl QuasispinSet {
    pub fn axis(&self, a: Axis) -> &Operator {
        match a {
            Axis::P0 => &self.p0,
            Axis::P1 => &self.p1,
            Axis::P2 => &self.p2,
        }
    }

    fn from_parts(p0: Operator, pplus: Operator, n: Operator) -> QuasispinSet {
        let pminus = pplus.adjoint();
        let half = C64::new(0.5, 0.0);
        let p1 = pplus.lin_comb(half, &pminus, half).expect("same basis");
        let p2 = pplus.lin_comb(C64::new(0.0, 0.5), &pminus, C64::new(0.0, -0.5)).expect("same basis");
        QuasispinSet { p0, pplus, pminus, p1, p2, n }
    }
}

/// Total and per-mode P-quasispin operators plus the Casimir P².
#[derive(Debug, Clone)]
pub struct PolarizationOps {
    basis: Arc<FockBasis>,
    pub total: QuasispinSet,
    pub per_mode: Vec<QuasispinSet>,
    pub casimir: Operator,
}

impl PolarizationOps {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn p0(&self) -> &Operator {
        &self.total.p0
    }

    pub fn pplus(&self) -> &Operator {
        &self.total.pplus
    }

    pub fn pminus(&self) -> &Operator {
        &self.total.pminus
    }

    pub fn p1(&self) -> &Operator {
        &self.total.p1
    }

    pub fn p2(&self) -> &Operator {
        &self.total.p2
    }

    pub fn n(&self) -> &Operator {
        &self.total.n
    }

    pub fn axis(&self, a: Axis) -> &Operator {
        self.total.axis(a)
    }

    /// Stokes operators (Σ₁, Σ₂, Σ₃) = (2P₂, −2P₀, −2P₁); defined for m = 1 only.
    pub fn stokes(&self) -> Option<[Operator; 3]> {
        (self.basis.m() == 1).then(|| {
            [self.total.p2.scale_real(2.0), self.total.p0.scale_real(-2.0), self.total.p1.scale_real(-2.0)]
        })
    }
}

fn mode_set(basis: &Arc<FockBasis>, j: usize) -> Result<QuasispinSet> {
    let np = number_op(basis, j, Pol::Plus)?;
    let nm = number_op(basis, j, Pol::Minus)?;
    let p0 = np.lin_comb(C64::new(0.5, 0.0), &nm, C64::new(-0.5, 0.0))?;
    let pplus = &creation_op(basis, j, Pol::Plus)? * &annihilation_op(basis, j, Pol::Minus)?;
    Ok(QuasispinSet::from_parts(p0, pplus, &np + &nm))
}

pub fn build_polarization_ops(basis: &Arc<FockBasis>) -> Result<PolarizationOps> {
    let per_mode: Vec<QuasispinSet> = (0..basis.m()).map(|j| mode_set(basis, j)).collect::<Result<_>>()?;
    let mut p0 = Operator::zero(basis);
    let mut pplus = Operator::zero(basis);
    for s in &per_mode {
        p0 = &p0 + &s.p0;
        pplus = &pplus + &s.pplus;
    }
    let total = QuasispinSet::from_parts(p0, pplus, total_number_op(basis));
    let pp_pm = &total.pplus * &total.pminus;
    let pm_pp = &total.pminus * &total.pplus;
    let casimir = &(&total.p0 * &total.p0) + &pp_pm.lin_comb(C64::new(0.5, 0.0), &pm_pp, C64::new(0.5, 0.0))?;
    Ok(PolarizationOps { basis: basis.clone(), total, per_mode, casimir })
}

/// Biphoton creation operators Y⁺_ij, X⁺_ij and the mode-mixing generators E_ij.
///
/// Y⁺_ij = ½(a⁺₊(i)a⁺₋(j) + a⁺₋(i)a⁺₊(j)), X⁺_ij = a⁺₊(i)a⁺₋(j) − a⁺₋(i)a⁺₊(j),
/// E_ij = Σ_α a⁺_α(i)a_α(j). Indices are 0-based; Y⁺ is stored for i ≤ j,
/// X⁺ for i < j and E for all pairs.
#[derive(Debug, Clone)]
pub struct BiphotonOps {
    pub y_plus: BTreeMap<(usize, usize), Operator>,
    pub x_plus: BTreeMap<(usize, usize), Operator>,
    pub e: BTreeMap<(usize, usize), Operator>,
}

impl BiphotonOps {
    pub fn y(&self, i: usize, j: usize) -> Option<&Operator> {
        self.y_plus.get(&(i.min(j), i.max(j)))
    }

    pub fn x(&self, i: usize, j: usize) -> Option<&Operator> {
        self.x_plus.get(&(i, j))
    }
}

pub fn y_plus(basis: &Arc<FockBasis>, i: usize, j: usize) -> Result<Operator> {
    let a = &creation_op(basis, i, Pol::Plus)? * &creation_op(basis, j, Pol::Minus)?;
    let b = &creation_op(basis, i, Pol::Minus)? * &creation_op(basis, j, Pol::Plus)?;
    a.lin_comb(C64::new(0.5, 0.0), &b, C64::new(0.5, 0.0))
}

pub fn x_plus(basis: &Arc<FockBasis>, i: usize, j: usize) -> Result<Operator> {
    let a = &creation_op(basis, i, Pol::Plus)? * &creation_op(basis, j, Pol::Minus)?;
    let b = &creation_op(basis, i, Pol::Minus)? * &creation_op(basis, j, Pol::Plus)?;
    a.try_sub(&b)
}

pub fn e_op(basis: &Arc<FockBasis>, i: usize, j: usize) -> Result<Operator> {
    let a = &creation_op(basis, i, Pol::Plus)? * &annihilation_op(basis, j, Pol::Plus)?;
    let b = &creation_op(basis, i, Pol::Minus)? * &annihilation_op(basis, j, Pol::Minus)?;
    a.try_add(&b)
}

pub fn build_biphoton_ops(basis: &Arc<FockBasis>) -> Result<BiphotonOps> {
    let m = basis.m();
    let mut ops = BiphotonOps { y_plus: BTreeMap::new(), x_plus: BTreeMap::new(), e: BTreeMap::new() };
    for i in 0..m {
        for j in 0..m {
            if i <= j {
                ops.y_plus.insert((i, j), y_plus(basis, i, j)?);
            }
            if i < j {
                ops.x_plus.insert((i, j), x_plus(basis, i, j)?);
            }
            ops.e.insert((i, j), e_op(basis, i, j)?);
        }
    }
    Ok(ops)
}

/// E_r = √(P₊P₋), the principal square root.
pub fn radial_operator(ops: &PolarizationOps) -> Result<Operator> {
    let pp = ops.pplus() * ops.pminus();
    let spec = Spectral::of(&pp);
    let lowest = spec.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    if lowest < -1e-10 {
        return Err(Error::NegativeEigenvalue { value: lowest });
    }
    Ok(spec.function(|l| C64::new(l.max(0.0).sqrt(), 0.0)))
}

fn mean_n(state: &QuantumState, ops: &PolarizationOps) -> Result<f64> {
    state.mean(ops.n())
}

/// 2|⟨P⃗⟩|/⟨N⟩, reported without clamping.
pub fn polarization_degree(state: &QuantumState, ops: &PolarizationOps) -> Result<f64> {
    let n = mean_n(state, ops)?;
    if n <= 1e-14 {
        return Err(Error::VacuumState { mean_n: n });
    }
    let mut s = 0.0;
    for a in Axis::ALL {
        s += state.mean(ops.axis(a))?.powi(2);
    }
    Ok(2.0 * s.sqrt() / n)
}

/// Second moments of the P-quasispin in one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceProfile {
    /// σ_α = ⟨P_α²⟩ − ⟨P_α⟩², α = 0, 1, 2.
    pub sigma: [f64; 3],
    /// ⟨P_α⟩.
    pub mean: [f64; 3],
    pub mean_n: f64,
    /// ⟨P²⟩.
    pub casimir: f64,
    /// ΔP² = Σ σ_α.
    pub delta_p2: f64,
    /// ΔP²/⟨N⟩², absent for the vacuum.
    pub small_delta_p2: Option<f64>,
    /// Positive root of p̄(p̄+1) = ⟨P²⟩.
    pub p_bar: f64,
}

pub fn p_bar_from_casimir(casimir: f64) -> f64 {
    let c = casimir.max(0.0);
    // Root of x² + x − c = 0 written to avoid cancellation for small c.
    2.0 * c / (1.0 + (1.0 + 4.0 * c).sqrt())
}

pub fn variance_profile(state: &QuantumState, ops: &PolarizationOps) -> Result<VarianceProfile> {
    let mut sigma = [0.0; 3];
    let mut mean = [0.0; 3];
    for a in Axis::ALL {
        let op = ops.axis(a);
        let m1 = state.mean(op)?;
        let m2 = state.mean(&(op * op))?;
        mean[a.index()] = m1;
        sigma[a.index()] = m2 - m1 * m1;
    }
    let mean_n = mean_n(state, ops)?;
    let casimir = state.mean(&ops.casimir)?;
    let delta_p2 = sigma.iter().sum();
    let small_delta_p2 = (mean_n > 1e-14).then(|| delta_p2 / (mean_n * mean_n));
    Ok(VarianceProfile { sigma, mean, mean_n, casimir, delta_p2, small_delta_p2, p_bar: p_bar_from_casimir(casimir) })
}

/// Depolarization characteristics dep_P = 1 − 2p̄/⟨N⟩ and dep_P0 = 1 − |2⟨P₀⟩|/⟨N⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Depolarization {
    pub dep_p: f64,
    pub dep_p0: f64,
}

pub fn depolarization_measures(state: &QuantumState, ops: &PolarizationOps) -> Result<Depolarization> {
    let prof = variance_profile(state, ops)?;
    if prof.mean_n <= 1e-14 {
        return Err(Error::VacuumState { mean_n: prof.mean_n });
    }
    Ok(Depolarization {
        dep_p: 1.0 - 2.0 * prof.p_bar / prof.mean_n,
        dep_p0: 1.0 - (2.0 * prof.mean[0]).abs() / prof.mean_n,
    })
}

/// Largest deviation of the photon-number block `n` from the expected
/// P², P₀ spectrum: P² eigenvalues p(p+1) with p ∈ {n/2, n/2 − 1, …} and,
/// on each p-multiplet, P₀ eigenvalues −p..p with equal multiplicity.
pub fn eigenstructure_residual(ops: &PolarizationOps, n: usize) -> f64 {
    use crate::fock::hermitian_eigen;
    let c = ops.casimir.block(n);
    if c.nrows() == 0 {
        return 0.0;
    }
    let (vals, vecs) = hermitian_eigen(&c);
    let p0 = ops.p0().block(n);
    let mut worst: f64 = 0.0;
    let mut start = 0;
    while start < vals.len() {
        let twice_p = ((4.0 * vals[start] + 1.0).sqrt() - 1.0).round() as i64;
        let p = twice_p as f64 / 2.0;
        let target = p * (p + 1.0);
        let mut end = start;
        while end < vals.len() && (vals[end] - target).abs() < 1e-6 {
            worst = worst.max((vals[end] - target).abs());
            end += 1;
        }
        if end == start || twice_p < 0 || twice_p as usize > n || (n - twice_p as usize) % 2 != 0 {
            return f64::INFINITY;
        }
        let cols = vecs.columns(start, end - start);
        let restricted = cols.adjoint() * &p0 * cols;
        let (mu, _) = hermitian_eigen(&restricted);
        let mult = (end - start) as f64 / (twice_p + 1) as f64;
        if mult.fract() != 0.0 {
            return f64::INFINITY;
        }
        for (k, v) in mu.iter().enumerate() {
            let want = -p + (k as f64 / mult).floor();
            worst = worst.max((v - want).abs());
        }
        start = end;
    }
    worst
}
