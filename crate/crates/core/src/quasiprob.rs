//! Polarization Q-functions and characteristic functions.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis_states::sector_states;
use crate::error::{Error, Result};
use crate::fock::{Pol, QuantumState, Spectral, StateKind};
use crate::gcs::{eta, rotated_glauber_amplitudes, GcsContext, Orbit};
use crate::halfint::HalfInt;
use crate::polarization::{Axis, PolarizationOps};
use crate::special::{bessel_i_scaled, binomial, factorial, gauss_legendre};

/// Node layout of a spherical grid: Gauss-Legendre in cos θ, uniform in φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridSpec {
    pub theta_nodes: usize,
    pub phi_nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { theta_nodes: 64, phi_nodes: 128 }
    }
}

impl GridSpec {
    pub fn new(theta_nodes: usize, phi_nodes: usize) -> Result<GridSpec> {
        if theta_nodes == 0 || phi_nodes == 0 {
            return Err(Error::ParamInvalid("grid needs at least one node per angle".into()));
        }
        Ok(GridSpec { theta_nodes, phi_nodes })
    }

    /// θ nodes in increasing order with their weights for ∫ sinθ dθ.
    pub fn theta(&self) -> (Vec<f64>, Vec<f64>) {
        let (x, w) = gauss_legendre(self.theta_nodes);
        x.iter().rev().map(|&x| x.clamp(-1.0, 1.0).acos()).zip(w.iter().rev().copied()).unzip()
    }

    pub fn phi(&self) -> Vec<f64> {
        (0..self.phi_nodes).map(|k| 2.0 * PI * k as f64 / self.phi_nodes as f64).collect()
    }
}

/// Q-function values on a grid; `values[(i, j)]` belongs to (θ_i, φ_j).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QGrid {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Gauss-Legendre weights of the θ nodes, in the measure sinθ dθ.
    pub theta_weights: Vec<f64>,
    #[serde(skip)]
    pub values: DMatrix<f64>,
    pub p: Option<HalfInt>,
}

impl QGrid {
    fn evaluate(grid: GridSpec, p: Option<HalfInt>, f: impl Fn(f64, f64) -> f64 + Sync) -> QGrid {
        let (theta, theta_weights) = grid.theta();
        let phi = grid.phi();
        let rows: Vec<Vec<f64>> = theta.par_iter().map(|&t| phi.iter().map(|&ph| f(t, ph)).collect()).collect();
        let values = DMatrix::from_fn(theta.len(), phi.len(), |i, j| rows[i][j]);
        QGrid { theta, phi, theta_weights, values, p }
    }

    /// ∬ Q sinθ dθ dφ by the grid quadrature.
    pub fn integral(&self) -> f64 {
        let dphi = 2.0 * PI / self.phi.len() as f64;
        self.values.row_iter().zip(&self.theta_weights).map(|(row, w)| w * dphi * row.sum()).sum()
    }

    /// (2p+1)/4π ∬ Q sinθ dθ dφ, the weight of the sector in the identity resolution.
    pub fn sector_weight(&self) -> Option<f64> {
        self.p.map(|p| (p.twice() as f64 + 1.0) / (4.0 * PI) * self.integral())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV with header `theta,phi,q`, rows ordered over θ then φ.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,phi,q\n");
        for (i, t) in self.theta.iter().enumerate() {
            for (j, ph) in self.phi.iter().enumerate() {
                let _ = writeln!(s, "{t:.16e},{ph:.16e},{:.16e}", self.values[(i, j)]);
            }
        }
        s
    }
}

/// ⟨w|ρ|w⟩ restricted to the photon-number blocks the probe vectors can reach.
struct Sandwich {
    idx: Vec<usize>,
    kind: SandwichKind,
}

enum SandwichKind {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

impl Sandwich {
    fn new(state: &QuantumState, probes: &[&DVector<C64>]) -> Sandwich {
        let basis = state.basis();
        let idx: Vec<usize> = (0..=basis.n_max())
            .filter(|&n| probes.iter().any(|v| basis.block(n).any(|i| v[i].norm_sqr() > 0.0)))
            .flat_map(|n| basis.block(n))
            .collect();
        let kind = match state.kind() {
            StateKind::Pure(v) => SandwichKind::Pure(DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))),
            StateKind::Mixed(r) => SandwichKind::Mixed(DMatrix::from_fn(idx.len(), idx.len(), |a, b| r[(idx[a], idx[b])])),
        };
        Sandwich { idx, kind }
    }

    fn eval(&self, w: &DVector<C64>) -> f64 {
        let ws = DVector::from_iterator(self.idx.len(), self.idx.iter().map(|&i| w[i]));
        match &self.kind {
            SandwichKind::Pure(v) => v.dotc(&ws).norm_sqr(),
            SandwichKind::Mixed(r) => ws.dotc(&(r * &ws)).re,
        }
    }
}

/// Q(θ,φ) = ⟨θφ;ψ₀|ρ|θφ;ψ₀⟩ on a grid, for the orbit of a reference vector.
pub fn q_complete(state: &QuantumState, orbit: &Orbit, grid: GridSpec) -> Result<QGrid> {
    if state.basis().dim() != orbit.reference().len() {
        return Err(Error::BasisMismatch);
    }
    let sw = Sandwich::new(state, &[orbit.reference()]);
    Ok(QGrid::evaluate(grid, None, |t, ph| sw.eval(&orbit.vector_at(t, ph))))
}

/// Q^p(θ,φ) = Σ_{n,λ} ⟨θ,φ;p,n,λ|ρ|θ,φ;p,n,λ⟩ at a single point.
pub fn q_reduced_at(state: &QuantumState, p: HalfInt, ctx: &GcsContext, theta: f64, phi: f64) -> Result<f64> {
    let r = ReducedQ::new(state, p, ctx)?;
    Ok(r.eval(theta, phi))
}

/// Reduced Q-function of the sector p on a grid.
pub fn q_reduced(state: &QuantumState, p: HalfInt, ctx: &GcsContext, grid: GridSpec) -> Result<QGrid> {
    let r = ReducedQ::new(state, p, ctx)?;
    Ok(QGrid::evaluate(grid, Some(p), |t, ph| r.eval(t, ph)))
}

struct ReducedQ<'a> {
    ctx: &'a GcsContext,
    refs: Vec<DVector<C64>>,
    sw: Sandwich,
}

impl<'a> ReducedQ<'a> {
    fn new(state: &QuantumState, p: HalfInt, ctx: &'a GcsContext) -> Result<ReducedQ<'a>> {
        if state.basis().dim() != ctx.basis().dim() || state.basis().m() != ctx.basis().m() {
            return Err(Error::BasisMismatch);
        }
        let refs: Vec<DVector<C64>> = sector_states(ctx.ops(), p, Pol::Plus)?.into_iter().map(|(_, v)| v).collect();
        if refs.is_empty() {
            return Err(Error::EmptySector { p: p.value() });
        }
        let sw = Sandwich::new(state, &refs.iter().collect::<Vec<_>>());
        Ok(ReducedQ { ctx, refs, sw })
    }

    fn eval(&self, theta: f64, phi: f64) -> f64 {
        self.refs.iter().map(|v| self.sw.eval(&self.ctx.rotator().apply(theta, phi, v))).sum()
    }
}

/// States with a closed-form reduced Q-function.
#[derive(Debug, Clone, PartialEq)]
pub enum QClosed {
    /// Semi-coherent state |θ',φ';p',μ',n',λ'⟩.
    Semi { p: HalfInt, mu: HalfInt, theta: f64, phi: f64 },
    /// Two-mode Glauber state rotated to (θ',φ'); amplitudes before rotation.
    GlauberM2 { alpha_plus: [C64; 2], alpha_minus: [C64; 2], theta: f64, phi: f64 },
    /// One-mode thermal state.
    Thermal { beta: f64 },
}

fn dot2(a: &[C64; 2], b: &[C64; 2]) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Closed-form Q^p(θ,φ).
///
/// For the two-mode Glauber state the Bessel factor is the modified
/// function I_{2p+1}(2d)/d^{2p+1} with d = |α₁⁺α₂⁻ − α₁⁻α₂⁺|, summed as a
/// power series, which is regular at d = 0.
pub fn q_reduced_closed(family: &QClosed, p: HalfInt, theta: f64, phi: f64) -> Result<f64> {
    if p.twice() < 0 {
        return Err(Error::ParamInvalid(format!("p = {p} is negative")));
    }
    match *family {
        QClosed::Semi { p: pp, mu, theta: tp, phi: php } => {
            if mu.abs() > pp || pp.sub_int(mu).is_none() {
                return Err(Error::ParamInvalid(format!("μ' = {mu} incompatible with p' = {pp}")));
            }
            if pp != p {
                return Ok(0.0);
            }
            let (ep, _) = eta(theta, phi);
            let (epp, emp) = eta(tp, php);
            let a2 = dot2(&ep, &epp).norm_sqr();
            let b2 = dot2(&ep, &emp).norm_sqr();
            let ppm = p.add_int(mu).unwrap() as usize;
            let pmm = p.sub_int(mu).unwrap() as usize;
            Ok(binomial(ppm + pmm, ppm) * a2.powi(ppm as i32) * b2.powi(pmm as i32))
        }
        QClosed::GlauberM2 { alpha_plus, alpha_minus, theta: tp, phi: php } => {
            if alpha_plus.iter().chain(&alpha_minus).any(|a| !a.is_finite()) {
                return Err(Error::ParamInvalid("non-finite amplitude".into()));
            }
            let sp: f64 = alpha_plus.iter().map(|a| a.norm_sqr()).sum();
            let sm: f64 = alpha_minus.iter().map(|a| a.norm_sqr()).sum();
            let c: C64 = alpha_plus.iter().zip(&alpha_minus).map(|(a, b)| a * b.conj()).sum();
            let d = (alpha_plus[0] * alpha_minus[1] - alpha_minus[0] * alpha_plus[1]).norm();
            let (ep, _) = eta(theta, phi);
            let (epp, emp) = eta(tp, php);
            let a = dot2(&ep, &epp);
            let b = dot2(&ep, &emp);
            let bracket = sp * a.norm_sqr() + sm * b.norm_sqr() + 2.0 * (c * a * b.conj()).re;
            let tp2 = p.twice() as usize;
            Ok((-(sp + sm)).exp() * (tp2 as f64 + 1.0) * bracket.powi(tp2 as i32) * bessel_i_scaled(tp2 + 1, d))
        }
        QClosed::Thermal { beta } => {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::ParamInvalid(format!("β = {beta} must be positive")));
            }
            Ok((1.0 - (-beta).exp()).powi(2) * (-(p.twice() as f64) * beta).exp())
        }
    }
}

/// Cached spectral decompositions of P₀, P₁, P₂ for characteristic functions.
pub struct CharFn {
    spectra: [Spectral; 3],
}

impl CharFn {
    pub fn new(ops: &PolarizationOps) -> CharFn {
        CharFn { spectra: Axis::ALL.map(|a| Spectral::of(ops.axis(a))) }
    }

    /// ⟨exp(iτ₁P_{a₁}) exp(iτ₂P_{a₂}) ⋯⟩, factors multiplied left to right.
    pub fn ordered(&self, state: &QuantumState, factors: &[(Axis, f64)]) -> Result<C64> {
        if state.basis().dim() != self.spectra[0].basis().dim() {
            return Err(Error::BasisMismatch);
        }
        let f: Vec<(&Spectral, f64)> = factors.iter().map(|&(a, t)| (&self.spectra[a.index()], t)).collect();
        char_fn_ordered_with(state, &f)
    }

    pub fn eval(&self, state: &QuantumState, axis: Axis, tau: f64) -> Result<C64> {
        self.ordered(state, &[(axis, tau)])
    }
}

/// ⟨exp(iτP_α)⟩ by eigendecomposition of P_α.
pub fn char_fn_numeric(state: &QuantumState, ops: &PolarizationOps, axis: Axis, tau: f64) -> Result<C64> {
    if !tau.is_finite() {
        return Err(Error::ParamInvalid("τ must be finite".into()));
    }
    if state.basis().dim() != ops.basis().dim() {
        return Err(Error::BasisMismatch);
    }
    let sp = Spectral::of(ops.axis(axis));
    char_fn_ordered_with(state, &[(&sp, tau)])
}

/// ⟨Π_i exp(iτ_i P_{a_i})⟩ for an ordered list of factors.
pub fn char_fn_ordered(state: &QuantumState, ops: &PolarizationOps, factors: &[(Axis, f64)]) -> Result<C64> {
    CharFn::new(ops).ordered(state, factors)
}

// Tr(ρU) is accumulated column by column of U for mixed states.
fn char_fn_ordered_with(state: &QuantumState, factors: &[(&Spectral, f64)]) -> Result<C64> {
    let apply = |v: &DVector<C64>| {
        factors.iter().rev().fold(v.clone(), |w, &(s, tau)| s.apply_fn(|l| C64::from_polar(1.0, tau * l), &w))
    };
    match state.kind() {
        StateKind::Pure(v) => Ok(v.dotc(&apply(v))),
        StateKind::Mixed(rho) => {
            let dim = rho.nrows();
            Ok((0..dim)
                .map(|k| {
                    let mut e = DVector::zeros(dim);
                    e[k] = C64::new(1.0, 0.0);
                    let u = apply(&e);
                    (0..dim).map(|i| rho[(k, i)] * u[i]).sum::<C64>()
                })
                .sum())
        }
    }
}

/// States with closed-form polarization characteristic functions.
#[derive(Debug, Clone, PartialEq)]
pub enum CharClosed {
    /// Semi-coherent state |θ,φ;p,μ;n,λ⟩.
    Semi { p: HalfInt, mu: HalfInt, theta: f64, phi: f64 },
    /// Glauber state rotated to (θ,φ); amplitudes before rotation.
    Glauber { alpha_plus: Vec<C64>, alpha_minus: Vec<C64>, theta: f64, phi: f64 },
}

/// Closed-form ⟨exp(iτP_α)⟩.
pub fn char_fn_closed(family: &CharClosed, axis: Axis, tau: f64) -> Result<C64> {
    if !tau.is_finite() {
        return Err(Error::ParamInvalid("τ must be finite".into()));
    }
    let (s, c) = (tau / 2.0).sin_cos();
    match family {
        CharClosed::Semi { p, mu, theta, phi } => {
            let (p, mu) = (*p, *mu);
            if p.twice() < 0 || mu.abs() > p || p.sub_int(mu).is_none() {
                return Err(Error::ParamInvalid(format!("μ = {mu} incompatible with p = {p}")));
            }
            // Direction cosine of the rotated state along the axis.
            let x = match axis {
                Axis::P0 => theta.cos(),
                Axis::P1 => theta.sin() * phi.cos(),
                Axis::P2 => -theta.sin() * phi.sin(),
            };
            let ppm = p.add_int(mu).unwrap() as usize;
            let pmm = p.sub_int(mu).unwrap() as usize;
            let up = C64::new(c, s * x);
            let down = C64::new(c, -s * x);
            let base = s * s * (x * x - 1.0);
            let pre = factorial(ppm) * factorial(pmm);
            Ok((0..=ppm.min(pmm))
                .map(|a| {
                    let co = pre / (factorial(ppm - a) * factorial(pmm - a) * factorial(a) * factorial(a));
                    up.powi((ppm - a) as i32) * down.powi((pmm - a) as i32) * (co * base.powi(a as i32))
                })
                .sum())
        }
        CharClosed::Glauber { alpha_plus, alpha_minus, theta, phi } => {
            if alpha_plus.len() != alpha_minus.len() {
                return Err(Error::ParamInvalid("α⁺ and α⁻ lists differ in length".into()));
            }
            let (ap, am) = rotated_glauber_amplitudes(alpha_plus, alpha_minus, *theta, *phi);
            let sp: f64 = ap.iter().map(|a| a.norm_sqr()).sum();
            let sm: f64 = am.iter().map(|a| a.norm_sqr()).sum();
            Ok(match axis {
                Axis::P0 => (C64::new(sp, 0.0) * (C64::from_polar(1.0, tau / 2.0) - 1.0)
                    + C64::new(sm, 0.0) * (C64::from_polar(1.0, -tau / 2.0) - 1.0))
                    .exp(),
                Axis::P1 | Axis::P2 => {
                    let k = if axis == Axis::P1 { 1.0 } else { 2.0 };
                    let cross: C64 = ap.iter().zip(&am).map(|(a, b)| b * a.conj()).sum();
                    let im = 2.0 * (cross * C64::from_polar(1.0, PI * k / 2.0)).im;
                    C64::from_polar(((c - 1.0) * (sp + sm)).exp(), s * im)
                }
            })
        }
    }
}
