use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::dfunc::{d_coefficients, max_classical_coefficient};
use super::rotation::{xi, Rotator};
use super::spec::{Family, GcsSpec, Sign};
use crate::basis_states::{pmu_state_m1, pmu_vector_m2, product_coherent};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fock::{exp_action_padded, unitary_from_generator, FockBasis, Operator, Pol, QuantumState};
use crate::halfint::HalfInt;
use crate::polarization::{build_polarization_ops, e_op, x_plus, y_plus, PolarizationOps};
use crate::special::{binomial, ln_factorial};

/// Basis, quasispin operators and rotator shared by all constructions.
#[derive(Debug, Clone)]
pub struct GcsContext {
    ops: PolarizationOps,
    rotator: Rotator,
    tol: Tolerances,
}

impl GcsContext {
    pub fn new(basis: &Arc<FockBasis>) -> Result<GcsContext> {
        Self::with_tolerances(basis, Tolerances::default())
    }

    pub fn with_tolerances(basis: &Arc<FockBasis>, tol: Tolerances) -> Result<GcsContext> {
        let ops = build_polarization_ops(basis)?;
        let rotator = Rotator::new(&ops);
        Ok(GcsContext { ops, rotator, tol })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        self.ops.basis()
    }

    pub fn ops(&self) -> &PolarizationOps {
        &self.ops
    }

    pub fn rotator(&self) -> &Rotator {
        &self.rotator
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }
}

/// The SU(2) orbit through a reference vector: θ, φ ↦ D(θ,φ)|ψ₀⟩.
#[derive(Debug, Clone)]
pub struct Orbit<'a> {
    ctx: &'a GcsContext,
    reference: DVector<C64>,
    tail: f64,
}

impl<'a> Orbit<'a> {
    pub fn new(ctx: &'a GcsContext, reference: DVector<C64>, tail: f64) -> Result<Orbit<'a>> {
        if reference.len() != ctx.basis().dim() {
            return Err(Error::BasisMismatch);
        }
        let norm = reference.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::StateInvalid("reference vector vanishes".into()));
        }
        Ok(Orbit { ctx, reference: reference / C64::new(norm, 0.0), tail })
    }

    /// The orbit of the family's reference vector (θ and φ of the spec are ignored).
    pub fn of_spec(spec: &GcsSpec, ctx: &'a GcsContext) -> Result<Orbit<'a>> {
        let (v, tail) = reference_vector(spec, ctx)?;
        Orbit::new(ctx, v, tail)
    }

    pub fn reference(&self) -> &DVector<C64> {
        &self.reference
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// D(θ,φ)|ψ₀⟩ for any real angles.
    pub fn vector_at(&self, theta: f64, phi: f64) -> DVector<C64> {
        self.ctx.rotator.apply(theta, phi, &self.reference)
    }

    pub fn state_at(&self, theta: f64, phi: f64) -> QuantumState {
        QuantumState::pure_normalized(self.ctx.basis(), self.vector_at(theta, phi), self.tail)
            .expect("rotation preserves the norm")
    }
}

fn fock_vector(basis: &FockBasis, occ: &[u16]) -> Result<DVector<C64>> {
    let total: usize = occ.iter().map(|&k| k as usize).sum();
    let idx = basis.index_of(occ).ok_or(Error::CutoffExceeded { needed: total, n_max: basis.n_max() })?;
    let mut v = DVector::zeros(basis.dim());
    v[idx] = C64::new(1.0, 0.0);
    Ok(v)
}

fn extremal_occupation(basis: &FockBasis, mode: usize, pol: Pol, count: u16) -> Result<Vec<u16>> {
    let mut occ = vec![0u16; basis.slots()];
    occ[basis.slot(mode, pol)?] = count;
    Ok(occ)
}

fn check_tail(leak: f64, tol: &Tolerances) -> Result<()> {
    if leak > tol.tail {
        Err(Error::TailTooLarge { leak, tol: tol.tail })
    } else {
        Ok(())
    }
}

/// |p,μ;n,t⟩ on a basis with m ≤ 2.
pub(crate) fn label_vector(basis: &Arc<FockBasis>, p: HalfInt, mu: HalfInt, n: usize, t: HalfInt) -> Result<DVector<C64>> {
    match basis.m() {
        1 => Ok(pmu_state_m1(p, mu, basis)?.amplitudes().unwrap().clone()),
        2 => {
            crate::basis_states::PmuLabel { p, mu, n, t: Some(t) }.validate(2, basis.n_max())?;
            pmu_vector_m2(p, mu, n, t, basis)
        }
        m => Err(Error::FamilyUnsupported(format!("quantum-number labels need m ≤ 2, got m = {m}"))),
    }
}

fn biphoton_reference(basis: &Arc<FockBasis>, p: HalfInt, sign: Sign) -> Result<DVector<C64>> {
    fock_vector(basis, &extremal_occupation(basis, 0, sign.pol(), p.twice() as u16)?)
}

fn x_generator(basis: &Arc<FockBasis>, zeta: C64, kappa: C64) -> Result<Operator> {
    let xp = x_plus(basis, 0, 1)?;
    let e12 = e_op(basis, 0, 1)?;
    let g = xp.lin_comb(zeta, &xp.adjoint(), -zeta.conj())?;
    g.lin_comb(C64::new(1.0, 0.0), &e12.lin_comb(kappa, &e12.adjoint(), -kappa.conj())?, C64::new(1.0, 0.0))
}

fn y_generator(basis: &Arc<FockBasis>, gamma: C64) -> Result<Operator> {
    let yp = y_plus(basis, 0, 0)?;
    yp.lin_comb(gamma, &yp.adjoint(), -gamma.conj())
}

/// Reference vector |ψ₀⟩ of a family (everything except the global rotation)
/// and the norm² lost to truncation.
fn reference_vector(spec: &GcsSpec, ctx: &GcsContext) -> Result<(DVector<C64>, f64)> {
    let basis = ctx.basis();
    let m = basis.m();
    spec.validate(m)?;
    let tol = ctx.tolerances();
    match spec.family {
        Family::SemiCoherent | Family::MaxClassical => {
            let (p, mu, n, t) = spec.labels()?;
            Ok((label_vector(basis, p, mu, n, t)?, 0.0))
        }
        Family::FockRotated => {
            let occ: Vec<u16> = spec.occupations.as_ref().unwrap().iter().flat_map(|&[a, b]| [a, b]).collect();
            Ok((fock_vector(basis, &occ)?, 0.0))
        }
        Family::Product => {
            let photons = spec.photons.as_ref().unwrap();
            let mut occ = vec![0u16; basis.slots()];
            for (j, &k) in photons.iter().enumerate() {
                occ[basis.slot(j, spec.sign.pol())?] = k;
            }
            let mut v = fock_vector(basis, &occ)?;
            if let Some(angles) = &spec.mode_angles {
                // Per-mode rotations relative to the global (θ, φ).
                for (j, &[th, ph]) in angles.iter().enumerate() {
                    let q = &ctx.ops.per_mode[j];
                    let x = xi(th, ph);
                    let u = unitary_from_generator(&q.pplus.lin_comb(x, &q.pminus, -x.conj())?)?;
                    v = u.apply(&v);
                }
                v = ctx.rotator.apply(-spec.theta, spec.phi, &v);
            }
            Ok((v, 0.0))
        }
        Family::XBiphoton => {
            let p = spec.require_p()?;
            let zeta = spec.zeta.unwrap().0;
            let kappa = spec.kappa.map(|k| k.0).unwrap_or_default();
            let sign = spec.sign;
            let act = exp_action_padded(
                basis,
                |b| x_generator(b, zeta, kappa),
                |b| biphoton_reference(b, p, sign),
                tol.max_dim.max(basis.dim()) * 64,
                tol.tail,
            )?;
            check_tail(act.leak, tol)?;
            Ok((act.vector, act.leak))
        }
        Family::YBiphoton => {
            let p = spec.require_p()?;
            let gamma = spec.gamma.unwrap().0;
            let sign = spec.sign;
            let act = exp_action_padded(
                basis,
                |b| y_generator(b, gamma),
                |b| biphoton_reference(b, p, sign),
                tol.max_dim.max(basis.dim()) * 64,
                tol.tail,
            )?;
            check_tail(act.leak, tol)?;
            Ok((act.vector, act.leak))
        }
        Family::Glauber | Family::GlauberRotated | Family::GlauberCircular | Family::GlauberPhaseConstrained => {
            let (ap, am) = spec.amplitudes(m)?;
            let slots: Vec<C64> = ap.iter().zip(&am).flat_map(|(&a, &b)| [a, b]).collect();
            let (v, leak) = product_coherent(basis, &slots);
            check_tail(leak, tol)?;
            Ok((v, leak))
        }
    }
}

/// Rotated Glauber amplitudes α̃±_j(θ,φ).
pub fn rotated_glauber_amplitudes(ap: &[C64], am: &[C64], theta: f64, phi: f64) -> (Vec<C64>, Vec<C64>) {
    let (s, c) = (theta / 2.0).sin_cos();
    let plus = ap.iter().zip(am).map(|(&a, &b)| a * c - C64::from_polar(s, -phi) * b).collect();
    let minus = ap.iter().zip(am).map(|(&a, &b)| b * c + C64::from_polar(s, phi) * a).collect();
    (plus, minus)
}

/// Builds the state described by `spec` by rotating its reference vector.
///
/// glauber_rotated is evaluated from the rotated amplitudes instead, so the
/// two Glauber paths can be compared.
pub fn build_gcs(spec: &GcsSpec, ctx: &GcsContext) -> Result<QuantumState> {
    if spec.family == Family::GlauberRotated {
        spec.validate(ctx.basis().m())?;
        let (ap, am) = spec.amplitudes(ctx.basis().m())?;
        let (tp, tm) = rotated_glauber_amplitudes(&ap, &am, spec.theta, spec.phi);
        let slots: Vec<C64> = tp.iter().zip(&tm).flat_map(|(&a, &b)| [a, b]).collect();
        let (v, leak) = product_coherent(ctx.basis(), &slots);
        check_tail(leak, ctx.tolerances())?;
        return QuantumState::pure_normalized(ctx.basis(), v, leak);
    }
    let orbit = Orbit::of_spec(spec, ctx)?;
    Ok(orbit.state_at(spec.theta, spec.phi))
}

/// Builds the state from its closed-form series in rotated label states.
///
/// Available for semi_coherent, max_classical, x_biphoton (m = 2) and
/// y_biphoton; other families give `FamilyUnsupported`.
pub fn build_gcs_series(spec: &GcsSpec, ctx: &GcsContext) -> Result<QuantumState> {
    let basis = ctx.basis();
    let m = basis.m();
    spec.validate(m)?;
    let (theta, phi) = (spec.theta, spec.phi);
    let rot = |v: DVector<C64>| ctx.rotator.apply(theta, phi, &v);
    let mut out = DVector::<C64>::zeros(basis.dim());
    let mut tail = 0.0;
    match spec.family {
        Family::SemiCoherent | Family::MaxClassical => {
            let (p, mu, n, t) = spec.labels()?;
            for k in (-p.twice()..=p.twice()).step_by(2) {
                let mup = HalfInt::from_twice(k);
                let c = if spec.family == Family::MaxClassical {
                    max_classical_coefficient(p, mup, spec.sign.is_plus(), theta, phi)?
                } else {
                    d_coefficients(p, mup, mu, theta, phi)?
                };
                out += label_vector(basis, p, mup, n, t)? * c;
            }
        }
        Family::XBiphoton => {
            if m != 2 {
                return Err(Error::FamilyUnsupported("x_biphoton series needs m = 2".into()));
            }
            let p = spec.require_p()?;
            let zeta = spec.zeta.unwrap().0;
            let kappa = spec.kappa.map(|k| k.0).unwrap_or_default();
            let mu = if spec.sign.is_plus() { p } else { p.neg() };
            let twop = p.twice() as usize;
            let pre = zeta.norm().cosh().powi(-(twop as i32 + 2)) * kappa.norm().cos().powi(twop as i32);
            let zt = C64::from_polar(zeta.norm().tanh(), zeta.arg());
            let kt = -C64::from_polar(kappa.norm().tan(), -kappa.arg());
            let mut weight = 0.0;
            for big_t in 0.. {
                let n = 2 * big_t + twop;
                let ln_t = ln_factorial(big_t + twop + 1) - ln_factorial(big_t) - ((twop + 1) as f64).ln();
                let tz = zt.powi(big_t as i32);
                if n > basis.n_max() {
                    break;
                }
                for tau in 0..=twop {
                    let root = (ln_t - ln_factorial(twop - tau) - ln_factorial(tau)).exp().sqrt();
                    let c = tz * kt.powi(tau as i32) * (pre * root);
                    weight += c.norm_sqr();
                    let t = HalfInt::from_twice(p.twice() - 2 * tau as i32);
                    out += label_vector(basis, p, mu, n, t)? * c;
                }
            }
            tail = (1.0 - weight).max(0.0);
        }
        Family::YBiphoton => {
            let p = spec.require_p()?;
            let gamma = spec.gamma.unwrap().0;
            let twop = p.twice() as usize;
            let pre = gamma.norm().cosh().powi(-(twop as i32 + 1));
            let gt = C64::from_polar(gamma.norm().tanh(), gamma.arg());
            let mut weight = 0.0;
            for tau in 0.. {
                if twop + 2 * tau > basis.n_max() {
                    break;
                }
                let c = gt.powi(tau as i32) * (pre * binomial(twop + tau, tau).sqrt());
                weight += c.norm_sqr();
                let (major, minor) = if spec.sign.is_plus() { (Pol::Plus, Pol::Minus) } else { (Pol::Minus, Pol::Plus) };
                let mut occ = vec![0u16; basis.slots()];
                occ[basis.slot(0, major)?] = (twop + tau) as u16;
                occ[basis.slot(0, minor)?] = tau as u16;
                out += fock_vector(basis, &occ)? * c;
            }
            tail = (1.0 - weight).max(0.0);
        }
        f => return Err(Error::FamilyUnsupported(format!("{f} has no series construction"))),
    }
    check_tail(tail, ctx.tolerances())?;
    let v = match spec.family {
        Family::XBiphoton | Family::YBiphoton => rot(out),
        _ => out,
    };
    QuantumState::pure_normalized(basis, v, tail)
}

/// 1 − fidelity between the rotation and series constructions, when a series exists.
pub fn series_deficit(spec: &GcsSpec, ctx: &GcsContext) -> Result<Option<f64>> {
    match build_gcs_series(spec, ctx) {
        Ok(series) => Ok(Some(1.0 - build_gcs(spec, ctx)?.fidelity(&series)?)),
        Err(Error::FamilyUnsupported(_)) => Ok(None),
        Err(e) => Err(e),
    }
}
