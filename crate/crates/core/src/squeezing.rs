//! Uncertainty relations, polarization squeezing types and the
//! classification of unpolarized light.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fock::QuantumState;
use crate::gcs::{build_gcs, Cplx, Family, GcsContext, GcsSpec, Sign};
use crate::halfint::HalfInt;
use crate::polarization::{variance_profile, Axis, PolarizationOps, VarianceProfile};

/// One Heisenberg relation ΔP_iΔP_j ≥ |⟨P_k⟩|/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyTriple {
    pub pair: [Axis; 2],
    pub bound: Axis,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezingClass {
    None,
    Circular,
    Linear,
    CircularLinear,
    Absolute,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnpolarizedClass {
    PolarizationVacuum,
    TwinPhotonHidden,
    CoherentUnpolarized,
    ThermalLike,
    PhaseRandomized,
    OtherUnpolarized,
    NotUnpolarized,
}

/// Second-moment summary of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezeReport {
    /// σ_α = (ΔP_α)², α = 0, 1, 2.
    pub sigma: [f64; 3],
    pub delta_p2: f64,
    /// ΔP²/⟨N⟩²; absent for the vacuum.
    pub small_delta_p2: Option<f64>,
    /// k_i = σ_i/ΔP²; absent when ΔP² = 0.
    pub k: Option<[f64; 3]>,
    pub mean: [f64; 3],
    pub mean_n: f64,
    pub p_bar: f64,
    pub deg_p: Option<f64>,
    pub dep_p: Option<f64>,
    pub dep_p0: Option<f64>,
    pub uncertainty_triples: [UncertaintyTriple; 3],
    pub squeezing_class: SqueezingClass,
    pub unpolarized_class: Option<UnpolarizedClass>,
}

const TRIPLES: [([Axis; 2], Axis); 3] =
    [([Axis::P1, Axis::P2], Axis::P0), ([Axis::P0, Axis::P1], Axis::P2), ([Axis::P2, Axis::P0], Axis::P1)];

fn triples_from(prof: &VarianceProfile) -> [UncertaintyTriple; 3] {
    TRIPLES.map(|(pair, bound)| {
        let lhs = (prof.sigma[pair[0].index()].max(0.0) * prof.sigma[pair[1].index()].max(0.0)).sqrt();
        let rhs = prof.mean[bound.index()].abs() / 2.0;
        UncertaintyTriple { pair, bound, lhs, rhs, satisfied: lhs >= rhs - 1e-10 }
    })
}

/// ΔP₁ΔP₂ ≥ |⟨P₀⟩|/2 and its cyclic partners.
pub fn uncertainty_triples(state: &QuantumState, ops: &PolarizationOps) -> Result<[UncertaintyTriple; 3]> {
    Ok(triples_from(&variance_profile(state, ops)?))
}

/// Closed (lhs, rhs) pairs of the three relations on a maximal-classicality
/// GCS with quasispin p, in the order of [`uncertainty_triples`].
pub fn max_classical_triples(p: f64, theta: f64, phi: f64) -> [(f64, f64); 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let h = p / 2.0;
    [
        (h * (ct * ct + 0.25 * st.powi(4) * (2.0 * phi).sin().powi(2)).sqrt(), h * ct.abs()),
        (h * st.abs() * (1.0 - (st * cp).powi(2)).max(0.0).sqrt(), h * (st * sp).abs()),
        (h * st.abs() * (1.0 - (st * sp).powi(2)).max(0.0).sqrt(), h * (st * cp).abs()),
    ]
}

pub fn squeeze_report(state: &QuantumState, ops: &PolarizationOps, tol: &Tolerances) -> Result<SqueezeReport> {
    let prof = variance_profile(state, ops)?;
    let n = prof.mean_n;
    let has_photons = n > 1e-14;
    let norm_p = prof.mean.iter().map(|m| m * m).sum::<f64>().sqrt();
    let k = (prof.delta_p2 > tol.eps_abs).then(|| prof.sigma.map(|s| s / prof.delta_p2));
    let mut report = SqueezeReport {
        sigma: prof.sigma,
        delta_p2: prof.delta_p2,
        small_delta_p2: prof.small_delta_p2,
        k,
        mean: prof.mean,
        mean_n: n,
        p_bar: prof.p_bar,
        deg_p: has_photons.then(|| 2.0 * norm_p / n),
        dep_p: has_photons.then(|| 1.0 - 2.0 * prof.p_bar / n),
        dep_p0: has_photons.then(|| 1.0 - (2.0 * prof.mean[0]).abs() / n),
        uncertainty_triples: triples_from(&prof),
        squeezing_class: SqueezingClass::None,
        unpolarized_class: None,
    };
    report.squeezing_class = classify_squeezing(&report, tol);
    let unpol = classify_unpolarized_with(state, ops, &prof, tol)?;
    report.unpolarized_class = (unpol != UnpolarizedClass::NotUnpolarized).then_some(unpol);
    Ok(report)
}

/// Squeezing type of a report.
///
/// Circular, linear and circular-linear squeezing require the total noise to
/// sit at the fixed-p minimum ΔP² = p̄; above it a component with k_i < 1/3
/// counts as soft squeezing.
pub fn classify_squeezing(report: &SqueezeReport, tol: &Tolerances) -> SqueezingClass {
    let eps = tol.eps_abs;
    let [s0, s1, s2] = report.sigma;
    let total = report.delta_p2;
    if total <= eps {
        return SqueezingClass::Absolute;
    }
    let hard = total <= report.p_bar * (1.0 + tol.rel) + eps;
    if hard {
        if s0 <= eps && s1 > eps && s2 > eps {
            return SqueezingClass::Circular;
        }
        if s0 > eps && ((s1 <= eps && s2 > eps) || (s2 <= eps && s1 > eps)) {
            return SqueezingClass::Linear;
        }
        let third = total / 3.0 + eps;
        if s0 <= third && s1 <= third {
            return SqueezingClass::CircularLinear;
        }
        return SqueezingClass::None;
    }
    let soft = report.k.is_some_and(|k| k.iter().any(|&ki| ki < 1.0 / 3.0 - tol.rel));
    if soft {
        SqueezingClass::Soft
    } else {
        SqueezingClass::None
    }
}

fn close(a: f64, b: f64, tol: &Tolerances) -> bool {
    (a - b).abs() <= tol.rel * a.abs().max(b.abs()) + tol.eps_abs
}

fn moments_vanish(state: &QuantumState, ops: &PolarizationOps, axes: &[Axis], tol: &Tolerances) -> Result<bool> {
    let scale = state.mean(ops.n())?.max(1.0);
    for &a in axes {
        let op = ops.axis(a);
        let mut power = op.clone();
        for s in 1..=tol.s_max {
            if s > 1 {
                power = &power * op;
            }
            if state.mean(&power)?.abs() > tol.eps_abs * scale.powi(s as i32) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Class of unpolarized light, or `NotUnpolarized` when some ⟨P_γ⟩ is nonzero.
pub fn classify_unpolarized(state: &QuantumState, ops: &PolarizationOps, tol: &Tolerances) -> Result<UnpolarizedClass> {
    let prof = variance_profile(state, ops)?;
    classify_unpolarized_with(state, ops, &prof, tol)
}

fn classify_unpolarized_with(
    state: &QuantumState,
    ops: &PolarizationOps,
    prof: &VarianceProfile,
    tol: &Tolerances,
) -> Result<UnpolarizedClass> {
    let n = prof.mean_n;
    let gate = tol.rel * n.max(1.0);
    if prof.mean.iter().any(|m| m.abs() > gate) {
        return Ok(UnpolarizedClass::NotUnpolarized);
    }
    if moments_vanish(state, ops, &Axis::ALL, tol)? {
        return Ok(UnpolarizedClass::PolarizationVacuum);
    }
    let [s0, s1, s2] = prof.sigma;
    let bunched = n + n * n / 2.0;
    if close(prof.delta_p2, bunched, tol) && moments_vanish(state, ops, &[Axis::P0], tol)? && s1 > tol.eps_abs {
        return Ok(UnpolarizedClass::TwinPhotonHidden);
    }
    let all = |v: f64| prof.sigma.iter().all(|&s| close(s, v, tol));
    if all(n / 4.0) {
        return Ok(UnpolarizedClass::CoherentUnpolarized);
    }
    if all(bunched / 4.0) {
        return Ok(UnpolarizedClass::ThermalLike);
    }
    if close(s0, n / 4.0, tol) && close(s1, bunched / 4.0, tol) && close(s2, bunched / 4.0, tol) {
        return Ok(UnpolarizedClass::PhaseRandomized);
    }
    Ok(UnpolarizedClass::OtherUnpolarized)
}

/// Residuals of the two-mode moment relations
/// ⟨P_α(1)^s⟩ = (−1)^s⟨P_α(2)^s⟩ and
/// ⟨P_α(1)^s⟩⟨P_β(1)^s⟩ = ⟨P_α(2)^s⟩⟨P_β(2)^s⟩ for s = 1, 2, 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EprReport {
    pub casimir: f64,
    pub sign_residual: f64,
    pub product_residual: f64,
    pub max_residual: f64,
}

pub fn epr_moment_relations(state: &QuantumState, ops: &PolarizationOps, tol: &Tolerances) -> Result<EprReport> {
    let m = state.basis().m();
    if m != 2 {
        return Err(Error::ParamInvalid(format!("moment relations need m = 2, got m = {m}")));
    }
    let casimir = state.mean(&ops.casimir)?;
    if casimir.abs() > tol.eps_abs {
        return Err(Error::NotPScalar { casimir });
    }
    let mut sign_residual: f64 = 0.0;
    let mut product_residual: f64 = 0.0;
    for s in 1..=3u32 {
        let mut one = [0.0; 3];
        let mut two = [0.0; 3];
        for a in Axis::ALL {
            one[a.index()] = state.mean(&ops.per_mode[0].axis(a).pow(s))?;
            two[a.index()] = state.mean(&ops.per_mode[1].axis(a).pow(s))?;
        }
        let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
        for a in 0..3 {
            sign_residual = sign_residual.max((one[a] - sign * two[a]).abs());
            for b in 0..3 {
                product_residual = product_residual.max((one[a] * one[b] - two[a] * two[b]).abs());
            }
        }
    }
    Ok(EprReport { casimir, sign_residual, product_residual, max_residual: sign_residual.max(product_residual) })
}

/// Measured against closed-form noise of the one-mode Y-biphoton GCS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YVarianceReport {
    pub p: HalfInt,
    pub gamma: f64,
    pub delta_p2: f64,
    pub delta_p2_closed: f64,
    pub mean_n: f64,
    pub mean_n_closed: f64,
    /// |ΔP² − (⟨N⟩ + ⟨N⟩²/2)| on the measured state; reported for p = 0.
    pub twin_residual: Option<f64>,
    pub tail: f64,
    pub max_residual: f64,
}

/// ΔP² = p + ½(p+1)(2p+1) sinh²|2γ| and ⟨N⟩ = (2p+1) cosh 2|γ| − 1.
pub fn y_gcs_closed(p: f64, gamma: f64) -> (f64, f64) {
    let r = gamma.abs();
    (p + 0.5 * (p + 1.0) * (2.0 * p + 1.0) * (2.0 * r).sinh().powi(2), (2.0 * p + 1.0) * (2.0 * r).cosh() - 1.0)
}

/// Smallest cutoff for which the photon-pair distribution of the Y-biphoton
/// GCS loses less than `tail` of its second moment.
pub fn y_biphoton_cutoff(p: HalfInt, gamma: f64, tail: f64) -> usize {
    let t2 = gamma.abs().tanh().powi(2);
    let two_p = p.twice().max(0) as usize;
    if t2 == 0.0 {
        return two_p;
    }
    let k2 = two_p as f64 + 1.0;
    // P(n) = C(2p+n, n) t^{2n} (1 − t²)^{2p+1}
    let mut prob = (1.0 - t2).powf(k2);
    let mut n = 0usize;
    loop {
        let photons = (two_p + 2 * n) as f64;
        let ratio = t2 * (k2 + n as f64) / (n as f64 + 1.0);
        // Geometric bound on the remaining second moment.
        let rest = prob * (photons + 2.0).powi(2) / (1.0 - ratio.min(0.999)).max(1e-3);
        if n > 0 && ratio < 1.0 && rest < tail {
            return two_p + 2 * n;
        }
        prob *= ratio;
        n += 1;
    }
}

pub fn y_gcs_variance_check(p: HalfInt, gamma: f64, ctx: &GcsContext) -> Result<YVarianceReport> {
    if ctx.basis().m() != 1 {
        return Err(Error::ParamInvalid(format!("the Y-biphoton check runs on m = 1, got m = {}", ctx.basis().m())));
    }
    let spec = GcsSpec {
        p: Some(p),
        sign: Sign::Plus,
        gamma: Some(Cplx(C64::new(gamma, 0.0))),
        ..GcsSpec::new(Family::YBiphoton)
    };
    let state = build_gcs(&spec, ctx)?;
    let prof = variance_profile(&state, ctx.ops())?;
    let (dp_closed, n_closed) = y_gcs_closed(p.value(), gamma);
    let twin_residual = (p.twice() == 0).then(|| (prof.delta_p2 - (prof.mean_n + prof.mean_n.powi(2) / 2.0)).abs());
    let max_residual = (prof.delta_p2 - dp_closed)
        .abs()
        .max((prof.mean_n - n_closed).abs())
        .max(twin_residual.unwrap_or(0.0));
    Ok(YVarianceReport {
        p,
        gamma,
        delta_p2: prof.delta_p2,
        delta_p2_closed: dp_closed,
        mean_n: prof.mean_n,
        mean_n_closed: n_closed,
        twin_residual,
        tail: state.tail(),
        max_residual,
    })
}
