use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::build::{build_gcs, build_gcs_series, label_vector, GcsContext};
use super::spec::{Cplx, Family, GcsSpec};
use crate::error::{Error, Result};
use crate::halfint::HalfInt;
use crate::special::gauss_legendre;

/// Smallest node counts (θ Gauss-Legendre in cos θ, φ trapezoid) that
/// integrate the projector of a p ≤ p_max orbit exactly.
pub fn exact_node_counts(p_max: HalfInt) -> (usize, usize) {
    let tp = p_max.twice().max(0) as usize;
    (tp + 2, 2 * tp + 2)
}

/// Max entrywise deviation from the identity of the quadrature of
/// Σ_{p,λ} (2p+1)/4π ∬ |θφ;p,n,λ⟩⟨θφ;p,n,λ| sinθ dθ dφ on the N = n block,
/// with the exactness-bound node counts.
pub fn identity_resolution_check(p_max: HalfInt, n: usize, ctx: &GcsContext) -> Result<f64> {
    let (nt, np) = exact_node_counts(p_max);
    identity_resolution_check_with(p_max, n, ctx, nt, np)
}

/// As [`identity_resolution_check`] with explicit node counts.
pub fn identity_resolution_check_with(
    p_max: HalfInt,
    n: usize,
    ctx: &GcsContext,
    theta_nodes: usize,
    phi_nodes: usize,
) -> Result<f64> {
    let basis = ctx.basis();
    let m = basis.m();
    if m > 2 {
        return Err(Error::ParamInvalid(format!("identity resolution is checked for m ≤ 2, got m = {m}")));
    }
    if n > basis.n_max() {
        return Err(Error::CutoffExceeded { needed: n, n_max: basis.n_max() });
    }
    if (p_max.twice() as usize) < n {
        return Err(Error::ParamInvalid(format!("p_max = {p_max} misses sectors of the N = {n} block")));
    }
    let (nt, np) = exact_node_counts(p_max);
    if theta_nodes < nt || phi_nodes < np {
        return Err(Error::QuadratureUnderResolved(format!(
            "need at least {nt} θ nodes and {np} φ nodes for p_max = {p_max}, got {theta_nodes} and {phi_nodes}"
        )));
    }
    let (xs, ws) = gauss_legendre(theta_nodes);
    let range = basis.block(n);
    let d = range.len();
    let mut acc = DMatrix::<C64>::zeros(d, d);
    let ps: Vec<HalfInt> = if m == 1 {
        vec![HalfInt::from_twice(n as i32)]
    } else {
        (0..=n as i32).rev().step_by(2).map(HalfInt::from_twice).collect()
    };
    for p in ps {
        let lambdas: Vec<HalfInt> = if m == 1 {
            vec![p]
        } else {
            (-p.twice()..=p.twice()).step_by(2).map(HalfInt::from_twice).collect()
        };
        let pref = (p.twice() as f64 + 1.0) / (4.0 * PI) * (2.0 * PI / phi_nodes as f64);
        for t in lambdas {
            let v0 = label_vector(basis, p, p, n, t)?;
            for (&x, &w) in xs.iter().zip(&ws) {
                let theta = x.clamp(-1.0, 1.0).acos();
                for k in 0..phi_nodes {
                    let phi = 2.0 * PI * k as f64 / phi_nodes as f64;
                    let v = ctx.rotator().apply(theta, phi, &v0);
                    let b = v.rows(range.start, d);
                    acc.gerc(C64::new(w * pref, 0.0), &b, &b, C64::new(1.0, 0.0));
                }
            }
        }
    }
    let dev = (acc - DMatrix::<C64>::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(dev)
}

/// 1 − fidelity between the biphoton series and the direct exponential for
/// the two-mode state with parameters p, ζ, κ (sign +, θ = φ = 0).
pub fn x_biphoton_expansion_check(p: HalfInt, zeta: C64, kappa: C64, ctx: &GcsContext) -> Result<f64> {
    if ctx.basis().m() != 2 {
        return Err(Error::ParamInvalid("the biphoton expansion check needs m = 2".into()));
    }
    let spec = GcsSpec { p: Some(p), zeta: Some(Cplx(zeta)), kappa: Some(Cplx(kappa)), ..GcsSpec::new(Family::XBiphoton) };
    let direct = build_gcs(&spec, ctx)?;
    let series = build_gcs_series(&spec, ctx)?;
    Ok(1.0 - direct.fidelity(&series)?)
}
