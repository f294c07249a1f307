//! Self-checks: operator algebra, reference states and every closed form
//! against a brute-force evaluation on the truncated Fock space.
//!
//! Each suite returns a list of [`Check`]s holding the measured residual and
//! the threshold it is held to. Randomized suites draw from a generator
//! seeded per suite, so a report depends only on the configuration and seed.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::basis_states::{phase_randomized_density, pmu_state_m1, pmu_state_m2, thermal_density_m1};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::fock::{annihilation_op, creation_op, FockBasis, Operator, Pol, QuantumState};
use crate::gcs::{
    build_gcs, identity_resolution_check, overlap_closed_form, series_deficit, x_biphoton_expansion_check, Cplx,
    Family, GcsContext, GcsSpec, SemiLabel, Sign,
};
use crate::geomphase::{geometric_phase_closed, geometric_phase_numeric, SpherePath};
use crate::halfint::HalfInt;
use crate::io::SCHEMA_VERSION;
use crate::polarization::{build_biphoton_ops, eigenstructure_residual, variance_profile, Axis, PolarizationOps};
use crate::quasiprob::{char_fn_closed, q_reduced_at, q_reduced_closed, CharClosed, CharFn, QClosed};
use crate::squeezing::{
    squeeze_report, uncertainty_triples, y_biphoton_cutoff, y_gcs_variance_check, SqueezingClass, UnpolarizedClass,
};

pub const ALGEBRA_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;
pub const OVERLAP_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-10;
pub const SERIES_TOL: f64 = 1e-9;
pub const Q_SEMI_TOL: f64 = 1e-10;
pub const Q_THERMAL_TOL: f64 = 1e-12;
pub const Q_GLAUBER_TOL: f64 = 1e-7;
pub const CHAR_TOL: f64 = 1e-9;
pub const FLATNESS_TOL: f64 = 1e-9;
pub const MIN_UNCERTAINTY_TOL: f64 = 1e-10;
pub const Y_VARIANCE_TOL: f64 = 1e-7;
pub const HEISENBERG_TOL: f64 = 1e-10;
pub const PHASE_TOL: f64 = 1e-5;
pub const PHASE_ZERO_TOL: f64 = 1e-6;

pub const TAUS: [f64; 3] = [0.3, 1.0, 2.5];

/// Largest block handled by the dense per-block suites.
const MAX_BLOCK: usize = 600;

/// One measured residual against its threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, threshold: f64) -> Check {
        Check { name: name.into(), residual, threshold, passed: residual <= threshold, detail: None }
    }

    /// A check that could not be evaluated.
    pub fn error(name: impl Into<String>, err: &Error) -> Check {
        Check {
            name: name.into(),
            residual: f64::INFINITY,
            threshold: 0.0,
            passed: false,
            detail: Some(err.to_string()),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Check {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub m: usize,
    pub n_max: usize,
    pub seed: u64,
    pub tol: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub m: usize,
    pub n_max: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn rng_for(seed: u64, suite: u64) -> StdRng {
    StdRng::seed_from_u64(seed ^ suite.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn h(t: i32) -> HalfInt {
    HalfInt::from_twice(t)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn frob(a: &Operator, b: &Operator) -> Result<f64> {
    Ok(a.try_sub(b)?.frobenius_norm())
}

fn comm(a: &Operator, b: &Operator) -> Result<Operator> {
    Operator::commutator(a, b)
}

fn random_angles(rng: &mut StdRng) -> (f64, f64) {
    (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI))
}

fn random_amp(rng: &mut StdRng, r: f64) -> C64 {
    c(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// Uniformly filled, normalized amplitude vector on the whole basis.
pub fn random_vector(basis: &FockBasis, rng: &mut StdRng) -> DVector<C64> {
    let v = DVector::from_fn(basis.dim(), |_, _| random_amp(rng, 1.0));
    let n = v.norm();
    v / c(n, 0.0)
}

/// A random pure state, or a random rank-3 mixture when `mixed`.
pub fn random_state(basis: &Arc<FockBasis>, rng: &mut StdRng, mixed: bool) -> Result<QuantumState> {
    if !mixed {
        return QuantumState::pure(basis, random_vector(basis, rng));
    }
    let w: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut rho = DMatrix::<C64>::zeros(basis.dim(), basis.dim());
    for wk in w {
        let v = random_vector(basis, rng);
        rho += &v * v.adjoint() * c(wk / total, 0.0);
    }
    QuantumState::mixed(basis, rho)
}

/// Frobenius residuals of the quasispin algebra, its mode additivity, the
/// complementarity of the biphoton operators and [a, a†] = 1 below the cutoff.
pub fn algebra_checks(ops: &PolarizationOps) -> Result<Vec<Check>> {
    let b = ops.basis().clone();
    let i = c(0.0, 1.0);
    let mut out = Vec::new();
    let mut push = |name: &str, r: f64| out.push(Check::new(format!("algebra {name}"), r, ALGEBRA_TOL));

    push("[P0,P+] = P+", frob(&comm(ops.p0(), ops.pplus())?, ops.pplus())?);
    push("[P+,P-] = 2P0", frob(&comm(ops.pplus(), ops.pminus())?, &ops.p0().scale_real(2.0))?);
    push("[P1,P2] = -iP0", frob(&comm(ops.p1(), ops.p2())?, &ops.p0().scale(-i))?);
    push("[P2,P0] = -iP1", frob(&comm(ops.p2(), ops.p0())?, &ops.p1().scale(-i))?);
    push("[P0,P1] = -iP2", frob(&comm(ops.p0(), ops.p1())?, &ops.p2().scale(-i))?);
    let mut r: f64 = 0.0;
    for a in Axis::ALL {
        r = r.max(comm(ops.n(), ops.axis(a))?.frobenius_norm());
    }
    push("[N,P] = 0", r);
    r = 0.0;
    for a in Axis::ALL {
        r = r.max(comm(&ops.casimir, ops.axis(a))?.frobenius_norm());
    }
    push("[P^2,P] = 0", r);

    let mut additivity: f64 = 0.0;
    for a in Axis::ALL {
        let mut sum = Operator::zero(&b);
        for set in &ops.per_mode {
            sum = sum.try_add(set.axis(a))?;
        }
        additivity = additivity.max(frob(&sum, ops.axis(a))?);
    }
    push("mode additivity", additivity);
    let (mut own, mut cross): (f64, f64) = (0.0, 0.0);
    for (j, sj) in ops.per_mode.iter().enumerate() {
        own = own.max(frob(&comm(&sj.pplus, &sj.pminus)?, &sj.p0.scale_real(2.0))?);
        own = own.max(frob(&comm(&sj.p0, &sj.pplus)?, &sj.pplus)?);
        for sk in ops.per_mode.iter().skip(j + 1) {
            for a in Axis::ALL {
                for bx in Axis::ALL {
                    cross = cross.max(comm(sj.axis(a), sk.axis(bx))?.frobenius_norm());
                }
            }
        }
    }
    push("per-mode algebra", own);
    if ops.per_mode.len() > 1 {
        push("distinct modes commute", cross);
    }

    let bi = build_biphoton_ops(&b)?;
    let gens = [ops.p0(), ops.pplus(), ops.pminus()];
    let mut y0: f64 = 0.0;
    for y in bi.y_plus.values() {
        y0 = y0.max(comm(ops.p0(), y)?.frobenius_norm());
    }
    push("[P0,Y+] = 0", y0);
    if !bi.x_plus.is_empty() {
        let (mut rx, mut re): (f64, f64) = (0.0, 0.0);
        for g in gens {
            for x in bi.x_plus.values() {
                rx = rx.max(comm(g, x)?.frobenius_norm());
            }
            for e in bi.e.values() {
                re = re.max(comm(g, e)?.frobenius_norm());
            }
        }
        push("[P,X+] = 0", rx);
        push("[P,E] = 0", re);
    }

    // [a, a†] = 1 holds exactly only on blocks the truncation leaves intact.
    let inner = b.block(b.n_max()).start;
    let mut ladder: f64 = 0.0;
    for j in 0..b.m() {
        for pol in [Pol::Plus, Pol::Minus] {
            let a = annihilation_op(&b, j, pol)?;
            let ad = creation_op(&b, j, pol)?;
            let d = comm(&a, &ad)?.try_sub(&Operator::identity(&b))?;
            let s: f64 =
                d.entries().iter().filter(|(r, c, _)| *r < inner && *c < inner).map(|(_, _, z)| z.norm_sqr()).sum();
            ladder = ladder.max(s.sqrt());
        }
    }
    push("[a,a+] = 1 below the cutoff", ladder);
    Ok(out)
}

/// P² and P₀ spectra on every photon-number block small enough to diagonalize.
pub fn eigenstructure_checks(ops: &PolarizationOps) -> Vec<Check> {
    let b = ops.basis();
    let mut worst: f64 = 0.0;
    let mut top = 0;
    for n in 0..=b.n_max() {
        if b.block(n).len() > MAX_BLOCK {
            break;
        }
        worst = worst.max(eigenstructure_residual(ops, n));
        top = n;
    }
    vec![Check::new("eigenstructure P^2, P0", worst, EIGEN_TOL).with_detail(format!("blocks N ≤ {top}"))]
}

/// Closed-form |p,μ;n,λ⟩ states: eigenvalue residuals, per-block Gram
/// deviation and block completeness (m = 1 or 2).
pub fn basis_state_checks(ops: &PolarizationOps, n_cap: usize) -> Result<Vec<Check>> {
    let b = ops.basis().clone();
    let m = b.m();
    if m > 2 {
        return Ok(Vec::new());
    }
    let t_op = if m == 2 { Some(ops.per_mode[0].n.try_sub(&ops.per_mode[1].n)?.scale_real(0.5)) } else { None };
    let (mut eig, mut gram, mut count): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for n in 0..=n_cap.min(b.n_max()) {
        let mut vecs: Vec<DVector<C64>> = Vec::new();
        let mut labels = Vec::new();
        if m == 1 {
            let tp = n as i32;
            for tm in (-tp..=tp).step_by(2) {
                labels.push((h(tp), h(tm), h(tp)));
            }
        } else {
            for tp in (0..=n as i32).rev().step_by(2) {
                for tm in (-tp..=tp).step_by(2) {
                    for tt in (-tp..=tp).step_by(2) {
                        labels.push((h(tp), h(tm), h(tt)));
                    }
                }
            }
        }
        for (p, mu, t) in labels {
            let s = if m == 1 { pmu_state_m1(p, mu, &b)? } else { pmu_state_m2(p, mu, n, t, &b)? };
            let v = s.amplitudes().expect("pure").clone();
            let pv = p.value();
            let mut r = (ops.casimir.apply(&v) - &v * c(pv * (pv + 1.0), 0.0)).norm();
            r = r.max((ops.p0().apply(&v) - &v * c(mu.value(), 0.0)).norm());
            r = r.max((ops.n().apply(&v) - &v * c(n as f64, 0.0)).norm());
            if let Some(t_op) = &t_op {
                r = r.max((t_op.apply(&v) - &v * c(t.value(), 0.0)).norm());
            }
            eig = eig.max(r);
            vecs.push(v);
        }
        let g = DMatrix::from_fn(vecs.len(), vecs.len(), |i, j| vecs[i].dotc(&vecs[j]));
        let dev = (g - DMatrix::<C64>::identity(vecs.len(), vecs.len())).iter().map(|z| z.norm()).fold(0.0, f64::max);
        gram = gram.max(dev);
        count = count.max((vecs.len() as f64 - b.block(n).len() as f64).abs());
    }
    let top = n_cap.min(b.n_max());
    Ok(vec![
        Check::new("basis states eigenvalues", eig, EIGEN_TOL).with_detail(format!("N ≤ {top}")),
        Check::new("basis states Gram", gram, EIGEN_TOL),
        Check::new("basis states span each block", count, 0.0),
    ])
}

/// Closed-form overlaps of semi-coherent states against inner products of
/// the rotated vectors, `draws` random label and angle sets with p ≤ p_max.
pub fn overlap_checks(ctx: &GcsContext, draws: usize, p_max: HalfInt, rng: &mut StdRng) -> Result<Vec<Check>> {
    let b = ctx.basis();
    let m = b.m();
    if m > 2 {
        return Ok(Vec::new());
    }
    let tp_max = p_max.twice().min(b.n_max() as i32);
    if tp_max < 1 {
        return Ok(Vec::new());
    }
    let mut worst: f64 = 0.0;
    for k in 0..draws {
        let tp = rng.gen_range(1..=tp_max);
        // Every fifth draw pairs different sectors, where the overlap vanishes.
        let tp2 = if k % 5 == 4 { rng.gen_range(0..=tp_max) } else { tp };
        let label = |rng: &mut StdRng, tp: i32| -> (SemiLabel, GcsSpec) {
            let mu = h(tp - 2 * rng.gen_range(0..=tp));
            let (theta, phi) = random_angles(rng);
            let mut spec = GcsSpec::semi_coherent(h(tp), mu, theta, phi);
            let (n, lambda) = if m == 2 {
                let pairs = rng.gen_range(0..=(b.n_max() as i32 - tp) / 2) as usize;
                let t = h(tp - 2 * rng.gen_range(0..=tp));
                spec = spec.with_labels(tp as usize + 2 * pairs, Some(t));
                (tp as usize + 2 * pairs, Some(t))
            } else {
                (tp as usize, None)
            };
            (SemiLabel { p: h(tp), mu, n, lambda, theta, phi }, spec)
        };
        let (la, sa) = label(rng, tp);
        let (mut lb, mut sb) = label(rng, tp2);
        if k % 5 == 1 && m == 2 {
            // Same sector and labels, so the overlap is generically nonzero.
            lb = SemiLabel { n: la.n, lambda: la.lambda, ..lb };
            sb = sb.with_labels(la.n, la.lambda);
        }
        let brute = build_gcs(&sa, ctx)?.inner(&build_gcs(&sb, ctx)?)?;
        worst = worst.max((brute - overlap_closed_form(&la, &lb)?).norm());
    }
    Ok(vec![Check::new("semi-coherent overlaps", worst, OVERLAP_TOL).with_detail(format!("{draws} draws, p ≤ {p_max}"))])
}

/// Quadrature resolution of the identity on the blocks N ≤ n_cap (m ≤ 2).
pub fn identity_checks(ctx: &GcsContext, n_cap: usize) -> Result<Vec<Check>> {
    if ctx.basis().m() > 2 {
        return Ok(Vec::new());
    }
    let mut worst: f64 = 0.0;
    let top = n_cap.min(ctx.basis().n_max());
    for n in 0..=top {
        worst = worst.max(identity_resolution_check(h(n as i32), n, ctx)?);
    }
    Ok(vec![Check::new("identity resolution", worst, IDENTITY_TOL).with_detail(format!("N ≤ {top}"))])
}

/// Series constructions of the coherent-state families against the direct
/// exponential or rotation.
pub fn series_checks(ctx: &GcsContext) -> Result<Vec<Check>> {
    let b = ctx.basis();
    let m = b.m();
    let mut out = Vec::new();
    let (theta, phi) = (1.1, 5.0);
    let mut specs = Vec::new();
    for tp in 1..=(b.n_max() as i32).min(4) {
        specs.push(GcsSpec::semi_coherent(h(tp), h(tp - 2), theta, phi));
        specs.push(GcsSpec::max_classical(h(tp), Sign::Minus, theta, phi));
    }
    if m == 1 {
        for tp in 0..=2 {
            specs.push(
                GcsSpec { p: Some(h(tp)), gamma: Some(Cplx(c(0.03, -0.04))), ..GcsSpec::new(Family::YBiphoton) }
                    .with_angles(theta, phi),
            );
        }
    }
    if m <= 2 {
        let mut worst: f64 = 0.0;
        for spec in &specs {
            let spec = if m == 2 { spec.clone().with_labels(spec.p.unwrap().twice() as usize, spec.p) } else { spec.clone() };
            if let Some(d) = series_deficit(&spec, ctx)? {
                worst = worst.max(d.abs());
            }
        }
        out.push(Check::new("coherent-state series", worst, SERIES_TOL));
    }
    if m == 2 {
        let mut worst: f64 = 0.0;
        let zeta = C64::from_polar(0.02, 0.3);
        for tp in 0..=2 {
            if (tp as usize) + 4 > b.n_max() {
                break;
            }
            worst = worst.max(x_biphoton_expansion_check(h(tp), zeta, c(0.2, -0.1), ctx)?.abs());
        }
        out.push(Check::new("X-biphoton expansion", worst, SERIES_TOL).with_detail("|ζ| = 0.02"));
    }
    Ok(out)
}

/// Semi-coherent reduced Q-functions against their closed form, random
/// states and probe angles.
pub fn q_semi_checks(ctx: &GcsContext, draws: usize, rng: &mut StdRng) -> Result<Vec<Check>> {
    let b = ctx.basis();
    if b.m() > 2 {
        return Ok(Vec::new());
    }
    let tp_max = (b.n_max() as i32).min(6);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let tp = rng.gen_range(0..=tp_max);
        let (p, mu) = (h(tp), h(tp - 2 * rng.gen_range(0..=tp)));
        let (th1, ph1) = random_angles(rng);
        let (th, ph) = random_angles(rng);
        let mut spec = GcsSpec::semi_coherent(p, mu, th1, ph1);
        if b.m() == 2 {
            spec = spec.with_labels(tp as usize, Some(p));
        }
        let state = build_gcs(&spec, ctx)?;
        let num = q_reduced_at(&state, p, ctx, th, ph)?;
        let closed = q_reduced_closed(&QClosed::Semi { p, mu, theta: th1, phi: ph1 }, p, th, ph)?;
        worst = worst.max((num - closed).abs());
    }
    Ok(vec![Check::new("Q semi-coherent", worst, Q_SEMI_TOL).with_detail(format!("{draws} draws"))])
}

/// Thermal reduced Q at β = ln 2: numeric value on a large one-mode basis
/// against the closed form, for the sectors listed by twice p.
pub fn q_thermal_values(twice_p: &[i32]) -> Result<Vec<(HalfInt, f64, f64)>> {
    let b = FockBasis::build(1, 50)?;
    let ctx = GcsContext::new(&b)?;
    let rho = thermal_density_m1(LN_2, &b)?;
    twice_p
        .iter()
        .map(|&tp| {
            let p = h(tp);
            let closed = q_reduced_closed(&QClosed::Thermal { beta: LN_2 }, p, 0.0, 0.0)?;
            let mut worst_num = closed;
            for (th, ph) in [(0.3, 0.2), (FRAC_PI_2, 2.0), (2.8, 5.0)] {
                let num = q_reduced_at(&rho, p, &ctx, th, ph)?;
                if (num - closed).abs() > (worst_num - closed).abs() {
                    worst_num = num;
                }
            }
            Ok((p, worst_num, closed))
        })
        .collect()
}

pub fn q_thermal_checks() -> Result<Vec<Check>> {
    let worst = q_thermal_values(&[1, 2, 3])?.iter().map(|(_, n, cl)| (n - cl).abs()).fold(0.0, f64::max);
    Ok(vec![Check::new("Q thermal flat", worst, Q_THERMAL_TOL).with_detail("β = ln 2, p ≤ 3/2")])
}

/// Two-mode Glauber reduced Q against the Bessel closed form.
pub fn q_glauber_checks(draws: usize, rng: &mut StdRng) -> Result<Vec<Check>> {
    let ctx = GcsContext::new(&FockBasis::build(2, 10)?)?;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let ap = [random_amp(rng, 0.4), random_amp(rng, 0.4)];
        let am = [random_amp(rng, 0.4), random_amp(rng, 0.4)];
        let (th1, ph1) = random_angles(rng);
        let state = build_gcs(&GcsSpec::glauber(&ap, &am).with_angles(th1, ph1), &ctx)?;
        let closed = QClosed::GlauberM2 { alpha_plus: ap, alpha_minus: am, theta: th1, phi: ph1 };
        let (th, ph) = random_angles(rng);
        for tp in 0..=3 {
            let num = q_reduced_at(&state, h(tp), &ctx, th, ph)?;
            worst = worst.max((num - q_reduced_closed(&closed, h(tp), th, ph)?).abs());
        }
    }
    Ok(vec![Check::new("Q two-mode Glauber", worst, Q_GLAUBER_TOL).with_detail(format!("{draws} draws, p ≤ 3/2"))])
}

/// Characteristic functions of semi-coherent and Glauber states against the
/// eigendecomposition of P₀, P₁, P₂.
pub fn char_checks(ctx: &GcsContext, draws: usize, rng: &mut StdRng) -> Result<Vec<Check>> {
    let b = ctx.basis();
    let mut out = Vec::new();
    if b.m() <= 2 {
        let cf = CharFn::new(ctx.ops());
        let tp_max = (b.n_max() as i32).min(6);
        let mut worst: f64 = 0.0;
        for _ in 0..draws {
            let tp = rng.gen_range(0..=tp_max);
            let (p, mu) = (h(tp), h(tp - 2 * rng.gen_range(0..=tp)));
            let (th, ph) = random_angles(rng);
            let mut spec = GcsSpec::semi_coherent(p, mu, th, ph);
            if b.m() == 2 {
                spec = spec.with_labels(tp as usize, Some(p));
            }
            let state = build_gcs(&spec, ctx)?;
            let fam = CharClosed::Semi { p, mu, theta: th, phi: ph };
            for a in Axis::ALL {
                for tau in TAUS {
                    worst = worst.max((char_fn_closed(&fam, a, tau)? - cf.eval(&state, a, tau)?).norm());
                }
            }
        }
        out.push(Check::new("characteristic fn semi-coherent", worst, CHAR_TOL));
    }
    let gctx = GcsContext::new(&FockBasis::build(1, 24)?)?;
    let cf = CharFn::new(gctx.ops());
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let ap = vec![random_amp(rng, 0.7)];
        let am = vec![random_amp(rng, 0.7)];
        let (th, ph) = random_angles(rng);
        let state = build_gcs(&GcsSpec::glauber(&ap, &am).with_angles(th, ph), &gctx)?;
        let fam = CharClosed::Glauber { alpha_plus: ap, alpha_minus: am, theta: th, phi: ph };
        for a in Axis::ALL {
            for tau in TAUS {
                worst = worst.max((char_fn_closed(&fam, a, tau)? - cf.eval(&state, a, tau)?).norm());
            }
        }
    }
    out.push(Check::new("characteristic fn Glauber", worst, CHAR_TOL));
    Ok(out)
}

/// Glauber flatness σ_α = ⟨N⟩/4 on random coherent amplitudes.
pub fn flatness_checks(m: usize, draws: usize, rng: &mut StdRng) -> Result<Vec<Check>> {
    let m = m.clamp(1, 2);
    let n_max = if m == 1 { 24 } else { 12 };
    let ctx = GcsContext::new(&FockBasis::build(m, n_max)?)?;
    let r = if m == 1 { 0.7 } else { 0.4 };
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let ap: Vec<C64> = (0..m).map(|_| random_amp(rng, r)).collect();
        let am: Vec<C64> = (0..m).map(|_| random_amp(rng, r)).collect();
        let (th, ph) = random_angles(rng);
        let s = build_gcs(&GcsSpec::glauber(&ap, &am).with_angles(th, ph), &ctx)?;
        let prof = variance_profile(&s, ctx.ops())?;
        for sg in prof.sigma {
            worst = worst.max((sg - prof.mean_n / 4.0).abs());
        }
    }
    Ok(vec![Check::new("Glauber flatness", worst, FLATNESS_TOL).with_detail(format!("m = {m}"))])
}

/// ΔP² = p for maximally classical states at random angles.
pub fn min_uncertainty_checks(ctx: &GcsContext, draws: usize, rng: &mut StdRng) -> Result<Vec<Check>> {
    let b = ctx.basis();
    let tp_max = b.n_max() as i32;
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let tp = rng.gen_range(0..=tp_max);
        let (th, ph) = random_angles(rng);
        let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let mut spec = GcsSpec::max_classical(h(tp), sign, th, ph);
        if b.m() >= 2 {
            spec = spec.with_labels(tp as usize, Some(h(tp)));
        }
        let s = match build_gcs(&spec, ctx) {
            Ok(s) => s,
            Err(Error::LabelInvalid(_)) if b.m() > 2 => continue,
            Err(e) => return Err(e),
        };
        let prof = variance_profile(&s, ctx.ops())?;
        worst = worst.max((prof.delta_p2 - tp as f64 / 2.0).abs());
    }
    Ok(vec![Check::new("max-classical ΔP^2 = p", worst, MIN_UNCERTAINTY_TOL)])
}

/// Heisenberg triples on random pure and mixed states; the residual is the
/// largest violation rhs − lhs.
pub fn heisenberg_checks(ops: &PolarizationOps, count: usize, rng: &mut StdRng) -> Result<Vec<Check>> {
    let b = ops.basis().clone();
    let mut worst = f64::NEG_INFINITY;
    for k in 0..count {
        let s = random_state(&b, rng, k % 4 == 3)?;
        for t in uncertainty_triples(&s, ops)? {
            worst = worst.max(t.rhs - t.lhs);
        }
    }
    Ok(vec![Check::new("Heisenberg triples", worst.max(0.0), HEISENBERG_TOL)
        .with_detail(format!("{count} states, largest rhs − lhs {worst:.3e}"))])
}

/// Y-biphoton variance and mean photon number against the closed forms.
pub fn y_variance_checks(draws: usize, rng: &mut StdRng) -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let p = h(rng.gen_range(0..=3));
        let g = rng.gen_range(0.0..0.4);
        let ctx = GcsContext::new(&FockBasis::build(1, y_biphoton_cutoff(p, g, 1e-12).max(2))?)?;
        worst = worst.max(y_gcs_variance_check(p, g, &ctx)?.max_residual);
    }
    Ok(vec![Check::new("Y-biphoton ΔP^2 and <N>", worst, Y_VARIANCE_TOL).with_detail("|γ| ≤ 0.4")])
}

/// Classification of the five reference unpolarized states.
pub fn classification_checks(tol: &Tolerances) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut push = |name: &str, got: UnpolarizedClass, want: UnpolarizedClass, sq: Option<SqueezingClass>| {
        let detail = match sq {
            Some(s) => format!("{got:?}, squeezing {s:?}"),
            None => format!("{got:?}"),
        };
        out.push(Check::new(format!("class {name}"), if got == want { 0.0 } else { 1.0 }, 0.0).with_detail(detail));
    };

    let b = FockBasis::build(2, 4)?;
    let ops = crate::polarization::build_polarization_ops(&b)?;
    let mut v = DVector::zeros(b.dim());
    v[0] = c(1.0, 0.0);
    let x = crate::polarization::x_plus(&b, 0, 1)?.apply(&v);
    let xs = QuantumState::pure_normalized(&b, x, 0.0)?;
    let r = squeeze_report(&xs, &ops, tol)?;
    push("X-vacuum", r.unpolarized_class.unwrap_or(UnpolarizedClass::NotUnpolarized), UnpolarizedClass::PolarizationVacuum, Some(r.squeezing_class));

    let g = 0.3;
    let ctx = GcsContext::new(&FockBasis::build(1, y_biphoton_cutoff(h(0), g, 1e-14))?)?;
    let spec = GcsSpec { p: Some(h(0)), gamma: Some(Cplx(c(g, 0.0))), ..GcsSpec::new(Family::YBiphoton) };
    let r = squeeze_report(&build_gcs(&spec, &ctx)?, ctx.ops(), tol)?;
    push("twin-photon", r.unpolarized_class.unwrap_or(UnpolarizedClass::NotUnpolarized), UnpolarizedClass::TwinPhotonHidden, Some(r.squeezing_class));

    let ctx = GcsContext::new(&FockBasis::build(2, 12)?)?;
    let spec = GcsSpec::glauber(&[c(0.4, 0.0), c(0.0, 0.0)], &[c(0.0, 0.0), c(0.4, 0.0)]);
    let r = squeeze_report(&build_gcs(&spec, &ctx)?, ctx.ops(), tol)?;
    push("coherent unpolarized", r.unpolarized_class.unwrap_or(UnpolarizedClass::NotUnpolarized), UnpolarizedClass::CoherentUnpolarized, Some(r.squeezing_class));

    let b = FockBasis::build(1, 60)?;
    let ops = crate::polarization::build_polarization_ops(&b)?;
    let r = squeeze_report(&thermal_density_m1(LN_2, &b)?, &ops, tol)?;
    push("thermal", r.unpolarized_class.unwrap_or(UnpolarizedClass::NotUnpolarized), UnpolarizedClass::ThermalLike, Some(r.squeezing_class));

    let b = FockBasis::build(1, 40)?;
    let ops = crate::polarization::build_polarization_ops(&b)?;
    let r = squeeze_report(&phase_randomized_density(c(0.7, 0.0), &b)?, &ops, tol)?;
    push("phase-randomized", r.unpolarized_class.unwrap_or(UnpolarizedClass::NotUnpolarized), UnpolarizedClass::PhaseRandomized, Some(r.squeezing_class));
    Ok(out)
}

/// Numeric geometric phase of eigenstate orbits around circles against
/// −2μ·2π sin²(θ/2), and a P-scalar orbit against zero.
pub fn phase_checks(twice_mu: &[i32], thetas: &[f64], tol: &Tolerances) -> Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    let mut k_max = 0;
    for &tm in twice_mu {
        let p = h(if tm == 0 { 2 } else { tm.abs() });
        let ctx = GcsContext::with_tolerances(&FockBasis::build(1, p.twice() as usize)?, *tol)?;
        for &theta in thetas {
            let path = SpherePath::circle(theta, 64)?;
            let spec = GcsSpec::semi_coherent(p, h(tm), 0.0, 0.0);
            let r = geometric_phase_numeric(&spec, &path, &ctx)?.require_converged()?;
            let want = -(tm as f64) * 2.0 * PI * (theta / 2.0).sin().powi(2);
            worst = worst.max((r.gamma_total - want).abs());
            k_max = k_max.max(r.k_final);
        }
    }
    let mut out = vec![Check::new("geometric phase eigen orbits", worst, PHASE_TOL).with_detail(format!("K ≤ {k_max}"))];

    let ctx = GcsContext::with_tolerances(&FockBasis::build(2, 6)?, *tol)?;
    let spec = GcsSpec { p: Some(h(0)), zeta: Some(Cplx(c(0.05, 0.0))), ..GcsSpec::new(Family::XBiphoton) };
    let mut zero: f64 = 0.0;
    for &theta in thetas {
        let r = geometric_phase_numeric(&spec, &SpherePath::circle(theta, 64)?, &ctx)?.require_converged()?;
        zero = zero.max(r.gamma_total.abs());
    }
    out.push(Check::new("geometric phase P-scalar", zero, PHASE_ZERO_TOL));
    Ok(out)
}

/// Glauber geometric phase: numeric estimate against the moment
/// decomposition, on random amplitudes and the lune and circle loops.
pub fn glauber_phase_checks(draws: usize, rng: &mut StdRng, tol: &Tolerances) -> Result<Vec<Check>> {
    let ctx = GcsContext::with_tolerances(&FockBasis::build(1, 20)?, *tol)?;
    let mut worst: f64 = 0.0;
    for k in 0..draws {
        let ap = vec![random_amp(rng, 0.6)];
        let am = vec![random_amp(rng, 0.6)];
        let path = if k % 2 == 0 {
            SpherePath::circle(rng.gen_range(0.2..PI - 0.2), 64)?
        } else {
            let a = rng.gen_range(0.0..PI);
            SpherePath::lune(a, a + rng.gen_range(0.3..2.5), 64)?
        };
        let spec = GcsSpec::glauber(&ap, &am);
        let r = geometric_phase_numeric(&spec, &path, &ctx)?.require_converged()?;
        let closed = geometric_phase_closed(&spec, &path)?;
        worst = worst.max((r.gamma_total - closed.gamma).abs());
    }
    Ok(vec![Check::new("geometric phase Glauber decomposition", worst, PHASE_TOL).with_detail(format!("{draws} loops"))])
}

fn collect(out: &mut Vec<Check>, suite: &str, r: Result<Vec<Check>>) {
    match r {
        Ok(checks) => out.extend(checks),
        Err(e) => out.push(Check::error(suite, &e)),
    }
}

/// Runs every suite appropriate for the configured basis.
///
/// Errors only on an invalid configuration; module errors inside a suite
/// become failed checks.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.m == 0 {
        return Err(Error::ParamInvalid("m must be ≥ 1".into()));
    }
    let basis = FockBasis::build_with_limit(cfg.m, cfg.n_max, cfg.tol.max_dim)?;
    let ctx = GcsContext::with_tolerances(&basis, cfg.tol)?;
    let ops = ctx.ops();
    let seed = cfg.seed;
    let small = cfg.m <= 2;
    let mut checks = Vec::new();

    collect(&mut checks, "algebra", algebra_checks(ops));
    checks.extend(eigenstructure_checks(ops));
    if small {
        collect(&mut checks, "basis states", basis_state_checks(ops, 6));
        collect(&mut checks, "overlaps", overlap_checks(&ctx, 200, h(6), &mut rng_for(seed, 1)));
        collect(&mut checks, "identity resolution", identity_checks(&ctx, 4));
        collect(&mut checks, "series", series_checks(&ctx));
        collect(&mut checks, "Q semi-coherent", q_semi_checks(&ctx, 40, &mut rng_for(seed, 2)));
        collect(&mut checks, "characteristic functions", char_checks(&ctx, 10, &mut rng_for(seed, 3)));
    }
    if cfg.m == 1 {
        collect(&mut checks, "Q thermal", q_thermal_checks());
        collect(&mut checks, "Y-biphoton variance", y_variance_checks(6, &mut rng_for(seed, 4)));
    }
    if cfg.m == 2 {
        collect(&mut checks, "Q Glauber", q_glauber_checks(3, &mut rng_for(seed, 5)));
    }
    collect(&mut checks, "flatness", flatness_checks(cfg.m, 10, &mut rng_for(seed, 6)));
    collect(&mut checks, "min uncertainty", min_uncertainty_checks(&ctx, 20, &mut rng_for(seed, 7)));
    collect(&mut checks, "Heisenberg", heisenberg_checks(ops, 100, &mut rng_for(seed, 8)));
    collect(&mut checks, "classification", classification_checks(&cfg.tol));
    collect(&mut checks, "geometric phase", phase_checks(&[1, 0], &[FRAC_PI_2], &cfg.tol));
    collect(&mut checks, "Glauber phase", glauber_phase_checks(2, &mut rng_for(seed, 9), &cfg.tol));

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { schema_version: SCHEMA_VERSION, m: cfg.m, n_max: cfg.n_max, seed, checks, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_m1_passes() {
        let cfg = VerifyConfig { m: 1, n_max: 8, seed: 1, tol: Tolerances::default() };
        let r = run_verify(&cfg).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{c:?}");
        }
        assert!(r.passed);
    }

    #[test]
    fn rejects_zero_modes() {
        let cfg = VerifyConfig { m: 0, n_max: 8, seed: 1, tol: Tolerances::default() };
        assert_eq!(run_verify(&cfg).unwrap_err().to_string(), "invalid parameter: m must be ≥ 1");
    }

    #[test]
    fn overlaps_on_two_modes() {
        let ctx = GcsContext::new(&FockBasis::build(2, 6).unwrap()).unwrap();
        let r = overlap_checks(&ctx, 40, h(6), &mut rng_for(3, 1)).unwrap();
        assert!(r[0].passed, "{r:?}");
    }
}
