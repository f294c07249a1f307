//! Geometric phases of polarization GCS transported around closed loops on
//! the Poincaré sphere.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::gcs::{Family, GcsContext, GcsSpec, Orbit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    ConstantTheta,
    GreatCircle,
    Custom,
}

/// A closed loop of (θ, φ) samples in radians.
///
/// φ is stored unwrapped, so a loop around the pole ends at φ₀ + 2π. The last
/// sample coincides with the first on the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpherePath {
    samples: Vec<(f64, f64)>,
    kind: PathKind,
}

fn unit(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn spherical_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (u, v) = (unit(a.0, a.1), unit(b.0, b.1));
    let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let s = cross.iter().map(|c| c * c).sum::<f64>().sqrt();
    let c: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
    s.atan2(c)
}

fn parse_value(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::PathInvalid(format!("cannot read number {s:?}"));
    let atom = |t: &str| -> Result<f64> {
        let t = t.trim();
        match t {
            "pi" | "π" => Ok(PI),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    if let Some((a, b)) = s.split_once('/') {
        return Ok(atom(a)? / atom(b)?);
    }
    if let Some(rest) = s.strip_suffix("pi").or_else(|| s.strip_suffix("π")) {
        let rest = rest.trim_end_matches('*');
        return Ok(if rest.is_empty() { PI } else { atom(rest)? * PI });
    }
    atom(s)
}

impl SpherePath {
    /// Validates θ range, closure and the minimum of 8 steps.
    pub fn new(samples: Vec<(f64, f64)>, kind: PathKind) -> Result<SpherePath> {
        if samples.len() < 9 {
            return Err(Error::PathInvalid(format!("{} steps, at least 8 required", samples.len().saturating_sub(1))));
        }
        if let Some(&(t, p)) = samples.iter().find(|(t, p)| !t.is_finite() || !p.is_finite() || !(-1e-12..=PI + 1e-12).contains(t)) {
            return Err(Error::PathInvalid(format!("sample ({t}, {p}) is outside θ ∈ [0, π]")));
        }
        let gap = spherical_distance(samples[0], *samples.last().unwrap());
        if gap > 1e-12 {
            return Err(Error::PathInvalid(format!("loop is not closed (gap {gap:e})")));
        }
        let samples = samples.into_iter().map(|(t, p)| (t.clamp(0.0, PI), p)).collect();
        Ok(SpherePath { samples, kind })
    }

    /// Circle of constant θ traversed once with increasing φ.
    pub fn circle(theta: f64, k: usize) -> Result<SpherePath> {
        let k = k.max(8);
        let samples = (0..=k).map(|i| (theta, TAU * i as f64 / k as f64)).collect();
        let kind = if (theta - PI / 2.0).abs() < 1e-12 { PathKind::GreatCircle } else { PathKind::ConstantTheta };
        SpherePath::new(samples, kind)
    }

    /// Lune between the meridians φ₁ and φ₂: down along φ₁, across the south
    /// pole, up along φ₂ and back across the north pole.
    ///
    /// Steps are shared between the four legs in proportion to their length
    /// in (θ, φ).
    pub fn lune(phi1: f64, phi2: f64, k: usize) -> Result<SpherePath> {
        if !(phi1.is_finite() && phi2.is_finite()) || phi1 == phi2 {
            return Err(Error::PathInvalid("lune needs two distinct finite meridians".into()));
        }
        let k = k.max(8);
        let dphi = phi2 - phi1;
        let total = 2.0 * PI + 2.0 * dphi.abs();
        let legs = [PI, dphi.abs(), PI, dphi.abs()];
        let steps: Vec<usize> = legs.iter().map(|l| ((k as f64 * l / total).round() as usize).max(2)).collect();
        let mut samples = vec![(0.0, phi1)];
        let mut push_leg = |n: usize, f: &dyn Fn(f64) -> (f64, f64)| {
            for i in 1..=n {
                samples.push(f(i as f64 / n as f64));
            }
        };
        push_leg(steps[0], &|s| (PI * s, phi1));
        push_leg(steps[1], &|s| (PI, phi1 + dphi * s));
        push_leg(steps[2], &|s| (PI * (1.0 - s), phi2));
        push_leg(steps[3], &|s| (0.0, phi2 - dphi * s));
        let kind = if (dphi.abs() - PI).abs() < 1e-12 { PathKind::GreatCircle } else { PathKind::Custom };
        SpherePath::new(samples, kind)
    }

    /// `theta,phi` rows in radians; a header line is optional. φ is unwrapped
    /// so consecutive samples differ by at most π.
    pub fn from_csv(text: &str) -> Result<SpherePath> {
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',');
            let (a, b) = (cols.next().unwrap_or(""), cols.next());
            let parsed = b.and_then(|b| Some((a.trim().parse::<f64>().ok()?, b.trim().parse::<f64>().ok()?)));
            match parsed {
                Some(p) => samples.push(p),
                None if i == 0 && samples.is_empty() => continue,
                None => return Err(Error::PathInvalid(format!("line {}: expected theta,phi", i + 1))),
            }
        }
        for i in 1..samples.len() {
            let prev = samples[i - 1].1;
            let d = samples[i].1 - prev;
            samples[i].1 = prev + d - TAU * ((d + PI) / TAU).floor();
        }
        SpherePath::new(samples, PathKind::Custom)
    }

    /// `circle:theta=<v>` or `lune:phi1=<v>,phi2=<v>`, each with an optional
    /// `k=<steps>` (default 64). Values accept `pi`, fractions such as `pi/2`
    /// and multiples such as `0.5pi`.
    pub fn from_descriptor(desc: &str) -> Result<SpherePath> {
        let (name, args) = desc.split_once(':').unwrap_or((desc, ""));
        let mut kv = std::collections::BTreeMap::new();
        for part in args.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::PathInvalid(format!("expected key=value, got {part:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |key: &str| kv.remove(key).map(|v| parse_value(&v)).transpose();
        let k = take("k")?.map(|v| v as usize).unwrap_or(64);
        let path = match name.trim() {
            "circle" => {
                let theta = take("theta")?.ok_or_else(|| Error::PathInvalid("circle needs theta".into()))?;
                SpherePath::circle(theta, k)?
            }
            "lune" => {
                let p1 = take("phi1")?.ok_or_else(|| Error::PathInvalid("lune needs phi1".into()))?;
                let p2 = take("phi2")?.ok_or_else(|| Error::PathInvalid("lune needs phi2".into()))?;
                SpherePath::lune(p1, p2, k)?
            }
            other => return Err(Error::PathInvalid(format!("unknown loop kind {other:?}"))),
        };
        if let Some(extra) = kv.keys().next() {
            return Err(Error::PathInvalid(format!("unknown loop parameter {extra:?}")));
        }
        Ok(path)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn kind(&self) -> PathKind {
        self.kind
    }

    /// Number of steps K.
    pub fn k(&self) -> usize {
        self.samples.len() - 1
    }

    /// Inserts the parameter-space midpoint of every step, doubling K.
    pub fn refined(&self) -> SpherePath {
        let mut out = Vec::with_capacity(2 * self.samples.len() - 1);
        for w in self.samples.windows(2) {
            out.push(w[0]);
            out.push(((w[0].0 + w[1].0) / 2.0, (w[0].1 + w[1].1) / 2.0));
        }
        out.push(*self.samples.last().unwrap());
        SpherePath { samples: out, kind: self.kind }
    }

    /// The same loop started at sample `shift`.
    pub fn rotated(&self, shift: usize) -> SpherePath {
        let k = self.k();
        let shift = shift % k;
        let dphi = self.samples[k].1 - self.samples[0].1;
        let mut out: Vec<(f64, f64)> = self.samples[shift..].to_vec();
        out.extend(self.samples[1..=shift].iter().map(|&(t, p)| (t, p + dphi)));
        SpherePath { samples: out, kind: self.kind }
    }

    /// The loop traversed backwards.
    pub fn reversed(&self) -> SpherePath {
        SpherePath { samples: self.samples.iter().rev().copied().collect(), kind: self.kind }
    }
}

/// Ω = Σ(1 − cos θ̄)Δφ over the steps of the loop.
pub fn solid_angle(path: &SpherePath) -> f64 {
    path.samples.windows(2).map(|w| (1.0 - ((w[0].0 + w[1].0) / 2.0).cos()) * (w[1].1 - w[0].1)).sum()
}

/// Outcome of the numerical phase estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseResult {
    pub gamma_principal: f64,
    pub winding: i64,
    pub gamma_total: f64,
    #[serde(rename = "K_final")]
    pub k_final: usize,
    pub converged: bool,
    /// Difference between the last two extrapolated estimates.
    pub last_change: f64,
}

impl PhaseResult {
    fn from_total(total: f64, k_final: usize, converged: bool, last_change: f64) -> PhaseResult {
        let principal = wrap(total);
        PhaseResult {
            gamma_principal: principal,
            winding: ((total - principal) / TAU).round() as i64,
            gamma_total: total,
            k_final,
            converged,
            last_change,
        }
    }

    pub fn require_converged(self) -> Result<PhaseResult> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence { k: self.k_final, delta: self.last_change })
        }
    }
}

/// Maps an angle into (−π, π].
pub fn wrap(x: f64) -> f64 {
    x - TAU * ((x - PI) / TAU).ceil()
}

const CHUNK: usize = 256;

/// −Σ arg⟨ψ_k|ψ_{k+1}⟩ on the samples of `path`, without refinement.
pub fn pancharatnam_sum(orbit: &Orbit, path: &SpherePath) -> f64 {
    let s = &path.samples;
    let k = s.len() - 1;
    let chunks: Vec<usize> = (0..k).step_by(CHUNK).collect();
    let partial: Vec<f64> = chunks
        .par_iter()
        .map(|&start| {
            let end = (start + CHUNK).min(k);
            let mut prev = orbit.vector_at(s[start].0, s[start].1);
            let mut acc = 0.0;
            for i in start + 1..=end {
                let next = orbit.vector_at(s[i].0, s[i].1);
                let z: C64 = prev.dotc(&next);
                acc -= z.arg();
                prev = next;
            }
            acc
        })
        .collect();
    partial.iter().sum()
}

/// Richardson-extrapolated Pancharatnam phase over step doubling.
pub fn geometric_phase_orbit(orbit: &Orbit, path: &SpherePath, tol: &Tolerances) -> PhaseResult {
    let mut path = path.clone();
    let mut coarse = pancharatnam_sum(orbit, &path);
    let mut estimate: Option<f64> = None;
    let mut change = f64::INFINITY;
    while path.k() * 2 <= tol.k_cap {
        path = path.refined();
        let fine = pancharatnam_sum(orbit, &path);
        let r = (4.0 * fine - coarse) / 3.0;
        if let Some(prev) = estimate {
            change = (r - prev).abs();
            if change < tol.convergence {
                return PhaseResult::from_total(r, path.k(), true, change);
            }
        }
        estimate = Some(r);
        coarse = fine;
    }
    PhaseResult::from_total(estimate.unwrap_or(coarse), path.k(), false, change)
}

/// Geometric phase of the orbit of `spec` around `path`.
pub fn geometric_phase_numeric(spec: &GcsSpec, path: &SpherePath, ctx: &GcsContext) -> Result<PhaseResult> {
    let orbit = Orbit::of_spec(spec, ctx)?;
    Ok(geometric_phase_orbit(&orbit, path, ctx.tolerances()))
}

/// The three loop integrals ∮sin²(θ/2)dφ, ∮[sinθcosφdφ + sinφdθ] and
/// ∮[sinθsinφdφ − cosφdθ], midpoint rule with one Richardson step.
pub fn loop_integrals(path: &SpherePath) -> [f64; 3] {
    let mut p = path.clone();
    while p.k() < 4096 {
        p = p.refined();
    }
    let coarse = midpoint_integrals(&p);
    let fine = midpoint_integrals(&p.refined());
    [0, 1, 2].map(|i| (4.0 * fine[i] - coarse[i]) / 3.0)
}

fn midpoint_integrals(path: &SpherePath) -> [f64; 3] {
    let mut out = [0.0; 3];
    for w in path.samples.windows(2) {
        let (t, p) = ((w[0].0 + w[1].0) / 2.0, (w[0].1 + w[1].1) / 2.0);
        let (dt, dp) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let (st, _) = t.sin_cos();
        let (sp, cp) = p.sin_cos();
        out[0] += (t / 2.0).sin().powi(2) * dp;
        out[1] += st * cp * dp + sp * dt;
        out[2] += st * sp * dp - cp * dt;
    }
    out
}

/// Closed-form phase and, for Glauber families, its three components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedPhase {
    pub gamma: f64,
    pub components: Option<[f64; 3]>,
}

/// Glauber reference moments ⟨P₀⟩, ⟨P₁⟩, ⟨P₂⟩ from the amplitudes.
pub fn glauber_moments(alpha_plus: &[C64], alpha_minus: &[C64]) -> [f64; 3] {
    let mut p0 = 0.0;
    let mut cross = C64::new(0.0, 0.0);
    for (a, b) in alpha_plus.iter().zip(alpha_minus) {
        p0 += (a.norm_sqr() - b.norm_sqr()) / 2.0;
        cross += b * a.conj();
    }
    [p0, cross.re, -cross.im]
}

/// Closed-form geometric phase of a family whose reference vector is a P₀
/// eigenvector (factor −2μ) or a Glauber product state (three-term sum).
pub fn geometric_phase_closed(spec: &GcsSpec, path: &SpherePath) -> Result<ClosedPhase> {
    let ints = loop_integrals(path);
    let eigen = |mu2: f64| ClosedPhase { gamma: -mu2 * ints[0], components: None };
    let sign = if spec.sign.is_plus() { 1.0 } else { -1.0 };
    match spec.family {
        Family::SemiCoherent | Family::MaxClassical => {
            let (_, mu, _, _) = spec.labels()?;
            Ok(eigen(mu.twice() as f64))
        }
        Family::XBiphoton | Family::YBiphoton => Ok(eigen(sign * spec.require_p()?.twice() as f64)),
        Family::FockRotated => {
            let occ = spec.occupations.as_ref().ok_or_else(|| Error::spec("occupations", "required for fock_rotated"))?;
            Ok(eigen(occ.iter().map(|&[a, b]| a as f64 - b as f64).sum()))
        }
        Family::Product if spec.mode_angles.is_none() => {
            let photons = spec.photons.as_ref().ok_or_else(|| Error::spec("photons", "required for product"))?;
            Ok(eigen(sign * photons.iter().map(|&n| n as f64).sum::<f64>()))
        }
        f if f.is_glauber() => {
            let m = [&spec.alpha_plus, &spec.alpha_minus].iter().filter_map(|v| v.as_ref().map(Vec::len)).max().unwrap_or(0);
            let (ap, am) = spec.amplitudes(m)?;
            let [p0, p1, p2] = glauber_moments(&ap, &am);
            let parts = [-2.0 * p0 * ints[0], -p1 * ints[1], p2 * ints[2]];
            Ok(ClosedPhase { gamma: parts.iter().sum(), components: Some(parts) })
        }
        f => Err(Error::FamilyUnsupported(f.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6};

    use super::*;
    use crate::fock::FockBasis;
    use crate::gcs::{Cplx, Sign};
    use crate::halfint::HalfInt;

    fn h(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    fn ctx(m: usize, n_max: usize) -> GcsContext {
        GcsContext::new(&FockBasis::build(m, n_max).unwrap()).unwrap()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn path_construction() {
        let p = SpherePath::circle(FRAC_PI_2, 16).unwrap();
        assert!((solid_angle(&p) - TAU).abs() < 1e-12);
        let p = SpherePath::circle(0.7, 16).unwrap();
        assert!((solid_angle(&p) - TAU * (1.0 - 0.7f64.cos())).abs() < 1e-12);
        let p = SpherePath::lune(0.3, 1.1, 64).unwrap();
        assert!((solid_angle(&p) - 1.6).abs() < 1e-12);
        let pt = SpherePath::new(vec![(0.4, 1.0); 9], PathKind::Custom).unwrap();
        assert_eq!(solid_angle(&pt), 0.0);
        assert!(matches!(SpherePath::new(vec![(0.4, 1.0); 5], PathKind::Custom), Err(Error::PathInvalid(_))));
        let mut open: Vec<_> = (0..=10).map(|i| (0.5, i as f64 * 0.1)).collect();
        open[10].1 = 3.0;
        assert!(matches!(SpherePath::new(open, PathKind::Custom), Err(Error::PathInvalid(_))));
        let d = SpherePath::from_descriptor("circle:theta=pi/3,k=12").unwrap();
        assert_eq!(d.k(), 12);
        assert!((d.samples()[3].0 - FRAC_PI_3).abs() < 1e-15);
        assert!(SpherePath::from_descriptor("lune:phi1=0,phi2=0.5pi").is_ok());
        assert!(SpherePath::from_descriptor("square:side=1").is_err());
        assert!(SpherePath::from_descriptor("circle:theta=1,r=2").is_err());
        let csv: String = std::iter::once("theta,phi".to_string())
            .chain((0..=20).map(|i| format!("1.0,{}", (TAU * i as f64 / 20.0) % TAU)))
            .collect::<Vec<_>>()
            .join("\n");
        let p = SpherePath::from_csv(&csv).unwrap();
        assert!((solid_angle(&p) - TAU * (1.0 - 1f64.cos())).abs() < 1e-12);
        assert_eq!(p.refined().k(), 40);
        assert!((wrap(-TAU) - 0.0).abs() < 1e-15 && wrap(PI) == PI && wrap(-PI) == PI);
    }

    #[test]
    fn semi_coherent_half_solid_angle() {
        for (tm, n_max) in [(1, 1), (2, 2), (3, 3)] {
            let cx = ctx(1, n_max);
            let spec = GcsSpec::semi_coherent(h(tm), h(tm), 0.0, 0.0);
            for theta in [FRAC_PI_6, FRAC_PI_2] {
                let path = SpherePath::circle(theta, 16).unwrap();
                let r = geometric_phase_numeric(&spec, &path, &cx).unwrap().require_converged().unwrap();
                let want = -(tm as f64) * TAU * (theta / 2.0).sin().powi(2);
                assert!((r.gamma_total - want).abs() < 1e-6, "μ={tm}/2 θ={theta}: {} vs {want}", r.gamma_total);
                let closed = geometric_phase_closed(&spec, &path).unwrap().gamma;
                assert!((closed - want).abs() < 1e-10);
            }
        }
        let cx = ctx(1, 2);
        let r = geometric_phase_numeric(&GcsSpec::semi_coherent(h(2), h(2), 0.0, 0.0), &SpherePath::circle(FRAC_PI_2, 8).unwrap(), &cx)
            .unwrap();
        assert_eq!(r.winding, -1);
        assert!(r.gamma_principal.abs() < 1e-6);
    }

    #[test]
    fn unpolarized_references_carry_no_phase() {
        let path = SpherePath::circle(1.0, 16).unwrap();
        let cx = ctx(1, 2);
        let r = geometric_phase_numeric(&GcsSpec::semi_coherent(h(2), h(0), 0.0, 0.0), &path, &cx).unwrap();
        assert!(r.gamma_total.abs() < 1e-6);
        let cx2 = ctx(2, 10);
        let x = GcsSpec { p: Some(h(0)), zeta: Some(Cplx(c(0.1, 0.05))), ..GcsSpec::new(Family::XBiphoton) };
        let r = geometric_phase_numeric(&x, &path, &cx2).unwrap();
        assert!(r.gamma_total.abs() < 1e-6);
    }

    #[test]
    fn glauber_decomposition() {
        let cx = ctx(1, 18);
        let paths = [SpherePath::circle(1.2, 32).unwrap(), SpherePath::lune(0.4, 1.9, 64).unwrap()];
        let specs = [
            GcsSpec { family: Family::GlauberRotated, ..GcsSpec::glauber(&[c(0.8, 0.1)], &[c(0.5, 0.0)]) },
            GcsSpec { family: Family::GlauberRotated, ..GcsSpec::glauber(&[c(0.6, 0.0)], &[c(0.0, 0.0)]) },
            GcsSpec { family: Family::GlauberRotated, ..GcsSpec::glauber(&[c(0.2, -0.3)], &[c(0.4, 0.6)]) },
        ];
        for path in &paths {
            for spec in &specs {
                let num = geometric_phase_numeric(spec, path, &cx).unwrap();
                let closed = geometric_phase_closed(spec, path).unwrap();
                assert!((num.gamma_total - closed.gamma).abs() < 1e-5, "{spec:?}: {} vs {:?}", num.gamma_total, closed);
            }
        }
        let comps = geometric_phase_closed(&specs[1], &paths[1]).unwrap().components.unwrap();
        assert!(comps[1] == 0.0 && comps[2] == 0.0);
        let comps = geometric_phase_closed(&specs[0], &paths[1]).unwrap().components.unwrap();
        assert!(comps[1].abs() > 1e-3 && comps[2].abs() > 1e-3);
    }

    #[test]
    fn reparameterization_and_deformation() {
        let cx = ctx(1, 3);
        let tol = Tolerances::default();
        let spec = GcsSpec::max_classical(h(3), Sign::Plus, 0.0, 0.0);
        let orbit = Orbit::of_spec(&spec, &cx).unwrap();
        let path = SpherePath::circle(0.9, 24).unwrap();
        let base = geometric_phase_orbit(&orbit, &path, &tol).gamma_total;
        let rot = geometric_phase_orbit(&orbit, &path.rotated(7), &tol).gamma_total;
        let rev = geometric_phase_orbit(&orbit, &path.reversed(), &tol).gamma_total;
        assert!((base - rot).abs() < 2e-6 && (base + rev).abs() < 2e-6);
        let warped: Vec<(f64, f64)> = (0..=48)
            .map(|i| {
                let s = i as f64 / 48.0;
                (0.9, TAU * (s + 0.1 * (TAU * s).sin()))
            })
            .collect();
        let warped = SpherePath::new(warped, PathKind::Custom).unwrap();
        let w = geometric_phase_orbit(&orbit, &warped, &tol).gamma_total;
        assert!((base - w).abs() < 2e-6);
        // A lune with the same solid angle as the circle.
        let omega = solid_angle(&path);
        let lune = SpherePath::lune(0.0, omega / 2.0, 64).unwrap();
        let l = geometric_phase_orbit(&orbit, &lune, &tol).gamma_total;
        assert!((base - l).abs() < 1e-5, "{base} vs {l}");
        let minus = GcsSpec::max_classical(h(3), Sign::Minus, 0.0, 0.0);
        let m = geometric_phase_numeric(&minus, &path, &cx).unwrap().gamma_total;
        assert!((m + base).abs() < 1e-6);
        assert!((geometric_phase_closed(&minus, &path).unwrap().gamma - m).abs() < 1e-5);
    }

    #[test]
    fn glauber_additive_over_modes() {
        let path = SpherePath::circle(1.0, 16).unwrap();
        let a = [c(0.5, 0.1), c(0.2, -0.3)];
        let b = [c(0.3, 0.0), c(-0.4, 0.2)];
        let joint = GcsSpec { family: Family::GlauberRotated, ..GcsSpec::glauber(&a, &b) };
        let cx2 = ctx(2, 12);
        let total = geometric_phase_numeric(&joint, &path, &cx2).unwrap().gamma_total;
        let cx1 = ctx(1, 14);
        let single: f64 = (0..2)
            .map(|j| {
                let s = GcsSpec { family: Family::GlauberRotated, ..GcsSpec::glauber(&a[j..=j], &b[j..=j]) };
                geometric_phase_numeric(&s, &path, &cx1).unwrap().gamma_total
            })
            .sum();
        assert!((total - single).abs() < 2e-6, "{total} vs {single}");
    }

    #[test]
    fn closed_forms_for_eigen_families() {
        let path = SpherePath::circle(FRAC_PI_3, 16).unwrap();
        let want = |mu2: f64| -mu2 * PI * (1.0 - FRAC_PI_3.cos());
        let fock = GcsSpec { occupations: Some(vec![[2, 0], [0, 1]]), ..GcsSpec::new(Family::FockRotated) };
        assert!((geometric_phase_closed(&fock, &path).unwrap().gamma - want(1.0)).abs() < 1e-10);
        let cx = ctx(2, 3);
        let num = geometric_phase_numeric(&fock, &path, &cx).unwrap().gamma_total;
        assert!((num - want(1.0)).abs() < 1e-6);
        let y = GcsSpec { p: Some(h(1)), gamma: Some(Cplx(c(0.1, 0.0))), ..GcsSpec::new(Family::YBiphoton) };
        let cy = ctx(1, 14);
        let num = geometric_phase_numeric(&y, &path, &cy).unwrap().gamma_total;
        assert!((num - geometric_phase_closed(&y, &path).unwrap().gamma).abs() < 1e-5);
        let product = GcsSpec { photons: Some(vec![1, 1]), mode_angles: Some(vec![[0.1, 0.2]; 2]), ..GcsSpec::new(Family::Product) };
        assert!(matches!(geometric_phase_closed(&product, &path), Err(Error::FamilyUnsupported(_))));
    }

    #[test]
    fn convergence_flag() {
        let tol = Tolerances { k_cap: 16, ..Tolerances::default() };
        let cx = GcsContext::with_tolerances(&FockBasis::build(1, 1).unwrap(), tol).unwrap();
        let r = geometric_phase_numeric(&GcsSpec::semi_coherent(h(1), h(1), 0.0, 0.0), &SpherePath::circle(1.0, 8).unwrap(), &cx)
            .unwrap();
        assert!(!r.converged);
        assert!(matches!(r.require_converged(), Err(Error::NoConvergence { .. })));
    }
}
