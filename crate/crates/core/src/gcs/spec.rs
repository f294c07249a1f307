use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::Pol;
use crate::halfint::HalfInt;

/// Complex number with the JSON form `[re, im]` (a bare number is read as real).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cplx(pub C64);

impl From<C64> for Cplx {
    fn from(c: C64) -> Self {
        Cplx(c)
    }
}

impl Serialize for Cplx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.0.re)?;
        t.serialize_element(&self.0.im)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Cplx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pair([f64; 2]),
            Real(f64),
        }
        Ok(match Raw::deserialize(d).map_err(|_| de::Error::custom("expected [re, im] or a number"))? {
            Raw::Pair([re, im]) => Cplx(C64::new(re, im)),
            Raw::Real(re) => Cplx(C64::new(re, 0.0)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    SemiCoherent,
    MaxClassical,
    Product,
    FockRotated,
    XBiphoton,
    YBiphoton,
    Glauber,
    GlauberRotated,
    GlauberCircular,
    GlauberPhaseConstrained,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::SemiCoherent,
        Family::MaxClassical,
        Family::Product,
        Family::FockRotated,
        Family::XBiphoton,
        Family::YBiphoton,
        Family::Glauber,
        Family::GlauberRotated,
        Family::GlauberCircular,
        Family::GlauberPhaseConstrained,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::SemiCoherent => "semi_coherent",
            Family::MaxClassical => "max_classical",
            Family::Product => "product",
            Family::FockRotated => "fock_rotated",
            Family::XBiphoton => "x_biphoton",
            Family::YBiphoton => "y_biphoton",
            Family::Glauber => "glauber",
            Family::GlauberRotated => "glauber_rotated",
            Family::GlauberCircular => "glauber_circular",
            Family::GlauberPhaseConstrained => "glauber_phase_constrained",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn is_glauber(self) -> bool {
        matches!(
            self,
            Family::Glauber | Family::GlauberRotated | Family::GlauberCircular | Family::GlauberPhaseConstrained
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which extremal vector (μ = +p or −p) a family is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn pol(self) -> Pol {
        match self {
            Sign::Plus => Pol::Plus,
            Sign::Minus => Pol::Minus,
        }
    }

    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(if self.is_plus() { "+" } else { "-" })
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match String::deserialize(d)?.as_str() {
            "+" | "plus" => Ok(Sign::Plus),
            "-" | "−" | "minus" => Ok(Sign::Minus),
            other => Err(de::Error::custom(format!("sign must be \"+\" or \"-\", got {other:?}"))),
        }
    }
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

/// Declarative description of a generalized coherent state.
///
/// Angles are in radians. Which optional fields are required depends on the
/// family; see [`GcsSpec::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GcsSpec {
    pub family: Family,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<HalfInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<HalfInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<HalfInt>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub sign: Sign,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_plus: Option<Vec<Cplx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_minus: Option<Vec<Cplx>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Cplx>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Cplx>,
    /// Photon numbers n_j per mode (product states).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photons: Option<Vec<u16>>,
    /// Per-mode angles [θ_j, φ_j] (product states).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_angles: Option<Vec<[f64; 2]>>,
    /// Occupations [n⁺_j, n⁻_j] per mode (rotated Fock states).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupations: Option<Vec<[u16; 2]>>,
}

impl GcsSpec {
    pub fn new(family: Family) -> GcsSpec {
        GcsSpec {
            family,
            theta: 0.0,
            phi: 0.0,
            p: None,
            mu: None,
            n: None,
            t: None,
            sign: Sign::Plus,
            alpha_plus: None,
            alpha_minus: None,
            zeta: None,
            kappa: None,
            gamma: None,
            photons: None,
            mode_angles: None,
            occupations: None,
        }
    }

    pub fn semi_coherent(p: HalfInt, mu: HalfInt, theta: f64, phi: f64) -> GcsSpec {
        GcsSpec { p: Some(p), mu: Some(mu), theta, phi, ..GcsSpec::new(Family::SemiCoherent) }
    }

    pub fn max_classical(p: HalfInt, sign: Sign, theta: f64, phi: f64) -> GcsSpec {
        GcsSpec { p: Some(p), sign, theta, phi, ..GcsSpec::new(Family::MaxClassical) }
    }

    pub fn glauber(alpha_plus: &[C64], alpha_minus: &[C64]) -> GcsSpec {
        GcsSpec {
            alpha_plus: Some(alpha_plus.iter().map(|&a| Cplx(a)).collect()),
            alpha_minus: Some(alpha_minus.iter().map(|&a| Cplx(a)).collect()),
            ..GcsSpec::new(Family::Glauber)
        }
    }

    pub fn with_angles(mut self, theta: f64, phi: f64) -> GcsSpec {
        self.theta = theta;
        self.phi = phi;
        self
    }

    pub fn with_labels(mut self, n: usize, t: Option<HalfInt>) -> GcsSpec {
        self.n = Some(n);
        self.t = t;
        self
    }

    pub(crate) fn require_p(&self) -> Result<HalfInt> {
        self.p.ok_or_else(|| Error::spec("p", format!("required for family {}", self.family)))
    }

    pub(crate) fn amplitudes(&self, m: usize) -> Result<(Vec<C64>, Vec<C64>)> {
        let get = |v: &Option<Vec<Cplx>>, field: &str| -> Result<Vec<C64>> {
            match v {
                None => Ok(vec![C64::new(0.0, 0.0); m]),
                Some(v) if v.len() == m => Ok(v.iter().map(|c| c.0).collect()),
                Some(v) => Err(Error::spec(field, format!("has {} entries, expected m = {m}", v.len()))),
            }
        };
        let ap = get(&self.alpha_plus, "alpha_plus")?;
        let am = get(&self.alpha_minus, "alpha_minus")?;
        if let Some(bad) = ap.iter().chain(&am).find(|c| !c.is_finite()) {
            return Err(Error::spec("alpha", format!("non-finite amplitude {bad}")));
        }
        Ok((ap, am))
    }

    /// Quantum-number labels (p, μ, n, t) with the documented defaults: μ = ±p
    /// for max_classical, n = 2p and t = p.
    pub fn labels(&self) -> Result<(HalfInt, HalfInt, usize, HalfInt)> {
        let p = self.require_p()?;
        if p.twice() < 0 {
            return Err(Error::LabelInvalid(format!("p = {p} is negative")));
        }
        let mu = match self.family {
            Family::MaxClassical => {
                if self.mu.is_some() {
                    return Err(Error::spec("mu", "max_classical fixes μ = ±p through sign"));
                }
                if self.sign.is_plus() { p } else { p.neg() }
            }
            _ => self.mu.ok_or_else(|| Error::spec("mu", format!("required for family {}", self.family)))?,
        };
        let n = self.n.unwrap_or(p.twice() as usize);
        let t = self.t.unwrap_or(p);
        Ok((p, mu, n, t))
    }

    /// Checks parameter completeness, angle ranges and family constraints for `m` modes.
    pub fn validate(&self, m: usize) -> Result<()> {
        if m == 0 {
            return Err(Error::ParamInvalid("m must be ≥ 1".into()));
        }
        if !(self.theta.is_finite() && (-1e-12..=PI + 1e-12).contains(&self.theta)) {
            return Err(Error::spec("theta", format!("{} is outside [0, π]", self.theta)));
        }
        if !(self.phi.is_finite() && (0.0..2.0 * PI).contains(&self.phi)) {
            return Err(Error::spec("phi", format!("{} is outside [0, 2π)", self.phi)));
        }
        let f = self.family;
        let forbid = |present: bool, field: &str| -> Result<()> {
            if present {
                Err(Error::spec(field, format!("not a parameter of family {f}")))
            } else {
                Ok(())
            }
        };
        let uses_labels = matches!(f, Family::SemiCoherent | Family::MaxClassical);
        let uses_p = uses_labels || matches!(f, Family::XBiphoton | Family::YBiphoton);
        forbid(!uses_p && self.p.is_some(), "p")?;
        forbid(!uses_labels && (self.mu.is_some() || self.n.is_some() || self.t.is_some()), "mu/n/t")?;
        forbid(!f.is_glauber() && (self.alpha_plus.is_some() || self.alpha_minus.is_some()), "alpha_plus/alpha_minus")?;
        forbid(f != Family::XBiphoton && (self.zeta.is_some() || self.kappa.is_some()), "zeta/kappa")?;
        forbid(f != Family::YBiphoton && self.gamma.is_some(), "gamma")?;
        forbid(f != Family::Product && (self.photons.is_some() || self.mode_angles.is_some()), "photons/mode_angles")?;
        forbid(f != Family::FockRotated && self.occupations.is_some(), "occupations")?;
        let uses_sign = matches!(
            f,
            Family::MaxClassical | Family::Product | Family::XBiphoton | Family::YBiphoton | Family::GlauberCircular
        );
        forbid(!uses_sign && !self.sign.is_plus(), "sign")?;

        match f {
            Family::SemiCoherent | Family::MaxClassical => {
                if m > 2 {
                    return Err(Error::FamilyUnsupported(format!("{f} labels exist only for m ≤ 2")));
                }
                let (p, mu, n, t) = self.labels()?;
                let label = crate::basis_states::PmuLabel { p, mu, n, t: (m == 2).then_some(t) };
                label.validate(m, usize::MAX)?;
            }
            Family::Product => {
                let photons = self.photons.as_ref().ok_or_else(|| Error::spec("photons", "required for product"))?;
                if photons.len() != m {
                    return Err(Error::spec("photons", format!("has {} entries, expected m = {m}", photons.len())));
                }
                if let Some(a) = &self.mode_angles {
                    if a.len() != m {
                        return Err(Error::spec("mode_angles", format!("has {} entries, expected m = {m}", a.len())));
                    }
                    for (j, [th, ph]) in a.iter().enumerate() {
                        if !(th.is_finite() && ph.is_finite() && (-1e-12..=PI + 1e-12).contains(th) && (0.0..2.0 * PI).contains(ph)) {
                            return Err(Error::spec(format!("mode_angles[{j}]"), "angles outside θ ∈ [0, π], φ ∈ [0, 2π)"));
                        }
                    }
                }
            }
            Family::FockRotated => {
                let occ = self.occupations.as_ref().ok_or_else(|| Error::spec("occupations", "required for fock_rotated"))?;
                if occ.len() != m {
                    return Err(Error::spec("occupations", format!("has {} entries, expected m = {m}", occ.len())));
                }
            }
            Family::XBiphoton => {
                if m < 2 {
                    return Err(Error::FamilyUnsupported("x_biphoton needs m ≥ 2".into()));
                }
                self.require_p()?;
                if self.zeta.is_none() {
                    return Err(Error::spec("zeta", "required for x_biphoton"));
                }
            }
            Family::YBiphoton => {
                self.require_p()?;
                if self.gamma.is_none() {
                    return Err(Error::spec("gamma", "required for y_biphoton"));
                }
            }
            Family::Glauber | Family::GlauberRotated => {
                self.amplitudes(m)?;
            }
            Family::GlauberCircular => {
                let (ap, am) = self.amplitudes(m)?;
                let (used, other, name) = if self.sign.is_plus() {
                    (&self.alpha_plus, &am, "alpha_minus")
                } else {
                    (&self.alpha_minus, &ap, "alpha_plus")
                };
                if used.is_none() {
                    return Err(Error::spec(if self.sign.is_plus() { "alpha_plus" } else { "alpha_minus" }, "required"));
                }
                if other.iter().any(|c| c.norm() != 0.0) {
                    return Err(Error::spec(name, "must vanish for a circular Glauber state"));
                }
            }
            Family::GlauberPhaseConstrained => {
                let (ap, am) = self.amplitudes(m)?;
                for (name, v) in [("alpha_plus", &ap), ("alpha_minus", &am)] {
                    if v.iter().any(|c| c.norm() == 0.0) {
                        return Err(Error::ConstraintViolated(format!("{name} has a zero entry, so its phase is undefined")));
                    }
                    let total: f64 = v.iter().map(|c| c.arg()).sum();
                    let wrapped = total - 2.0 * PI * (total / (2.0 * PI)).round();
                    if wrapped.abs() > 1e-9 {
                        return Err(Error::ConstraintViolated(format!("Σ arg {name} = {total} ≠ 0")));
                    }
                }
            }
        }
        for (name, z) in [("zeta", self.zeta), ("kappa", self.kappa), ("gamma", self.gamma)] {
            if z.is_some_and(|Cplx(z)| !z.is_finite()) {
                return Err(Error::spec(name, "non-finite parameter"));
            }
        }
        Ok(())
    }
}
