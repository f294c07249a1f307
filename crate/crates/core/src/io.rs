//! JSON artifacts, state specifications and the inline spec syntax.

use std::io;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::basis_states::{phase_randomized_density, thermal_density_m1};
use crate::error::{Error, Result};
use crate::fock::{FockBasis, QuantumState};
use crate::gcs::{build_gcs, series_deficit, Cplx, GcsContext, GcsSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Writes every float with 17 significant digits.
struct Sig17;

impl serde_json::ser::Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", value as f64)
    }
}

/// Compact JSON with fixed float formatting and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17);
    value.serialize(&mut ser).expect("serializing to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// A mixed state with a closed-form density matrix (m = 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum MixedSpec {
    Thermal { beta: f64 },
    PhaseRandomized { alpha: Cplx },
}

/// Anything the CLI can turn into a state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum StateSpec {
    Gcs(GcsSpec),
    Mixed(MixedSpec),
}

impl<'de> Deserialize<'de> for StateSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        from_value(v).map_err(serde::de::Error::custom)
    }
}

fn from_value(v: Value) -> Result<StateSpec> {
    let is_mixed = v.get("source").is_some();
    let parsed = if is_mixed {
        serde_json::from_value(v).map(StateSpec::Mixed)
    } else {
        serde_json::from_value(v).map(StateSpec::Gcs)
    };
    parsed.map_err(|e| Error::spec("spec", e.to_string()))
}

impl StateSpec {
    /// JSON text, or the inline form `family(key=value,…)`.
    pub fn parse(text: &str) -> Result<StateSpec> {
        let t = text.trim();
        if t.starts_with('{') {
            let v: Value = serde_json::from_str(t).map_err(|e| Error::spec("spec", e.to_string()))?;
            return from_value(v);
        }
        parse_inline(t)
    }

    pub fn gcs(&self) -> Option<&GcsSpec> {
        match self {
            StateSpec::Gcs(g) => Some(g),
            StateSpec::Mixed(_) => None,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            StateSpec::Gcs(g) => g.validate(m),
            StateSpec::Mixed(MixedSpec::Thermal { beta }) => {
                if m != 1 {
                    return Err(Error::spec("source", "thermal states are defined for m = 1"));
                }
                if !(*beta > 0.0 && beta.is_finite()) {
                    return Err(Error::spec("beta", format!("{beta} must be positive and finite")));
                }
                Ok(())
            }
            StateSpec::Mixed(MixedSpec::PhaseRandomized { alpha }) => {
                if m != 1 {
                    return Err(Error::spec("source", "phase-randomized states are defined for m = 1"));
                }
                if !alpha.0.is_finite() {
                    return Err(Error::spec("alpha", "non-finite amplitude"));
                }
                Ok(())
            }
        }
    }

    pub fn build(&self, ctx: &GcsContext) -> Result<QuantumState> {
        self.validate(ctx.basis().m())?;
        match self {
            StateSpec::Gcs(g) => build_gcs(g, ctx),
            StateSpec::Mixed(MixedSpec::Thermal { beta }) => thermal_density_m1(*beta, ctx.basis()),
            StateSpec::Mixed(MixedSpec::PhaseRandomized { alpha }) => phase_randomized_density(alpha.0, ctx.basis()),
        }
    }
}

fn canonical_family(name: &str) -> Option<&'static str> {
    Some(match name {
        "semi" | "semi_coherent" => "semi_coherent",
        "max" | "maxc" | "max_classical" => "max_classical",
        "product" => "product",
        "fock" | "fock_rotated" => "fock_rotated",
        "x" | "x_biphoton" => "x_biphoton",
        "y" | "y_biphoton" => "y_biphoton",
        "glauber" => "glauber",
        "rotated" | "glauber_rotated" => "glauber_rotated",
        "circular" | "glauber_circular" => "glauber_circular",
        "phase_constrained" | "glauber_phase_constrained" => "glauber_phase_constrained",
        "thermal" => "thermal",
        "randomized" | "phase_randomized" => "phase_randomized",
        _ => return None,
    })
}

fn canonical_key(key: &str) -> &str {
    match key {
        "μ" => "mu",
        "θ" => "theta",
        "φ" | "ϕ" => "phi",
        "ζ" => "zeta",
        "κ" => "kappa",
        "γ" => "gamma",
        "β" => "beta",
        "α" => "alpha",
        "α+" | "α⁺" | "a+" | "alpha+" => "alpha_plus",
        "α-" | "α⁻" | "a-" | "alpha-" => "alpha_minus",
        "λ" => "t",
        other => other,
    }
}

/// A real literal: number, `pi`, `ln2`, a multiple such as `3pi` or `2*pi`,
/// optionally divided by another literal (`pi/2`, `1/2`).
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        return Ok(parse_real(a)? / parse_real(b)?);
    }
    let bad = || Error::spec("value", format!("cannot read number {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, s.strip_prefix('+').unwrap_or(s).trim()),
    };
    let constants = [("pi", std::f64::consts::PI), ("π", std::f64::consts::PI), ("ln2", std::f64::consts::LN_2)];
    let mut value = None;
    for (name, c) in constants {
        if let Some(coef) = body.strip_suffix(name) {
            let coef = coef.trim().trim_end_matches('*').trim();
            let k = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
            value = Some(k * c);
            break;
        }
    }
    let v = match value {
        Some(v) => v,
        None => body.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(if neg { -v } else { v })
}

/// A complex literal `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(parse_real(s)?, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64> {
        match t.trim() {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            other => parse_real(other.trim_end_matches('*')),
        }
    };
    match split {
        Some(k) => Ok(C64::new(parse_real(&body[..k])?, imag(&body[k..])?)),
        None => Ok(C64::new(0.0, imag(body)?)),
    }
}

fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn complex_value(s: &str) -> Result<Value> {
    let c = parse_complex(s)?;
    Ok(Value::Array(vec![number(c.re), number(c.im)]))
}

fn list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    s.split(';').filter(|t| !t.trim().is_empty()).map(f).collect()
}

fn pair(s: &str, f: impl Fn(&str) -> Result<Value>) -> Result<Value> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::spec("value", format!("expected a:b, got {s:?}")))?;
    Ok(Value::Array(vec![f(a)?, f(b)?]))
}

/// `family(key=value,…)`; lists use `;`, pairs use `:`.
pub fn parse_inline(text: &str) -> Result<StateSpec> {
    let text = text.trim();
    let (name, args) = match text.split_once('(') {
        Some((n, rest)) => {
            let inner = rest
                .trim_end()
                .strip_suffix(')')
                .ok_or_else(|| Error::spec("spec", "missing closing parenthesis"))?;
            (n.trim(), inner)
        }
        None => (text, ""),
    };
    let family = canonical_family(name).ok_or_else(|| Error::spec("family", format!("unknown family {name:?}")))?;
    let mut obj = Map::new();
    let mixed = matches!(family, "thermal" | "phase_randomized");
    obj.insert((if mixed { "source" } else { "family" }).into(), Value::String(family.into()));
    for part in args.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::spec("spec", format!("expected key=value, got {part:?}")))?;
        let key = canonical_key(k.trim());
        let v = v.trim();
        let field = |e: Error| match e {
            Error::SpecInvalid { reason, .. } => Error::spec(key, reason),
            e => e,
        };
        let value = match key {
            "theta" | "phi" | "beta" => number(parse_real(v).map_err(field)?),
            "p" | "mu" | "t" => number(parse_real(v).map_err(field)?),
            "n" => Value::from(v.parse::<u64>().map_err(|_| Error::spec(key, format!("{v:?} is not a count")))?),
            "sign" => Value::String(v.into()),
            "zeta" | "kappa" | "gamma" | "alpha" => complex_value(v).map_err(field)?,
            "alpha_plus" | "alpha_minus" => Value::Array(list(v, complex_value).map_err(field)?),
            "photons" => Value::Array(
                list(v, |t| t.trim().parse::<u64>().map(Value::from).map_err(|_| Error::spec(key, format!("{t:?} is not a count"))))?,
            ),
            "occupations" => Value::Array(list(v, |t| {
                pair(t, |x| x.trim().parse::<u64>().map(Value::from).map_err(|_| Error::spec(key, format!("{x:?} is not a count"))))
            })?),
            "mode_angles" => Value::Array(list(v, |t| pair(t, |x| parse_real(x).map(number))).map_err(field)?),
            other => return Err(Error::spec(other, "unknown parameter")),
        };
        if obj.insert(key.to_string(), value).is_some() {
            return Err(Error::spec(key, "given twice"));
        }
    }
    from_value(Value::Object(obj))
}

/// Description of the canonical basis ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub m: usize,
    pub n_max: usize,
    pub dim: usize,
    pub ordering: String,
}

pub const ORDERING: &str = "occupations (n+_1, n-_1, ..., n+_m, n-_m), ascending total photon number, then reverse lexicographic within each total";

impl BasisDescriptor {
    pub fn of(basis: &FockBasis) -> BasisDescriptor {
        BasisDescriptor { m: basis.m(), n_max: basis.n_max(), dim: basis.dim(), ordering: ORDERING.into() }
    }
}

/// A state written to disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateArtifact {
    pub schema_version: u32,
    pub basis: BasisDescriptor,
    pub spec: Option<StateSpec>,
    /// "pure" or "mixed".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<Vec<[f64; 2]>>>,
    pub leaked_tail: f64,
    /// 1 − fidelity between the series and rotation constructions.
    pub series_check: Option<f64>,
}

impl StateArtifact {
    pub fn new(state: &QuantumState, spec: Option<StateSpec>, series_check: Option<f64>) -> StateArtifact {
        let pair = |z: &C64| [z.re, z.im];
        let (kind, amplitudes, density) = match state.amplitudes() {
            Some(v) => ("pure", Some(v.iter().map(pair).collect()), None),
            None => {
                let rho = state.density();
                ("mixed", None, Some(rho.row_iter().map(|r| r.iter().map(pair).collect()).collect()))
            }
        };
        StateArtifact {
            schema_version: SCHEMA_VERSION,
            basis: BasisDescriptor::of(state.basis()),
            spec,
            kind: kind.into(),
            amplitudes,
            density,
            leaked_tail: state.tail(),
            series_check,
        }
    }

    /// Builds `spec` on `ctx` and records the series comparison when one exists.
    pub fn from_spec(spec: &StateSpec, ctx: &GcsContext) -> Result<StateArtifact> {
        let state = spec.build(ctx)?;
        let series = match spec.gcs() {
            Some(g) => series_deficit(g, ctx)?,
            None => None,
        };
        Ok(StateArtifact::new(&state, Some(spec.clone()), series))
    }

    /// The stored state on a fresh basis of the recorded shape.
    pub fn to_state(&self) -> Result<QuantumState> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::spec("schema_version", format!("unsupported version {}", self.schema_version)));
        }
        let basis: Arc<FockBasis> = FockBasis::build(self.basis.m, self.basis.n_max)?;
        if basis.dim() != self.basis.dim {
            return Err(Error::spec("basis.dim", format!("{} does not match m, n_max (dim {})", self.basis.dim, basis.dim())));
        }
        let c = |p: &[f64; 2]| C64::new(p[0], p[1]);
        let state = match (self.kind.as_str(), &self.amplitudes, &self.density) {
            ("pure", Some(a), _) => {
                if a.len() != basis.dim() {
                    return Err(Error::spec("amplitudes", format!("{} entries, expected {}", a.len(), basis.dim())));
                }
                QuantumState::pure_normalized(&basis, DVector::from_iterator(a.len(), a.iter().map(c)), self.leaked_tail)?
            }
            ("mixed", _, Some(rows)) => {
                let d = basis.dim();
                if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::spec("density", format!("expected a {d}×{d} matrix")));
                }
                let rho = DMatrix::from_fn(d, d, |i, j| c(&rows[i][j]));
                QuantumState::mixed_with_tail(&basis, rho, self.leaked_tail)?
            }
            (k, _, _) => return Err(Error::spec("kind", format!("{k:?} without matching data"))),
        };
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcs::Family;
    use crate::halfint::HalfInt;

    #[test]
    fn literals() {
        assert_eq!(parse_real("1/2").unwrap(), 0.5);
        assert!((parse_real("pi/2").unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-16);
        assert!((parse_real("-3pi/4").unwrap() + 0.75 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(parse_real("ln2").unwrap(), std::f64::consts::LN_2);
        assert_eq!(parse_real("2*pi").unwrap(), std::f64::consts::TAU);
        assert_eq!(parse_complex("0.3+0.2i").unwrap(), C64::new(0.3, 0.2));
        assert_eq!(parse_complex("-1e-3-2i").unwrap(), C64::new(-1e-3, -2.0));
        assert_eq!(parse_complex("i").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(parse_complex("-0.5i").unwrap(), C64::new(0.0, -0.5));
        assert_eq!(parse_complex("1.5").unwrap(), C64::new(1.5, 0.0));
        assert!(parse_real("abc").is_err());
    }

    #[test]
    fn inline_specs() {
        let s = StateSpec::parse("semi(p=1/2,μ=1/2)").unwrap();
        let g = s.gcs().unwrap();
        assert_eq!(g.family, Family::SemiCoherent);
        assert_eq!(g.p, Some(HalfInt::HALF));
        let s = StateSpec::parse("glauber(α+=1;0.5i, a-=0;0)").unwrap();
        assert_eq!(s.gcs().unwrap().alpha_plus.as_ref().unwrap()[1].0, C64::new(0.0, 0.5));
        assert_eq!(StateSpec::parse("thermal(β=ln2)").unwrap(), StateSpec::Mixed(MixedSpec::Thermal { beta: std::f64::consts::LN_2 }));
        let s = StateSpec::parse("fock(occupations=2:0;0:1,theta=pi/3)").unwrap();
        assert_eq!(s.gcs().unwrap().occupations, Some(vec![[2, 0], [0, 1]]));
        let e = StateSpec::parse("semi(p=1/2,q=1)").unwrap_err();
        assert!(matches!(e, Error::SpecInvalid { ref field, .. } if field == "q"), "{e:?}");
        let e = StateSpec::parse("semi(p=x)").unwrap_err();
        assert!(matches!(e, Error::SpecInvalid { ref field, .. } if field == "p"), "{e:?}");
        assert!(StateSpec::parse("blob(p=1)").is_err());
        let j = StateSpec::parse(r#"{"source":"phase_randomized","alpha":[0.7,0]}"#).unwrap();
        assert!(matches!(j, StateSpec::Mixed(MixedSpec::PhaseRandomized { .. })));
        assert!(StateSpec::parse(r#"{"family":"glauber","bogus":1}"#).is_err());
    }

    #[test]
    fn json_formatting_is_fixed_width() {
        let s = to_json(&serde_json::json!({"a": 0.1, "b": [1.0, -2.5e-7], "c": 3}));
        assert_eq!(s, "{\"a\":1.0000000000000001e-1,\"b\":[1.0000000000000000e0,-2.4999999999999999e-7],\"c\":3}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn artifact_round_trip() {
        let b = FockBasis::build(1, 12).unwrap();
        let cx = GcsContext::new(&b).unwrap();
        for text in ["max(p=3/2,theta=0.4,phi=2)", "glauber(α+=0.5+0.1i,α-=0.2,theta=1,phi=1)", "thermal(beta=4)"] {
            let spec = StateSpec::parse(text).unwrap();
            let art = StateArtifact::from_spec(&spec, &cx).unwrap();
            let json = to_json(&art);
            let back: StateArtifact = serde_json::from_str(&json).unwrap();
            assert_eq!(back.spec.as_ref(), Some(&spec));
            let s0 = spec.build(&cx).unwrap();
            let s1 = back.to_state().unwrap();
            if s0.is_pure() {
                assert!((1.0 - s0.fidelity(&s1).unwrap()).abs() < 1e-15, "{text}");
            } else {
                let d = (s0.density() - s1.density()).iter().map(|z| z.norm()).fold(0.0, f64::max);
                assert!(d < 1e-15, "{text}: {d:e}");
            }
        }
        let art = StateArtifact::from_spec(&StateSpec::parse("semi(p=1,mu=0,theta=1,phi=1)").unwrap(), &cx).unwrap();
        assert!(art.series_check.unwrap() < 1e-12);
    }
}
