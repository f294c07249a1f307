//! Python bindings: bases, states built from specs, squeezing reports,
//! Q-function grids, geometric phases and the verification suite.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use quasispin::gcs::{GcsContext, Orbit};
use quasispin::geomphase::{geometric_phase_closed, geometric_phase_orbit, solid_angle, SpherePath};
use quasispin::io::{to_json, StateArtifact, StateSpec};
use quasispin::polarization::build_polarization_ops;
use quasispin::quasiprob::{q_reduced, GridSpec};
use quasispin::squeezing::squeeze_report;
use quasispin::verify::{run_verify, VerifyConfig};
use quasispin::{Error, FockBasis, HalfInt, QuantumState, Tolerances};
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::SpecInvalid { .. }
        | Error::ParamInvalid(_)
        | Error::LabelInvalid(_)
        | Error::PathInvalid(_)
        | Error::BadModeIndex { .. }
        | Error::CutoffExceeded { .. }
        | Error::DimensionOverflow { .. }
        | Error::StateInvalid(_)
        | Error::BasisMismatch => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (to_json(value),))?.unbind())
}

fn context(basis: &Arc<FockBasis>) -> PyResult<GcsContext> {
    GcsContext::new(basis).map_err(err)
}

/// Truncated Fock basis of `m` polarization mode pairs with at most `n_max` photons.
#[pyclass(name = "Basis", frozen, module = "quasispin")]
struct PyBasis {
    inner: Arc<FockBasis>,
}

#[pymethods]
impl PyBasis {
    #[new]
    fn new(m: usize, n_max: usize) -> PyResult<Self> {
        Ok(PyBasis { inner: FockBasis::build(m, n_max).map_err(err)? })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Occupations (n+_1, n-_1, ...) of basis vector `i`.
    fn occupation(&self, i: usize) -> PyResult<Vec<u16>> {
        if i >= self.inner.dim() {
            return Err(PyValueError::new_err(format!("index {i} out of range")));
        }
        Ok(self.inner.occupation(i).to_vec())
    }

    fn index_of(&self, occupation: Vec<u16>) -> Option<usize> {
        self.inner.index_of(&occupation)
    }

    fn __len__(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!("Basis(m={}, n_max={}, dim={})", self.inner.m(), self.inner.n_max(), self.inner.dim())
    }
}

/// Pure or mixed state on a truncated basis.
#[pyclass(name = "State", frozen, module = "quasispin")]
struct PyState {
    inner: QuantumState,
    spec: Option<StateSpec>,
}

#[pymethods]
impl PyState {
    /// Builds a state from an inline (`semi(p=1/2,mu=1/2)`) or JSON spec.
    #[staticmethod]
    #[pyo3(signature = (spec, m = 1, n_max = 8))]
    fn from_spec(spec: &str, m: usize, n_max: usize) -> PyResult<Self> {
        let spec = StateSpec::parse(spec).map_err(err)?;
        spec.validate(m).map_err(err)?;
        let basis = FockBasis::build(m, n_max).map_err(err)?;
        let inner = spec.build(&context(&basis)?).map_err(err)?;
        Ok(PyState { inner, spec: Some(spec) })
    }

    /// Normalized pure state from raw amplitudes.
    #[staticmethod]
    fn from_amplitudes(basis: &PyBasis, amplitudes: Vec<C64>) -> PyResult<Self> {
        if amplitudes.len() != basis.inner.dim() {
            return Err(PyValueError::new_err(format!("expected {} amplitudes", basis.inner.dim())));
        }
        let v = nalgebra::DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(PyValueError::new_err("zero vector"));
        }
        let inner = QuantumState::pure(&basis.inner, v / C64::new(norm, 0.0)).map_err(err)?;
        Ok(PyState { inner, spec: None })
    }

    /// Reads a state artifact written by `to_json` or the CLI.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let art: StateArtifact = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = art.to_state().map_err(err)?;
        Ok(PyState { inner, spec: art.spec })
    }

    fn to_json(&self) -> String {
        to_json(&StateArtifact::new(&self.inner, self.spec.clone(), None))
    }

    #[getter]
    fn basis(&self) -> PyBasis {
        PyBasis { inner: self.inner.basis().clone() }
    }

    #[getter]
    fn is_pure(&self) -> bool {
        self.inner.is_pure()
    }

    /// Norm that fell outside the cutoff when the state was built.
    #[getter]
    fn tail(&self) -> f64 {
        self.inner.tail()
    }

    fn amplitudes(&self) -> Option<Vec<C64>> {
        self.inner.amplitudes().map(|v| v.iter().copied().collect())
    }

    fn density(&self) -> Vec<Vec<C64>> {
        let rho = self.inner.density();
        rho.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn fidelity(&self, other: &PyState) -> PyResult<f64> {
        self.inner.fidelity(&other.inner).map_err(err)
    }

    /// (<P0>, <P1>, <P2>, <N>).
    fn polarization_means(&self) -> PyResult<(f64, f64, f64, f64)> {
        let ops = build_polarization_ops(self.inner.basis()).map_err(err)?;
        let mean = |o| self.inner.mean(o).map_err(err);
        Ok((mean(ops.p0())?, mean(ops.p1())?, mean(ops.p2())?, mean(ops.n())?))
    }

    /// Variances, uncertainty relations and squeezing classification as a dict.
    fn squeeze_report(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        let ops = build_polarization_ops(self.inner.basis()).map_err(err)?;
        let report = squeeze_report(&self.inner, &ops, &Tolerances::default()).map_err(err)?;
        to_py(py, &report)
    }

    /// Reduced Q-function of sector `p` on a Gauss-Legendre x uniform grid.
    #[pyo3(signature = (p, theta_nodes = 64, phi_nodes = 128))]
    fn q_function<'py>(&self, py: Python<'py>, p: &str, theta_nodes: usize, phi_nodes: usize) -> PyResult<Bound<'py, PyDict>> {
        let p: HalfInt = p.parse().map_err(err)?;
        let grid = GridSpec::new(theta_nodes, phi_nodes).map_err(err)?;
        let ctx = context(self.inner.basis())?;
        let q = q_reduced(&self.inner, p, &ctx, grid).map_err(err)?;
        let values: Vec<Vec<f64>> = q.values.row_iter().map(|r| r.iter().copied().collect()).collect();
        let d = PyDict::new(py);
        d.set_item("theta", &q.theta)?;
        d.set_item("phi", &q.phi)?;
        d.set_item("theta_weights", &q.theta_weights)?;
        d.set_item("values", values)?;
        d.set_item("integral", q.integral())?;
        d.set_item("sector_weight", q.sector_weight())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let b = self.inner.basis();
        let kind = if self.inner.is_pure() { "pure" } else { "mixed" };
        format!("State({kind}, m={}, n_max={})", b.m(), b.n_max())
    }
}

/// Geometric phase of a coherent-state family around a loop.
///
/// `loop_` is a descriptor such as `circle:theta=1.2` or `lune:phi1=0,phi2=1`.
#[pyfunction]
#[pyo3(signature = (spec, loop_, m = 1, n_max = 8, k_cap = None))]
fn geometric_phase(py: Python<'_>, spec: &str, loop_: &str, m: usize, n_max: usize, k_cap: Option<usize>) -> PyResult<Py<PyAny>> {
    let spec = StateSpec::parse(spec).map_err(err)?;
    let g = spec.gcs().ok_or_else(|| PyValueError::new_err("geometric_phase needs a coherent-state spec"))?;
    g.validate(m).map_err(err)?;
    let path = SpherePath::from_descriptor(loop_).map_err(err)?;
    let mut tol = Tolerances::default();
    if let Some(k) = k_cap {
        tol.k_cap = k;
    }
    let basis = FockBasis::build(m, n_max).map_err(err)?;
    let ctx = context(&basis)?;
    let orbit = Orbit::of_spec(g, &ctx).map_err(err)?;
    let r = geometric_phase_orbit(&orbit, &path, &tol);
    let closed = match geometric_phase_closed(g, &path) {
        Ok(c) => Some(c),
        Err(Error::FamilyUnsupported(_)) => None,
        Err(e) => return Err(err(e)),
    };
    to_py(
        py,
        &serde_json::json!({
            "gamma_principal": r.gamma_principal,
            "winding": r.winding,
            "gamma_total": r.gamma_total,
            "K_final": r.k_final,
            "converged": r.converged,
            "last_change": r.last_change,
            "closed": closed,
            "solid_angle": solid_angle(&path),
        }),
    )
}

/// Runs the self-verification suite and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (m = 1, n_max = 8, seed = 1))]
fn verify(py: Python<'_>, m: usize, n_max: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let report = py
        .detach(|| run_verify(&VerifyConfig { m, n_max, seed, tol: Tolerances::default() }))
        .map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
#[pyo3(name = "quasispin")]
fn quasispin_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBasis>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(geometric_phase, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
