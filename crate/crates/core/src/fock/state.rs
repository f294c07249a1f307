use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::basis::FockBasis;
use super::operator::{Operator, Repr};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub enum StateKind {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

/// A normalized pure state or density operator on a Fock basis.
///
/// `tail` records the probability that was discarded by the photon cutoff
/// before renormalization.
#[derive(Debug, Clone)]
pub struct QuantumState {
    basis: Arc<FockBasis>,
    kind: StateKind,
    tail: f64,
}

impl QuantumState {
    /// Wraps an already normalized vector.
    pub fn pure(basis: &Arc<FockBasis>, amps: DVector<C64>) -> Result<QuantumState> {
        check_len(basis, amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::StateInvalid(format!("vector norm is {norm}, expected 1")));
        }
        Ok(QuantumState { basis: basis.clone(), kind: StateKind::Pure(amps), tail: 0.0 })
    }

    /// Normalizes `amps`; the missing norm is recorded as tail.
    pub fn pure_normalized(basis: &Arc<FockBasis>, amps: DVector<C64>, tail: f64) -> Result<QuantumState> {
        check_len(basis, amps.len())?;
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::StateInvalid("zero or non-finite vector".into()));
        }
        Ok(QuantumState { basis: basis.clone(), kind: StateKind::Pure(amps / C64::new(norm, 0.0)), tail })
    }

    /// Validates trace, hermiticity and positivity of a density matrix.
    pub fn mixed(basis: &Arc<FockBasis>, rho: DMatrix<C64>) -> Result<QuantumState> {
        Self::mixed_with_tail(basis, rho, 0.0)
    }

    pub fn mixed_with_tail(basis: &Arc<FockBasis>, rho: DMatrix<C64>, tail: f64) -> Result<QuantumState> {
        check_len(basis, rho.nrows())?;
        check_len(basis, rho.ncols())?;
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::StateInvalid(format!("trace is {tr}, expected 1")));
        }
        let op = Operator::from_dense(basis, rho.clone())?;
        if op.hermitian_deviation() > 1e-12 {
            return Err(Error::StateInvalid("density matrix is not hermitian".into()));
        }
        let lowest = lowest_eigenvalue(&op);
        if lowest < -1e-10 {
            return Err(Error::NegativeEigenvalue { value: lowest });
        }
        Ok(QuantumState { basis: basis.clone(), kind: StateKind::Mixed(rho), tail })
    }

    pub(crate) fn mixed_unchecked(basis: &Arc<FockBasis>, rho: DMatrix<C64>, tail: f64) -> QuantumState {
        QuantumState { basis: basis.clone(), kind: StateKind::Mixed(rho), tail }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn kind(&self) -> &StateKind {
        &self.kind
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.kind, StateKind::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&DVector<C64>> {
        match &self.kind {
            StateKind::Pure(v) => Some(v),
            StateKind::Mixed(_) => None,
        }
    }

    pub fn density(&self) -> DMatrix<C64> {
        match &self.kind {
            StateKind::Pure(v) => v * v.adjoint(),
            StateKind::Mixed(r) => r.clone(),
        }
    }

    fn same_basis(&self, basis: &Arc<FockBasis>) -> Result<()> {
        if Arc::ptr_eq(&self.basis, basis) || *self.basis == **basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    /// ⟨ψ|A|ψ⟩ or Tr(ρA).
    pub fn expectation(&self, a: &Operator) -> Result<C64> {
        self.same_basis(a.basis())?;
        Ok(match &self.kind {
            StateKind::Pure(v) => v.dotc(&a.apply(v)),
            StateKind::Mixed(rho) => match a.repr() {
                Repr::Sparse(_) => a.entries().into_iter().map(|(i, j, x)| x * rho[(j, i)]).sum(),
                _ => {
                    let d = a.to_dense();
                    let mut s = C64::new(0.0, 0.0);
                    for i in 0..rho.nrows() {
                        for j in 0..rho.ncols() {
                            s += rho[(i, j)] * d[(j, i)];
                        }
                    }
                    s
                }
            },
        })
    }

    /// Real part of the expectation, for hermitian observables.
    pub fn mean(&self, a: &Operator) -> Result<f64> {
        Ok(self.expectation(a)?.re)
    }

    /// Fidelity |⟨ψ|φ⟩|² for pure states, Tr(ρσ) when one side is pure.
    pub fn fidelity(&self, other: &QuantumState) -> Result<f64> {
        self.same_basis(&other.basis)?;
        Ok(match (&self.kind, &other.kind) {
            (StateKind::Pure(a), StateKind::Pure(b)) => a.dotc(b).norm_sqr(),
            (StateKind::Pure(a), StateKind::Mixed(r)) | (StateKind::Mixed(r), StateKind::Pure(a)) => {
                a.dotc(&(r * a)).re
            }
            (StateKind::Mixed(r), StateKind::Mixed(s)) => (r * s).trace().re,
        })
    }

    /// ⟨self|other⟩ for pure states.
    pub fn inner(&self, other: &QuantumState) -> Result<C64> {
        self.same_basis(&other.basis)?;
        match (&self.kind, &other.kind) {
            (StateKind::Pure(a), StateKind::Pure(b)) => Ok(a.dotc(b)),
            _ => Err(Error::StateInvalid("inner product needs two pure states".into())),
        }
    }

    /// Applies a unitary: U|ψ⟩ or UρU†.
    pub fn transform(&self, u: &Operator) -> Result<QuantumState> {
        self.same_basis(u.basis())?;
        let kind = match &self.kind {
            StateKind::Pure(v) => StateKind::Pure(u.apply(v)),
            StateKind::Mixed(r) => {
                let ud = u.to_dense();
                StateKind::Mixed(&ud * r * ud.adjoint())
            }
        };
        Ok(QuantumState { basis: self.basis.clone(), kind, tail: self.tail })
    }
}

fn check_len(basis: &FockBasis, n: usize) -> Result<()> {
    if n != basis.dim() {
        return Err(Error::StateInvalid(format!("length {n} does not match basis dimension {}", basis.dim())));
    }
    Ok(())
}

fn lowest_eigenvalue(op: &Operator) -> f64 {
    if op.is_block_diagonal() {
        (0..=op.basis().n_max())
            .map(|n| op.block(n))
            .filter(|b| b.nrows() > 0)
            .map(|b| crate::fock::expm::hermitian_eigen(&b).0.iter().copied().fold(f64::INFINITY, f64::min))
            .fold(f64::INFINITY, f64::min)
    } else {
        crate::fock::expm::hermitian_eigen(&op.to_dense()).0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}
