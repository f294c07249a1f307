use std::sync::Arc;

use num_complex::Complex64 as C64;

use super::basis::{FockBasis, Pol};
use super::operator::Operator;
use crate::error::Result;

/// a⁺_pol(j) with mode index `j` counted from 0.
///
/// Transitions that would leave the cutoff are dropped.
pub fn creation_op(basis: &Arc<FockBasis>, j: usize, pol: Pol) -> Result<Operator> {
    let slot = basis.slot(j, pol)?;
    let mut t = Vec::new();
    let mut buf: Vec<u16> = Vec::with_capacity(basis.slots());
    for (i, occ) in basis.states().enumerate() {
        if basis.total(i) == basis.n_max() {
            continue;
        }
        buf.clear();
        buf.extend_from_slice(occ);
        let n = buf[slot];
        buf[slot] += 1;
        let k = basis.index_of(&buf).expect("raised state within cutoff");
        t.push((k, i, C64::new(((n + 1) as f64).sqrt(), 0.0)));
    }
    Ok(Operator::sparse_from_triplets(basis, t))
}

/// a_pol(j), the adjoint of [`creation_op`].
pub fn annihilation_op(basis: &Arc<FockBasis>, j: usize, pol: Pol) -> Result<Operator> {
    let slot = basis.slot(j, pol)?;
    let mut t = Vec::new();
    let mut buf: Vec<u16> = Vec::with_capacity(basis.slots());
    for (i, occ) in basis.states().enumerate() {
        let n = occ[slot];
        if n == 0 {
            continue;
        }
        buf.clear();
        buf.extend_from_slice(occ);
        buf[slot] -= 1;
        let k = basis.index_of(&buf).expect("lowered state within cutoff");
        t.push((k, i, C64::new((n as f64).sqrt(), 0.0)));
    }
    Ok(Operator::sparse_from_triplets(basis, t))
}

/// n_pol(j) = a⁺_pol(j) a_pol(j), built diagonally.
pub fn number_op(basis: &Arc<FockBasis>, j: usize, pol: Pol) -> Result<Operator> {
    let slot = basis.slot(j, pol)?;
    let d: Vec<C64> = basis.states().map(|o| C64::new(o[slot] as f64, 0.0)).collect();
    Ok(Operator::diagonal(basis, &d))
}

/// Total photon number N.
pub fn total_number_op(basis: &Arc<FockBasis>) -> Operator {
    let d: Vec<C64> = (0..basis.dim()).map(|i| C64::new(basis.total(i) as f64, 0.0)).collect();
    Operator::diagonal(basis, &d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use nalgebra::DVector;

    #[test]
    fn ladder_factors() {
        let b = FockBasis::build(2, 4).unwrap();
        let ap = creation_op(&b, 0, Pol::Plus).unwrap();
        let mut vac = DVector::zeros(b.dim());
        vac[0] = C64::new(1.0, 0.0);
        let one = ap.apply(&vac);
        let k1 = b.index_of(&[1, 0, 0, 0]).unwrap();
        assert_eq!(one[k1], C64::new(1.0, 0.0));
        let two = ap.apply(&one);
        let k2 = b.index_of(&[2, 0, 0, 0]).unwrap();
        assert!((two[k2].re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn adjoint_consistency() {
        let b = FockBasis::build(2, 3).unwrap();
        for j in 0..2 {
            for pol in [Pol::Plus, Pol::Minus] {
                let c = creation_op(&b, j, pol).unwrap();
                let a = annihilation_op(&b, j, pol).unwrap();
                assert_eq!(c.adjoint().max_diff(&a).unwrap(), 0.0);
                let n = number_op(&b, j, pol).unwrap();
                assert!((&c * &a).max_diff(&n).unwrap() < 1e-14);
            }
        }
    }

    #[test]
    fn canonical_commutator_below_cutoff() {
        let b = FockBasis::build(1, 5).unwrap();
        let c = creation_op(&b, 0, Pol::Plus).unwrap();
        let a = annihilation_op(&b, 0, Pol::Plus).unwrap();
        let comm = Operator::commutator(&a, &c).unwrap();
        for i in 0..b.dim() {
            for k in 0..b.dim() {
                if b.total(i) < 5 && b.total(k) < 5 {
                    let want = if i == k { 1.0 } else { 0.0 };
                    assert!((comm.get(i, k) - C64::new(want, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn bad_mode() {
        let b = FockBasis::build(1, 2).unwrap();
        assert_eq!(creation_op(&b, 1, Pol::Plus).unwrap_err(), Error::BadModeIndex { j: 1, m: 1 });
    }
}
