use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::basis::FockBasis;
use crate::error::{Error, Result};

/// Hermiticity tag assigned when an operator is constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hermiticity {
    Hermitian,
    AntiHermitian,
    General,
}

#[derive(Clone, Debug)]
pub(crate) struct Csr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    fn from_triplets(dim: usize, mut t: Vec<(usize, usize, C64)>) -> Csr {
        t.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut c = Csr { dim, row_ptr, cols, vals };
        c.prune();
        c
    }

    fn prune(&mut self) {
        if self.vals.iter().all(|v| *v != C64::new(0.0, 0.0)) {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.vals[k] != C64::new(0.0, 0.0) {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        *self = Csr { dim: self.dim, row_ptr, cols, vals };
    }

    fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.cols[k], self.vals[k]))
        })
    }

    fn get(&self, i: usize, j: usize) -> C64 {
        let r = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match r.binary_search(&j) {
            Ok(k) => self.vals[self.row_ptr[i] + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn adjoint(&self) -> Csr {
        Csr::from_triplets(self.dim, self.iter().map(|(i, j, v)| (j, i, v.conj())).collect())
    }

    fn matvec(&self, v: &[C64], out: &mut [C64]) {
        for i in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * v[self.cols[k]];
            }
            out[i] = acc;
        }
    }

    fn matmul(&self, other: &Csr) -> Csr {
        let dim = self.dim;
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let mut touched = vec![false; dim];
        let mut list = Vec::new();
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.vals[k];
                let r = self.cols[k];
                for l in other.row_ptr[r]..other.row_ptr[r + 1] {
                    let j = other.cols[l];
                    if !touched[j] {
                        touched[j] = true;
                        list.push(j);
                    }
                    acc[j] += a * other.vals[l];
                }
            }
            list.sort_unstable();
            for &j in &list {
                if acc[j] != C64::new(0.0, 0.0) {
                    cols.push(j);
                    vals.push(acc[j]);
                }
                acc[j] = C64::new(0.0, 0.0);
                touched[j] = false;
            }
            list.clear();
            row_ptr[i + 1] = cols.len();
        }
        Csr { dim, row_ptr, cols, vals }
    }

    fn combine(&self, other: &Csr, alpha: C64, beta: C64) -> Csr {
        let t = self
            .iter()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(other.iter().map(|(i, j, v)| (i, j, beta * v)))
            .collect();
        Csr::from_triplets(self.dim, t)
    }

    fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.iter() {
            m[(i, j)] = v;
        }
        m
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Repr {
    Sparse(Csr),
    Blocks(Vec<DMatrix<C64>>),
    Dense(DMatrix<C64>),
}

/// A linear operator on a truncated Fock space.
///
/// Storage is sparse for ladder-operator expressions, block-diagonal for
/// functions of number-conserving operators and dense otherwise.
#[derive(Clone)]
pub struct Operator {
    basis: Arc<FockBasis>,
    repr: Repr,
    flag: Hermiticity,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Sparse(c) => format!("sparse, nnz={}", c.vals.len()),
            Repr::Blocks(_) => "block-diagonal".to_string(),
            Repr::Dense(_) => "dense".to_string(),
        };
        write!(f, "Operator(dim={}, {kind}, {:?})", self.dim(), self.flag)
    }
}

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

impl Operator {
    fn new(basis: Arc<FockBasis>, repr: Repr) -> Operator {
        let mut op = Operator { basis, repr, flag: Hermiticity::General };
        op.flag = op.classify();
        op
    }

    pub(crate) fn sparse_from_triplets(basis: &Arc<FockBasis>, t: Vec<(usize, usize, C64)>) -> Operator {
        let dim = basis.dim();
        Operator::new(basis.clone(), Repr::Sparse(Csr::from_triplets(dim, t)))
    }

    /// Builds an operator from (row, column, value) entries; duplicates are summed.
    pub fn from_triplets(basis: &Arc<FockBasis>, t: Vec<(usize, usize, C64)>) -> Result<Operator> {
        let dim = basis.dim();
        if let Some(&(i, j, _)) = t.iter().find(|(i, j, _)| *i >= dim || *j >= dim) {
            return Err(Error::ParamInvalid(format!("entry ({i},{j}) outside dimension {dim}")));
        }
        Ok(Operator::sparse_from_triplets(basis, t))
    }

    pub fn from_dense(basis: &Arc<FockBasis>, m: DMatrix<C64>) -> Result<Operator> {
        if m.nrows() != basis.dim() || m.ncols() != basis.dim() {
            return Err(Error::ParamInvalid(format!(
                "matrix is {}x{}, basis dimension is {}",
                m.nrows(),
                m.ncols(),
                basis.dim()
            )));
        }
        Ok(Operator::new(basis.clone(), Repr::Dense(m)))
    }

    /// Builds a number-conserving operator from its blocks, one per total photon number.
    pub fn from_blocks(basis: &Arc<FockBasis>, blocks: Vec<DMatrix<C64>>) -> Result<Operator> {
        let sizes: Vec<usize> = basis.block_sizes().collect();
        if blocks.len() != sizes.len()
            || blocks.iter().zip(&sizes).any(|(b, &s)| b.nrows() != s || b.ncols() != s)
        {
            return Err(Error::ParamInvalid("block shapes do not match the basis".into()));
        }
        Ok(Operator::new(basis.clone(), Repr::Blocks(blocks)))
    }

    pub fn identity(basis: &Arc<FockBasis>) -> Operator {
        Operator::diagonal(basis, &vec![C64::new(1.0, 0.0); basis.dim()])
    }

    pub fn zero(basis: &Arc<FockBasis>) -> Operator {
        Operator::sparse_from_triplets(basis, Vec::new())
    }

    pub fn diagonal(basis: &Arc<FockBasis>, d: &[C64]) -> Operator {
        assert_eq!(d.len(), basis.dim(), "diagonal length must equal the dimension");
        Operator::sparse_from_triplets(basis, d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect())
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn flag(&self) -> Hermiticity {
        self.flag
    }

    pub fn is_hermitian(&self) -> bool {
        self.flag == Hermiticity::Hermitian
    }

    pub(crate) fn repr(&self) -> &Repr {
        &self.repr
    }

    fn classify(&self) -> Hermiticity {
        let scale = self.max_abs();
        if scale == 0.0 {
            return Hermiticity::Hermitian;
        }
        let tol = 1e-12 * scale;
        if self.hermitian_deviation() <= tol {
            Hermiticity::Hermitian
        } else if self.anti_hermitian_deviation() <= tol {
            Hermiticity::AntiHermitian
        } else {
            Hermiticity::General
        }
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        match &self.repr {
            Repr::Sparse(c) => c.get(i, j),
            Repr::Dense(m) => m[(i, j)],
            Repr::Blocks(b) => {
                let (ni, nj) = (self.basis.total(i), self.basis.total(j));
                if ni != nj {
                    return zero();
                }
                let off = self.basis.block(ni).start;
                b[ni][(i - off, j - off)]
            }
        }
    }

    /// Nonzero entries as (row, column, value).
    pub fn entries(&self) -> Vec<(usize, usize, C64)> {
        match &self.repr {
            Repr::Sparse(c) => c.iter().collect(),
            Repr::Dense(m) => {
                let mut v = Vec::new();
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        if m[(i, j)] != zero() {
                            v.push((i, j, m[(i, j)]));
                        }
                    }
                }
                v
            }
            Repr::Blocks(b) => {
                let mut v = Vec::new();
                for (n, blk) in b.iter().enumerate() {
                    let off = self.basis.block(n).start;
                    for j in 0..blk.ncols() {
                        for i in 0..blk.nrows() {
                            if blk[(i, j)] != zero() {
                                v.push((off + i, off + j, blk[(i, j)]));
                            }
                        }
                    }
                }
                v
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Sparse(c) => c.to_dense(),
            Repr::Dense(m) => m.clone(),
            Repr::Blocks(b) => {
                let mut m = DMatrix::zeros(self.dim(), self.dim());
                for (n, blk) in b.iter().enumerate() {
                    let r = self.basis.block(n);
                    m.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(blk);
                }
                m
            }
        }
    }

    /// True when the operator maps each total-photon-number block into itself.
    pub fn is_block_diagonal(&self) -> bool {
        match &self.repr {
            Repr::Blocks(_) => true,
            Repr::Sparse(c) => c.iter().all(|(i, j, _)| self.basis.total(i) == self.basis.total(j)),
            Repr::Dense(m) => {
                for j in 0..m.ncols() {
                    let nj = self.basis.total(j);
                    for i in 0..m.nrows() {
                        if self.basis.total(i) != nj && m[(i, j)] != zero() {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }

    /// The diagonal block for total photon number `n`.
    pub fn block(&self, n: usize) -> DMatrix<C64> {
        let r = self.basis.block(n);
        match &self.repr {
            Repr::Blocks(b) => b[n].clone(),
            Repr::Dense(m) => m.view((r.start, r.start), (r.len(), r.len())).into_owned(),
            Repr::Sparse(c) => {
                let mut m = DMatrix::zeros(r.len(), r.len());
                for i in r.clone() {
                    for k in c.row_ptr[i]..c.row_ptr[i + 1] {
                        let j = c.cols[k];
                        if r.contains(&j) {
                            m[(i - r.start, j - r.start)] = c.vals[k];
                        }
                    }
                }
                m
            }
        }
    }

    fn blocks(&self) -> Option<Vec<DMatrix<C64>>> {
        match &self.repr {
            Repr::Blocks(b) => Some(b.clone()),
            _ if self.is_block_diagonal() => {
                Some((0..=self.basis.n_max()).map(|n| self.block(n)).collect())
            }
            _ => None,
        }
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        assert_eq!(v.len(), self.dim(), "vector length must equal the dimension");
        match &self.repr {
            Repr::Sparse(c) => {
                let mut out = DVector::zeros(self.dim());
                c.matvec(v.as_slice(), out.as_mut_slice());
                out
            }
            Repr::Dense(m) => m * v,
            Repr::Blocks(b) => {
                let mut out = DVector::zeros(self.dim());
                for (n, blk) in b.iter().enumerate() {
                    let r = self.basis.block(n);
                    let seg = v.rows(r.start, r.len());
                    if seg.iter().all(|z| *z == zero()) {
                        continue;
                    }
                    out.rows_mut(r.start, r.len()).copy_from(&(blk * seg));
                }
                out
            }
        }
    }

    /// ⟨u|A|v⟩.
    pub fn sandwich(&self, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
        u.dotc(&self.apply(v))
    }

    pub fn adjoint(&self) -> Operator {
        let repr = match &self.repr {
            Repr::Sparse(c) => Repr::Sparse(c.adjoint()),
            Repr::Dense(m) => Repr::Dense(m.adjoint()),
            Repr::Blocks(b) => Repr::Blocks(b.iter().map(|m| m.adjoint()).collect()),
        };
        Operator { basis: self.basis.clone(), repr, flag: self.flag }
    }

    pub fn scale(&self, c: C64) -> Operator {
        let repr = match &self.repr {
            Repr::Sparse(s) => {
                let mut s = s.clone();
                s.vals.iter_mut().for_each(|v| *v *= c);
                s.prune();
                Repr::Sparse(s)
            }
            Repr::Dense(m) => Repr::Dense(m * c),
            Repr::Blocks(b) => Repr::Blocks(b.iter().map(|m| m * c).collect()),
        };
        Operator::new(self.basis.clone(), repr)
    }

    pub fn scale_real(&self, c: f64) -> Operator {
        self.scale(C64::new(c, 0.0))
    }

    fn check_basis(&self, other: &Operator) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    /// α·self + β·other.
    pub fn lin_comb(&self, alpha: C64, other: &Operator, beta: C64) -> Result<Operator> {
        self.check_basis(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(a.combine(b, alpha, beta)),
            _ => match (self.blocks(), other.blocks()) {
                (Some(a), Some(b)) => {
                    Repr::Blocks(a.iter().zip(&b).map(|(x, y)| x * alpha + y * beta).collect())
                }
                _ => Repr::Dense(self.to_dense() * alpha + other.to_dense() * beta),
            },
        };
        Ok(Operator::new(self.basis.clone(), repr))
    }

    pub fn try_add(&self, other: &Operator) -> Result<Operator> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(1.0, 0.0))
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Operator> {
        self.lin_comb(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    pub fn try_mul(&self, other: &Operator) -> Result<Operator> {
        self.check_basis(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(a.matmul(b)),
            _ => match (self.blocks(), other.blocks()) {
                (Some(a), Some(b)) => Repr::Blocks(a.iter().zip(&b).map(|(x, y)| x * y).collect()),
                _ => Repr::Dense(self.to_dense() * other.to_dense()),
            },
        };
        Ok(Operator::new(self.basis.clone(), repr))
    }

    /// [A, B] = AB − BA.
    pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
        a.try_mul(b)?.try_sub(&b.try_mul(a)?)
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, k: u32) -> Operator {
        let mut r = Operator::identity(&self.basis);
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    pub fn frobenius_norm(&self) -> f64 {
        let sq: f64 = match &self.repr {
            Repr::Sparse(c) => c.vals.iter().map(|v| v.norm_sqr()).sum(),
            Repr::Dense(m) => m.iter().map(|v| v.norm_sqr()).sum(),
            Repr::Blocks(b) => b.iter().flat_map(|m| m.iter()).map(|v| v.norm_sqr()).sum(),
        };
        sq.sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        let it: Box<dyn Iterator<Item = &C64>> = match &self.repr {
            Repr::Sparse(c) => Box::new(c.vals.iter()),
            Repr::Dense(m) => Box::new(m.iter()),
            Repr::Blocks(b) => Box::new(b.iter().flat_map(|m| m.iter())),
        };
        it.map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn symmetry_deviation(&self, sign: f64) -> f64 {
        match &self.repr {
            Repr::Sparse(c) => c
                .iter()
                .map(|(i, j, v)| (v - c.get(j, i).conj() * sign).norm())
                .fold(0.0, f64::max),
            Repr::Dense(m) => dense_sym_dev(m, sign),
            Repr::Blocks(b) => b.iter().map(|m| dense_sym_dev(m, sign)).fold(0.0, f64::max),
        }
    }

    /// max |A − A†|.
    pub fn hermitian_deviation(&self) -> f64 {
        self.symmetry_deviation(1.0)
    }

    /// max |A + A†|.
    pub fn anti_hermitian_deviation(&self) -> f64 {
        self.symmetry_deviation(-1.0)
    }

    /// max |A − B| over all entries.
    pub fn max_diff(&self, other: &Operator) -> Result<f64> {
        Ok(self.try_sub(other)?.max_abs())
    }

    pub fn trace(&self) -> C64 {
        match &self.repr {
            Repr::Sparse(c) => c.iter().filter(|(i, j, _)| i == j).map(|(_, _, v)| v).sum(),
            Repr::Dense(m) => m.trace(),
            Repr::Blocks(b) => b.iter().map(|m| m.trace()).sum(),
        }
    }
}

fn dense_sym_dev(m: &DMatrix<C64>, sign: f64) -> f64 {
    let n = m.nrows();
    let mut d: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            d = d.max((m[(i, j)] - m[(j, i)].conj() * sign).norm());
        }
    }
    d
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("operators on different bases")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("operators on different bases")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.try_mul(rhs).expect("operators on different bases")
    }
}

impl Mul<C64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: C64) -> Operator {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale_real(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Mul<&DVector<C64>> for &Operator {
    type Output = DVector<C64>;
    fn mul(self, rhs: &DVector<C64>) -> DVector<C64> {
        self.apply(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn representations_agree() {
        let b = FockBasis::build(1, 3).unwrap();
        let t = vec![(0, 0, c(1.0, 0.0)), (1, 2, c(0.0, 1.0)), (2, 1, c(0.0, -1.0)), (4, 5, c(2.0, 0.0))];
        let s = Operator::from_triplets(&b, t).unwrap();
        let d = Operator::from_dense(&b, s.to_dense()).unwrap();
        assert_eq!(s.flag(), Hermiticity::General);
        let prod_s = &s * &s.adjoint();
        let prod_d = &d * &d.adjoint();
        assert!(prod_s.max_diff(&prod_d).unwrap() < 1e-15);
        assert_eq!(prod_s.flag(), Hermiticity::Hermitian);
        let blocks = Operator::from_blocks(&b, (0..=3).map(|n| prod_s.block(n)).collect()).unwrap();
        assert!(blocks.max_diff(&prod_d).unwrap() < 1e-15);
        let v = DVector::from_fn(b.dim(), |i, _| c(i as f64, 1.0));
        assert!((blocks.apply(&v) - prod_d.apply(&v)).norm() < 1e-13);
        assert!((blocks.trace() - prod_s.trace()).norm() < 1e-14);
    }

    #[test]
    fn duplicates_sum_and_zeros_drop() {
        let b = FockBasis::build(1, 1).unwrap();
        let s = Operator::from_triplets(&b, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0))]).unwrap();
        assert!(s.entries().is_empty());
        assert!(Operator::from_triplets(&b, vec![(0, 9, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn anti_hermitian_tag() {
        let b = FockBasis::build(1, 1).unwrap();
        let s = Operator::from_triplets(&b, vec![(1, 2, c(1.0, 0.0)), (2, 1, c(-1.0, 0.0))]).unwrap();
        assert_eq!(s.flag(), Hermiticity::AntiHermitian);
    }

    #[test]
    fn basis_mismatch() {
        let a = Operator::identity(&FockBasis::build(1, 1).unwrap());
        let b = Operator::identity(&FockBasis::build(1, 2).unwrap());
        assert_eq!(a.try_mul(&b).unwrap_err(), Error::BasisMismatch);
    }
}
