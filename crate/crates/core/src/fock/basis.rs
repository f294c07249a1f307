use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Polarization of a photon in a spatiotemporal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pol {
    Plus,
    Minus,
}

impl Pol {
    pub fn sign(self) -> f64 {
        match self {
            Pol::Plus => 1.0,
            Pol::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Pol {
        match self {
            Pol::Plus => Pol::Minus,
            Pol::Minus => Pol::Plus,
        }
    }
}

/// Occupation-number basis of 2m polarization modes with Σn ≤ n_max.
///
/// Slots are ordered (n⁺₁, n⁻₁, …, n⁺_m, n⁻_m). States are sorted by total
/// photon number and, inside each block, in descending lexicographic order of
/// the occupation tuple, so the vacuum comes first and (N,0,…,0) opens block N.
#[derive(Debug)]
pub struct FockBasis {
    m: usize,
    n_max: usize,
    occ: Vec<u16>,
    totals: Vec<u16>,
    offsets: Vec<usize>,
    index: HashMap<Box<[u16]>, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.n_max == other.n_max
    }
}

/// Number of weak compositions of 0..=n_max into `slots` parts.
pub fn basis_dimension(m: usize, n_max: usize) -> u128 {
    // C(n_max + 2m, 2m)
    let k = 2 * m as u128;
    let n = n_max as u128 + k;
    let mut c: u128 = 1;
    for i in 0..k.min(n - k) {
        c = c.saturating_mul(n - i) / (i + 1);
        if c > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    c
}

fn push_compositions(rest: usize, slots: usize, cur: &mut Vec<u16>, out: &mut Vec<u16>) {
    if slots == 1 {
        cur.push(rest as u16);
        out.extend_from_slice(cur);
        cur.pop();
        return;
    }
    for first in (0..=rest).rev() {
        cur.push(first as u16);
        push_compositions(rest - first, slots - 1, cur, out);
        cur.pop();
    }
}

impl FockBasis {
    /// Builds the basis with the default dimension limit of 20 000.
    pub fn build(m: usize, n_max: usize) -> Result<Arc<FockBasis>> {
        Self::build_with_limit(m, n_max, crate::Tolerances::default().max_dim)
    }

    pub fn build_with_limit(m: usize, n_max: usize, max_dim: usize) -> Result<Arc<FockBasis>> {
        if m == 0 {
            return Err(Error::ParamInvalid("m must be ≥ 1".into()));
        }
        let dim = basis_dimension(m, n_max);
        if dim > max_dim as u128 || n_max > u16::MAX as usize {
            return Err(Error::DimensionOverflow { dim, limit: max_dim });
        }
        let slots = 2 * m;
        let dim = dim as usize;
        let mut occ = Vec::with_capacity(dim * slots);
        let mut offsets = Vec::with_capacity(n_max + 2);
        let mut cur = Vec::with_capacity(slots);
        for n in 0..=n_max {
            offsets.push(occ.len() / slots);
            push_compositions(n, slots, &mut cur, &mut occ);
        }
        offsets.push(occ.len() / slots);
        debug_assert_eq!(occ.len(), dim * slots);
        let mut totals = Vec::with_capacity(dim);
        let mut index = HashMap::with_capacity(dim);
        for (i, t) in occ.chunks(slots).enumerate() {
            totals.push(t.iter().sum());
            index.insert(t.to_vec().into_boxed_slice(), i);
        }
        Ok(Arc::new(FockBasis { m, n_max, occ, totals, offsets, index }))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.totals.len()
    }

    pub fn slots(&self) -> usize {
        2 * self.m
    }

    /// Slot position of mode `j` (0-based) with polarization `pol`.
    pub fn slot(&self, j: usize, pol: Pol) -> Result<usize> {
        if j >= self.m {
            return Err(Error::BadModeIndex { j, m: self.m });
        }
        Ok(2 * j + usize::from(pol == Pol::Minus))
    }

    pub fn occupation(&self, i: usize) -> &[u16] {
        let s = self.slots();
        &self.occ[i * s..(i + 1) * s]
    }

    pub fn states(&self) -> impl Iterator<Item = &[u16]> {
        self.occ.chunks(self.slots())
    }

    pub fn total(&self, i: usize) -> usize {
        self.totals[i] as usize
    }

    pub fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Index range of the block with total photon number `n`.
    pub fn block(&self, n: usize) -> Range<usize> {
        if n > self.n_max {
            return 0..0;
        }
        self.offsets[n]..self.offsets[n + 1]
    }

    pub fn block_sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.offsets.windows(2).map(|w| w[1] - w[0])
    }

    /// Whether `other` extends this basis (same m, larger or equal cutoff).
    ///
    /// The canonical ordering makes the smaller basis a prefix of the larger one.
    pub fn is_prefix_of(&self, other: &FockBasis) -> bool {
        self.m == other.m && self.n_max <= other.n_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bases() {
        let b = FockBasis::build(1, 0).unwrap();
        assert_eq!(b.dim(), 1);
        let b = FockBasis::build(1, 2).unwrap();
        let got: Vec<Vec<u16>> = b.states().map(|s| s.to_vec()).collect();
        let want = vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]];
        assert_eq!(got, want);
        assert_eq!(FockBasis::build(2, 10).unwrap().dim(), 1001);
    }

    #[test]
    fn index_is_bijective_and_blocks_contiguous() {
        let b = FockBasis::build(2, 5).unwrap();
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.occupation(i)), Some(i));
        }
        for n in 0..=5 {
            for i in b.block(n) {
                assert_eq!(b.total(i), n);
            }
        }
        assert_eq!(b.block_sizes().sum::<usize>(), b.dim());
    }

    #[test]
    fn prefix_property() {
        let small = FockBasis::build(2, 3).unwrap();
        let big = FockBasis::build(2, 6).unwrap();
        assert!(small.is_prefix_of(&big));
        for i in 0..small.dim() {
            assert_eq!(small.occupation(i), big.occupation(i));
        }
    }

    #[test]
    fn limits() {
        assert!(matches!(FockBasis::build(0, 2), Err(Error::ParamInvalid(_))));
        assert!(matches!(
            FockBasis::build_with_limit(3, 12, 1000),
            Err(Error::DimensionOverflow { .. })
        ));
        assert_eq!(basis_dimension(2, 10), 1001);
        assert_eq!(basis_dimension(1, 60), 1891);
    }
}
