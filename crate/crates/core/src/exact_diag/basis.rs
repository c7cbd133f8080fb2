//! Occupation-number basis of N bosons over M modes.

use crate::error::{CullError, Result};
use crate::single_particle::Parity;

/// Default cap on the basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// One occupation vector `(n_0, ..., n_{M-1})`.
pub type FockState = Vec<u8>;

/// All occupation vectors of `n` bosons over `m` modes in descending
/// lexicographic order, so index 0 has every particle in mode 0.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub n: usize,
    pub m: usize,
    pub states: Vec<FockState>,
    /// `ways[j][r]`: number of ways to place `r` bosons in modes `j..m`.
    ways: Vec<Vec<usize>>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `C(n + m - 1, n)`, or `None` on overflow.
pub fn basis_dimension(n: usize, m: usize) -> Option<usize> {
    if m == 0 {
        return Some(0);
    }
    binomial(n + m - 1, n)
}

impl FockBasis {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_cap(n, m, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(n: usize, m: usize, cap: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(CullError::param("basis", "need N >= 1 and M >= 1"));
        }
        if n > u8::MAX as usize {
            return Err(CullError::param("n", "at most 255 particles"));
        }
        let dim = basis_dimension(n, m).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(CullError::DimensionCap { dim, cap });
        }
        let mut ways = vec![vec![0usize; n + 1]; m + 1];
        for r in 0..=n {
            ways[m][r] = usize::from(r == 0);
        }
        for j in (0..m).rev() {
            for r in 0..=n {
                ways[j][r] = (0..=r).map(|v| ways[j + 1][r - v]).sum();
            }
        }
        let mut states = Vec::with_capacity(dim);
        let mut cur = vec![0u8; m];
        fill(&mut states, &mut cur, 0, n);
        Ok(FockBasis { n, m, states, ways })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Position of `occ` in the basis.
    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        if occ.len() != self.m {
            return None;
        }
        let mut rem = self.n;
        let mut idx = 0;
        for (j, &v) in occ.iter().enumerate() {
            let v = v as usize;
            if v > rem {
                return None;
            }
            // states with a larger occupation of mode j come first
            for larger in v + 1..=rem {
                idx += self.ways[j + 1][rem - larger];
            }
            rem -= v;
        }
        (rem == 0).then_some(idx)
    }

    /// Total parity given the parity of each mode.
    pub fn parity_of(occ: &[u8], modes: &[Parity]) -> Parity {
        let odd: usize = occ
            .iter()
            .zip(modes)
            .filter(|(_, p)| **p == Parity::Odd)
            .map(|(&n, _)| n as usize)
            .sum();
        if odd.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

fn fill(out: &mut Vec<FockState>, cur: &mut FockState, j: usize, rem: usize) {
    let m = cur.len();
    if j == m - 1 {
        cur[j] = rem as u8;
        out.push(cur.clone());
        cur[j] = 0;
        return;
    }
    for v in (0..=rem).rev() {
        cur[j] = v as u8;
        fill(out, cur, j + 1, rem - v);
    }
    cur[j] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(FockBasis::new(1, 5).unwrap().len(), 5);
        assert_eq!(FockBasis::new(3, 4).unwrap().len(), 20);
        assert_eq!(FockBasis::new(2, 30).unwrap().len(), 465);
        assert_eq!(basis_dimension(3, 40), Some(11480));
    }

    #[test]
    fn order_and_lookup() {
        let b = FockBasis::new(3, 4).unwrap();
        assert_eq!(b.states[0], vec![3, 0, 0, 0]);
        assert_eq!(b.states[19], vec![0, 0, 0, 3]);
        for (i, s) in b.states.iter().enumerate() {
            assert_eq!(s.iter().map(|&v| v as usize).sum::<usize>(), 3);
            assert_eq!(b.index_of(s), Some(i));
        }
        assert!(b.states.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(b.index_of(&[1, 1, 0, 0]), None);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            FockBasis::with_cap(5, 60, 1000),
            Err(CullError::DimensionCap { cap: 1000, .. })
        ));
    }
}
