//! Multi-indices over `N^d`.
//!
//! Entries are stored with trailing zeros trimmed, so the same value compares
//! equal regardless of the ambient dimension and the zero index is the empty
//! vector. The ambient dimension only matters when validating user input
//! against a spec.

use crate::error::CoreError;
use crate::Rat;
use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A multi-index `k ∈ N^d`, canonical under trailing-zero trimming.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    /// The zero multi-index.
    pub fn zero() -> Self {
        MultiIndex(Vec::new())
    }

    /// Canonical basis vector `e_i` (0-based).
    pub fn unit(i: usize) -> Self {
        let mut v = vec![0; i + 1];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn new(entries: Vec<u32>) -> Self {
        let mut v = entries;
        while v.last() == Some(&0) {
            v.pop();
        }
        MultiIndex(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `|k|`, the entry sum.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of leading entries stored (≤ ambient dimension).
    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn entry(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn check_dim(&self, dim: usize) -> Result<(), CoreError> {
        if self.width() > dim {
            Err(CoreError::DimensionMismatch {
                dim,
                got: self.width(),
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.width().max(other.width());
        MultiIndex::new((0..n).map(|i| self.entry(i) + other.entry(i)).collect())
    }

    /// Componentwise subtraction; `None` unless `other ≤ self`.
    pub fn checked_sub(&self, other: &Self) -> Option<Self> {
        if other.width() > self.width() {
            return None;
        }
        let mut v = Vec::with_capacity(self.width());
        for i in 0..self.width() {
            let (a, b) = (self.entry(i), other.entry(i));
            if b > a {
                return None;
            }
            v.push(a - b);
        }
        Some(MultiIndex::new(v))
    }

    /// `k! = ∏ k_i!` as a big integer.
    pub fn factorial(&self) -> BigInt {
        let mut acc = BigInt::one();
        for &k in &self.0 {
            for j in 2..=k {
                acc *= j;
            }
        }
        acc
    }

    /// `1/k!` as a rational.
    pub fn inv_factorial(&self) -> Rat {
        Rat::new(BigInt::one(), self.factorial())
    }

    /// `∏ (k_i choose j_i)` as a rational (zero when `j ≰ k`).
    pub fn binomial(&self, j: &Self) -> Rat {
        match self.checked_sub(j) {
            None => Rat::from_integer(BigInt::from(0)),
            Some(diff) => Rat::new(self.factorial(), j.factorial() * diff.factorial()),
        }
    }

    /// All `j` with `j ≤ k` componentwise, in lexicographic order.
    pub fn sub_indices(&self) -> Vec<Self> {
        let mut out = vec![MultiIndex::zero()];
        for i in 0..self.width() {
            let mut next = Vec::new();
            for base in &out {
                for v in 0..=self.entry(i) {
                    let mut e: Vec<u32> = (0..self.width()).map(|t| base.entry(t)).collect();
                    e[i] = v;
                    next.push(MultiIndex::new(e));
                }
            }
            out = next;
        }
        out.sort();
        out.dedup();
        out
    }
}

/// All multi-indices of width ≤ `dim` with `|k| = total`, sorted.
pub fn indices_with_total(dim: usize, total: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, total: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if dim == 1 {
            prefix.push(total);
            out.push(MultiIndex::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for v in 0..=total {
            prefix.push(v);
            rec(dim - 1, total - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        if total == 0 {
            out.push(MultiIndex::zero());
        }
        return out;
    }
    rec(dim, total, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All multi-indices with `|k| < bound` (a rational bound), sorted.
///
/// Empty when `bound ≤ 0`.
pub fn indices_below(dim: usize, bound: &Rat) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut t: u32 = 0;
    loop {
        let tr = Rat::from_integer(BigInt::from(t));
        if tr >= *bound {
            break;
        }
        out.extend(indices_with_total(dim, t));
        t += 1;
    }
    out
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn trims_trailing_zeros() {
        assert_eq!(MultiIndex::new(vec![1, 0, 0]), MultiIndex::new(vec![1]));
        assert_eq!(MultiIndex::new(vec![0, 0]), MultiIndex::zero());
        assert!(MultiIndex::new(vec![0, 1]) < MultiIndex::new(vec![1]));
    }

    #[test]
    fn factorial_and_binomial() {
        let k = MultiIndex::new(vec![3, 2]);
        assert_eq!(k.factorial(), BigInt::from(12));
        let j = MultiIndex::new(vec![1, 1]);
        assert_eq!(k.binomial(&j), rat(6, 1));
        let too_big = MultiIndex::new(vec![4]);
        assert_eq!(k.binomial(&too_big), rat(0, 1));
    }

    #[test]
    fn enumeration_below_bound() {
        // |k| < 2 in d=2: 0, e1, e2.
        let v = indices_below(2, &rat(2, 1));
        assert_eq!(v.len(), 3);
        assert!(indices_below(2, &rat(-1, 2)).is_empty());
        // |k| < 3/2 means |k| <= 1.
        assert_eq!(indices_below(1, &rat(3, 2)).len(), 2);
    }

    #[test]
    fn sub_indices_cover_box() {
        let k = MultiIndex::new(vec![2, 1]);
        assert_eq!(k.sub_indices().len(), 6);
    }
}
