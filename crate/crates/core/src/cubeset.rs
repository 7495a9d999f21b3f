//! Sorted, packed storage for the cubes of one dimension.
//!
//! A cube `q: {0,1}ⁿ → X` is packed into one integer with `q(0)` in the
//! most significant slot, so numeric order is lexicographic order on
//! vertex tuples and all cubes sharing a prefix `q(0), …, q(m−1)` form a
//! contiguous range.

use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Keys {
    Narrow(Vec<u64>),
    Wide(Vec<u128>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeSet {
    dim: usize,
    bits: u32,
    keys: Keys,
}

/// Bits needed per vertex value for `points` points.
pub fn bits_for(points: usize) -> u32 {
    if points <= 1 {
        1
    } else {
        usize::BITS - (points - 1).leading_zeros()
    }
}

impl CubeSet {
    pub fn packing_fits(points: usize, dim: usize) -> bool {
        (bits_for(points) as u128) << dim <= 128
    }

    fn slots(&self) -> usize {
        1 << self.dim
    }

    /// Builds from packed keys, sorting and removing duplicates.
    pub fn from_keys(points: usize, dim: usize, mut keys: Vec<u128>) -> Result<Self> {
        let bits = bits_for(points);
        if !Self::packing_fits(points, dim) {
            return Err(Error::budget(
                format!("packing {dim}-cubes over {points} points"),
                (bits as u128) << dim,
                128,
            ));
        }
        keys.par_sort_unstable();
        keys.dedup();
        let keys = if (bits as usize) << dim <= 64 {
            Keys::Narrow(keys.into_iter().map(|k| k as u64).collect())
        } else {
            Keys::Wide(keys)
        };
        Ok(Self { dim, bits, keys })
    }

    pub fn from_cubes(points: usize, dim: usize, cubes: &[Vec<u32>]) -> Result<Self> {
        let bits = bits_for(points);
        let mut keys = Vec::with_capacity(cubes.len());
        for q in cubes {
            if q.len() != 1 << dim {
                return Err(Error::structural(format!(
                    "{dim}-cube has {} vertex values",
                    q.len()
                )));
            }
            if let Some(&x) = q.iter().find(|&&x| x as usize >= points) {
                return Err(Error::structural(format!("cube refers to point {x} of {points}")));
            }
            keys.push(pack(bits, q));
        }
        Self::from_keys(points, dim, keys)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        match &self.keys {
            Keys::Narrow(k) => k.len(),
            Keys::Wide(k) => k.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn key(&self, i: usize) -> u128 {
        match &self.keys {
            Keys::Narrow(k) => k[i] as u128,
            Keys::Wide(k) => k[i],
        }
    }

    pub fn pack(&self, q: &[u32]) -> u128 {
        pack(self.bits, q)
    }

    pub fn unpack(&self, key: u128) -> Vec<u32> {
        let mut out = vec![0; self.slots()];
        self.unpack_into(key, &mut out);
        out
    }

    pub fn unpack_into(&self, key: u128, out: &mut [u32]) {
        let n = self.slots();
        let mask = (1u128 << self.bits) - 1;
        for (v, slot) in out.iter_mut().enumerate().take(n) {
            let shift = self.bits as usize * (n - 1 - v);
            *slot = ((key >> shift) & mask) as u32;
        }
    }

    pub fn get(&self, i: usize) -> Vec<u32> {
        self.unpack(self.key(i))
    }

    fn search(&self, key: u128) -> std::result::Result<usize, usize> {
        match &self.keys {
            Keys::Narrow(k) => {
                if key > u64::MAX as u128 {
                    Err(k.len())
                } else {
                    k.binary_search(&(key as u64))
                }
            }
            Keys::Wide(k) => k.binary_search(&key),
        }
    }

    fn lower_bound(&self, key: u128) -> usize {
        match self.search(key) {
            Ok(i) | Err(i) => i,
        }
    }

    pub fn index_of(&self, q: &[u32]) -> Option<usize> {
        if q.len() != self.slots() || q.iter().any(|&x| x as u128 >> self.bits != 0) {
            return None;
        }
        self.search(self.pack(q)).ok()
    }

    pub fn contains(&self, q: &[u32]) -> bool {
        self.index_of(q).is_some()
    }

    /// Index range of cubes whose first `prefix.len()` vertex values
    /// equal `prefix`.
    pub fn prefix_range(&self, prefix: &[u32]) -> std::ops::Range<usize> {
        let n = self.slots();
        debug_assert!(prefix.len() <= n);
        if prefix.iter().any(|&x| x as u128 >> self.bits != 0) {
            return 0..0;
        }
        let rest = self.bits as usize * (n - prefix.len());
        let mut lo = 0u128;
        for &x in prefix {
            lo = (lo << self.bits) | x as u128;
        }
        if rest >= 128 {
            return 0..self.len();
        }
        let lo = lo << rest;
        let start = self.lower_bound(lo);
        let end = match lo.checked_add(1u128 << rest) {
            Some(hi) => self.lower_bound(hi),
            None => self.len(),
        };
        start..end
    }

    /// Value at the least significant (last) vertex of cube `i`.
    pub fn last_value(&self, i: usize) -> u32 {
        (self.key(i) & ((1u128 << self.bits) - 1)) as u32
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<u32>> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    pub fn keys_u128(&self) -> Vec<u128> {
        (0..self.len()).map(|i| self.key(i)).collect()
    }
}

pub fn pack(bits: u32, q: &[u32]) -> u128 {
    q.iter().fold(0u128, |acc, &x| (acc << bits) | x as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order_and_ranges() {
        let cubes: Vec<Vec<u32>> = (0..3u32)
            .flat_map(|a| (0..3u32).map(move |b| vec![a, b]))
            .rev()
            .collect();
        let s = CubeSet::from_cubes(3, 1, &cubes).unwrap();
        assert_eq!(s.len(), 9);
        let listed: Vec<Vec<u32>> = s.iter().collect();
        let mut sorted = listed.clone();
        sorted.sort();
        assert_eq!(listed, sorted);
        assert_eq!(s.prefix_range(&[1]), 3..6);
        assert_eq!(s.prefix_range(&[]), 0..9);
        assert_eq!(s.index_of(&[2, 1]), Some(7));
        assert_eq!(s.index_of(&[3, 1]), None);
        assert_eq!(s.last_value(7), 1);
    }

    #[test]
    fn wide_keys() {
        // 27 points need 5 bits; 2^5 vertices * 5 bits = 160 > 128: rejected
        assert!(CubeSet::from_cubes(27, 5, &[]).is_err());
        // 4 * 16 = 64 narrow, 5 * 16 = 80 wide
        let q: Vec<u32> = (0..16).map(|v| v % 17).collect();
        let s = CubeSet::from_cubes(17, 4, &[q.clone()]).unwrap();
        assert_eq!(s.get(0), q);
        assert_eq!(s.prefix_range(&q[..3]), 0..1);
    }
}
