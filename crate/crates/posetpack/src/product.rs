//! The product lattice `B(k) = (2^[n1])^k`, stored as one mask with
//! coordinate `i` in bits `i*n1 .. (i+1)*n1`.

use crate::error::{Error, Result};
use crate::ground::full;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Class {
    Problematic,
    Restricted,
    Ordinary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BoxLattice {
    pub k: u32,
    pub n1: u32,
}

impl BoxLattice {
    pub fn new(k: u32, n1: u32) -> Result<BoxLattice> {
        if k == 0 || n1 == 0 || k * n1 > 62 {
            return Err(Error::Parameter(format!("need k, n1 >= 1 and k*n1 <= 62, got k={k} n1={n1}")));
        }
        Ok(BoxLattice { k, n1 })
    }

    pub fn bits(&self) -> u32 {
        self.k * self.n1
    }

    pub fn coord_full(&self) -> u64 {
        full(self.n1)
    }

    pub fn max(&self) -> u64 {
        full(self.bits())
    }

    pub fn coord(&self, y: u64, i: u32) -> u64 {
        y >> (i * self.n1) & self.coord_full()
    }

    pub fn with_coord(&self, y: u64, i: u32, v: u64) -> u64 {
        let sh = i * self.n1;
        (y & !(self.coord_full() << sh)) | (v & self.coord_full()) << sh
    }

    pub fn from_coords(&self, c: &[u64]) -> u64 {
        c.iter().enumerate().fold(0, |m, (i, &v)| self.with_coord(m, i as u32, v))
    }

    pub fn coords(&self, y: u64) -> Vec<u64> {
        (0..self.k).map(|i| self.coord(y, i)).collect()
    }

    /// Indices of coordinates other than the empty and full set.
    pub fn non_extreme(&self, y: u64) -> Vec<u32> {
        (0..self.k).filter(|&i| !self.is_extreme(self.coord(y, i))).collect()
    }

    pub fn is_extreme(&self, v: u64) -> bool {
        v == 0 || v == self.coord_full()
    }

    /// A coordinate value whose size is outside `{0, 1, n1-1, n1}`.
    pub fn is_mid(&self, v: u64) -> bool {
        let s = v.count_ones();
        s >= 2 && s + 2 <= self.n1
    }

    pub fn classify(&self, y: u64, t: u32) -> Class {
        if self.non_extreme(y).len() as u32 <= t {
            Class::Problematic
        } else if (0..self.k).all(|i| !self.is_mid(self.coord(y, i))) {
            Class::Restricted
        } else {
            Class::Ordinary
        }
    }

    pub fn in_pr(&self, y: u64, t: u32) -> bool {
        self.classify(y, t) != Class::Ordinary
    }

    pub fn format(&self, y: u64) -> String {
        self.coords(y).iter().map(|c| format!("{c:x}")).collect::<Vec<_>>().join(".")
    }
}

/// `min(2^n1, k/4)`.
pub fn default_threshold(k: u32, n1: u32) -> u32 {
    let cap = if n1 >= 31 { u32::MAX } else { 1 << n1 };
    cap.min(k / 4)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        let b = BoxLattice::new(6, 4).unwrap();
        assert_eq!(b.classify(0, 1), Class::Problematic);
        let singles = b.from_coords(&[1, 1, 1, 1, 1, 1]);
        assert_eq!(b.classify(singles, 1), Class::Restricted);
        let one_mid = b.from_coords(&[0b11, 0, 0, 0, 0, 0]);
        assert_eq!(b.classify(one_mid, 0), Class::Ordinary);
        assert_eq!(b.classify(one_mid, 1), Class::Problematic);
    }

    #[test]
    fn coords_roundtrip() {
        let b = BoxLattice::new(3, 5).unwrap();
        let y = b.from_coords(&[3, 31, 9]);
        assert_eq!(b.coords(y), vec![3, 31, 9]);
        assert_eq!(b.with_coord(y, 1, 0), b.from_coords(&[3, 0, 9]));
    }
}
