//! Sub-cone identifiers.
//!
//! A cone is named by the nonempty set `C` of coordinates that are large on
//! it; the remaining coordinates are of smaller order. Internally the set is
//! a bitmask (bit `i` for 0-based coordinate `i`), externally it is written
//! as sorted 1-based indices joined by commas, e.g. `"1,3,4"`.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported dimension. Both methods enumerate all `2^d - 1` cones.
pub const MAX_DIM: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConeId {
    d: u8,
    bits: u32,
}

impl ConeId {
    pub fn new(bits: u32, d: usize) -> Result<Self> {
        check_dim(d)?;
        if bits == 0 {
            return Err(Error::InvalidCone("empty coordinate set".into()));
        }
        if bits >> d != 0 {
            return Err(Error::InvalidCone(format!(
                "bitmask {bits:#b} has coordinates beyond dimension {d}"
            )));
        }
        Ok(Self { d: d as u8, bits })
    }

    /// Builds a cone from 0-based coordinate indices.
    pub fn from_indices(indices: &[usize], d: usize) -> Result<Self> {
        check_dim(d)?;
        let mut bits = 0u32;
        for &i in indices {
            if i >= d {
                return Err(Error::InvalidCone(format!(
                    "coordinate {} out of range for dimension {d}",
                    i + 1
                )));
            }
            bits |= 1 << i;
        }
        Self::new(bits, d)
    }

    /// The full cone `D = {1, ..., d}`.
    pub fn full(d: usize) -> Result<Self> {
        check_dim(d)?;
        Self::new(full_mask(d), d)
    }

    pub fn singleton(i: usize, d: usize) -> Result<Self> {
        Self::from_indices(&[i], d)
    }

    /// Parses the canonical `"1,3,4"` form.
    pub fn parse(text: &str, d: usize) -> Result<Self> {
        let mut indices = Vec::new();
        for part in text.split(',') {
            let part = part.trim();
            let k: usize = part
                .parse()
                .map_err(|_| Error::InvalidCone(format!("cannot parse {text:?}")))?;
            if k == 0 {
                return Err(Error::InvalidCone(format!(
                    "indices are 1-based in {text:?}"
                )));
            }
            indices.push(k - 1);
        }
        Self::from_indices(&indices, d)
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn dim(self) -> usize {
        self.d as usize
    }

    pub fn len(self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Always false; a cone has at least one coordinate.
    pub fn is_empty(self) -> bool {
        false
    }

    pub fn is_full(self) -> bool {
        self.bits == full_mask(self.dim())
    }

    pub fn contains(self, i: usize) -> bool {
        i < self.dim() && self.bits & (1 << i) != 0
    }

    pub fn is_subset_of(self, other: ConeId) -> bool {
        self.bits & other.bits == self.bits
    }

    /// Bitmask of the complement `D \ C` (may be zero).
    pub fn complement_bits(self) -> u32 {
        full_mask(self.dim()) & !self.bits
    }

    /// 0-based coordinates in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        BitIter(self.bits)
    }

    /// Applies a coordinate relabelling: coordinate `i` moves to `perm[i]`.
    pub fn permuted(self, perm: &[usize]) -> Result<Self> {
        let idx: Vec<usize> = self.indices().map(|i| perm[i]).collect();
        Self::from_indices(&idx, self.dim())
    }

    /// Letter labels (`A` for coordinate 1), e.g. `"ACD"`.
    pub fn letters(self) -> String {
        self.indices()
            .map(|i| char::from(b'A' + (i % 26) as u8))
            .collect()
    }

    /// Every cone of dimension `d`, ordered by bitmask.
    pub fn all(d: usize) -> Result<Vec<ConeId>> {
        check_dim(d)?;
        Ok((1..=full_mask(d))
            .map(|bits| ConeId { d: d as u8, bits })
            .collect())
    }
}

impl fmt::Display for ConeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in self.indices() {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
            first = false;
        }
        Ok(())
    }
}

pub(crate) fn full_mask(d: usize) -> u32 {
    if d >= 32 {
        u32::MAX
    } else {
        (1u32 << d) - 1
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::InvalidCone(format!(
            "dimension {d} outside 1..={MAX_DIM}"
        )));
    }
    Ok(())
}

pub(crate) struct BitIter(pub(crate) u32);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let i = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(i)
    }
}
