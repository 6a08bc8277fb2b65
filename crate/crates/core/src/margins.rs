//! Standard Fréchet margins, truncation, and min/max projections.

use crate::cone::{BitIter, ConeId};
use crate::error::{Error, Result};

/// `n × d` sample on the standard Fréchet scale, stored row-major.
///
/// Every entry is positive and finite and `d ≥ 2`. A matrix with zero rows
/// is allowed so that samplers can honour `n = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl SampleMatrix {
    pub fn from_flat(values: Vec<f64>, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::TooFewColumns(d));
        }
        if !values.len().is_multiple_of(d) {
            return Err(Error::RaggedRow {
                row: values.len() / d,
                expected: d,
                found: values.len() % d,
            });
        }
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: k / d,
                    col: k % d,
                });
            }
            if v <= 0.0 {
                return Err(Error::NonPositive {
                    row: k / d,
                    col: k % d,
                    value: v,
                });
            }
        }
        let n = values.len() / d;
        Ok(Self { values, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        Self::from_flat(flatten(rows, d)?, d)
    }

    /// Internal constructor for values already known to be valid.
    pub(crate) fn from_flat_unchecked(values: Vec<f64>, d: usize) -> Self {
        debug_assert!(d >= 2 && values.len().is_multiple_of(d));
        let n = values.len() / d;
        Self { values, n, d }
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }

    /// Reorders columns so that new column `perm[j]` holds old column `j`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.d)?;
        let mut out = vec![0.0; self.values.len()];
        for (src, dst) in self
            .values
            .chunks_exact(self.d)
            .zip(out.chunks_exact_mut(self.d))
        {
            for (j, &v) in src.iter().enumerate() {
                dst[perm[j]] = v;
            }
        }
        Ok(Self::from_flat_unchecked(out, self.d))
    }

    /// Rows selected by index, with repetition allowed (bootstrap resampling).
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut out = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            out.extend_from_slice(self.row(i));
        }
        Self::from_flat_unchecked(out, self.d)
    }
}

/// Rank transform of raw data to standard Fréchet margins.
///
/// Entry `(i, j)` becomes `-1 / log(r_ij / (n + 1))` where `r_ij` is the
/// within-column rank (1 = smallest). Ties are ranked by row order.
pub fn to_frechet(raw: &[Vec<f64>]) -> Result<SampleMatrix> {
    let n = raw.len();
    if n < 2 {
        return Err(Error::TooFewRows { n, min: 2 });
    }
    let d = raw[0].len();
    if d < 2 {
        return Err(Error::TooFewColumns(d));
    }
    let flat = flatten(raw, d)?;
    for (k, v) in flat.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row: k / d,
                col: k % d,
            });
        }
    }
    let levels: Vec<f64> = (1..=n)
        .map(|r| -1.0 / (r as f64 / (n as f64 + 1.0)).ln())
        .collect();
    let mut out = vec![0.0; n * d];
    let mut order: Vec<usize> = (0..n).collect();
    for j in 0..d {
        order.sort_by(|&a, &b| flat[a * d + j].total_cmp(&flat[b * d + j]).then(a.cmp(&b)));
        for (rank0, &i) in order.iter().enumerate() {
            out[i * d + j] = levels[rank0];
        }
    }
    Ok(SampleMatrix::from_flat_unchecked(out, d))
}

/// Columns of `raw` containing exactly repeated values, with the number of
/// entries that share a value with an earlier entry.
pub fn tied_columns(raw: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let d = raw.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for j in 0..d {
        let mut col: Vec<f64> = raw.iter().filter_map(|r| r.get(j).copied()).collect();
        col.sort_by(f64::total_cmp);
        let ties = col.windows(2).filter(|w| w[0] == w[1]).count();
        if ties > 0 {
            out.push((j, ties));
        }
    }
    out
}

/// Sample after setting every entry at or below `-1/log p` to zero and
/// dropping rows that became all-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
    threshold: f64,
    p: f64,
}

impl TruncatedMatrix {
    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.d
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.values
    }
}

/// Fréchet quantile at probability `p`, i.e. the truncation level `-1/log p`.
pub fn frechet_quantile(p: f64) -> f64 {
    -1.0 / p.ln()
}

pub fn truncate(x: &SampleMatrix, p: f64) -> Result<TruncatedMatrix> {
    truncate_flat(x.as_flat(), x.ncols(), p)
}

/// Truncation applied to any non-negative row-major matrix. Applying it to
/// an already truncated matrix at the same `p` is a no-op.
pub fn truncate_flat(values: &[f64], d: usize, p: f64) -> Result<TruncatedMatrix> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", p, "must lie in (0, 1)"));
    }
    if d == 0 || !values.len().is_multiple_of(d) {
        return Err(Error::TooFewColumns(d));
    }
    let threshold = frechet_quantile(p);
    let mut out = Vec::with_capacity(values.len());
    for row in values.chunks_exact(d) {
        let start = out.len();
        let mut any = false;
        for &v in row {
            if v > threshold {
                out.push(v);
                any = true;
            } else {
                out.push(0.0);
            }
        }
        if !any {
            out.truncate(start);
        }
    }
    let n = out.len() / d;
    Ok(TruncatedMatrix {
        values: out,
        n,
        d,
        threshold,
        p,
    })
}

/// `min_{i ∈ C} row_i`.
pub fn min_projection(row: &[f64], cone: ConeId) -> f64 {
    min_over_bits(row, cone.bits())
}

/// `max_{i ∉ C} row_i`, defined as 0 when `C = D`.
pub fn max_projection(row: &[f64], cone: ConeId) -> f64 {
    max_over_bits(row, cone.complement_bits())
}

#[inline]
pub(crate) fn min_over_bits(row: &[f64], bits: u32) -> f64 {
    BitIter(bits).fold(f64::INFINITY, |m, i| m.min(row[i]))
}

#[inline]
pub(crate) fn max_over_bits(row: &[f64], bits: u32) -> f64 {
    BitIter(bits).fold(0.0, |m, i| m.max(row[i]))
}

fn flatten(rows: &[Vec<f64>], d: usize) -> Result<Vec<f64>> {
    let mut flat = Vec::with_capacity(rows.len() * d);
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::RaggedRow {
                row: i,
                expected: d,
                found: r.len(),
            });
        }
        flat.extend_from_slice(r);
    }
    Ok(flat)
}

pub(crate) fn check_permutation(perm: &[usize], d: usize) -> Result<()> {
    let mut seen = vec![false; d];
    if perm.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: perm.len(),
        });
    }
    for &p in perm {
        if p >= d || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidCone(format!("{perm:?} is not a permutation")));
        }
    }
    Ok(())
}
