//! Detection with overlapping regions: a row belongs to the region of `C`
//! when every coordinate outside `C` is at most `(min over C)^delta`; rows in
//! no such region form the full-cone region.

use std::collections::BTreeMap;

use crate::cone::{full_mask, ConeId};
use crate::error::{Error, Result};
use crate::margins::{min_over_bits, SampleMatrix};
use crate::method1::{combine_regions, FitConfig, FitResult, Method, Region};
use crate::tail_fit::quantile_in_place;

/// Region memberships of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMembership {
    d: usize,
    /// Sorted regions containing each row.
    pub per_row: Vec<Vec<ConeId>>,
    /// Member rows of each region with their minimum over the cone.
    pub per_cone: BTreeMap<ConeId, RegionMembers>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionMembers {
    pub rows: Vec<usize>,
    pub values: Vec<f64>,
}

impl RegionMembership {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn nrows(&self) -> usize {
        self.per_row.len()
    }
}

/// Proper cones `C` (`|C| < d`) with `max_{D∖C} x ≤ (min_C x)^delta`.
///
/// Only sets whose minimum is some coordinate `x_i = m` can qualify; every
/// coordinate above `m^delta` must be in the set, coordinates in
/// `[m, m^delta]` may be, and nothing below `m` can be.
pub fn proper_regions_of_row(row: &[f64], delta: f64, out: &mut Vec<u32>) {
    out.clear();
    let d = row.len();
    let full = full_mask(d);
    for (i, &m) in row.iter().enumerate() {
        let cap = m.powf(delta);
        let mut required = 1u32 << i;
        let mut optional = 0u32;
        let mut feasible = true;
        for (j, &v) in row.iter().enumerate() {
            if j == i {
                continue;
            }
            if v > cap {
                if v < m {
                    feasible = false;
                    break;
                }
                required |= 1 << j;
            } else if v >= m {
                optional |= 1 << j;
            }
        }
        if !feasible {
            continue;
        }
        let mut sub = optional;
        loop {
            let bits = required | sub;
            if bits != full {
                out.push(bits);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & optional;
        }
    }
    out.sort_unstable();
    out.dedup();
}

pub fn assign_regions_tilde(x: &SampleMatrix, delta: f64) -> Result<RegionMembership> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::param("delta", delta, "must lie in [0, 1)"));
    }
    let d = x.ncols();
    let full = full_mask(d);
    let mut per_row = Vec::with_capacity(x.nrows());
    let mut per_cone: BTreeMap<ConeId, RegionMembers> = BTreeMap::new();
    let mut buf = Vec::new();
    for (r, row) in x.rows().enumerate() {
        proper_regions_of_row(row, delta, &mut buf);
        if buf.is_empty() {
            buf.push(full);
        }
        let mut cones = Vec::with_capacity(buf.len());
        for &bits in &buf {
            let cone = ConeId::new(bits, d)?;
            let entry = per_cone.entry(cone).or_default();
            entry.rows.push(r);
            entry.values.push(min_over_bits(row, bits));
            cones.push(cone);
        }
        per_row.push(cones);
    }
    Ok(RegionMembership {
        d,
        per_row,
        per_cone,
    })
}

/// Empirical region probabilities where each row splits unit weight evenly
/// among the regions containing it.
pub fn weighted_region_prob(mem: &RegionMembership) -> BTreeMap<ConeId, f64> {
    let n = mem.nrows() as f64;
    let mut acc: BTreeMap<ConeId, f64> = BTreeMap::new();
    for cones in &mem.per_row {
        let share = 1.0 / cones.len() as f64;
        for c in cones {
            *acc.entry(*c).or_default() += share;
        }
    }
    for v in acc.values_mut() {
        *v /= n;
    }
    acc
}

/// Per-region structure values and weighted probabilities indexed by
/// bitmask, without per-row bookkeeping.
fn scan_regions(x: &SampleMatrix, delta: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let d = x.ncols();
    let full = full_mask(d);
    let size = full as usize + 1;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); size];
    let mut weights = vec![0.0; size];
    let mut buf = Vec::new();
    for row in x.rows() {
        proper_regions_of_row(row, delta, &mut buf);
        if buf.is_empty() {
            buf.push(full);
        }
        let share = 1.0 / buf.len() as f64;
        for &bits in &buf {
            values[bits as usize].push(min_over_bits(row, bits));
            weights[bits as usize] += share;
        }
    }
    let n = x.nrows() as f64;
    for w in weights.iter_mut() {
        *w /= n;
    }
    (values, weights)
}

/// Overlapping-region estimate of the cone masses of `x`.
pub fn fit_method2(x: &SampleMatrix, cfg: &FitConfig) -> Result<FitResult> {
    if cfg.method != Method::Two {
        return Err(Error::param("method", 1.0, "fit_method2 needs method two"));
    }
    cfg.validate()?;
    if x.nrows() == 0 {
        return Err(Error::EmptyModel);
    }
    let d = x.ncols();
    let (values, weights) = scan_regions(x, cfg.delta);
    let mut pooled = x.as_flat().to_vec();
    let q = quantile_in_place(&mut pooled, cfg.q_quantile)?;
    let mut regions = Vec::new();
    for (bits, (vals, w)) in values.into_iter().zip(weights).enumerate() {
        if !vals.is_empty() {
            regions.push(Region {
                cone: ConeId::new(bits as u32, d)?,
                weight: w,
                values: vals,
            });
        }
    }
    combine_regions(d, x.nrows(), regions, q, cfg)
}
