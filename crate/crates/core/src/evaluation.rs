//! Accuracy metrics, tuning stability and feasibility checks for fitted
//! cone masses.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::ConeId;
use crate::error::{Error, Result};
use crate::margins::SampleMatrix;
use crate::mass::MassDistribution;
use crate::method1::{fit, FitConfig, FitResult};
use crate::tail_fit::empirical_quantile;

/// Hellinger distance `sqrt(Σ (√p − √q)² / 2)` over the union of cones.
pub fn hellinger(p: &MassDistribution, q: &MassDistribution) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let cones: BTreeSet<ConeId> = p.charged().chain(q.charged()).collect();
    let s: f64 = cones
        .into_iter()
        .map(|c| {
            let diff = p.get(c).sqrt() - q.get(c).sqrt();
            diff * diff
        })
        .sum();
    Ok((s / 2.0).sqrt().min(1.0))
}

/// ROC curve over the sparsification threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// `(false positive rate, true positive rate)` in sweep order, from the
    /// all-detected end to the none-detected end.
    pub points: Vec<(f64, f64)>,
    /// Trapezoid area under the points sorted by false positive rate.
    pub auc: f64,
    pub interpolation: String,
}

/// ROC curve of a mass estimate against the set of truly charged cones.
pub fn roc_curve(masses: &MassDistribution, truth: &BTreeSet<ConeId>) -> Result<RocCurve> {
    let scores: Vec<(ConeId, f64)> = masses.iter().collect();
    roc_from_scores(masses.dim(), &scores, truth)
}

/// ROC curve for arbitrary non-negative cone scores; cones not listed score
/// zero. At threshold `v` the detected set is `{score ≥ v}`.
pub fn roc_from_scores(
    d: usize,
    scores: &[(ConeId, f64)],
    truth: &BTreeSet<ConeId>,
) -> Result<RocCurve> {
    let n_cones = ConeId::all(d)?.len();
    if truth.is_empty() || truth.len() >= n_cones {
        return Err(Error::InvalidMass(format!(
            "truth must be a nonempty proper subset of the {n_cones} cones"
        )));
    }
    if let Some(c) = truth
        .iter()
        .chain(scores.iter().map(|(c, _)| c))
        .find(|c| c.dim() != d)
    {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: c.dim(),
        });
    }
    let pos = truth.len() as f64;
    let neg = (n_cones - truth.len()) as f64;
    let mut levels: Vec<f64> = scores
        .iter()
        .map(|(_, s)| *s)
        .filter(|s| *s > 0.0)
        .collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let mut points = vec![(1.0, 1.0)];
    for &v in &levels {
        let (mut tp, mut fp) = (0usize, 0usize);
        for (c, s) in scores {
            if *s >= v {
                if truth.contains(c) {
                    tp += 1;
                } else {
                    fp += 1;
                }
            }
        }
        points.push((fp as f64 / neg, tp as f64 / pos));
    }
    points.push((0.0, 0.0));

    let mut sorted = points.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let auc = sorted
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum();
    Ok(RocCurve {
        points,
        auc,
        interpolation: "trapezoid".into(),
    })
}

/// Per-cone number of results assigning mass strictly above `pi`, over all
/// `2^d - 1` cones.
pub fn detection_counts(results: &[FitResult], pi: f64) -> Result<BTreeMap<ConeId, usize>> {
    let masses: Vec<&MassDistribution> = results.iter().map(|r| &r.masses).collect();
    mass_detection_counts(&masses, pi)
}

pub fn mass_detection_counts(
    masses: &[&MassDistribution],
    pi: f64,
) -> Result<BTreeMap<ConeId, usize>> {
    let first = masses.first().ok_or(Error::TooFewRows { n: 0, min: 1 })?;
    let d = first.dim();
    let mut counts: BTreeMap<ConeId, usize> = ConeId::all(d)?.into_iter().map(|c| (c, 0)).collect();
    for m in masses {
        if m.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.dim(),
            });
        }
        for (c, v) in m.iter() {
            if v > pi {
                *counts.entry(c).or_default() += 1;
            }
        }
    }
    Ok(counts)
}

/// Detected-cone counts with bootstrap intervals over a tuning grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTable {
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub replicates: usize,
}

impl StabilityTable {
    /// Longest run of equal consecutive counts among grid values in
    /// `[lo, hi]`.
    pub fn longest_constant_run(&self, lo: f64, hi: f64) -> usize {
        let mut best = 0;
        let mut run = 0;
        let mut prev = None;
        for (g, &c) in self.grid.iter().zip(&self.counts) {
            if *g < lo - 1e-12 || *g > hi + 1e-12 {
                prev = None;
                run = 0;
                continue;
            }
            run = if prev == Some(c) { run + 1 } else { 1 };
            prev = Some(c);
            best = best.max(run);
        }
        best
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tuning_value", "count", "ci_low", "ci_high"])?;
        for k in 0..self.grid.len() {
            out.write_record([
                self.grid[k].to_string(),
                self.counts[k].to_string(),
                self.ci_low[k].to_string(),
                self.ci_high[k].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn cones_with_mass(x: &SampleMatrix, cfg: &FitConfig) -> usize {
    fit(x, cfg).map(|r| r.masses.len()).unwrap_or(0)
}

/// Bootstrap row indices for replicate `b`.
pub fn bootstrap_indices(n: usize, seed: u64, b: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(b as u64 + 1);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

/// Counts cones with mass at each tuning value (`p` or `delta`, by method)
/// on the data and on `replicates` bootstrap resamples seeded from
/// `cfg_base.seed`; intervals are 2.5% and 97.5% percentiles, widened to
/// contain the observed count. Fits that fail count as zero cones.
pub fn stability(
    x: &SampleMatrix,
    cfg_base: &FitConfig,
    grid: &[f64],
    replicates: usize,
    pi: f64,
) -> Result<StabilityTable> {
    if replicates == 0 {
        return Err(Error::param(
            "replicates",
            0.0,
            "need at least one bootstrap replicate",
        ));
    }
    if grid.is_empty() {
        return Err(Error::param("grid", 0.0, "grid is empty"));
    }
    let configs: Vec<FitConfig> = grid
        .iter()
        .map(|&g| {
            let cfg = FitConfig {
                pi,
                ..cfg_base.with_tuning(g)
            };
            cfg.validate().map(|_| cfg)
        })
        .collect::<Result<_>>()?;
    let counts: Vec<usize> = configs.iter().map(|c| cones_with_mass(x, c)).collect();
    let boot: Vec<Vec<usize>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let xb = x.select_rows(&bootstrap_indices(x.nrows(), cfg_base.seed, b));
            configs.iter().map(|c| cones_with_mass(&xb, c)).collect()
        })
        .collect();
    let mut ci_low = Vec::with_capacity(grid.len());
    let mut ci_high = Vec::with_capacity(grid.len());
    for (k, &count) in counts.iter().enumerate() {
        let col: Vec<f64> = boot.iter().map(|row| row[k] as f64).collect();
        let lo = empirical_quantile(&col, 0.025)?;
        let hi = empirical_quantile(&col, 0.975)?;
        ci_low.push(lo.min(count as f64));
        ci_high.push(hi.max(count as f64));
    }
    Ok(StabilityTable {
        grid: grid.to_vec(),
        counts,
        ci_low,
        ci_high,
        replicates,
    })
}

/// A way in which a mass estimate cannot come from a valid limit measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A single-variable cone above the `1/d` moment bound.
    SingletonExcess {
        coordinate: usize,
        mass: f64,
        bound: f64,
    },
    /// A variable that appears in no charged cone.
    Uncovered { coordinate: usize },
}

/// Flags singleton masses above `1/d` and coordinates in no charged cone.
pub fn feasibility_check(masses: &MassDistribution) -> Vec<Violation> {
    let d = masses.dim();
    let bound = 1.0 / d as f64;
    let mut out = Vec::new();
    for (c, m) in masses.iter() {
        if c.len() == 1 && m > bound + 1e-12 {
            out.push(Violation::SingletonExcess {
                coordinate: c.indices().next().unwrap_or(0) + 1,
                mass: m,
                bound,
            });
        }
    }
    let covered = masses
        .iter()
        .filter(|(_, m)| *m > 0.0)
        .fold(0u32, |acc, (c, _)| acc | c.bits());
    for i in 0..d {
        if covered & (1 << i) == 0 {
            out.push(Violation::Uncovered { coordinate: i + 1 });
        }
    }
    out
}
