//! Truncation-based cone detection: rows are partitioned by which
//! coordinates survive truncation, each region's minimum positive value gets
//! a censored tail fit, and the fits are recombined at a high level.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::cone::ConeId;
use crate::error::{Error, Result};
use crate::margins::{truncate, SampleMatrix, TruncatedMatrix};
use crate::mass::MassDistribution;
use crate::tail_fit::{censored_fit, quantile_in_place, survival_estimate, TailFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    One,
    Two,
}

/// Tuning parameters for both methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub method: Method,
    /// Truncation quantile (method one).
    pub p: f64,
    /// Region exponent (method two).
    pub delta: f64,
    /// Per-region threshold quantile.
    pub u_quantile: f64,
    /// Extrapolation quantile.
    pub q_quantile: f64,
    /// Masses below this are dropped.
    pub pi: f64,
    /// Regions with at most this many rows are not fitted.
    pub m: usize,
    pub seed: u64,
}

impl FitConfig {
    pub fn method1() -> Self {
        Self {
            method: Method::One,
            p: 0.5,
            delta: 0.5,
            u_quantile: 0.75,
            q_quantile: 0.9999,
            pi: 0.001,
            m: 1,
            seed: 0,
        }
    }

    pub fn method2() -> Self {
        Self {
            method: Method::Two,
            u_quantile: 0.85,
            ..Self::method1()
        }
    }

    pub fn for_method(method: Method) -> Self {
        match method {
            Method::One => Self::method1(),
            Method::Two => Self::method2(),
        }
    }

    /// Replaces the method's own tuning value (`p` or `delta`).
    pub fn with_tuning(&self, value: f64) -> Self {
        let mut cfg = self.clone();
        match cfg.method {
            Method::One => cfg.p = value,
            Method::Two => cfg.delta = value,
        }
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let open = |name, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::param(name, v, "must lie in (0, 1)"))
            }
        };
        match self.method {
            Method::One => open("p", self.p)?,
            Method::Two => {
                if !(0.0..1.0).contains(&self.delta) {
                    return Err(Error::param("delta", self.delta, "must lie in [0, 1)"));
                }
            }
        }
        open("u_quantile", self.u_quantile)?;
        if !(self.q_quantile > 0.0 && self.q_quantile <= 1.0) {
            return Err(Error::param(
                "q_quantile",
                self.q_quantile,
                "must lie in (0, 1]",
            ));
        }
        if !(0.0..1.0).contains(&self.pi) {
            return Err(Error::param("pi", self.pi, "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Per-cone summary of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeFit {
    pub cone: ConeId,
    /// Rows in the cone's region.
    pub n: usize,
    /// Empirical region probability.
    pub weight: f64,
    pub tail: Option<TailFit>,
    /// Normalized mass before sparsification.
    pub raw_mass: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub config: FitConfig,
    pub d: usize,
    /// Rows that entered the region assignment.
    pub n_rows: usize,
    pub q_used: f64,
    pub per_cone: Vec<ConeFit>,
    pub masses: MassDistribution,
    pub diagnostics: Vec<String>,
}

impl FitResult {
    pub fn mass(&self, cone: ConeId) -> f64 {
        self.masses.get(cone)
    }

    /// Normalized masses before sparsification, for every region seen.
    pub fn raw_masses(&self) -> impl Iterator<Item = (ConeId, f64)> + '_ {
        self.per_cone.iter().map(|c| (c.cone, c.raw_mass))
    }

    /// Number of cones with mass strictly above `pi`.
    pub fn count_above(&self, pi: f64) -> usize {
        self.masses.iter().filter(|(_, m)| *m > pi).count()
    }

    pub fn cone_fit(&self, cone: ConeId) -> Option<&ConeFit> {
        self.per_cone.iter().find(|c| c.cone == cone)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ConeFitWire {
    cone: String,
    n: usize,
    weight: f64,
    tau: Option<f64>,
    k: Option<f64>,
    u: Option<f64>,
    n_exceed: Option<usize>,
    raw_mass: f64,
    mass: f64,
}

#[derive(Serialize, Deserialize)]
struct FitResultWire {
    config: FitConfig,
    d: usize,
    n_rows: usize,
    q_used: f64,
    cones: Vec<ConeFitWire>,
    masses: MassDistribution,
    diagnostics: Vec<String>,
}

impl Serialize for FitResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FitResultWire {
            config: self.config.clone(),
            d: self.d,
            n_rows: self.n_rows,
            q_used: self.q_used,
            cones: self
                .per_cone
                .iter()
                .map(|c| ConeFitWire {
                    cone: c.cone.to_string(),
                    n: c.n,
                    weight: c.weight,
                    tau: c.tail.map(|t| t.tau_hat),
                    k: c.tail.map(|t| t.k_hat),
                    u: c.tail.map(|t| t.u),
                    n_exceed: c.tail.map(|t| t.n_exceed),
                    raw_mass: c.raw_mass,
                    mass: c.mass,
                })
                .collect(),
            masses: self.masses.clone(),
            diagnostics: self.diagnostics.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FitResult {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let w = FitResultWire::deserialize(de)?;
        let mut per_cone = Vec::with_capacity(w.cones.len());
        for c in w.cones {
            let cone = ConeId::parse(&c.cone, w.d).map_err(D::Error::custom)?;
            let tail = match (c.tau, c.k, c.u, c.n_exceed) {
                (Some(tau_hat), Some(k_hat), Some(u), Some(n_exceed)) => Some(TailFit {
                    tau_hat,
                    k_hat,
                    u,
                    n_total: c.n,
                    n_exceed,
                }),
                (None, None, None, None) => None,
                _ => {
                    return Err(D::Error::custom(format!(
                        "partial tail fit for cone {cone}"
                    )))
                }
            };
            per_cone.push(ConeFit {
                cone,
                n: c.n,
                weight: c.weight,
                tail,
                raw_mass: c.raw_mass,
                mass: c.mass,
            });
        }
        if w.masses.dim() != w.d {
            return Err(D::Error::custom("masses dimension does not match d"));
        }
        Ok(FitResult {
            config: w.config,
            d: w.d,
            n_rows: w.n_rows,
            q_used: w.q_used,
            per_cone,
            masses: w.masses,
            diagnostics: w.diagnostics,
        })
    }
}

/// Sum that does not depend on the order of the inputs.
pub(crate) fn stable_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.iter().sum()
}

/// Zeroes masses below `pi` and renormalizes the rest.
pub fn sparsify(masses: &MassDistribution, pi: f64) -> Result<MassDistribution> {
    if !(0.0..1.0).contains(&pi) {
        return Err(Error::param("pi", pi, "must lie in [0, 1)"));
    }
    let kept: Vec<(ConeId, f64)> = masses.iter().filter(|(_, m)| *m >= pi).collect();
    let total = stable_sum(kept.iter().map(|(_, m)| *m));
    if kept.is_empty() || total <= 0.0 {
        return Err(Error::AllMassNegligible { pi });
    }
    MassDistribution::new(masses.dim(), kept.into_iter().map(|(c, m)| (c, m / total)))
}

/// One region handed to the shared recombination step.
pub(crate) struct Region {
    pub cone: ConeId,
    pub values: Vec<f64>,
    pub weight: f64,
}

/// Fits every region, evaluates the fitted survival at `q`, and turns the
/// weighted survivals into a sparsified mass distribution.
pub(crate) fn combine_regions(
    d: usize,
    n_rows: usize,
    regions: Vec<Region>,
    q: f64,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let mut diagnostics = Vec::new();
    let mut per_cone = Vec::with_capacity(regions.len());
    let mut scores = Vec::with_capacity(regions.len());
    for mut region in regions {
        let n = region.values.len();
        let mut tail = None;
        let mut score = 0.0;
        if n > cfg.m {
            let u = quantile_in_place(&mut region.values, cfg.u_quantile)?;
            match censored_fit(&region.values, u) {
                Ok(fit) => {
                    let surv = if q >= fit.u {
                        survival_estimate(&fit, q)?
                    } else {
                        diagnostics.push(format!(
                            "cone {}: level {q} below threshold {}; using empirical exceedance fraction",
                            region.cone, fit.u
                        ));
                        region.values.iter().filter(|&&v| v > q).count() as f64 / n as f64
                    };
                    score = surv * region.weight;
                    tail = Some(fit);
                }
                Err(Error::NoExceedances { threshold }) => diagnostics.push(format!(
                    "cone {}: no values above threshold {threshold}; mass set to zero",
                    region.cone
                )),
                Err(e) => return Err(e),
            }
        }
        scores.push(score);
        per_cone.push(ConeFit {
            cone: region.cone,
            n,
            weight: region.weight,
            tail,
            raw_mass: 0.0,
            mass: 0.0,
        });
    }
    let total = stable_sum(scores.iter().copied());
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::EmptyModel);
    }
    for (c, s) in per_cone.iter_mut().zip(&scores) {
        c.raw_mass = s / total;
    }
    let raw = MassDistribution::new(d, per_cone.iter().map(|c| (c.cone, c.raw_mass)))?;
    let masses = sparsify(&raw, cfg.pi)?;
    for c in per_cone.iter_mut() {
        c.mass = masses.get(c.cone);
    }
    Ok(FitResult {
        config: cfg.clone(),
        d,
        n_rows,
        q_used: q,
        per_cone,
        masses,
        diagnostics,
    })
}

/// Groups truncated rows by their set of positive coordinates; each row
/// contributes the minimum of its positive entries.
pub fn assign_regions(t: &TruncatedMatrix) -> BTreeMap<ConeId, Vec<f64>> {
    let d = t.ncols();
    let mut out: BTreeMap<ConeId, Vec<f64>> = BTreeMap::new();
    for row in t.rows() {
        let mut bits = 0u32;
        let mut min = f64::INFINITY;
        for (i, &v) in row.iter().enumerate() {
            if v > 0.0 {
                bits |= 1 << i;
                min = min.min(v);
            }
        }
        if let Ok(cone) = ConeId::new(bits, d) {
            out.entry(cone).or_default().push(min);
        }
    }
    out
}

/// Truncation-based estimate of the cone masses of `x`.
pub fn fit_method1(x: &SampleMatrix, cfg: &FitConfig) -> Result<FitResult> {
    if cfg.method != Method::One {
        return Err(Error::param("method", 2.0, "fit_method1 needs method one"));
    }
    cfg.validate()?;
    let t = truncate(x, cfg.p)?;
    let n_rows = t.nrows();
    if n_rows == 0 {
        return Err(Error::EmptyModel);
    }
    let regions = assign_regions(&t);
    let mut pooled: Vec<f64> = regions.values().flatten().copied().collect();
    let q = quantile_in_place(&mut pooled, cfg.q_quantile)?;
    let regions = regions
        .into_iter()
        .map(|(cone, values)| Region {
            cone,
            weight: values.len() as f64 / n_rows as f64,
            values,
        })
        .collect();
    combine_regions(x.ncols(), n_rows, regions, q, cfg)
}

/// Dispatches on `cfg.method`.
pub fn fit(x: &SampleMatrix, cfg: &FitConfig) -> Result<FitResult> {
    match cfg.method {
        Method::One => fit_method1(x, cfg),
        Method::Two => crate::method2::fit_method2(x, cfg),
    }
}
