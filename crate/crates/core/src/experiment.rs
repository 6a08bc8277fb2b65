//! Seeded simulation experiments: sample a mixture model repeatedly, fit
//! each configured method, and score the fits against the exact masses.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::ConeId;
use crate::error::{Error, Result};
use crate::evaluation::{hellinger, mass_detection_counts, roc_curve};
use crate::io::write_atomic;
use crate::mass::MassDistribution;
use crate::method1::{fit, FitConfig, FitResult, Method};
use crate::simulators::{
    asymmetric_logistic_spec, benchmark_mixture, logistic_spec, random_faces, sample_max_mixture,
    MaxMixtureSpec,
};

/// Model to simulate from: an explicit spec or a named preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelChoice {
    /// Five-dimensional Gaussian/logistic benchmark mixture.
    Maxmix {
        alpha: f64,
        rho: f64,
    },
    /// Asymmetric logistic on `faces` random faces of dimension `d`.
    Asymlog {
        d: usize,
        faces: usize,
        alpha: f64,
    },
    Spec {
        spec: MaxMixtureSpec,
    },
}

impl ModelChoice {
    /// Expands presets into an explicit spec; random faces use `seed`.
    pub fn resolve(&self, seed: u64) -> Result<MaxMixtureSpec> {
        match *self {
            ModelChoice::Maxmix { alpha, rho } => benchmark_mixture(alpha, rho),
            ModelChoice::Asymlog { d, faces, alpha } => {
                let f = random_faces(d, faces, seed)?;
                asymmetric_logistic_spec(d, &f, alpha)
            }
            ModelChoice::Spec { ref spec } => Ok(spec.clone()),
        }
    }
}

impl FromStr for ModelChoice {
    type Err = Error;

    /// `maxmix(alpha, rho)`, `asymlog(d, faces, alpha)` or `logistic(d, alpha)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpec(format!("unknown model preset {s:?}"));
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim();
        let args: Vec<&str> = s[open + 1..s.len() - 1].split(',').map(str::trim).collect();
        let num = |k: usize| -> Result<f64> {
            args.get(k)
                .and_then(|a| a.parse::<f64>().ok())
                .ok_or_else(bad)
        };
        let int = |k: usize| -> Result<usize> {
            args.get(k)
                .and_then(|a| a.parse::<usize>().ok())
                .ok_or_else(bad)
        };
        match (name, args.len()) {
            ("maxmix", 2) => Ok(ModelChoice::Maxmix {
                alpha: num(0)?,
                rho: num(1)?,
            }),
            ("asymlog", 3) => Ok(ModelChoice::Asymlog {
                d: int(0)?,
                faces: int(1)?,
                alpha: num(2)?,
            }),
            ("logistic", 2) => Ok(ModelChoice::Spec {
                spec: logistic_spec(int(0)?, num(1)?)?,
            }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Hellinger,
    Auc,
    Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: ModelChoice,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub methods: Vec<FitConfig>,
    pub metrics: Vec<Metric>,
    /// Threshold for detection counts.
    pub count_pi: f64,
}

impl ExperimentSpec {
    pub fn new(model: ModelChoice, n: usize, replicates: usize, seed: u64) -> Self {
        Self {
            model,
            n,
            replicates,
            seed,
            methods: vec![FitConfig::method1(), FitConfig::method2()],
            metrics: vec![Metric::Hellinger, Metric::Auc, Metric::Counts],
            count_pi: 0.01,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::param(
                "replicates",
                0.0,
                "need at least one replicate",
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidSpec("no methods configured".into()));
        }
        for m in &self.methods {
            m.validate()?;
        }
        Ok(())
    }
}

/// Seed of replicate `r` derived from the root seed.
pub fn replicate_seed(root: u64, r: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(r as u64);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRow {
    pub replicate: usize,
    pub seed: u64,
    pub method: Method,
    pub hellinger: Option<f64>,
    pub auc: Option<f64>,
    pub cones: usize,
    /// Sum of the fitted masses, kept for auditing normalization.
    pub mass_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_hellinger: Option<f64>,
    pub sd_hellinger: Option<f64>,
    pub mean_auc: Option<f64>,
    pub sd_auc: Option<f64>,
    /// Per-cone detection counts keyed by cone label.
    pub counts: Option<BTreeMap<String, usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    /// The simulated model after preset expansion.
    pub resolved_model: MaxMixtureSpec,
    pub truth: MassDistribution,
    pub rows: Vec<ReplicateRow>,
    pub summaries: Vec<MethodSummary>,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Normalized masses before sparsification, for ranking cones.
pub fn raw_distribution(r: &FitResult) -> Result<MassDistribution> {
    MassDistribution::new(r.d, r.raw_masses())
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let model = spec.model.resolve(spec.seed)?;
    let truth = crate::simulators::true_mass(&model)?;
    let truth_set: BTreeSet<ConeId> = truth.charged().collect();
    let want = |m: Metric| spec.metrics.contains(&m);

    let per_rep: Vec<Result<Vec<(ReplicateRow, MassDistribution)>>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| {
            let seed = replicate_seed(spec.seed, r);
            let x = sample_max_mixture(spec.n, &model, seed).map_err(|e| Error::Replicate {
                replicate: r,
                stage: "simulate",
                source: Box::new(e),
            })?;
            let mut out = Vec::with_capacity(spec.methods.len());
            for cfg in &spec.methods {
                let cfg = FitConfig {
                    seed,
                    ..cfg.clone()
                };
                let wrap = |stage: &'static str| {
                    move |e: Error| Error::Replicate {
                        replicate: r,
                        stage,
                        source: Box::new(e),
                    }
                };
                let res = fit(&x, &cfg).map_err(wrap("fit"))?;
                let h = if want(Metric::Hellinger) {
                    Some(hellinger(&truth, &res.masses).map_err(wrap("hellinger"))?)
                } else {
                    None
                };
                let auc = if want(Metric::Auc) {
                    let raw = raw_distribution(&res).map_err(wrap("auc"))?;
                    Some(roc_curve(&raw, &truth_set).map_err(wrap("auc"))?.auc)
                } else {
                    None
                };
                out.push((
                    ReplicateRow {
                        replicate: r,
                        seed,
                        method: cfg.method,
                        hellinger: h,
                        auc,
                        cones: res.masses.len(),
                        mass_total: res.masses.total(),
                    },
                    res.masses,
                ));
            }
            Ok(out)
        })
        .collect();

    let mut rows = Vec::new();
    let mut masses_by_method: BTreeMap<usize, Vec<MassDistribution>> = BTreeMap::new();
    for rep in per_rep {
        for (k, (row, m)) in rep?.into_iter().enumerate() {
            rows.push(row);
            masses_by_method.entry(k).or_default().push(m);
        }
    }

    let mut summaries = Vec::new();
    for (k, cfg) in spec.methods.iter().enumerate() {
        let mine: Vec<&ReplicateRow> = rows.iter().skip(k).step_by(spec.methods.len()).collect();
        let hs: Vec<f64> = mine.iter().filter_map(|r| r.hellinger).collect();
        let aucs: Vec<f64> = mine.iter().filter_map(|r| r.auc).collect();
        let (mh, sh) = if hs.is_empty() {
            (None, None)
        } else {
            let (a, b) = mean_sd(&hs);
            (Some(a), Some(b))
        };
        let (ma, sa) = if aucs.is_empty() {
            (None, None)
        } else {
            let (a, b) = mean_sd(&aucs);
            (Some(a), Some(b))
        };
        let counts = if want(Metric::Counts) {
            let refs: Vec<&MassDistribution> = masses_by_method[&k].iter().collect();
            Some(
                mass_detection_counts(&refs, spec.count_pi)?
                    .into_iter()
                    .map(|(c, v)| (c.to_string(), v))
                    .collect(),
            )
        } else {
            None
        };
        summaries.push(MethodSummary {
            method: cfg.method,
            mean_hellinger: mh,
            sd_hellinger: sh,
            mean_auc: ma,
            sd_auc: sa,
            counts,
        });
    }

    Ok(ExperimentReport {
        spec: spec.clone(),
        resolved_model: model,
        truth,
        rows,
        summaries,
    })
}

impl ExperimentReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn rows_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["replicate", "seed", "method", "hellinger", "auc", "cones"])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            let method = match r.method {
                Method::One => "1",
                Method::Two => "2",
            };
            w.write_record([
                r.replicate.to_string(),
                r.seed.to_string(),
                method.to_string(),
                opt(r.hellinger),
                opt(r.auc),
                r.cones.to_string(),
            ])?;
        }
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    }

    /// Writes `report.json` and `replicates.csv` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        write_atomic(
            &dir.join("report.json"),
            serde_json::to_string_pretty(self)?.as_bytes(),
        )?;
        write_atomic(&dir.join("replicates.csv"), &self.rows_csv()?)?;
        Ok(())
    }
}
