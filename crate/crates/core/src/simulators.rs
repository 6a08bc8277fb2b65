//! Seeded samplers for the copula families used to validate the estimators,
//! together with their exact cone-mass ground truth.
//!
//! Every sampler returns standard Fréchet margins. Max-mixtures draw each
//! component block from its own ChaCha stream, selected by the component's
//! cone bitmask, so reordering components never changes a sample.

use std::collections::BTreeMap;

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::erf::erfc;

use crate::cone::ConeId;
use crate::error::{Error, Result};
use crate::margins::SampleMatrix;
use crate::mass::MassDistribution;

const THETA_TOLERANCE: f64 = 1e-12;

/// Dependence family of one max-mixture block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    /// Symmetric logistic extreme-value copula, `alpha ∈ (0, 1]`.
    Logistic { alpha: f64 },
    /// Equicorrelated Gaussian copula.
    Gaussian { rho: f64 },
    /// A single independent Fréchet variable.
    Point,
}

/// One block `θ_C · Z_C` of a max-mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub cone: ConeId,
    pub family: Family,
    /// Weights aligned with `cone.indices()`.
    pub theta: Vec<f64>,
}

impl Component {
    pub fn theta_of(&self, coord: usize) -> Option<f64> {
        self.cone
            .indices()
            .position(|i| i == coord)
            .map(|k| self.theta[k])
    }

    /// Whether the block is asymptotically dependent across its coordinates.
    fn charges_own_cone(&self) -> bool {
        match self.family {
            Family::Logistic { alpha } => alpha < 1.0 || self.cone.len() == 1,
            Family::Point => true,
            Family::Gaussian { .. } => self.cone.len() == 1,
        }
    }
}

/// Componentwise maximum `X_i = max_{C ∋ i} θ_{i,C} Z_{i,C}` of independent
/// blocks with Fréchet margins.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMixtureSpec {
    d: usize,
    components: Vec<Component>,
}

impl MaxMixtureSpec {
    pub fn new(d: usize, components: Vec<Component>) -> Result<Self> {
        let spec = Self { d, components };
        spec.validate()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    fn validate(&self) -> Result<()> {
        let d = self.d;
        if d < 2 {
            return Err(Error::TooFewColumns(d));
        }
        if self.components.is_empty() {
            return Err(Error::InvalidSpec("no components".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut sums = vec![0.0; d];
        for comp in &self.components {
            let c = comp.cone;
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.dim(),
                });
            }
            if !seen.insert(c) {
                return Err(Error::InvalidSpec(format!("cone {c} listed twice")));
            }
            if comp.theta.len() != c.len() {
                return Err(Error::InvalidSpec(format!(
                    "cone {c} has {} weights for {} coordinates",
                    comp.theta.len(),
                    c.len()
                )));
            }
            for (i, &t) in c.indices().zip(&comp.theta) {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::InvalidSpec(format!(
                        "weight {t} for coordinate {} in cone {c} outside [0, 1]",
                        i + 1
                    )));
                }
                sums[i] += t;
            }
            match comp.family {
                Family::Logistic { alpha } => check_alpha(alpha, true)?,
                Family::Gaussian { rho } => {
                    if !(rho > -1.0 && rho < 1.0) {
                        return Err(Error::param("rho", rho, "must lie in (-1, 1)"));
                    }
                    CorrelationMatrix::equicorrelated(c.len(), rho)?;
                }
                Family::Point => {
                    if c.len() != 1 {
                        return Err(Error::InvalidSpec(format!(
                            "point family on non-singleton cone {c}"
                        )));
                    }
                }
            }
        }
        for (i, &s) in sums.iter().enumerate() {
            if s == 0.0 {
                return Err(Error::UncoveredCoordinate(i + 1));
            }
            if (s - 1.0).abs() > THETA_TOLERANCE {
                return Err(Error::InvalidSpec(format!(
                    "weights for coordinate {} sum to {s}, expected 1",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let mut comps = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let cone = comp.cone.permuted(perm)?;
            let mut pairs: Vec<(usize, f64)> = comp
                .cone
                .indices()
                .map(|i| perm[i])
                .zip(comp.theta.iter().copied())
                .collect();
            pairs.sort_by_key(|p| p.0);
            comps.push(Component {
                cone,
                family: comp.family,
                theta: pairs.into_iter().map(|p| p.1).collect(),
            });
        }
        Self::new(self.d, comps)
    }
}

#[derive(Serialize, Deserialize)]
struct ComponentWire {
    cone: String,
    #[serde(flatten)]
    family: Family,
    theta: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpecWire {
    d: usize,
    components: Vec<ComponentWire>,
}

impl Serialize for MaxMixtureSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecWire {
            d: self.d,
            components: self
                .components
                .iter()
                .map(|c| ComponentWire {
                    cone: c.cone.to_string(),
                    family: c.family,
                    theta: c.theta.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MaxMixtureSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = SpecWire::deserialize(de)?;
        let mut comps = Vec::with_capacity(wire.components.len());
        for c in wire.components {
            comps.push(Component {
                cone: ConeId::parse(&c.cone, wire.d).map_err(serde::de::Error::custom)?,
                family: c.family,
                theta: c.theta,
            });
        }
        MaxMixtureSpec::new(wire.d, comps).map_err(serde::de::Error::custom)
    }
}

/// Validated correlation matrix with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    matrix: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl CorrelationMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let mut m = DMatrix::zeros(d, d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: d,
                    found: r.len(),
                });
            }
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Self::new(m)
    }

    pub fn equicorrelated(d: usize, rho: f64) -> Result<Self> {
        let mut m = DMatrix::from_element(d, d, rho);
        m.fill_diagonal(1.0);
        Self::new(m)
    }

    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let d = matrix.nrows();
        if d == 0 || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.ncols(),
            });
        }
        for i in 0..d {
            if !matrix.row(i).iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: 0 });
            }
            if (matrix[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::param("diagonal", matrix[(i, i)], "must be 1"));
            }
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 {
                    return Err(Error::param(
                        "correlation",
                        matrix[(i, j)],
                        "matrix not symmetric",
                    ));
                }
            }
        }
        for k in 1..=d {
            if matrix.view((0, 0), (k, k)).determinant() <= 0.0 {
                return Err(Error::NotPositiveDefinite { minor: k });
            }
        }
        let chol = Cholesky::new(matrix.clone()).ok_or(Error::NotPositiveDefinite { minor: d })?;
        Ok(Self { matrix, chol })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Submatrix over the coordinates of `cone`.
    pub fn restrict(&self, cone: ConeId) -> Result<Self> {
        let idx: Vec<usize> = cone.indices().collect();
        let m = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.matrix[(idx[a], idx[b])]);
        Self::new(m)
    }

    pub(crate) fn lower(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// `1ᵀ Σ⁻¹ 1`.
    pub fn ones_quadratic_form(&self) -> f64 {
        let ones = nalgebra::DVector::from_element(self.dim(), 1.0);
        self.chol.solve(&ones).sum()
    }
}

fn check_alpha(alpha: f64, allow_one: bool) -> Result<()> {
    let ok = alpha > 0.0 && (alpha < 1.0 || (allow_one && alpha == 1.0));
    if ok {
        Ok(())
    } else if allow_one {
        Err(Error::param("alpha", alpha, "must lie in (0, 1]"))
    } else {
        Err(Error::param("alpha", alpha, "must lie in (0, 1)"))
    }
}

fn block_rng(seed: u64, cone: ConeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(cone.bits()));
    rng
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Positive stable variable with Laplace transform `exp(-t^alpha)`,
/// `0 < alpha < 1`, by the Chambers–Mallows–Stuck (Kanter) construction.
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = std::f64::consts::PI * open_unit(rng);
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = ((1.0 - alpha) * u).sin() / e;
    a * b.powf((1.0 - alpha) / alpha)
}

/// `-1/log Φ(z)` without losing precision in either tail.
pub fn normal_to_frechet(z: f64) -> f64 {
    let log_phi = if z > 0.0 {
        let upper = (0.5 * erfc(z / std::f64::consts::SQRT_2)).max(f64::MIN_POSITIVE);
        (-upper).ln_1p()
    } else {
        (0.5 * erfc(-z / std::f64::consts::SQRT_2))
            .max(f64::MIN_POSITIVE)
            .ln()
    };
    -1.0 / log_phi
}

/// Fills `out` (row-major, `width` = |C| columns) with one block of draws.
fn draw_block(
    family: Family,
    width: usize,
    n: usize,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<f64>,
) -> Result<()> {
    out.clear();
    out.reserve(n * width);
    match family {
        Family::Point => {
            for _ in 0..n * width {
                let e: f64 = Exp1.sample(rng);
                out.push(1.0 / e);
            }
        }
        Family::Logistic { alpha: 1.0 } => {
            for _ in 0..n * width {
                let e: f64 = Exp1.sample(rng);
                out.push(1.0 / e);
            }
        }
        Family::Logistic { alpha } => {
            for _ in 0..n {
                let s = positive_stable(alpha, rng);
                for _ in 0..width {
                    let e: f64 = Exp1.sample(rng);
                    out.push((s / e).powf(alpha));
                }
            }
        }
        Family::Gaussian { rho } => {
            let corr = CorrelationMatrix::equicorrelated(width, rho)?;
            gaussian_rows(&corr, n, rng, out);
        }
    }
    Ok(())
}

fn gaussian_rows(corr: &CorrelationMatrix, n: usize, rng: &mut ChaCha8Rng, out: &mut Vec<f64>) {
    let l = corr.lower();
    let d = corr.dim();
    let mut eps = vec![0.0; d];
    for _ in 0..n {
        for e in eps.iter_mut() {
            *e = StandardNormal.sample(rng);
        }
        for i in 0..d {
            let z: f64 = (0..=i).map(|k| l[(i, k)] * eps[k]).sum();
            out.push(normal_to_frechet(z));
        }
    }
}

pub fn sample_max_mixture(n: usize, spec: &MaxMixtureSpec, seed: u64) -> Result<SampleMatrix> {
    spec.validate()?;
    let d = spec.d;
    let mut x = vec![0.0; n * d];
    let mut block = Vec::new();
    for comp in &spec.components {
        let mut rng = block_rng(seed, comp.cone);
        let width = comp.cone.len();
        draw_block(comp.family, width, n, &mut rng, &mut block)?;
        let idx: Vec<usize> = comp.cone.indices().collect();
        for (row, zs) in x.chunks_exact_mut(d).zip(block.chunks_exact(width)) {
            for ((&i, &t), &z) in idx.iter().zip(&comp.theta).zip(zs) {
                let v = t * z;
                if v > row[i] {
                    row[i] = v;
                }
            }
        }
    }
    Ok(SampleMatrix::from_flat_unchecked(x, d))
}

/// Symmetric logistic extreme-value sample; `alpha = 1` is independence.
pub fn sample_logistic(n: usize, d: usize, alpha: f64, seed: u64) -> Result<SampleMatrix> {
    check_alpha(alpha, true)?;
    sample_max_mixture(n, &logistic_spec(d, alpha)?, seed)
}

pub fn logistic_spec(d: usize, alpha: f64) -> Result<MaxMixtureSpec> {
    MaxMixtureSpec::new(
        d,
        vec![Component {
            cone: ConeId::full(d)?,
            family: Family::Logistic { alpha },
            theta: vec![1.0; d],
        }],
    )
}

pub fn sample_gaussian_copula(
    n: usize,
    corr: &CorrelationMatrix,
    seed: u64,
) -> Result<SampleMatrix> {
    let d = corr.dim();
    if d < 2 {
        return Err(Error::TooFewColumns(d));
    }
    let mut rng = block_rng(seed, ConeId::full(d)?);
    let mut out = Vec::with_capacity(n * d);
    gaussian_rows(corr, n, &mut rng, &mut out);
    Ok(SampleMatrix::from_flat_unchecked(out, d))
}

/// Inverted logistic copula: logistic draws pushed through the survival flip.
pub fn sample_inverted_logistic(n: usize, d: usize, alpha: f64, seed: u64) -> Result<SampleMatrix> {
    check_alpha(alpha, false)?;
    let v = sample_logistic(n, d, alpha, seed)?;
    let flipped = v
        .as_flat()
        .iter()
        .map(|&vi| {
            // U = 1 - exp(-1/V), computed as -expm1(-1/V)
            let log_u = (-(-1.0 / vi).exp_m1()).max(f64::MIN_POSITIVE).ln();
            -1.0 / log_u
        })
        .collect();
    Ok(SampleMatrix::from_flat_unchecked(flipped, d))
}

/// Asymmetric logistic spec charging exactly the given faces, with
/// `θ_{i,F} = 1 / #{faces containing i}`.
pub fn asymmetric_logistic_spec(d: usize, faces: &[ConeId], alpha: f64) -> Result<MaxMixtureSpec> {
    check_alpha(alpha, true)?;
    let mut cover = vec![0usize; d];
    for f in faces {
        if f.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: f.dim(),
            });
        }
        for i in f.indices() {
            cover[i] += 1;
        }
    }
    if let Some(i) = cover.iter().position(|&c| c == 0) {
        return Err(Error::UncoveredCoordinate(i + 1));
    }
    let comps = faces
        .iter()
        .map(|&f| Component {
            cone: f,
            family: if f.len() == 1 {
                Family::Point
            } else {
                Family::Logistic { alpha }
            },
            theta: f.indices().map(|i| 1.0 / cover[i] as f64).collect(),
        })
        .collect();
    MaxMixtureSpec::new(d, comps)
}

pub fn sample_asymmetric_logistic(
    n: usize,
    d: usize,
    faces: &[ConeId],
    alpha: f64,
    seed: u64,
) -> Result<SampleMatrix> {
    sample_max_mixture(n, &asymmetric_logistic_spec(d, faces, alpha)?, seed)
}

/// `f` distinct faces drawn uniformly among all cones, redrawn until every
/// coordinate is covered.
pub fn random_faces(d: usize, f: usize, seed: u64) -> Result<Vec<ConeId>> {
    let all = ConeId::all(d)?;
    if f == 0 || f > all.len() {
        return Err(Error::param("faces", f as f64, "must lie in 1..=2^d - 1"));
    }
    let full = crate::cone::full_mask(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let picked: Vec<ConeId> = rand::seq::index::sample(&mut rng, all.len(), f)
            .into_iter()
            .map(|k| all[k])
            .collect();
        let covered = picked.iter().fold(0u32, |m, c| m | c.bits());
        if covered == full {
            let mut picked = picked;
            picked.sort();
            return Ok(picked);
        }
    }
    Err(Error::InvalidSpec(format!(
        "could not cover {d} coordinates with {f} random faces"
    )))
}

/// Five-dimensional mixture of two bivariate Gaussian blocks and three
/// logistic blocks with equal mass 1/7 on each of the seven charged cones.
pub fn benchmark_mixture(alpha: f64, rho: f64) -> Result<MaxMixtureSpec> {
    let d = 5;
    let c = |s: &str| ConeId::parse(s, d);
    let s7 = |v: &[f64]| v.iter().map(|x| x / 7.0).collect::<Vec<_>>();
    MaxMixtureSpec::new(
        d,
        vec![
            Component {
                cone: c("1,2")?,
                family: Family::Gaussian { rho },
                theta: s7(&[5.0, 5.0]),
            },
            Component {
                cone: c("4,5")?,
                family: Family::Gaussian { rho },
                theta: s7(&[5.0, 5.0]),
            },
            Component {
                cone: c("1,2,3")?,
                family: Family::Logistic { alpha },
                theta: s7(&[1.0, 1.0, 3.0]),
            },
            Component {
                cone: c("3,4,5")?,
                family: Family::Logistic { alpha },
                theta: s7(&[3.0, 1.0, 1.0]),
            },
            Component {
                cone: c("1,2,3,4,5")?,
                family: Family::Logistic { alpha },
                theta: s7(&[1.0; 5]),
            },
        ],
    )
}

/// Limit proportion of extremal mass on each cone.
///
/// An asymptotically dependent block on `C` puts `Σ_{i∈C} θ_{i,C} / d` on
/// `C`; an asymptotically independent block spreads `θ_{i,C} / d` onto each
/// vertex `{i}`.
pub fn true_mass(spec: &MaxMixtureSpec) -> Result<MassDistribution> {
    spec.validate()?;
    let d = spec.d;
    let mut acc: BTreeMap<ConeId, f64> = BTreeMap::new();
    for comp in &spec.components {
        if comp.charges_own_cone() {
            let s: f64 = comp.theta.iter().sum();
            *acc.entry(comp.cone).or_default() += s / d as f64;
        } else {
            for (i, &t) in comp.cone.indices().zip(&comp.theta) {
                *acc.entry(ConeId::singleton(i, d)?).or_default() += t / d as f64;
            }
        }
    }
    MassDistribution::new(d, acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn frechet_ks(col: &[f64]) -> f64 {
        let mut v = col.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        v.iter()
            .enumerate()
            .map(|(k, &x)| {
                let f = (-1.0 / x).exp();
                (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    // Critical value of the one-sample KS statistic at level 0.001.
    fn ks_crit_001(n: usize) -> f64 {
        1.949 / (n as f64).sqrt()
    }

    fn spearman(a: &[f64], b: &[f64]) -> f64 {
        let rank = |v: &[f64]| {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
            let mut r = vec![0.0; v.len()];
            for (k, &i) in idx.iter().enumerate() {
                r[i] = k as f64;
            }
            r
        };
        let (ra, rb) = (rank(a), rank(b));
        let n = a.len() as f64;
        let m = (n - 1.0) / 2.0;
        let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - m) * (y - m)).sum();
        let var: f64 = ra.iter().map(|x| (x - m) * (x - m)).sum();
        cov / var
    }

    #[test]
    fn logistic_alpha_one_is_independent() {
        let x = sample_logistic(10_000, 2, 1.0, 1).unwrap();
        let r = spearman(&x.column(0), &x.column(1));
        // two-sided level 0.01 under independence
        assert!(r.abs() * (9_999f64).sqrt() < 2.576, "rho_s = {r}");
    }

    #[test]
    fn samplers_are_deterministic() {
        let a = sample_logistic(500, 3, 0.4, 11).unwrap();
        let b = sample_logistic(500, 3, 0.4, 11).unwrap();
        assert_eq!(a, b);
        let c = sample_logistic(500, 3, 0.4, 12).unwrap();
        assert_ne!(a, c);
        let s = benchmark_mixture(0.3, 0.5).unwrap();
        assert_eq!(
            sample_max_mixture(300, &s, 5).unwrap(),
            sample_max_mixture(300, &s, 5).unwrap()
        );
        assert_eq!(
            sample_inverted_logistic(300, 3, 0.5, 1).unwrap(),
            sample_inverted_logistic(300, 3, 0.5, 1).unwrap()
        );
    }

    #[test]
    fn logistic_pairwise_extremal_coefficient() {
        // chi = 2 - 2^alpha for the logistic model
        let alpha = 0.5;
        let n = 100_000;
        let x = sample_logistic(n, 2, alpha, 3).unwrap();
        let level = crate::margins::frechet_quantile(0.99);
        let joint = x.rows().filter(|r| r[0] > level && r[1] > level).count();
        let chi_hat = joint as f64 / n as f64 / 0.01;
        let chi = chi_from_exponent(alpha);
        assert!(
            (chi_hat - chi).abs() < 0.05,
            "chi_hat = {chi_hat}, chi = {chi}"
        );
        assert_abs_diff_eq!(chi, 2.0 - 2f64.powf(alpha), epsilon = 1e-6);
    }

    /// chi = 2 - V(1,1), with V(1,1) = 2 ∫ max(w, 1-w) dH(w) evaluated by
    /// quadrature of the logistic spectral density.
    fn chi_from_exponent(alpha: f64) -> f64 {
        let h = |w: f64| {
            0.5 * (1.0 / alpha - 1.0)
                * (w.powf(-1.0 / alpha) + (1.0 - w).powf(-1.0 / alpha)).powf(alpha - 2.0)
                * (w * (1.0 - w)).powf(-1.0 - 1.0 / alpha)
        };
        let steps = 200_000;
        let dw = 1.0 / steps as f64;
        let v11: f64 = (0..steps)
            .map(|k| {
                let w = (k as f64 + 0.5) * dw;
                2.0 * w.max(1.0 - w) * h(w) * dw
            })
            .sum();
        2.0 - v11
    }

    #[test]
    fn gaussian_identity_and_strong_correlation() {
        let id = CorrelationMatrix::equicorrelated(2, 0.0).unwrap();
        let x = sample_gaussian_copula(10_000, &id, 2).unwrap();
        let r = spearman(&x.column(0), &x.column(1));
        assert!(r.abs() * (9_999f64).sqrt() < 2.576);

        let strong = CorrelationMatrix::equicorrelated(2, 0.999).unwrap();
        let y = sample_gaussian_copula(10_000, &strong, 2).unwrap();
        assert!(spearman(&y.column(0), &y.column(1)) > 0.99);
    }

    #[test]
    fn gaussian_rejects_non_pd_with_minor() {
        let rows = vec![
            vec![1.0, 0.9, -0.9],
            vec![0.9, 1.0, 0.9],
            vec![-0.9, 0.9, 1.0],
        ];
        assert!(matches!(
            CorrelationMatrix::from_rows(&rows),
            Err(Error::NotPositiveDefinite { minor: 3 })
        ));
        assert!(matches!(
            CorrelationMatrix::equicorrelated(2, 1.0),
            Err(Error::NotPositiveDefinite { minor: 2 })
        ));
    }

    #[test]
    fn gaussian_eta_from_hill_fit() {
        let corr = CorrelationMatrix::equicorrelated(2, 0.5).unwrap();
        let x = sample_gaussian_copula(100_000, &corr, 9).unwrap();
        let mins: Vec<f64> = x.rows().map(|r| r[0].min(r[1])).collect();
        let u = crate::tail_fit::empirical_quantile(&mins, 0.95).unwrap();
        let fit = crate::tail_fit::censored_fit(&mins, u).unwrap();
        assert!(
            (fit.tau_hat - 0.75).abs() < 0.1,
            "eta_hat = {}",
            fit.tau_hat
        );
    }

    #[test]
    fn normal_to_frechet_is_finite_in_tails() {
        for z in [-50.0, -10.0, 0.0, 8.0, 20.0, 40.0] {
            let v = normal_to_frechet(z);
            assert!(v.is_finite() && v > 0.0, "z = {z}: {v}");
        }
        assert_abs_diff_eq!(normal_to_frechet(0.0), -1.0 / 0.5f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn inverted_logistic_joint_tail_index() {
        let x = sample_inverted_logistic(100_000, 3, 0.5, 4).unwrap();
        let mins: Vec<f64> = x.rows().map(|r| r[0].min(r[1]).min(r[2])).collect();
        let u = crate::tail_fit::empirical_quantile(&mins, 0.95).unwrap();
        let fit = crate::tail_fit::censored_fit(&mins, u).unwrap();
        assert!(
            (fit.tau_hat - 3f64.powf(-0.5)).abs() < 0.05,
            "tau = {}",
            fit.tau_hat
        );
    }

    #[test]
    fn inverted_logistic_near_independence() {
        let x = sample_inverted_logistic(100_000, 2, 0.999, 4).unwrap();
        let mins: Vec<f64> = x.rows().map(|r| r[0].min(r[1])).collect();
        let u = crate::tail_fit::empirical_quantile(&mins, 0.95).unwrap();
        let fit = crate::tail_fit::censored_fit(&mins, u).unwrap();
        assert!((fit.tau_hat - 0.5).abs() < 0.05, "tau = {}", fit.tau_hat);
        assert!(sample_inverted_logistic(10, 2, 1.0, 1).is_err());
    }

    #[test]
    fn marginals_are_standard_frechet() {
        let n = 10_000;
        let samples = [
            sample_logistic(n, 3, 0.3, 1).unwrap(),
            sample_inverted_logistic(n, 3, 0.3, 1).unwrap(),
            sample_gaussian_copula(n, &CorrelationMatrix::equicorrelated(3, 0.6).unwrap(), 1)
                .unwrap(),
            sample_max_mixture(n, &benchmark_mixture(0.25, 0.5).unwrap(), 1).unwrap(),
            sample_asymmetric_logistic(n, 4, &random_faces(4, 6, 3).unwrap(), 0.5, 1).unwrap(),
        ];
        for (k, x) in samples.iter().enumerate() {
            for j in 0..x.ncols() {
                let ks = frechet_ks(&x.column(j));
                assert!(ks < ks_crit_001(n), "sampler {k} column {j}: KS = {ks}");
            }
        }
    }

    #[test]
    fn benchmark_mixture_margins_at_level_001() {
        let n = 10_000;
        let x = sample_max_mixture(n, &benchmark_mixture(0.5, 0.25).unwrap(), 77).unwrap();
        for j in 0..5 {
            // level 0.01 critical value
            assert!(frechet_ks(&x.column(j)) < 1.628 / (n as f64).sqrt());
        }
    }

    #[test]
    fn single_full_component_matches_logistic() {
        let spec = logistic_spec(4, 0.6).unwrap();
        assert_eq!(
            sample_max_mixture(100, &spec, 8).unwrap(),
            sample_logistic(100, 4, 0.6, 8).unwrap()
        );
    }

    #[test]
    fn empty_sample() {
        let x = sample_max_mixture(0, &benchmark_mixture(0.5, 0.0).unwrap(), 1).unwrap();
        assert_eq!(x.nrows(), 0);
        assert_eq!(x.ncols(), 5);
    }

    #[test]
    fn component_order_does_not_matter() {
        let s = benchmark_mixture(0.4, 0.3).unwrap();
        let mut comps = s.components().to_vec();
        comps.reverse();
        let r = MaxMixtureSpec::new(5, comps).unwrap();
        assert_eq!(
            sample_max_mixture(200, &s, 3).unwrap(),
            sample_max_mixture(200, &r, 3).unwrap()
        );
    }

    #[test]
    fn spec_validation_names_coordinate() {
        let d = 3;
        let comps = vec![Component {
            cone: ConeId::parse("1,2", d).unwrap(),
            family: Family::Logistic { alpha: 0.5 },
            theta: vec![1.0, 1.0],
        }];
        assert!(matches!(
            MaxMixtureSpec::new(d, comps),
            Err(Error::UncoveredCoordinate(3))
        ));
        let comps = vec![Component {
            cone: ConeId::parse("1,2", 2).unwrap(),
            family: Family::Logistic { alpha: 0.5 },
            theta: vec![0.5, 1.0],
        }];
        let err = MaxMixtureSpec::new(2, comps).unwrap_err();
        assert!(err.to_string().contains("coordinate 1"), "{err}");
        let bad_alpha = vec![Component {
            cone: ConeId::full(2).unwrap(),
            family: Family::Logistic { alpha: 1.5 },
            theta: vec![1.0, 1.0],
        }];
        assert!(MaxMixtureSpec::new(2, bad_alpha).is_err());
    }

    #[test]
    fn asymmetric_logistic_weights() {
        let d = 2;
        let faces = [
            ConeId::parse("1", d).unwrap(),
            ConeId::parse("2", d).unwrap(),
            ConeId::parse("1,2", d).unwrap(),
        ];
        let spec = asymmetric_logistic_spec(d, &faces, 0.5).unwrap();
        for comp in spec.components() {
            assert!(comp.theta.iter().all(|&t| t == 0.5));
        }
        assert!(matches!(
            asymmetric_logistic_spec(3, &faces[..0], 0.5),
            Err(Error::UncoveredCoordinate(1))
        ));
    }

    #[test]
    fn asymmetric_logistic_special_cases() {
        let d = 3;
        let singles: Vec<ConeId> = (0..d).map(|i| ConeId::singleton(i, d).unwrap()).collect();
        let spec = asymmetric_logistic_spec(d, &singles, 0.5).unwrap();
        assert!(spec.components().iter().all(|c| c.family == Family::Point));
        let full = [ConeId::full(d).unwrap()];
        assert_eq!(
            sample_asymmetric_logistic(50, d, &full, 0.4, 2).unwrap(),
            sample_logistic(50, d, 0.4, 2).unwrap()
        );
        let faces = random_faces(d, 3, 1).unwrap();
        assert_eq!(
            sample_asymmetric_logistic(50, d, &faces, 0.4, 2).unwrap(),
            sample_max_mixture(50, &asymmetric_logistic_spec(d, &faces, 0.4).unwrap(), 2).unwrap()
        );
    }

    #[test]
    fn benchmark_mixture_has_equal_sevenths() {
        let m = true_mass(&benchmark_mixture(0.25, 0.5).unwrap()).unwrap();
        assert_eq!(m.len(), 7);
        for label in ["1", "2", "4", "5", "1,2,3", "3,4,5", "1,2,3,4,5"] {
            assert_abs_diff_eq!(
                m.get(ConeId::parse(label, 5).unwrap()),
                1.0 / 7.0,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn two_dimensional_asymmetric_mass() {
        let d = 2;
        let spec = MaxMixtureSpec::new(
            d,
            vec![
                Component {
                    cone: ConeId::parse("1,2", d).unwrap(),
                    family: Family::Logistic { alpha: 0.5 },
                    theta: vec![0.6, 0.6],
                },
                Component {
                    cone: ConeId::parse("1", d).unwrap(),
                    family: Family::Point,
                    theta: vec![0.4],
                },
                Component {
                    cone: ConeId::parse("2", d).unwrap(),
                    family: Family::Point,
                    theta: vec![0.4],
                },
            ],
        )
        .unwrap();
        let m = true_mass(&spec).unwrap();
        assert_abs_diff_eq!(
            m.get(ConeId::parse("1,2", d).unwrap()),
            0.6,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(m.get(ConeId::parse("1", d).unwrap()), 0.2, epsilon = 1e-12);
        assert_abs_diff_eq!(m.get(ConeId::parse("2", d).unwrap()), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn all_singletons_give_uniform_vertices() {
        let d = 4;
        let singles: Vec<ConeId> = (0..d).map(|i| ConeId::singleton(i, d).unwrap()).collect();
        let m = true_mass(&asymmetric_logistic_spec(d, &singles, 0.5).unwrap()).unwrap();
        for c in &singles {
            assert_abs_diff_eq!(m.get(*c), 0.25, epsilon = 1e-15);
        }
        let indep = logistic_spec(d, 1.0).unwrap();
        assert_eq!(true_mass(&indep).unwrap(), m);
    }

    #[test]
    fn spec_json_roundtrip() {
        let s = benchmark_mixture(0.25, 0.5).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        let back: MaxMixtureSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
