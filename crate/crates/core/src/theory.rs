//! Closed-form values of the joint tail index `tau_C(delta)` and the
//! coefficient of tail dependence `eta_C` for a few reference copulas.

use std::collections::BTreeMap;

use crate::cone::{full_mask, ConeId};
use crate::error::{Error, Result};
use crate::simulators::CorrelationMatrix;

/// Copula families with known tail indices.
#[derive(Debug, Clone)]
pub enum TauModel {
    /// `d` independent variables.
    Independence {
        d: usize,
    },
    /// Symmetric logistic extreme-value copula in dimension 2 or 3.
    Logistic {
        d: usize,
        alpha: f64,
    },
    /// Bivariate logistic pair `(X1, X2)` independent of `X3`.
    LogisticPairPlusIndependent {
        alpha: f64,
    },
    /// Inverted logistic copula in dimension 2 or 3.
    InvertedLogistic {
        d: usize,
        alpha: f64,
    },
    /// Bivariate extreme-value model with atoms `theta1 = H({1})`,
    /// `theta2 = H({0})` and spectral density exponents `s1`, `s2` at the
    /// simplex ends.
    BivariateEv {
        theta1: f64,
        theta2: f64,
        s1: f64,
        s2: f64,
    },
    Gaussian(CorrelationMatrix),
}

/// A tail index, or an upper bound where only a bound is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauValue {
    Exact(f64),
    UpperBound(f64),
}

impl TauValue {
    pub fn value(self) -> f64 {
        match self {
            TauValue::Exact(v) | TauValue::UpperBound(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, TauValue::Exact(_))
    }
}

impl TauModel {
    pub fn dim(&self) -> usize {
        match self {
            TauModel::Independence { d }
            | TauModel::Logistic { d, .. }
            | TauModel::InvertedLogistic { d, .. } => *d,
            TauModel::LogisticPairPlusIndependent { .. } => 3,
            TauModel::BivariateEv { .. } => 2,
            TauModel::Gaussian(c) => c.dim(),
        }
    }

    fn validate(&self) -> Result<()> {
        let open_alpha = |alpha: f64| {
            if alpha > 0.0 && alpha < 1.0 {
                Ok(())
            } else {
                Err(Error::param("alpha", alpha, "must lie in (0, 1)"))
            }
        };
        let low_dim = |d: usize| {
            if (2..=3).contains(&d) {
                Ok(())
            } else {
                Err(Error::NoClosedForm(format!(
                    "dimension {d}; only d = 2, 3 are tabulated"
                )))
            }
        };
        match *self {
            TauModel::Independence { d } => {
                if d == 0 || d > crate::cone::MAX_DIM {
                    return Err(Error::param("d", d as f64, "unsupported dimension"));
                }
                Ok(())
            }
            TauModel::Logistic { d, alpha } | TauModel::InvertedLogistic { d, alpha } => {
                low_dim(d)?;
                open_alpha(alpha)
            }
            TauModel::LogisticPairPlusIndependent { alpha } => open_alpha(alpha),
            TauModel::BivariateEv {
                theta1,
                theta2,
                s1,
                s2,
            } => {
                for (name, t) in [("theta1", theta1), ("theta2", theta2)] {
                    if !(0.0..=0.5).contains(&t) {
                        return Err(Error::param(name, t, "atom must lie in [0, 1/2]"));
                    }
                }
                for (name, s) in [("s1", s1), ("s2", s2)] {
                    if !(s > -1.0 && s.is_finite()) {
                        return Err(Error::param(name, s, "must exceed -1"));
                    }
                }
                Ok(())
            }
            TauModel::Gaussian(_) => Ok(()),
        }
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&delta) {
        Ok(())
    } else {
        Err(Error::param("delta", delta, "must lie in [0, 1]"))
    }
}

/// `tau_C(delta)` for `model`.
///
/// Gaussian models give an exact value on the full cone, on vertices that
/// satisfy the vertex condition, and on pairs at `delta = 1`; other pairs
/// return [`TauValue::UpperBound`] with `eta_C`.
pub fn tau_oracle(model: &TauModel, cone: ConeId, delta: f64) -> Result<TauValue> {
    model.validate()?;
    check_delta(delta)?;
    let d = model.dim();
    if cone.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: cone.dim(),
        });
    }
    let k = cone.len() as f64;
    let exact = |v: f64| Ok(TauValue::Exact(v));
    match *model {
        TauModel::Independence { .. } => exact(1.0 / k),
        TauModel::Logistic { alpha, .. } => {
            if cone.is_full() {
                exact(1.0)
            } else {
                exact(alpha / (k * (1.0 - delta) + alpha * delta))
            }
        }
        TauModel::LogisticPairPlusIndependent { alpha } => {
            let v = match cone.bits() {
                0b001 | 0b010 => alpha / ((1.0 - delta) + alpha * delta),
                0b100 | 0b011 => 1.0,
                0b101 | 0b110 => alpha / ((1.0 - delta) + alpha * (1.0 + delta)),
                _ => 0.5,
            };
            exact(v)
        }
        TauModel::InvertedLogistic { alpha, .. } => exact(k.powf(-alpha)),
        TauModel::BivariateEv {
            theta1,
            theta2,
            s1,
            s2,
        } => {
            let vertex = |theta: f64, s: f64| {
                if theta > 0.0 {
                    1.0
                } else {
                    1.0 / ((s + 2.0) - delta * (s + 1.0))
                }
            };
            let v = match cone.bits() {
                0b01 => vertex(theta1, s1),
                0b10 => vertex(theta2, s2),
                _ if theta1 + theta2 < 1.0 => 1.0,
                _ => 0.5,
            };
            exact(v)
        }
        TauModel::Gaussian(ref corr) => gaussian_tau(corr, cone, delta),
    }
}

fn gaussian_tau(corr: &CorrelationMatrix, cone: ConeId, delta: f64) -> Result<TauValue> {
    if cone.is_full() {
        return Ok(TauValue::Exact(eta_gaussian(corr, cone)?));
    }
    if cone.len() == 1 {
        let i = cone.indices().next().unwrap_or(0);
        return if gaussian_vertex_condition(corr, i, delta)? {
            Ok(TauValue::Exact(1.0))
        } else {
            Err(Error::NoClosedForm(format!(
                "Gaussian vertex {cone} below the correlation bound at delta = {delta}"
            )))
        };
    }
    let eta = eta_gaussian(corr, cone)?;
    if delta == 1.0 && corr.dim() == 3 && pair_is_regular(corr, cone) {
        Ok(TauValue::Exact(eta))
    } else {
        Ok(TauValue::UpperBound(eta))
    }
}

/// For a pair `C` in three dimensions, `1 + rho_C != sum of the other two
/// correlations`, under which `tau_C(1) = eta_C`.
fn pair_is_regular(corr: &CorrelationMatrix, cone: ConeId) -> bool {
    let idx: Vec<usize> = cone.indices().collect();
    let (i, j) = (idx[0], idx[1]);
    let k = (0..3).find(|&k| k != i && k != j).unwrap_or(0);
    let lhs = 1.0 + corr.get(i, j);
    let rhs = corr.get(i, k) + corr.get(j, k);
    (lhs - rhs).abs() > 1e-12
}

/// Coefficient of tail dependence `(1ᵀ Σ_C⁻¹ 1)⁻¹` of a Gaussian copula.
pub fn eta_gaussian(corr: &CorrelationMatrix, cone: ConeId) -> Result<f64> {
    if cone.dim() != corr.dim() {
        return Err(Error::DimensionMismatch {
            expected: corr.dim(),
            found: cone.dim(),
        });
    }
    if cone.len() < 2 {
        return Err(Error::InvalidCone(format!(
            "eta needs at least two coordinates, got {cone}"
        )));
    }
    let sub = corr.restrict(cone)?;
    Ok(1.0 / sub.ones_quadratic_form())
}

/// Whether `tau_i(delta) = 1` for vertex `i` of a trivariate Gaussian copula,
/// i.e. `delta ≥ max_{j≠i} rho_ij²`.
pub fn gaussian_vertex_condition(corr: &CorrelationMatrix, i: usize, delta: f64) -> Result<bool> {
    check_delta(delta)?;
    if corr.dim() != 3 {
        return Err(Error::NoClosedForm(format!(
            "Gaussian vertex condition in dimension {}",
            corr.dim()
        )));
    }
    if i >= 3 {
        return Err(Error::InvalidCone(format!(
            "coordinate {} out of range",
            i + 1
        )));
    }
    let mut bound = 0.0f64;
    for j in (0..3).filter(|&j| j != i) {
        let r = corr.get(i, j);
        if r < 0.0 {
            return Err(Error::param(
                "rho",
                r,
                "vertex condition needs non-negative correlations",
            ));
        }
        bound = bound.max(r * r);
    }
    Ok(delta >= bound)
}

/// `eta_C = max over supersets C' ⊇ C of tau_{C'}(1)`.
pub fn eta_from_tau(taus_at_one: &BTreeMap<ConeId, f64>, cone: ConeId) -> Result<f64> {
    let d = cone.dim();
    let free = full_mask(d) & !cone.bits();
    let mut best = f64::NEG_INFINITY;
    // every subset of the complement, including the empty one
    let mut sub = free;
    loop {
        let sup = ConeId::new(cone.bits() | sub, d)?;
        let v = taus_at_one
            .get(&sup)
            .ok_or_else(|| Error::MissingSuperset(sup.to_string()))?;
        best = best.max(*v);
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & free;
    }
    Ok(best)
}

/// Cones on which the model's limit measure puts mass.
pub fn charged_cones(model: &TauModel) -> Result<Vec<ConeId>> {
    model.validate()?;
    let d = model.dim();
    let singletons = || {
        (0..d)
            .map(|i| ConeId::singleton(i, d))
            .collect::<Result<Vec<_>>>()
    };
    match *model {
        TauModel::Independence { .. }
        | TauModel::InvertedLogistic { .. }
        | TauModel::Gaussian(_) => singletons(),
        TauModel::Logistic { .. } => Ok(vec![ConeId::full(d)?]),
        TauModel::LogisticPairPlusIndependent { .. } => {
            Ok(vec![ConeId::new(0b011, 3)?, ConeId::new(0b100, 3)?])
        }
        TauModel::BivariateEv { theta1, theta2, .. } => {
            let mut out = Vec::new();
            if theta1 > 0.0 {
                out.push(ConeId::new(0b01, 2)?);
            }
            if theta2 > 0.0 {
                out.push(ConeId::new(0b10, 2)?);
            }
            if theta1 + theta2 < 1.0 {
                out.push(ConeId::new(0b11, 2)?);
            }
            Ok(out)
        }
    }
}

/// Grid `0, 0.05, ..., 1` used to look for the smallest `delta` at which a
/// cone's tail index reaches one.
pub fn probe_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

/// Smallest probe `delta < 1` with `tau_C(delta) = 1` exactly, if any.
pub fn detection_delta(model: &TauModel, cone: ConeId) -> Result<Option<f64>> {
    for delta in probe_grid().into_iter().filter(|&x| x < 1.0) {
        match tau_oracle(model, cone, delta) {
            Ok(TauValue::Exact(1.0)) => return Ok(Some(delta)),
            Ok(_) | Err(Error::NoClosedForm(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// One case of the trivariate reference table; values ordered
/// `tau_1, tau_2, tau_3, tau_12, tau_13, tau_23, tau_123`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub case: &'static str,
    pub taus: [f64; 7],
}

/// Column order of [`TableRow::taus`] as cone bitmasks.
pub const TABLE_CONES: [u32; 7] = [0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

/// Trivariate tail indices for independence, logistic pair plus an
/// independent variable, logistic and inverted logistic.
pub fn trivariate_table(alpha: f64, delta: f64) -> Result<Vec<TableRow>> {
    let models = [
        ("i", TauModel::Independence { d: 3 }),
        ("ii", TauModel::LogisticPairPlusIndependent { alpha }),
        ("iii", TauModel::Logistic { d: 3, alpha }),
        ("iv", TauModel::InvertedLogistic { d: 3, alpha }),
    ];
    let mut rows = Vec::with_capacity(4);
    for (case, model) in models {
        let mut taus = [0.0; 7];
        for (slot, &bits) in taus.iter_mut().zip(&TABLE_CONES) {
            *slot = tau_oracle(&model, ConeId::new(bits, 3)?, delta)?.value();
        }
        rows.push(TableRow { case, taus });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c3(s: &str) -> ConeId {
        ConeId::parse(s, 3).unwrap()
    }

    /// `tau = 1 / (1 + k (1 - delta))`, where `k` is the excess decay rate of
    /// the joint survival beyond `t^{-1}` when the complement stays bounded.
    fn from_excess_rate(k: f64, delta: f64) -> f64 {
        1.0 / (1.0 + k * (1.0 - delta))
    }

    /// 3x3 inverse by cofactors, independent of the Cholesky path.
    fn cofactor_inverse_sum(m: [[f64; 3]; 3]) -> f64 {
        let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let r: Vec<usize> = (0..3).filter(|&x| x != j).collect();
                let c: Vec<usize> = (0..3).filter(|&x| x != i).collect();
                let minor = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]];
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * minor / det;
            }
        }
        s
    }

    #[test]
    fn table_examples() {
        let ind = TauModel::Independence { d: 3 };
        assert_eq!(
            tau_oracle(&ind, c3("1,2"), 0.3).unwrap(),
            TauValue::Exact(0.5)
        );
        let log = TauModel::Logistic { d: 3, alpha: 0.5 };
        assert_relative_eq!(tau_oracle(&log, c3("1"), 0.5).unwrap().value(), 2.0 / 3.0);
        let inv = TauModel::InvertedLogistic { d: 3, alpha: 0.5 };
        assert_relative_eq!(
            tau_oracle(&inv, c3("1,2,3"), 0.2).unwrap().value(),
            0.5773502691896258,
            epsilon = 1e-15
        );
    }

    #[test]
    fn logistic_matches_excess_rate_form() {
        for alpha in [0.1, 0.25, 0.5, 0.75, 0.9] {
            for delta in [0.0, 0.3, 0.5, 1.0] {
                let m = TauModel::Logistic { d: 3, alpha };
                let t1 = tau_oracle(&m, c3("2"), delta).unwrap().value();
                let t2 = tau_oracle(&m, c3("1,3"), delta).unwrap().value();
                assert_relative_eq!(
                    t1,
                    from_excess_rate(1.0 / alpha - 1.0, delta),
                    epsilon = 1e-14
                );
                assert_relative_eq!(
                    t2,
                    from_excess_rate(2.0 / alpha - 1.0, delta),
                    epsilon = 1e-14
                );
                let p = TauModel::LogisticPairPlusIndependent { alpha };
                let t13 = tau_oracle(&p, c3("1,3"), delta).unwrap().value();
                // independent third variable multiplies the survival by t^{-1}
                let expected = 1.0 / (1.0 / from_excess_rate(1.0 / alpha - 1.0, delta) + 1.0);
                assert_relative_eq!(t13, expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gaussian_values() {
        let corr = CorrelationMatrix::equicorrelated(3, 0.5).unwrap();
        let full = ConeId::full(3).unwrap();
        let eta = eta_gaussian(&corr, full).unwrap();
        let m = [[1.0, 0.5, 0.5], [0.5, 1.0, 0.5], [0.5, 0.5, 1.0]];
        assert_relative_eq!(eta, 1.0 / cofactor_inverse_sum(m), epsilon = 1e-12);
        assert_relative_eq!(eta, 2.0 / 3.0, epsilon = 1e-12);
        assert_eq!(
            tau_oracle(&TauModel::Gaussian(corr.clone()), full, 0.1).unwrap(),
            TauValue::Exact(eta)
        );

        let two = |rho: f64| CorrelationMatrix::equicorrelated(2, rho).unwrap();
        let d2 = ConeId::full(2).unwrap();
        assert_relative_eq!(eta_gaussian(&two(0.0), d2).unwrap(), 0.5, epsilon = 1e-14);
        // 2x2 inverse: 1ᵀΣ⁻¹1 = 2(1-rho)/(1-rho²) = 2/(1+rho)
        assert_relative_eq!(eta_gaussian(&two(0.5), d2).unwrap(), 0.75, epsilon = 1e-14);
        assert!(eta_gaussian(&two(0.5), ConeId::singleton(0, 2).unwrap()).is_err());
    }

    #[test]
    fn gaussian_pair_is_marked_as_bound_below_one() {
        let corr = CorrelationMatrix::equicorrelated(3, 0.3).unwrap();
        let m = TauModel::Gaussian(corr);
        let v = tau_oracle(&m, c3("1,2"), 0.5).unwrap();
        assert!(!v.is_exact());
        assert_relative_eq!(v.value(), 0.65, epsilon = 1e-12);
        assert!(tau_oracle(&m, c3("1,2"), 1.0).unwrap().is_exact());
        assert!(matches!(
            tau_oracle(&m, c3("1"), 0.05),
            Err(Error::NoClosedForm(_))
        ));
        assert_eq!(tau_oracle(&m, c3("1"), 0.09).unwrap(), TauValue::Exact(1.0));
    }

    #[test]
    fn vertex_condition() {
        let half = CorrelationMatrix::equicorrelated(3, 0.5).unwrap();
        assert!(gaussian_vertex_condition(&half, 0, 0.25).unwrap());
        assert!(!gaussian_vertex_condition(&half, 0, 0.2).unwrap());
        let zero = CorrelationMatrix::equicorrelated(3, 0.0).unwrap();
        for delta in [0.0, 0.5, 1.0] {
            assert!(gaussian_vertex_condition(&zero, 2, delta).unwrap());
        }
        let four = CorrelationMatrix::equicorrelated(4, 0.5).unwrap();
        assert!(gaussian_vertex_condition(&four, 0, 0.5).is_err());
    }

    #[test]
    fn bivariate_ev_cases() {
        let d2 = |s: &str| ConeId::parse(s, 2).unwrap();
        let logistic = |alpha: f64| TauModel::BivariateEv {
            theta1: 0.0,
            theta2: 0.0,
            s1: 1.0 / alpha - 2.0,
            s2: 1.0 / alpha - 2.0,
        };
        let m = logistic(0.4);
        assert_relative_eq!(
            tau_oracle(&m, d2("1"), 0.3).unwrap().value(),
            0.4 / (1.0 + 0.4 * 0.3 - 0.3),
            epsilon = 1e-14
        );
        assert_eq!(tau_oracle(&m, d2("1,2"), 0.3).unwrap().value(), 1.0);
        let indep = TauModel::BivariateEv {
            theta1: 0.5,
            theta2: 0.5,
            s1: 0.0,
            s2: 0.0,
        };
        assert_eq!(tau_oracle(&indep, d2("1"), 0.0).unwrap().value(), 1.0);
        assert_eq!(tau_oracle(&indep, d2("1,2"), 0.0).unwrap().value(), 0.5);
        let bad = TauModel::BivariateEv {
            theta1: 0.0,
            theta2: 0.0,
            s1: -1.0,
            s2: 0.0,
        };
        assert!(tau_oracle(&bad, d2("1"), 0.0).is_err());
    }

    #[test]
    fn eta_from_tau_examples() {
        let d2 = |s: &str| ConeId::parse(s, 2).unwrap();
        let map = BTreeMap::from([(d2("1"), 1.0), (d2("1,2"), 1.0), (d2("2"), 0.7)]);
        assert_eq!(eta_from_tau(&map, d2("1")).unwrap(), 1.0);
        assert_eq!(eta_from_tau(&map, d2("1,2")).unwrap(), 1.0);

        let m = TauModel::LogisticPairPlusIndependent { alpha: 0.5 };
        let all: BTreeMap<ConeId, f64> = ConeId::all(3)
            .unwrap()
            .into_iter()
            .map(|c| (c, tau_oracle(&m, c, 1.0).unwrap().value()))
            .collect();
        assert_relative_eq!(eta_from_tau(&all, c3("1,3")).unwrap(), 0.5, epsilon = 1e-15);

        let partial = BTreeMap::from([(c3("1"), 1.0)]);
        assert!(matches!(
            eta_from_tau(&partial, c3("1")),
            Err(Error::MissingSuperset(_))
        ));
    }

    #[test]
    fn unsupported_combinations_are_errors() {
        assert!(tau_oracle(
            &TauModel::Logistic { d: 4, alpha: 0.5 },
            ConeId::full(4).unwrap(),
            0.5
        )
        .is_err());
        assert!(tau_oracle(&TauModel::Logistic { d: 3, alpha: 1.0 }, c3("1"), 0.5).is_err());
        assert!(tau_oracle(&TauModel::Independence { d: 3 }, c3("1"), 1.5).is_err());
    }

    #[test]
    fn table_has_case_iii_values() {
        let rows = trivariate_table(0.5, 0.5).unwrap();
        assert_eq!(rows.len(), 4);
        let iii = &rows[2];
        assert_relative_eq!(iii.taus[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(iii.taus[3], 0.4, epsilon = 1e-15);
        assert_eq!(iii.taus[6], 1.0);
    }

    fn models(alpha: f64) -> Vec<TauModel> {
        vec![
            TauModel::Independence { d: 3 },
            TauModel::Logistic { d: 3, alpha },
            TauModel::Logistic { d: 2, alpha },
            TauModel::LogisticPairPlusIndependent { alpha },
            TauModel::InvertedLogistic { d: 3, alpha },
            TauModel::BivariateEv {
                theta1: 0.0,
                theta2: 0.2,
                s1: 1.0 / alpha - 2.0,
                s2: 0.5,
            },
            TauModel::Gaussian(CorrelationMatrix::equicorrelated(3, alpha * 0.9).unwrap()),
        ]
    }

    #[test]
    fn charged_cones_reach_one_below_one() {
        for alpha in [0.1, 0.5, 0.9] {
            for m in models(alpha) {
                for c in charged_cones(&m).unwrap() {
                    let dstar = detection_delta(&m, c).unwrap();
                    assert!(dstar.is_some(), "{m:?} cone {c}");
                }
            }
        }
    }

    #[test]
    fn boundary_equals_eta_for_logistic_families() {
        for alpha in [0.2, 0.6] {
            for m in [
                TauModel::Logistic { d: 3, alpha },
                TauModel::LogisticPairPlusIndependent { alpha },
                TauModel::InvertedLogistic { d: 3, alpha },
            ] {
                let at_one: BTreeMap<ConeId, f64> = ConeId::all(3)
                    .unwrap()
                    .into_iter()
                    .map(|c| (c, tau_oracle(&m, c, 1.0).unwrap().value()))
                    .collect();
                for c in ConeId::all(3).unwrap() {
                    let eta = eta_from_tau(&at_one, c).unwrap();
                    for delta in probe_grid() {
                        assert!(tau_oracle(&m, c, delta).unwrap().value() <= eta + 1e-15);
                    }
                    if c.len() >= 2 || matches!(m, TauModel::Logistic { .. }) {
                        assert_relative_eq!(at_one[&c], eta, epsilon = 1e-15);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn tau_non_decreasing_in_delta(alpha in 0.01f64..0.99) {
            for m in models(alpha) {
                for c in ConeId::all(m.dim()).unwrap() {
                    let mut prev = f64::NEG_INFINITY;
                    for k in 0..=100 {
                        let delta = k as f64 / 100.0;
                        match tau_oracle(&m, c, delta) {
                            Ok(v) => {
                                prop_assert!(v.value() >= prev - 1e-15);
                                prop_assert!(v.value() > 0.0 && v.value() <= 1.0, "{:?} {} {} {:?}", m, c, delta, v);
                                prev = v.value();
                            }
                            Err(Error::NoClosedForm(_)) => {}
                            Err(e) => return Err(TestCaseError::fail(e.to_string())),
                        }
                    }
                }
            }
        }

        #[test]
        fn eta_from_tau_monotone_in_cone(vals in proptest::collection::vec(0.01f64..1.0, 15)) {
            let d = 4;
            let all = ConeId::all(d).unwrap();
            let map: BTreeMap<ConeId, f64> = all.iter().copied().zip(vals).collect();
            for &a in &all {
                for &b in &all {
                    if a.is_subset_of(b) {
                        prop_assert!(eta_from_tau(&map, a).unwrap() >= eta_from_tau(&map, b).unwrap());
                    }
                }
            }
        }
    }
}
