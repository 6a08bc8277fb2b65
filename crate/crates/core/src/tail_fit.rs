//! Censored power-law tail fits, `pr(Q > q) = K q^{-1/tau}` above a threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted tail model for one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Tail index, clamped to `(0, 1]`.
    pub tau_hat: f64,
    /// Scale, recomputed after clamping so the fit passes through the
    /// empirical exceedance fraction at `u`.
    pub k_hat: f64,
    pub u: f64,
    pub n_total: usize,
    pub n_exceed: usize,
}

impl TailFit {
    /// `K q^{-1/tau}` for `q ≥ u`.
    pub fn survival(&self, q: f64) -> Result<f64> {
        survival_estimate(self, q)
    }
}

/// Sample quantile with linear interpolation between order statistics
/// (the R type-7 definition).
pub fn empirical_quantile(values: &[f64], prob: f64) -> Result<f64> {
    let mut v = values.to_vec();
    quantile_in_place(&mut v, prob)
}

/// As [`empirical_quantile`] but reorders `values` instead of copying.
pub fn quantile_in_place(values: &mut [f64], prob: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::param("quantile", prob, "must lie in [0, 1]"));
    }
    let n = values.len();
    if n == 0 {
        return Err(Error::TooFewRows { n: 0, min: 1 });
    }
    if let Some(k) = values.iter().position(|v| v.is_nan()) {
        return Err(Error::NonFinite { row: k, col: 0 });
    }
    let h = (n - 1) as f64 * prob;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let (_, &mut a, rest) = values.select_nth_unstable_by(lo, f64::total_cmp);
    if frac == 0.0 || rest.is_empty() {
        return Ok(a);
    }
    let b = rest.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(a + frac * (b - a))
}

/// Unclamped closed-form maximizer `(tau, K)` of the censored likelihood.
pub fn hill_estimate(values: &[f64], u: f64) -> Result<(f64, f64)> {
    let (n_exceed, log_sum) = exceedance_stats(values, u)?;
    let tau = log_sum / n_exceed as f64;
    let k = n_exceed as f64 / values.len() as f64 * u.powf(1.0 / tau);
    Ok((tau, k))
}

fn exceedance_stats(values: &[f64], u: f64) -> Result<(usize, f64)> {
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::param(
            "u",
            u,
            "threshold must be positive and finite",
        ));
    }
    let mut n_exceed = 0usize;
    let mut log_sum = 0.0;
    for &q in values {
        if q > u {
            n_exceed += 1;
            log_sum += (q / u).ln();
        }
    }
    if n_exceed == 0 {
        return Err(Error::NoExceedances { threshold: u });
    }
    Ok((n_exceed, log_sum))
}

/// Censored-likelihood fit of `values` above threshold `u`.
pub fn censored_fit(values: &[f64], u: f64) -> Result<TailFit> {
    let (n_exceed, log_sum) = exceedance_stats(values, u)?;
    let n_total = values.len();
    let tau_hat = (log_sum / n_exceed as f64).min(1.0);
    let k_hat = n_exceed as f64 / n_total as f64 * u.powf(1.0 / tau_hat);
    Ok(TailFit {
        tau_hat,
        k_hat,
        u,
        n_total,
        n_exceed,
    })
}

/// Fitted exceedance probability at level `q ≥ u`.
pub fn survival_estimate(fit: &TailFit, q: f64) -> Result<f64> {
    if q.is_nan() || q < fit.u {
        return Err(Error::BelowThreshold {
            level: q,
            threshold: fit.u,
        });
    }
    Ok(fit.k_hat * q.powf(-1.0 / fit.tau_hat))
}

/// Log of the censored likelihood at `(k, tau)`; `-inf` outside the
/// parameter region where the censored factor is positive.
pub fn censored_log_likelihood(values: &[f64], u: f64, k: f64, tau: f64) -> f64 {
    if !(k > 0.0 && tau > 0.0) {
        return f64::NEG_INFINITY;
    }
    let below_prob = 1.0 - k * u.powf(-1.0 / tau);
    let mut ll = 0.0;
    for &q in values {
        if q > u {
            ll += (k / tau).ln() - (1.0 + 1.0 / tau) * q.ln();
        } else if below_prob > 0.0 {
            ll += below_prob.ln();
        } else {
            return f64::NEG_INFINITY;
        }
    }
    ll
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pareto(n: usize, tau: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let u: f64 = 1.0 - rng.random::<f64>();
                u.powf(-tau)
            })
            .collect()
    }

    #[test]
    fn type7_quantile() {
        let v = [3.0, 1.0, 2.0, 4.0];
        assert_eq!(empirical_quantile(&v, 0.0).unwrap(), 1.0);
        assert_eq!(empirical_quantile(&v, 1.0).unwrap(), 4.0);
        assert_relative_eq!(empirical_quantile(&v, 0.5).unwrap(), 2.5);
        assert_relative_eq!(empirical_quantile(&v, 0.75).unwrap(), 3.25);
        assert!(empirical_quantile(&[], 0.5).is_err());
        assert!(empirical_quantile(&v, 1.5).is_err());
    }

    #[test]
    fn forced_unit_log_ratio() {
        let e = std::f64::consts::E;
        let fit = censored_fit(&[10.0 * e, 10.0 * e, 5.0, 5.0], 10.0).unwrap();
        assert_relative_eq!(fit.tau_hat, 1.0, epsilon = 1e-15);
        assert_relative_eq!(fit.k_hat, 5.0, epsilon = 1e-12);
        assert_eq!(fit.n_exceed, 2);
        assert_eq!(fit.n_total, 4);
    }

    #[test]
    fn no_exceedances_is_an_error() {
        assert!(matches!(
            censored_fit(&[1.0, 2.0, 3.0], 3.0),
            Err(Error::NoExceedances { .. })
        ));
        assert!(censored_fit(&[1.0, 2.0], 0.0).is_err());
        assert!(censored_fit(&[1.0, 2.0], -1.0).is_err());
    }

    #[test]
    fn pareto_tail_index_recovered() {
        let x = pareto(100_000, 0.5, 1);
        let u = empirical_quantile(&x, 0.9).unwrap();
        let fit = censored_fit(&x, u).unwrap();
        assert!((fit.tau_hat - 0.5).abs() < 0.02, "tau = {}", fit.tau_hat);
    }

    #[test]
    fn clamping_recomputes_scale() {
        // Pareto with tau = 2 gives a raw estimate above one.
        let x = pareto(10_000, 2.0, 2);
        let u = empirical_quantile(&x, 0.5).unwrap();
        let (raw, _) = hill_estimate(&x, u).unwrap();
        assert!(raw > 1.0);
        let fit = censored_fit(&x, u).unwrap();
        assert_eq!(fit.tau_hat, 1.0);
        assert_relative_eq!(fit.k_hat, fit.n_exceed as f64 / x.len() as f64 * u);
    }

    #[test]
    fn survival_examples() {
        let fit = TailFit {
            tau_hat: 1.0,
            k_hat: 5.0,
            u: 10.0,
            n_total: 4,
            n_exceed: 2,
        };
        assert_relative_eq!(survival_estimate(&fit, 50.0).unwrap(), 0.1);
        assert_relative_eq!(survival_estimate(&fit, 10.0).unwrap(), 0.5);
        assert!(matches!(
            survival_estimate(&fit, 9.0),
            Err(Error::BelowThreshold { .. })
        ));
        let half = TailFit {
            tau_hat: 0.5,
            ..fit
        };
        let a = survival_estimate(&half, 20.0).unwrap();
        let b = survival_estimate(&half, 40.0).unwrap();
        assert_relative_eq!(a / b, 4.0, epsilon = 1e-12);
    }

    #[test]
    fn consistency_trend_in_sample_size() {
        let mean_err = |n: usize| {
            (0..20)
                .map(|s| {
                    let x = pareto(n, 0.5, 100 + s);
                    let u = empirical_quantile(&x, 0.9).unwrap();
                    (censored_fit(&x, u).unwrap().tau_hat - 0.5).abs()
                })
                .sum::<f64>()
                / 20.0
        };
        let (e3, e4, e5) = (mean_err(1_000), mean_err(10_000), mean_err(100_000));
        assert!(e3 > e4 && e4 > e5, "{e3} {e4} {e5}");
    }

    proptest! {
        #[test]
        fn threshold_coupling(
            seed in 0u64..1000,
            tau in 0.1f64..1.5,
            prob in 0.5f64..0.95,
        ) {
            let x = pareto(500, tau, seed);
            let u = empirical_quantile(&x, prob).unwrap();
            let fit = censored_fit(&x, u).unwrap();
            let at_u = fit.k_hat * u.powf(-1.0 / fit.tau_hat);
            prop_assert!((at_u - fit.n_exceed as f64 / fit.n_total as f64).abs() < 1e-10);
            prop_assert!(fit.tau_hat > 0.0 && fit.tau_hat <= 1.0);
        }

        #[test]
        fn scale_equivariance(seed in 0u64..1000, c in 0.01f64..100.0) {
            let x = pareto(300, 0.6, seed);
            let u = empirical_quantile(&x, 0.8).unwrap();
            let a = censored_fit(&x, u).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
            let b = censored_fit(&scaled, u * c).unwrap();
            prop_assert!((a.tau_hat - b.tau_hat).abs() < 1e-10);
            for q in [u * 2.0, u * 10.0] {
                let sa = survival_estimate(&a, q).unwrap();
                let sb = survival_estimate(&b, q * c).unwrap();
                prop_assert!((sa - sb).abs() <= 1e-9 * sa.max(1e-300));
            }
        }

        #[test]
        fn survival_non_increasing(seed in 0u64..1000, a in 1.0f64..50.0, b in 1.0f64..50.0) {
            let x = pareto(300, 0.7, seed);
            let u = empirical_quantile(&x, 0.7).unwrap();
            let fit = censored_fit(&x, u).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(survival_estimate(&fit, u * hi).unwrap() <= survival_estimate(&fit, u * lo).unwrap());
        }
    }
}
