//! Weibull failure baseline over physical age alone.
//!
//! The cumulative failure distribution is
//!
//! ```text
//! F(a) = 1 - e^{-(a/alpha)^beta},  a >= 0
//! ```
//!
//! Fitting is maximum likelihood with failed records as exact failure times
//! and working records right-censored at their recorded age. The scale
//! profiles out in closed form per shape, leaving a one-dimensional Newton
//! search on beta:
//!
//! ```text
//! alpha(beta)^beta = sum_all t_i^beta / n_failures
//! g(beta) = n_f/beta + sum_F ln t_i - n_f * S1(beta)/S0(beta) = 0
//! ```
//!
//! where S0 = sum_all t^beta and S1 = sum_all t^beta ln t. g is strictly
//! decreasing, so the root is unique when it lies inside the search bracket.

use serde::{Deserialize, Serialize};

use crate::data::Status;
use crate::math;

/// Shape search bracket; samples whose likelihood peaks outside it are
/// reported as non-converged rather than silently capped.
const BETA_BRACKET: (f64, f64) = (0.05, 50.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeibullError {
    #[error("need at least 2 failure records, got {0}")]
    InsufficientFailures(usize),
    #[error("all ages must be positive for fitting")]
    NonPositiveAge,
    #[error("ages and statuses differ in length")]
    LengthMismatch,
    #[error("shape search failed to converge inside [{lo}, {hi}] after {iterations} iterations", lo = BETA_BRACKET.0, hi = BETA_BRACKET.1)]
    NotConverged { iterations: usize },
    #[error("age must be non-negative")]
    NegativeAge,
}

/// Fitted scale/shape pair with fit metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeibullModel {
    /// Scale, in years.
    pub alpha: f64,
    /// Dimensionless shape.
    pub beta: f64,
    pub log_likelihood: f64,
    pub failures: usize,
    pub censored: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullFitConfig {
    pub max_iters: usize,
    /// Convergence threshold on the shape update.
    pub tolerance: f64,
}

impl Default for WeibullFitConfig {
    fn default() -> Self {
        WeibullFitConfig {
            max_iters: 200,
            tolerance: 1e-10,
        }
    }
}

/// Whether predictions condition on survival to the current age.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HorizonMode {
    /// (F(a+T) − F(a)) / (1 − F(a)): probability of failing within the
    /// horizon given the asset works today.
    Conditional,
    /// Raw F(a+T), ignoring survival to date.
    Unconditional,
}

impl WeibullModel {
    /// Cumulative failure probability at the given age.
    pub fn cdf(&self, age: f64) -> Result<f64, WeibullError> {
        if age < 0.0 {
            return Err(WeibullError::NegativeAge);
        }
        Ok(1.0 - math::exp(-math::powf(age / self.alpha, self.beta)))
    }

    /// Failure probability over a horizon and the resulting classification
    /// (failed when strictly above the threshold).
    pub fn predict(
        &self,
        age: f64,
        horizon: f64,
        threshold: f64,
        mode: HorizonMode,
    ) -> Result<(f64, Status), WeibullError> {
        if age < 0.0 || horizon < 0.0 {
            return Err(WeibullError::NegativeAge);
        }
        let probability = match mode {
            HorizonMode::Unconditional => self.cdf(age + horizon)?,
            HorizonMode::Conditional => {
                let now = self.cdf(age)?;
                let later = self.cdf(age + horizon)?;
                let survival = 1.0 - now;
                if survival <= 1e-300 {
                    if horizon > 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ((later - now) / survival).clamp(0.0, 1.0)
                }
            }
        };
        let status = if probability > threshold {
            Status::Failed
        } else {
            Status::Working
        };
        Ok((probability, status))
    }
}

/// Log-likelihood of (alpha, beta) against ages with censoring statuses.
/// Public so fits can be audited against perturbed parameters.
pub fn log_likelihood(alpha: f64, beta: f64, ages: &[f64], statuses: &[Status]) -> f64 {
    let mut ll = 0.0;
    for (&t, &status) in ages.iter().zip(statuses) {
        let z = math::powf(t / alpha, beta);
        match status {
            Status::Failed => {
                ll += math::ln(beta) - beta * math::ln(alpha) + (beta - 1.0) * math::ln(t) - z;
            }
            Status::Working => {
                ll -= z;
            }
        }
    }
    ll
}

/// Maximum-likelihood fit treating working records as right-censored.
pub fn fit(
    ages: &[f64],
    statuses: &[Status],
    config: &WeibullFitConfig,
) -> Result<WeibullModel, WeibullError> {
    if ages.len() != statuses.len() {
        return Err(WeibullError::LengthMismatch);
    }
    if ages.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(WeibullError::NonPositiveAge);
    }
    let failures = statuses.iter().filter(|s| **s == Status::Failed).count();
    if failures < 2 {
        return Err(WeibullError::InsufficientFailures(failures));
    }
    let censored = ages.len() - failures;
    let n_f = failures as f64;
    let sum_ln_failed: f64 = ages
        .iter()
        .zip(statuses)
        .filter(|(_, s)| **s == Status::Failed)
        .map(|(&t, _)| math::ln(t))
        .sum();

    // Profile score and its derivative in beta.
    let score = |beta: f64| -> (f64, f64) {
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for &t in ages {
            let tb = math::powf(t, beta);
            let lt = math::ln(t);
            s0 += tb;
            s1 += tb * lt;
            s2 += tb * lt * lt;
        }
        let g = n_f / beta + sum_ln_failed - n_f * s1 / s0;
        let g_prime = -n_f / (beta * beta) - n_f * (s2 * s0 - s1 * s1) / (s0 * s0);
        (g, g_prime)
    };

    let (mut lo, mut hi) = BETA_BRACKET;
    let (g_lo, _) = score(lo);
    let (g_hi, _) = score(hi);
    // g is decreasing; a sign change inside the bracket pins the root.
    if g_lo <= 0.0 || g_hi >= 0.0 {
        return Err(WeibullError::NotConverged { iterations: 0 });
    }

    let mut beta = 1.0f64.clamp(lo, hi);
    let mut iterations = 0;
    let mut converged = false;
    for _ in 0..config.max_iters {
        iterations += 1;
        let (g, g_prime) = score(beta);
        if g > 0.0 {
            lo = lo.max(beta);
        } else {
            hi = hi.min(beta);
        }
        let mut next = if g_prime.is_finite() && math::abs(g_prime) > 1e-300 {
            beta - g / g_prime
        } else {
            (lo + hi) / 2.0
        };
        if !(next > lo && next < hi) {
            next = (lo + hi) / 2.0;
        }
        let delta = math::abs(next - beta);
        beta = next;
        if delta < config.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(WeibullError::NotConverged { iterations });
    }

    let s0: f64 = ages.iter().map(|&t| math::powf(t, beta)).sum();
    let alpha = math::powf(s0 / n_f, 1.0 / beta);
    let ll = log_likelihood(alpha, beta, ages, statuses);
    Ok(WeibullModel {
        alpha,
        beta,
        log_likelihood: ll,
        failures,
        censored,
    })
}

/// Draws a failure time from (alpha, beta) by inverse-CDF sampling.
pub fn sample_failure_time(alpha: f64, beta: f64, uniform: f64) -> f64 {
    alpha * math::powf(-math::ln(1.0 - uniform), 1.0 / beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn model(alpha: f64, beta: f64) -> WeibullModel {
        WeibullModel {
            alpha,
            beta,
            log_likelihood: 0.0,
            failures: 0,
            censored: 0,
        }
    }

    #[test]
    fn cdf_fixed_points() {
        let m = model(40.0, 3.0);
        assert_eq!(m.cdf(0.0).unwrap(), 0.0);
        // At the scale point the cdf is 1 - 1/e regardless of shape.
        for beta in [0.5, 1.0, 3.0, 7.0] {
            let m = model(40.0, beta);
            assert!((m.cdf(40.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        }
        // Exponential median at alpha * ln 2.
        let m = model(40.0, 1.0);
        assert!((m.cdf(40.0 * core::f64::consts::LN_2).unwrap() - 0.5).abs() < 1e-12);
        assert!(m.cdf(-1.0).is_err());
    }

    /// Inverse-CDF fleet sampler. With censoring on, each unit also draws an
    /// independent withdrawal time from the same distribution and is
    /// observed at whichever comes first; by symmetry about half the fleet
    /// ends up right-censored. Independence keeps the censoring
    /// noninformative, which the maximum-likelihood fit assumes.
    fn draw_fleet(
        alpha: f64,
        beta: f64,
        n: usize,
        censored: bool,
        seed: u64,
    ) -> (Vec<f64>, Vec<Status>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ages = Vec::with_capacity(n);
        let mut statuses = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.random_range(0.0..1.0);
            let t = sample_failure_time(alpha, beta, u);
            if censored {
                let v: f64 = rng.random_range(0.0..1.0);
                let c = sample_failure_time(alpha, beta, v);
                if c < t {
                    ages.push(c);
                    statuses.push(Status::Working);
                } else {
                    ages.push(t);
                    statuses.push(Status::Failed);
                }
            } else {
                ages.push(t);
                statuses.push(Status::Failed);
            }
        }
        (ages, statuses)
    }

    #[test]
    fn recovers_parameters_from_exact_failure_times() {
        let (ages, statuses) = draw_fleet(40.0, 3.0, 1000, false, 0);
        let m = fit(&ages, &statuses, &WeibullFitConfig::default()).unwrap();
        assert!((m.alpha - 40.0).abs() / 40.0 < 0.05, "alpha {}", m.alpha);
        assert!((m.beta - 3.0).abs() / 3.0 < 0.05, "beta {}", m.beta);
        assert_eq!(m.failures, 1000);
    }

    #[test]
    fn recovers_parameters_under_heavy_censoring() {
        let (ages, statuses) = draw_fleet(40.0, 3.0, 1000, true, 0);
        let m = fit(&ages, &statuses, &WeibullFitConfig::default()).unwrap();
        assert!((m.alpha - 40.0).abs() / 40.0 < 0.10, "alpha {}", m.alpha);
        assert!((m.beta - 3.0).abs() / 3.0 < 0.10, "beta {}", m.beta);
        assert!(m.censored > 0);
    }

    #[test]
    fn identical_failure_ages_report_divergence() {
        let ages = alloc::vec![30.0, 30.0];
        let statuses = alloc::vec![Status::Failed, Status::Failed];
        assert!(matches!(
            fit(&ages, &statuses, &WeibullFitConfig::default()),
            Err(WeibullError::NotConverged { .. })
        ));
    }

    #[test]
    fn fit_preconditions() {
        let cfg = WeibullFitConfig::default();
        assert!(matches!(
            fit(&[10.0, 20.0], &[Status::Working, Status::Failed], &cfg),
            Err(WeibullError::InsufficientFailures(1))
        ));
        assert!(matches!(
            fit(&[0.0, 20.0], &[Status::Failed, Status::Failed], &cfg),
            Err(WeibullError::NonPositiveAge)
        ));
        assert!(matches!(
            fit(&[10.0], &[Status::Failed, Status::Failed], &cfg),
            Err(WeibullError::LengthMismatch)
        ));
    }

    #[test]
    fn fitted_point_beats_nearby_perturbations() {
        let (ages, statuses) = draw_fleet(40.0, 3.0, 400, true, 7);
        let m = fit(&ages, &statuses, &WeibullFitConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let alpha = m.alpha * rng.random_range(0.8..1.2);
            let beta = m.beta * rng.random_range(0.8..1.2);
            let ll = log_likelihood(alpha, beta, &ages, &statuses);
            assert!(
                ll <= m.log_likelihood + 1e-9,
                "perturbed ({alpha}, {beta}) log-likelihood {ll} beats fit {}",
                m.log_likelihood
            );
        }
    }

    #[test]
    fn prediction_fixed_points() {
        let m = model(40.0, 3.0);
        // Empty horizon: nothing can fail.
        let (p, s) = m.predict(25.0, 0.0, 0.5, HorizonMode::Conditional).unwrap();
        assert_eq!(p, 0.0);
        assert_eq!(s, Status::Working);
        // From age zero the conditional form reduces to the plain cdf.
        let (p, s) = m.predict(0.0, 40.0, 0.5, HorizonMode::Conditional).unwrap();
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert_eq!(s, Status::Failed);
    }

    #[test]
    fn exponential_shape_is_memoryless() {
        let m = model(40.0, 1.0);
        let (p1, _) = m.predict(5.0, 10.0, 0.5, HorizonMode::Conditional).unwrap();
        let (p2, _) = m.predict(55.0, 10.0, 0.5, HorizonMode::Conditional).unwrap();
        assert!((p1 - p2).abs() < 1e-12);
        // The unconditional form does depend on current age.
        let (u1, _) = m.predict(5.0, 10.0, 0.5, HorizonMode::Unconditional).unwrap();
        let (u2, _) = m.predict(55.0, 10.0, 0.5, HorizonMode::Unconditional).unwrap();
        assert!(u2 > u1);
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_and_bounded(
            alpha in 1.0f64..120.0,
            beta in 0.2f64..8.0,
            a in 0.0f64..200.0,
            step in 0.0f64..50.0,
        ) {
            let m = model(alpha, beta);
            let f1 = m.cdf(a).unwrap();
            let f2 = m.cdf(a + step).unwrap();
            prop_assert!((0.0..=1.0).contains(&f1));
            prop_assert!(f2 >= f1);
            // Strictly below 1 wherever 1 - exp(-z) is still resolvable in
            // f64; past z ~ 37 the true value rounds to exactly 1.
            if crate::math::powf(a / alpha, beta) < 36.0 {
                prop_assert!(f1 < 1.0);
            }
        }

        #[test]
        fn horizon_probability_is_monotone_in_the_horizon(
            alpha in 10.0f64..100.0,
            beta in 0.5f64..6.0,
            age in 0.0f64..80.0,
            t1 in 0.0f64..30.0,
            dt in 0.0f64..30.0,
        ) {
            let m = model(alpha, beta);
            let (p1, _) = m.predict(age, t1, 0.5, HorizonMode::Conditional).unwrap();
            let (p2, _) = m.predict(age, t1 + dt, 0.5, HorizonMode::Conditional).unwrap();
            prop_assert!((0.0..=1.0).contains(&p1));
            prop_assert!(p2 >= p1 - 1e-12);
        }
    }
}

