//! Two-variable logistic failure classifier.
//!
//! Models the failure probability as
//!
//! ```text
//! L = 1 / (1 + e^{-(b0 + b1·A_phys + b2·A_cond)})
//! ```
//!
//! with Failed as the positive class. Training maximizes the binomial
//! log-likelihood by Newton steps on the 3-parameter problem, with
//! step-halving whenever a step would lower the likelihood. Inputs are
//! standardized internally for conditioning; the stored coefficients are
//! back-transformed so the model evaluates in raw years.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Status;
use crate::math;

/// Coefficient magnitude cap in standardized units; reaching it flags the
/// training set as (near-)separable, where the unpenalized optimum diverges.
const SEPARATION_CAP: f64 = 50.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrainError {
    #[error("training data contains a single class: {0}")]
    SingleClass(String),
    #[error("need at least 3 training examples, got {0}")]
    TooFewExamples(usize),
    #[error("optimizer did not converge within {iterations} iterations")]
    NotConverged { iterations: usize },
}

/// One training pair: the two ages plus the recorded status.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub physical_age: f64,
    pub conditional_age: f64,
    pub status: Status,
}

/// Standardization constants captured at training time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub mean_physical: f64,
    pub sd_physical: f64,
    pub mean_conditional: f64,
    pub sd_conditional: f64,
}

/// A fitted classifier in raw-year units, with training metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub iterations: usize,
    pub log_likelihood: f64,
    pub scaling: ScalingParams,
    /// Set when the coefficient cap engaged (perfectly separable data).
    pub separation_warning: bool,
    /// Accepted log-likelihood after each Newton step, for auditing.
    pub ll_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_iters: usize,
    /// Convergence threshold on the gradient max-norm (standardized units).
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_iters: 100,
            tolerance: 1e-8,
        }
    }
}

/// Balances classes by duplicating minority examples cyclically until the
/// counts match; leftover copies are drawn by seed, and the result is
/// shuffled by the same seed. Majority examples pass through untouched.
pub fn oversample(examples: &[LabeledExample], seed: u64) -> Result<Vec<LabeledExample>, TrainError> {
    let failed: Vec<&LabeledExample> = examples.iter().filter(|e| e.status == Status::Failed).collect();
    let working: Vec<&LabeledExample> = examples.iter().filter(|e| e.status == Status::Working).collect();
    if failed.is_empty() {
        return Err(TrainError::SingleClass(String::from("Working")));
    }
    if working.is_empty() {
        return Err(TrainError::SingleClass(String::from("Failed")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (minority, majority) = if failed.len() <= working.len() {
        (failed, working)
    } else {
        (working, failed)
    };
    let mut out: Vec<LabeledExample> = Vec::with_capacity(2 * majority.len());
    out.extend(majority.iter().map(|e| **e));
    let full_copies = majority.len() / minority.len();
    let remainder = majority.len() % minority.len();
    for _ in 0..full_copies {
        out.extend(minority.iter().map(|e| **e));
    }
    if remainder > 0 {
        let mut indices: Vec<usize> = (0..minority.len()).collect();
        indices.shuffle(&mut rng);
        indices.truncate(remainder);
        indices.sort_unstable();
        out.extend(indices.into_iter().map(|i| *minority[i]));
    }
    out.shuffle(&mut rng);
    Ok(out)
}

/// Binomial log-likelihood of raw-unit coefficients over a training set.
pub fn log_likelihood(beta: [f64; 3], examples: &[LabeledExample]) -> f64 {
    let mut ll = 0.0;
    for e in examples {
        let p = sigmoid(beta[0] + beta[1] * e.physical_age + beta[2] * e.conditional_age)
            .clamp(1e-12, 1.0 - 1e-12);
        ll += match e.status {
            Status::Failed => math::ln(p),
            Status::Working => math::ln(1.0 - p),
        };
    }
    ll
}

/// Analytic gradient of [`log_likelihood`] in raw units.
pub fn log_likelihood_gradient(beta: [f64; 3], examples: &[LabeledExample]) -> [f64; 3] {
    let mut g = [0.0f64; 3];
    for e in examples {
        let p = sigmoid(beta[0] + beta[1] * e.physical_age + beta[2] * e.conditional_age);
        let y = match e.status {
            Status::Failed => 1.0,
            Status::Working => 0.0,
        };
        let r = y - p;
        g[0] += r;
        g[1] += r * e.physical_age;
        g[2] += r * e.conditional_age;
    }
    g
}

/// Fits the classifier by Newton iteration on the standardized problem.
pub fn train(examples: &[LabeledExample], config: &TrainConfig) -> Result<LogisticModel, TrainError> {
    if examples.len() < 3 {
        return Err(TrainError::TooFewExamples(examples.len()));
    }
    let failed = examples.iter().filter(|e| e.status == Status::Failed).count();
    if failed == 0 {
        return Err(TrainError::SingleClass(String::from("Working")));
    }
    if failed == examples.len() {
        return Err(TrainError::SingleClass(String::from("Failed")));
    }

    let scaling = fit_scaling(examples);
    let xs: Vec<[f64; 3]> = examples
        .iter()
        .map(|e| {
            [
                1.0,
                (e.physical_age - scaling.mean_physical) / scaling.sd_physical,
                (e.conditional_age - scaling.mean_conditional) / scaling.sd_conditional,
            ]
        })
        .collect();
    let ys: Vec<f64> = examples
        .iter()
        .map(|e| match e.status {
            Status::Failed => 1.0,
            Status::Working => 0.0,
        })
        .collect();

    let mut theta = [0.0f64; 3];
    let mut ll = ll_standardized(&theta, &xs, &ys);
    let mut trace = alloc::vec![ll];
    let mut separation_warning = false;
    let mut converged_at = None;

    for iter in 1..=config.max_iters {
        let (grad, hessian) = grad_hessian(&theta, &xs, &ys);
        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(math::abs(*g)));
        if grad_norm < config.tolerance {
            converged_at = Some(iter - 1);
            break;
        }
        let mut step = solve3(hessian, grad);
        // Step-halving keeps the likelihood non-decreasing.
        let mut accepted = false;
        let mut stalled = false;
        for _ in 0..40 {
            let candidate = [theta[0] + step[0], theta[1] + step[1], theta[2] + step[2]];
            let candidate_ll = ll_standardized(&candidate, &xs, &ys);
            if candidate_ll >= ll {
                stalled = candidate == theta;
                theta = candidate;
                ll = candidate_ll;
                accepted = true;
                break;
            }
            step = [step[0] / 2.0, step[1] / 2.0, step[2] / 2.0];
        }
        if !accepted || stalled {
            // No representable uphill step remains: converged at the
            // precision the likelihood can resolve.
            converged_at = Some(iter);
            break;
        }
        trace.push(ll);
        if theta.iter().any(|t| math::abs(*t) > SEPARATION_CAP) {
            for t in theta.iter_mut() {
                *t = t.clamp(-SEPARATION_CAP, SEPARATION_CAP);
            }
            ll = ll_standardized(&theta, &xs, &ys);
            trace.push(ll);
            separation_warning = true;
            converged_at = Some(iter);
            break;
        }
    }

    let iterations = match converged_at {
        Some(i) => i,
        None => {
            let (grad, _) = grad_hessian(&theta, &xs, &ys);
            let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(math::abs(*g)));
            if grad_norm >= config.tolerance {
                return Err(TrainError::NotConverged {
                    iterations: config.max_iters,
                });
            }
            config.max_iters
        }
    };

    // Saturated fits mean the data is separable and the unpenalized optimum
    // lies at infinity; the finite coefficients still classify correctly.
    if !separation_warning {
        separation_warning = xs.iter().zip(&ys).all(|(x, &y)| {
            let p = sigmoid(theta[0] * x[0] + theta[1] * x[1] + theta[2] * x[2]);
            if y > 0.5 {
                p > 1.0 - 1e-8
            } else {
                p < 1e-8
            }
        });
    }

    // Back-transform to raw units so the model evaluates ages in years.
    let beta1 = theta[1] / scaling.sd_physical;
    let beta2 = theta[2] / scaling.sd_conditional;
    let beta0 = theta[0]
        - theta[1] * scaling.mean_physical / scaling.sd_physical
        - theta[2] * scaling.mean_conditional / scaling.sd_conditional;
    Ok(LogisticModel {
        beta0,
        beta1,
        beta2,
        iterations,
        log_likelihood: ll,
        scaling,
        separation_warning,
        ll_trace: trace,
    })
}

fn fit_scaling(examples: &[LabeledExample]) -> ScalingParams {
    let n = examples.len() as f64;
    let mean_p = examples.iter().map(|e| e.physical_age).sum::<f64>() / n;
    let mean_c = examples.iter().map(|e| e.conditional_age).sum::<f64>() / n;
    let var_p = examples
        .iter()
        .map(|e| (e.physical_age - mean_p) * (e.physical_age - mean_p))
        .sum::<f64>()
        / n;
    let var_c = examples
        .iter()
        .map(|e| (e.conditional_age - mean_c) * (e.conditional_age - mean_c))
        .sum::<f64>()
        / n;
    let floor = 1e-12;
    ScalingParams {
        mean_physical: mean_p,
        sd_physical: if var_p > floor { math::sqrt(var_p) } else { 1.0 },
        mean_conditional: mean_c,
        sd_conditional: if var_c > floor { math::sqrt(var_c) } else { 1.0 },
    }
}

fn ll_standardized(theta: &[f64; 3], xs: &[[f64; 3]], ys: &[f64]) -> f64 {
    let mut ll = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let p = sigmoid(theta[0] * x[0] + theta[1] * x[1] + theta[2] * x[2]).clamp(1e-12, 1.0 - 1e-12);
        ll += y * math::ln(p) + (1.0 - y) * math::ln(1.0 - p);
    }
    ll
}

fn grad_hessian(theta: &[f64; 3], xs: &[[f64; 3]], ys: &[f64]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut grad = [0.0f64; 3];
    let mut hess = [[0.0f64; 3]; 3];
    for (x, &y) in xs.iter().zip(ys) {
        let p = sigmoid(theta[0] * x[0] + theta[1] * x[1] + theta[2] * x[2]);
        let r = y - p;
        let w = (p * (1.0 - p)).max(1e-12);
        for i in 0..3 {
            grad[i] += r * x[i];
            for j in 0..3 {
                hess[i][j] += w * x[i] * x[j];
            }
        }
    }
    (grad, hess)
}

/// Solves H·s = g for the Newton step with partial pivoting; a tiny ridge is
/// added if the system is singular (e.g. a constant input column).
fn solve3(mut h: [[f64; 3]; 3], g: [f64; 3]) -> [f64; 3] {
    let mut b = g;
    for attempt in 0..2 {
        if attempt == 1 {
            for (i, row) in h.iter_mut().enumerate() {
                row[i] += 1e-8;
            }
            b = g;
        }
        let mut a = h;
        let mut x = b;
        let mut ok = true;
        for col in 0..3 {
            let mut pivot = col;
            for row in col + 1..3 {
                if math::abs(a[row][col]) > math::abs(a[pivot][col]) {
                    pivot = row;
                }
            }
            if math::abs(a[pivot][col]) < 1e-300 {
                ok = false;
                break;
            }
            a.swap(col, pivot);
            x.swap(col, pivot);
            for row in col + 1..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                x[row] -= f * x[col];
            }
        }
        if !ok {
            continue;
        }
        let mut s = [0.0f64; 3];
        for row in (0..3).rev() {
            let mut v = x[row];
            for k in row + 1..3 {
                v -= a[row][k] * s[k];
            }
            s[row] = v / a[row][row];
        }
        if s.iter().all(|v| v.is_finite()) {
            return s;
        }
    }
    [0.0; 3]
}

fn sigmoid(score: f64) -> f64 {
    if score >= 0.0 {
        1.0 / (1.0 + math::exp(-score))
    } else {
        let e = math::exp(score);
        e / (1.0 + e)
    }
}

impl LogisticModel {
    /// Failure probability for raw ages, clamped into the open unit interval.
    pub fn predict_probability(&self, physical_age: f64, conditional_age: f64) -> f64 {
        let score = self.beta0 + self.beta1 * physical_age + self.beta2 * conditional_age;
        sigmoid(score).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
    }

    /// Failed when the probability strictly exceeds the threshold.
    pub fn classify(&self, physical_age: f64, conditional_age: f64, threshold: f64) -> Status {
        if self.predict_probability(physical_age, conditional_age) > threshold {
            Status::Failed
        } else {
            Status::Working
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn example(p: f64, c: f64, status: Status) -> LabeledExample {
        LabeledExample {
            physical_age: p,
            conditional_age: c,
            status,
        }
    }

    fn count(examples: &[LabeledExample], status: Status) -> usize {
        examples.iter().filter(|e| e.status == status).count()
    }

    #[test]
    fn oversample_exact_divisor() {
        let mut examples = Vec::new();
        for i in 0..3 {
            examples.push(example(10.0 + i as f64, 10.0, Status::Failed));
        }
        for i in 0..9 {
            examples.push(example(20.0 + i as f64, 20.0, Status::Working));
        }
        let out = oversample(&examples, 1).unwrap();
        assert_eq!(count(&out, Status::Failed), 9);
        assert_eq!(count(&out, Status::Working), 9);
        // Each failed original appears exactly three times.
        for i in 0..3 {
            let copies = out
                .iter()
                .filter(|e| e.status == Status::Failed && e.physical_age == 10.0 + i as f64)
                .count();
            assert_eq!(copies, 3);
        }
    }

    #[test]
    fn oversample_with_remainder() {
        let mut examples = Vec::new();
        for i in 0..4 {
            examples.push(example(10.0 + i as f64, 10.0, Status::Failed));
        }
        for i in 0..10 {
            examples.push(example(20.0 + i as f64, 20.0, Status::Working));
        }
        let out = oversample(&examples, 7).unwrap();
        assert_eq!(count(&out, Status::Failed), 10);
        assert_eq!(count(&out, Status::Working), 10);
        // Two full copies of each failed example plus two seeded extras.
        for i in 0..4 {
            let copies = out
                .iter()
                .filter(|e| e.status == Status::Failed && e.physical_age == 10.0 + i as f64)
                .count();
            assert!(copies == 2 || copies == 3, "copies = {copies}");
        }
    }

    #[test]
    fn oversample_balanced_input_is_a_fixed_point() {
        let examples = alloc::vec![
            example(1.0, 1.0, Status::Failed),
            example(2.0, 2.0, Status::Working),
            example(3.0, 3.0, Status::Failed),
            example(4.0, 4.0, Status::Working),
        ];
        let mut out = oversample(&examples, 3).unwrap();
        out.sort_by(|a, b| a.physical_age.total_cmp(&b.physical_age));
        assert_eq!(out, examples);
    }

    #[test]
    fn oversample_rejects_single_class() {
        let examples = alloc::vec![example(1.0, 1.0, Status::Working)];
        assert!(matches!(
            oversample(&examples, 0),
            Err(TrainError::SingleClass(_))
        ));
    }

    fn separable_set() -> Vec<LabeledExample> {
        // Failed exactly when p + c > 100, with a wide margin.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut examples = Vec::new();
        for _ in 0..60 {
            let p: f64 = rng.random_range(5.0..45.0);
            let c: f64 = rng.random_range(5.0..40.0);
            examples.push(example(p, c, Status::Working));
        }
        for _ in 0..60 {
            let p: f64 = rng.random_range(60.0..95.0);
            let c: f64 = rng.random_range(55.0..90.0);
            examples.push(example(p, c, Status::Failed));
        }
        examples
    }

    #[test]
    fn separable_data_classifies_training_set_perfectly() {
        let examples = separable_set();
        let model = train(&examples, &TrainConfig::default()).unwrap();
        let correct = examples
            .iter()
            .filter(|e| model.classify(e.physical_age, e.conditional_age, 0.5) == e.status)
            .count();
        assert_eq!(correct, examples.len());
        assert!(model.separation_warning);
    }

    #[test]
    fn label_independent_data_gives_flat_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut examples = Vec::new();
        for i in 0..2000 {
            let p: f64 = rng.random_range(10.0..70.0);
            let c: f64 = rng.random_range(10.0..70.0);
            let status = if i % 2 == 0 { Status::Failed } else { Status::Working };
            examples.push(example(p, c, status));
        }
        let model = train(&examples, &TrainConfig::default()).unwrap();
        let max_dev = examples
            .iter()
            .map(|e| (model.predict_probability(e.physical_age, e.conditional_age) - 0.5).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev < 0.05, "max deviation {max_dev}");
    }

    #[test]
    fn duplicating_the_training_set_leaves_coefficients_unchanged() {
        let mut examples = separable_set();
        // Soften separation so the optimum is interior.
        examples.push(example(80.0, 80.0, Status::Working));
        examples.push(example(20.0, 20.0, Status::Failed));
        let model_once = train(&examples, &TrainConfig::default()).unwrap();
        let doubled: Vec<LabeledExample> =
            examples.iter().chain(examples.iter()).copied().collect();
        let model_twice = train(&doubled, &TrainConfig::default()).unwrap();
        assert!((model_once.beta0 - model_twice.beta0).abs() < 1e-8);
        assert!((model_once.beta1 - model_twice.beta1).abs() < 1e-8);
        assert!((model_once.beta2 - model_twice.beta2).abs() < 1e-8);
    }

    #[test]
    fn log_likelihood_trace_is_non_decreasing() {
        let mut examples = separable_set();
        examples.push(example(80.0, 80.0, Status::Working));
        examples.push(example(20.0, 20.0, Status::Failed));
        let model = train(&examples, &TrainConfig::default()).unwrap();
        for pair in model.ll_trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12, "ll fell: {} -> {}", pair[0], pair[1]);
        }
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let examples: Vec<LabeledExample> = (0..50)
            .map(|i| {
                example(
                    rng.random_range(5.0..60.0),
                    rng.random_range(5.0..60.0),
                    if i % 3 == 0 { Status::Failed } else { Status::Working },
                )
            })
            .collect();
        let h = 1e-5;
        for _ in 0..20 {
            let beta = [
                rng.random_range(-1.0..1.0),
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
            ];
            let analytic = log_likelihood_gradient(beta, &examples);
            for i in 0..3 {
                let mut hi = beta;
                let mut lo = beta;
                hi[i] += h;
                lo[i] -= h;
                let numeric =
                    (log_likelihood(hi, &examples) - log_likelihood(lo, &examples)) / (2.0 * h);
                let rel = (analytic[i] - numeric).abs() / numeric.abs().max(1e-8);
                assert!(rel < 1e-6, "component {i}: analytic {} vs numeric {numeric}", analytic[i]);
            }
        }
    }

    #[test]
    fn sigmoid_midpoint_and_monotonicity() {
        let model = LogisticModel {
            beta0: -2.0,
            beta1: 0.5,
            beta2: 0.5,
            iterations: 0,
            log_likelihood: 0.0,
            scaling: ScalingParams {
                mean_physical: 0.0,
                sd_physical: 1.0,
                mean_conditional: 0.0,
                sd_conditional: 1.0,
            },
            separation_warning: false,
            ll_trace: alloc::vec![],
        };
        // Score zero at p + c = 4.
        assert_eq!(model.predict_probability(2.0, 2.0), 0.5);
        // Probability 0.5 is NOT failed: strictly-greater rule.
        assert_eq!(model.classify(2.0, 2.0, 0.5), Status::Working);
        // Large finite score drives the probability to the upper end.
        assert!(model.predict_probability(1e4, 1e4) > 1.0 - 1e-9);
        assert!(model.predict_probability(1e4, 1e4) < 1.0);
        // Raising the threshold never converts working into failed.
        let p = model.predict_probability(3.0, 3.0);
        assert!(p > 0.5);
        assert_eq!(model.classify(3.0, 3.0, 0.5), Status::Failed);
        assert_eq!(model.classify(3.0, 3.0, 0.9), Status::Working);
    }

    proptest! {
        #[test]
        fn probabilities_stay_in_the_open_unit_interval(
            b0 in -100.0f64..100.0,
            b1 in -10.0f64..10.0,
            b2 in -10.0f64..10.0,
            p in 0.0f64..1e6,
            c in 0.0f64..1e6,
        ) {
            let model = LogisticModel {
                beta0: b0,
                beta1: b1,
                beta2: b2,
                iterations: 0,
                log_likelihood: 0.0,
                scaling: ScalingParams {
                    mean_physical: 0.0,
                    sd_physical: 1.0,
                    mean_conditional: 0.0,
                    sd_conditional: 1.0,
                },
                separation_warning: false,
                ll_trace: alloc::vec![],
            };
            let prob = model.predict_probability(p, c);
            prop_assert!(prob > 0.0 && prob < 1.0);
        }

        #[test]
        fn positive_coefficients_are_monotone_in_age(
            p in 0.0f64..100.0,
            c in 0.0f64..100.0,
            dp in 0.0f64..50.0,
        ) {
            let model = LogisticModel {
                beta0: -5.0,
                beta1: 0.04,
                beta2: 0.06,
                iterations: 0,
                log_likelihood: 0.0,
                scaling: ScalingParams {
                    mean_physical: 0.0,
                    sd_physical: 1.0,
                    mean_conditional: 0.0,
                    sd_conditional: 1.0,
                },
                separation_warning: false,
                ll_trace: alloc::vec![],
            };
            prop_assert!(model.predict_probability(p + dp, c) >= model.predict_probability(p, c));
            prop_assert!(model.predict_probability(p, c + dp) >= model.predict_probability(p, c));
        }

        #[test]
        fn oversample_balances_and_copies_only_inputs(
            n_failed in 1usize..12,
            n_working in 1usize..12,
            seed in 0u64..500,
        ) {
            let mut examples = Vec::new();
            for i in 0..n_failed {
                examples.push(example(i as f64, 100.0, Status::Failed));
            }
            for i in 0..n_working {
                examples.push(example(1000.0 + i as f64, 5.0, Status::Working));
            }
            let out = oversample(&examples, seed).unwrap();
            prop_assert_eq!(count(&out, Status::Failed), count(&out, Status::Working));
            for e in &out {
                prop_assert!(examples.iter().any(|orig| orig == e));
            }
        }
    }
}
