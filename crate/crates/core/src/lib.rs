//! Condition-driven aging models and failure prediction for power asset fleets.
//!
//! The crate covers the full modeling chain for an asset class:
//!
//! 1. [`data`] — the condition dataset model (mixed numeric/categorical
//!    inspection features, physical ages, working/failed statuses).
//! 2. [`encode`] — encoding of mixed features into a weighted metric space.
//! 3. [`cluster`] — k-means over that space plus Silhouette-based selection
//!    of the cluster count.
//! 4. [`age`] — cluster conditional ages, per-asset conditional age, aging
//!    rates and their projection into the future.
//! 5. [`logistic`] — the two-variable logistic failure classifier over
//!    (physical age, conditional age), with minority oversampling.
//! 6. [`weibull`] — the physical-age-only Weibull baseline it is compared
//!    against.
//! 7. [`metrics`], [`split`], [`pipeline`], [`experiment`], [`fleet`] — the
//!    evaluation protocol: stratified splits, confusion-matrix metrics,
//!    end-to-end runs, data-quality/data-size sensitivity experiments and a
//!    synthetic fleet generator for benchmarking.
//!
//! The crate is `no_std`-compatible (with `alloc`); all file formats and the
//! command-line interface live in the companion `agewise` crate. Every
//! operation is deterministic given its inputs and an explicit seed.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod age;
pub mod cluster;
pub mod data;
pub mod encode;
pub mod experiment;
pub mod fleet;
pub mod logistic;
mod math;
pub mod metrics;
pub mod pipeline;
pub mod split;
#[cfg(test)]
pub(crate) mod testutil;
pub mod weibull;

#[cfg(test)]
mod preview {
    use crate::experiment::{noise_experiment, paper_noise_variants, size_experiment};
    use crate::fleet::{generate_fleet, FleetConfig};
    use crate::pipeline::{run_pipeline, PipelineConfig, PipelineMode};

    fn dashboard(label: &str, tweak: impl Fn(&mut FleetConfig)) {
        let mut modes = [0.0f64; 4];
        let mut noise = [0.0f64; 5];
        let mut sizes = [0.0f64; 4];
        let mut shares = (0.0f64, 0.0f64);
        for seed in 0..10u64 {
            let mut config = FleetConfig::demo(1000, seed);
            tweak(&mut config);
            let (history, truth) = generate_fleet(&config).unwrap();
            let base = history.latest_snapshot().unwrap();
            shares.0 += base
                .records()
                .iter()
                .filter(|r| r.status == crate::data::Status::Failed)
                .count() as f64
                / base.len() as f64
                / 10.0;
            shares.1 += truth
                .records()
                .iter()
                .filter(|r| r.status == crate::data::Status::Failed)
                .count() as f64
                / truth.len() as f64
                / 10.0;
            let pcfg = PipelineConfig::new(seed);
            for (i, mode) in [
                PipelineMode::Classification,
                PipelineMode::PredictLongTerm,
                PipelineMode::PredictOneTime,
                PipelineMode::Weibull,
            ]
            .iter()
            .enumerate()
            {
                let out = run_pipeline(&history, Some(&truth), *mode, &pcfg).unwrap();
                modes[i] += out.metrics.average.f1 / 10.0;
            }
            let n = noise_experiment(&history, &truth, &paper_noise_variants(), &pcfg, seed)
                .unwrap();
            for (i, v) in n.iter().enumerate() {
                noise[i] += v.metrics.average.f1 / 10.0;
            }
            let sz = size_experiment(&history, &truth, &[1000, 750, 500, 250], &pcfg, seed)
                .unwrap();
            for (i, (_, v)) in sz.iter().enumerate() {
                sizes[i] += v.metrics.average.f1 / 10.0;
            }
        }
        println!("== {label} | base fail {:.3} truth fail {:.3}", shares.0, shares.1);
        println!(
            "   MODES cls {:.4} long {:.4} one {:.4} weib {:.4} | cls-long {:+.4} long-one {:+.4}",
            modes[0], modes[1], modes[2], modes[3],
            modes[0] - modes[1], modes[1] - modes[2]
        );
        println!(
            "   NOISE c {:.4} s5 {:.4} s10 {:.4} i5 {:.4} i10 {:.4} | c-s5 {:+.4} s5-s10 {:+.4} i10-s10 {:+.4} c-i10 {:+.4}",
            noise[0], noise[1], noise[2], noise[3], noise[4],
            noise[0] - noise[1], noise[1] - noise[2], noise[4] - noise[2], noise[0] - noise[4]
        );
        println!(
            "   SIZES 1000 {:.4} 750 {:.4} 500 {:.4} 250 {:.4} | d1 {:+.4} d2 {:+.4} d3 {:+.4}",
            sizes[0], sizes[1], sizes[2], sizes[3],
            sizes[0] - sizes[1], sizes[1] - sizes[2], sizes[2] - sizes[3]
        );
    }

    #[test]
    #[ignore]
    fn candidate_scan() {
        dashboard("A: flat link, current sep", |c| {
            c.link = [-5.5, 0.03, 0.05];
        });
        dashboard("B: flat link, clean sep", |c| {
            c.link = [-5.5, 0.03, 0.05];
            c.feature_noise = alloc::vec![2.5, 3.5, 4.0, 0.1];
            c.feature_slopes = alloc::vec![1.8, -1.4, 0.0, 0.018];
        });
        dashboard("C: B + scarcer", |c| {
            c.link = [-6.1, 0.03, 0.05];
            c.feature_noise = alloc::vec![2.5, 3.5, 4.0, 0.1];
            c.feature_slopes = alloc::vec![1.8, -1.4, 0.0, 0.018];
        });
        dashboard("D: B + shock 13", |c| {
            c.link = [-5.5, 0.03, 0.05];
            c.feature_noise = alloc::vec![2.5, 3.5, 4.0, 0.1];
            c.feature_slopes = alloc::vec![1.8, -1.4, 0.0, 0.018];
            c.exogenous_failure_rate = 0.13;
        });
    }
}
