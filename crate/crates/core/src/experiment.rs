//! Data-quality and data-size sensitivity experiments.
//!
//! Each experiment perturbs or subsets the history, re-runs the long-term
//! prediction pipeline with the same pipeline seed, and reports the metric
//! deltas. Keeping the pipeline seed fixed pairs the runs, so differences
//! come from the perturbation alone.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind, RawValue, Status};
use crate::metrics::{ConfusionMatrix, MetricsReport};
use crate::pipeline::{run_pipeline, PipelineConfig, PipelineError, PipelineMode};

/// One data-quality perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NoiseSpec {
    /// Unmodified dataset.
    Clean,
    /// Flip Working/Failed on this many assets' most recent inspection rows.
    SwapStatuses(usize),
    /// Multiply this many randomly chosen numeric feature cells by `factor`.
    InflateFeatures { count: usize, factor: f64 },
}

impl NoiseSpec {
    pub fn label(&self) -> String {
        match self {
            NoiseSpec::Clean => String::from("clean"),
            NoiseSpec::SwapStatuses(n) => alloc::format!("swap-{n}"),
            NoiseSpec::InflateFeatures { count, factor } => {
                alloc::format!("inflate-{count}-x{factor}")
            }
        }
    }
}

/// The four perturbations of the data-quality study, after the clean run.
pub fn paper_noise_variants() -> Vec<NoiseSpec> {
    alloc::vec![
        NoiseSpec::Clean,
        NoiseSpec::SwapStatuses(5),
        NoiseSpec::SwapStatuses(10),
        NoiseSpec::InflateFeatures { count: 5, factor: 1.5 },
        NoiseSpec::InflateFeatures { count: 10, factor: 1.5 },
    ]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("perturbation touches {requested} items, dataset offers {available}")]
    CountExceedsData { requested: usize, available: usize },
    #[error("subset size {requested} exceeds the {available} assets available")]
    SizeExceedsData { requested: usize, available: usize },
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// Result of one experiment variant.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantOutcome {
    pub label: String,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

/// Applies each noise variant to the history and re-runs the long-term
/// prediction pipeline. Selection of the perturbed rows is seeded per
/// variant; the pipeline itself keeps its own seed from `config`.
pub fn noise_experiment(
    history: &Dataset,
    truth: &Dataset,
    variants: &[NoiseSpec],
    config: &PipelineConfig,
    seed: u64,
) -> Result<Vec<VariantOutcome>, ExperimentError> {
    let mut outcomes = Vec::with_capacity(variants.len());
    for (index, variant) in variants.iter().enumerate() {
        let variant_seed = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index as u64));
        let perturbed = apply_noise(history, *variant, variant_seed)?;
        let outcome = run_pipeline(
            &perturbed,
            Some(truth),
            PipelineMode::PredictLongTerm,
            config,
        )?;
        outcomes.push(VariantOutcome {
            label: variant.label(),
            confusion: outcome.confusion,
            metrics: outcome.metrics,
        });
    }
    Ok(outcomes)
}

/// Applies a single perturbation to a copy of the dataset.
pub fn apply_noise(
    history: &Dataset,
    spec: NoiseSpec,
    seed: u64,
) -> Result<Dataset, ExperimentError> {
    match spec {
        NoiseSpec::Clean => Ok(history.clone()),
        NoiseSpec::SwapStatuses(count) => {
            let ids = history.asset_ids();
            if count > ids.len() {
                return Err(ExperimentError::CountExceedsData {
                    requested: count,
                    available: ids.len(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut shuffled = ids;
            shuffled.shuffle(&mut rng);
            let chosen: BTreeSet<String> = shuffled.into_iter().take(count).collect();
            // Flip each chosen asset's most recent inspection row.
            let mut latest_year: alloc::collections::BTreeMap<&str, Option<i32>> =
                alloc::collections::BTreeMap::new();
            for record in history.records() {
                let entry = latest_year.entry(record.asset_id.as_str()).or_insert(None);
                if record.inspection_year >= *entry {
                    *entry = record.inspection_year;
                }
            }
            let mut records = history.records().to_vec();
            for record in records.iter_mut() {
                if chosen.contains(&record.asset_id)
                    && record.inspection_year == latest_year[record.asset_id.as_str()]
                {
                    record.status = match record.status {
                        Status::Working => Status::Failed,
                        Status::Failed => Status::Working,
                    };
                }
            }
            Ok(Dataset::new(history.schema().clone(), records, history.kind())
                .map_err(PipelineError::from)?)
        }
        NoiseSpec::InflateFeatures { count, factor } => {
            let numeric_features: Vec<String> = history
                .schema()
                .features()
                .iter()
                .filter(|f| f.kind == FeatureKind::Numeric)
                .map(|f| f.name.clone())
                .collect();
            let mut cells: Vec<(usize, &str)> = Vec::new();
            for row in 0..history.len() {
                for name in &numeric_features {
                    cells.push((row, name.as_str()));
                }
            }
            if count > cells.len() {
                return Err(ExperimentError::CountExceedsData {
                    requested: count,
                    available: cells.len(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            cells.shuffle(&mut rng);
            let mut records = history.records().to_vec();
            for (row, name) in cells.into_iter().take(count) {
                if let Some(RawValue::Number(x)) = records[row].values.get_mut(name) {
                    *x *= factor;
                }
            }
            Ok(Dataset::new(history.schema().clone(), records, history.kind())
                .map_err(PipelineError::from)?)
        }
    }
}

/// Re-runs the long-term prediction pipeline on nested seeded subsets of the
/// fleet. Subsets are prefixes of one seeded permutation, so smaller sizes
/// are contained in larger ones.
pub fn size_experiment(
    history: &Dataset,
    truth: &Dataset,
    sizes: &[usize],
    config: &PipelineConfig,
    seed: u64,
) -> Result<Vec<(usize, VariantOutcome)>, ExperimentError> {
    let mut ids = history.asset_ids();
    let available = ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.shuffle(&mut rng);
    let mut outcomes = Vec::with_capacity(sizes.len());
    for &size in sizes {
        if size > available {
            return Err(ExperimentError::SizeExceedsData {
                requested: size,
                available,
            });
        }
        let keep: BTreeSet<String> = ids.iter().take(size).cloned().collect();
        let sub_history = history.filter_assets(&keep);
        let sub_truth = truth.filter_assets(&keep);
        let outcome = run_pipeline(
            &sub_history,
            Some(&sub_truth),
            PipelineMode::PredictLongTerm,
            config,
        )?;
        outcomes.push((
            size,
            VariantOutcome {
                label: alloc::format!("size-{size}"),
                confusion: outcome.confusion,
                metrics: outcome.metrics,
            },
        ));
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::{generate_fleet, FleetConfig};

    #[test]
    fn zero_swaps_match_the_clean_run_exactly() {
        let config = FleetConfig::demo(200, 31);
        let (history, truth) = generate_fleet(&config).unwrap();
        let pcfg = PipelineConfig::new(31);
        let outcomes = noise_experiment(
            &history,
            &truth,
            &[NoiseSpec::Clean, NoiseSpec::SwapStatuses(0)],
            &pcfg,
            31,
        )
        .unwrap();
        assert_eq!(outcomes[0].confusion, outcomes[1].confusion);
        assert_eq!(outcomes[0].metrics, outcomes[1].metrics);
    }

    #[test]
    fn swaps_flip_only_latest_rows_of_chosen_assets() {
        let config = FleetConfig::demo(60, 5);
        let (history, _) = generate_fleet(&config).unwrap();
        let perturbed = apply_noise(&history, NoiseSpec::SwapStatuses(7), 99).unwrap();
        let mut flipped_latest = 0;
        let mut flipped_early = 0;
        for (a, b) in history.records().iter().zip(perturbed.records()) {
            if a.status != b.status {
                if a.inspection_year == Some(2017) {
                    flipped_latest += 1;
                } else {
                    flipped_early += 1;
                }
            }
        }
        assert_eq!(flipped_latest, 7);
        assert_eq!(flipped_early, 0);
    }

    #[test]
    fn inflation_scales_exactly_count_numeric_cells() {
        let config = FleetConfig::demo(60, 6);
        let (history, _) = generate_fleet(&config).unwrap();
        let perturbed =
            apply_noise(&history, NoiseSpec::InflateFeatures { count: 9, factor: 1.5 }, 1).unwrap();
        let mut changed = 0;
        for (a, b) in history.records().iter().zip(perturbed.records()) {
            for (name, value) in &a.values {
                if let (RawValue::Number(x), Some(RawValue::Number(y))) =
                    (value, b.values.get(name))
                {
                    if x != y {
                        changed += 1;
                        assert!((y / x - 1.5).abs() < 1e-12);
                    }
                }
            }
        }
        assert_eq!(changed, 9);
    }

    #[test]
    fn oversized_requests_error_instead_of_skipping() {
        let config = FleetConfig::demo(30, 7);
        let (history, truth) = generate_fleet(&config).unwrap();
        assert!(matches!(
            apply_noise(&history, NoiseSpec::SwapStatuses(31), 1),
            Err(ExperimentError::CountExceedsData { .. })
        ));
        let pcfg = PipelineConfig::new(7);
        assert!(matches!(
            size_experiment(&history, &truth, &[40], &pcfg, 7),
            Err(ExperimentError::SizeExceedsData { requested: 40, available: 30 })
        ));
    }

    #[test]
    fn full_size_subset_equals_baseline_run() {
        let config = FleetConfig::demo(150, 12);
        let (history, truth) = generate_fleet(&config).unwrap();
        let pcfg = PipelineConfig::new(12);
        let baseline = run_pipeline(
            &history,
            Some(&truth),
            PipelineMode::PredictLongTerm,
            &pcfg,
        )
        .unwrap();
        let outcomes = size_experiment(&history, &truth, &[150], &pcfg, 12).unwrap();
        assert_eq!(outcomes[0].1.confusion, baseline.confusion);
    }

    #[test]
    fn undersized_subset_surfaces_split_errors() {
        let config = FleetConfig::demo(80, 13);
        let (history, truth) = generate_fleet(&config).unwrap();
        let pcfg = PipelineConfig::new(13);
        // A handful of assets cannot satisfy the 5-per-class split floor.
        let result = size_experiment(&history, &truth, &[80, 6], &pcfg, 13);
        assert!(matches!(result, Err(ExperimentError::Pipeline(_))));
    }
}
