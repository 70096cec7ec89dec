//! Synthetic fleet generator with known ground truth.
//!
//! Each asset draws a latent condition cluster, a base aging rate and a
//! per-asset rate drift. Its true conditional age evolves as
//! `R(t) · (A0 + t)` with `R(t) = R0 + drift·t`, condition features are
//! noisy readouts of that conditional age around the cluster's centers, and
//! statuses are Bernoulli draws from a ground-truth logistic link on
//! (physical age, true conditional age). The generator emits a long-term
//! history over the configured inspection years plus a one-time truth
//! snapshot carrying the last year's statuses: evaluation predicts forward
//! from the earliest year and scores against that last-year truth.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{
    AssetRecord, DataError, Dataset, DatasetKind, FeatureKind, FeatureSchema, FeatureSpec,
    RawValue, Status,
};
use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FleetError {
    #[error("fleet size must be positive")]
    EmptyFleet,
    #[error("at least one latent cluster is required")]
    NoClusters,
    #[error("cluster {index} declares {got} feature centers, schema has {expected} features")]
    CenterCountMismatch {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("feature slopes/noise must list one entry per schema feature")]
    FeatureParamMismatch,
    #[error("cluster {index} has a non-positive share")]
    BadShare { index: usize },
    #[error("at least two strictly increasing inspection years are required")]
    BadInspectionYears,
    #[error("rate parameters must be positive (mean) and non-negative (spreads)")]
    BadRateParams,
    #[error(transparent)]
    Data(#[from] DataError),
}

/// One latent condition regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentCluster {
    /// Relative share of the fleet drawn from this regime.
    pub share: f64,
    /// Mean true conditional age of members at their first inspection.
    pub age_center: f64,
    pub age_sd: f64,
    /// Per-feature centers in schema order: raw units for numeric features,
    /// 1-based level index for categorical ones.
    pub feature_centers: Vec<f64>,
    /// Mean yearly change of members' aging rate.
    pub rate_drift: f64,
}

/// Ground-truth generator parameters. The seed is mandatory; identical
/// configs produce identical fleets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetConfig {
    pub fleet_size: usize,
    pub schema: FeatureSchema,
    pub clusters: Vec<LatentCluster>,
    /// Base aging-rate distribution across assets.
    pub rate_mean: f64,
    pub rate_sd: f64,
    /// Asset-level spread around the cluster's rate drift.
    pub rate_drift_sd: f64,
    /// Per-feature change per conditional-age year (schema order). Level
    /// index units for ordered features; ignored for unordered ones.
    pub feature_slopes: Vec<f64>,
    /// Per-feature noise (schema order): raw-unit standard deviation for
    /// numeric, level-index standard deviation for ordered, and flip
    /// probability for unordered features.
    pub feature_noise: Vec<f64>,
    /// Ground-truth failure link: intercept, physical-age and
    /// conditional-age coefficients.
    pub link: [f64; 3],
    /// Probability that an asset in the truth snapshot fails for reasons
    /// unrelated to its condition (dig-ins, storms); no predictor can see
    /// these coming.
    pub exogenous_failure_rate: f64,
    pub inspection_years: Vec<i32>,
    pub seed: u64,
}

impl FleetConfig {
    /// A cable-fleet-like benchmark fleet: four age regimes, each split
    /// into a low- and a high-loading variant. Loading does not show in the
    /// aging features but governs how fast rates drift, so long-term rate
    /// histories carry real information. Adjacent age regimes are only
    /// marginally separated, which makes the recoverable cluster structure
    /// richer as fleets grow.
    pub fn demo(fleet_size: usize, seed: u64) -> FleetConfig {
        let schema = FeatureSchema::new(alloc::vec![
            FeatureSpec::numeric("pd_severity"),
            FeatureSpec::numeric("insulation_margin"),
            FeatureSpec::numeric("loading_index"),
            FeatureSpec::ordered("visual_rating", &["good", "medium", "poor"]),
        ])
        .expect("demo schema is valid");
        let age_levels = [
            (12.0, 4.0, 0.30),
            (30.0, 5.0, 0.30),
            (48.0, 6.0, 0.25),
            (66.0, 7.0, 0.15),
        ];
        let low_drift = [0.0, 0.002, 0.004, 0.006];
        let high_drift = [0.02, 0.034, 0.048, 0.062];
        let visual = [1.2, 1.8, 2.4, 2.9];
        let mut clusters = Vec::new();
        for (i, &(age, age_sd, share)) in age_levels.iter().enumerate() {
            for (loading, drift) in [(25.0, low_drift[i]), (75.0, high_drift[i])] {
                clusters.push(LatentCluster {
                    share: share / 2.0,
                    age_center: age,
                    age_sd,
                    feature_centers: alloc::vec![
                        8.0 + 1.1 * age,
                        95.0 - 1.1 * age,
                        loading,
                        visual[i],
                    ],
                    rate_drift: drift,
                });
            }
        }
        FleetConfig {
            fleet_size,
            schema,
            clusters,
            rate_mean: 1.0,
            rate_sd: 0.25,
            rate_drift_sd: 0.008,
            feature_slopes: alloc::vec![1.5, -1.1, 0.0, 0.015],
            feature_noise: alloc::vec![3.5, 4.5, 5.0, 0.12],
            link: [-8.0, 0.03, 0.08],
            exogenous_failure_rate: 0.1,
            inspection_years: alloc::vec![2012, 2017],
            seed,
        }
    }

    /// Three widely separated condition regimes with mild drift; the
    /// cluster-count recovery benchmark.
    pub fn three_clusters(fleet_size: usize, seed: u64) -> FleetConfig {
        let mut config = FleetConfig::demo(fleet_size, seed);
        config.clusters = alloc::vec![];
        for (i, &(age, drift)) in [(12.0, 0.004), (40.0, 0.012), (70.0, 0.02)].iter().enumerate() {
            config.clusters.push(LatentCluster {
                share: 1.0,
                age_center: age,
                age_sd: 4.0 + i as f64,
                feature_centers: alloc::vec![
                    8.0 + 1.1 * age,
                    95.0 - 1.1 * age,
                    25.0,
                    [1.1, 2.0, 2.9][i],
                ],
                rate_drift: drift,
            });
        }
        config
    }

    fn validate(&self) -> Result<(), FleetError> {
        if self.fleet_size == 0 {
            return Err(FleetError::EmptyFleet);
        }
        if self.clusters.is_empty() {
            return Err(FleetError::NoClusters);
        }
        for (index, cluster) in self.clusters.iter().enumerate() {
            if cluster.feature_centers.len() != self.schema.len() {
                return Err(FleetError::CenterCountMismatch {
                    index,
                    got: cluster.feature_centers.len(),
                    expected: self.schema.len(),
                });
            }
            if !(cluster.share > 0.0 && cluster.share.is_finite()) {
                return Err(FleetError::BadShare { index });
            }
        }
        if self.feature_slopes.len() != self.schema.len()
            || self.feature_noise.len() != self.schema.len()
        {
            return Err(FleetError::FeatureParamMismatch);
        }
        if self.inspection_years.len() < 2
            || self.inspection_years.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(FleetError::BadInspectionYears);
        }
        if !(self.rate_mean > 0.0) || self.rate_sd < 0.0 || self.rate_drift_sd < 0.0 {
            return Err(FleetError::BadRateParams);
        }
        if !(0.0..=1.0).contains(&self.exogenous_failure_rate) {
            return Err(FleetError::BadRateParams);
        }
        Ok(())
    }
}

/// Standard normal via Box-Muller; consumes exactly two uniform draws.
fn normal(rng: &mut ChaCha8Rng, mean: f64, sd: f64) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    mean + sd * math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + math::exp(-x))
    } else {
        let e = math::exp(x);
        e / (1.0 + e)
    }
}

/// Generates (long-term history, one-time truth snapshot).
pub fn generate_fleet(config: &FleetConfig) -> Result<(Dataset, Dataset), FleetError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let id_width = config.fleet_size.to_string().len().max(4);
    let first_year = config.inspection_years[0];
    let last_year = *config.inspection_years.last().expect("validated non-empty");

    let mut history_rows = Vec::new();
    let mut truth_rows = Vec::new();
    for index in 0..config.fleet_size {
        let asset_id = format_id(index + 1, id_width);
        let cluster = draw_cluster(&mut rng, config);
        let cond_age0 = normal(&mut rng, cluster.age_center, cluster.age_sd).max(2.0);
        let rate0 = normal(&mut rng, config.rate_mean, config.rate_sd).max(0.2);
        let drift = normal(&mut rng, cluster.rate_drift, config.rate_drift_sd);
        let age0 = cond_age0 / rate0;

        for &year in &config.inspection_years {
            let t = (year - first_year) as f64;
            let mut row = snapshot(
                &mut rng,
                config,
                cluster,
                &asset_id,
                Some(year),
                age0,
                rate0,
                drift,
                t,
            );
            if year == last_year {
                row = apply_exogenous_shock(&mut rng, config, row);
                let mut truth_row = row.clone();
                truth_row.inspection_year = None;
                truth_rows.push(truth_row);
            }
            history_rows.push(row);
        }
    }

    let history = Dataset::new(config.schema.clone(), history_rows, DatasetKind::LongTerm)?;
    let truth = Dataset::new(config.schema.clone(), truth_rows, DatasetKind::OneTime)?;
    Ok((history, truth))
}

/// Share-weighted cluster draw; one uniform consumed per asset.
fn draw_cluster<'a>(rng: &mut ChaCha8Rng, config: &'a FleetConfig) -> &'a LatentCluster {
    let total: f64 = config.clusters.iter().map(|c| c.share).sum();
    let mut target = rng.random::<f64>() * total;
    for cluster in &config.clusters {
        if target < cluster.share {
            return cluster;
        }
        target -= cluster.share;
    }
    config.clusters.last().expect("validated non-empty")
}

fn format_id(n: usize, width: usize) -> String {
    let digits = n.to_string();
    let mut id = String::new();
    for _ in digits.len()..width {
        id.push('0');
    }
    id.push_str(&digits);
    id
}

/// Unconditional failures in the prediction window (dig-ins, storms):
/// applied to the final inspection's status, which doubles as the truth.
fn apply_exogenous_shock(
    rng: &mut ChaCha8Rng,
    config: &FleetConfig,
    mut row: AssetRecord,
) -> AssetRecord {
    if rng.random::<f64>() < config.exogenous_failure_rate {
        row.status = Status::Failed;
    }
    row
}

#[allow(clippy::too_many_arguments)]
fn snapshot(
    rng: &mut ChaCha8Rng,
    config: &FleetConfig,
    cluster: &LatentCluster,
    asset_id: &str,
    year: Option<i32>,
    age0: f64,
    rate0: f64,
    drift: f64,
    t: f64,
) -> AssetRecord {
    let rate_t = (rate0 + drift * t).max(0.05);
    let physical_age = age0 + t;
    let cond_age_t = rate_t * physical_age;

    let mut values = BTreeMap::new();
    for (j, spec) in config.schema.features().iter().enumerate() {
        let center = cluster.feature_centers[j];
        let slope = config.feature_slopes[j];
        let noise = config.feature_noise[j];
        match spec.kind {
            FeatureKind::Numeric => {
                let x = center + slope * (cond_age_t - cluster.age_center) + normal(rng, 0.0, noise);
                values.insert(spec.name.clone(), RawValue::Number(x));
            }
            FeatureKind::OrderedCategorical => {
                let latent =
                    center + slope * (cond_age_t - cluster.age_center) + normal(rng, 0.0, noise);
                let n = spec.levels.len();
                let index = (math::round(latent).max(1.0) as usize).min(n);
                values.insert(
                    spec.name.clone(),
                    RawValue::Level(spec.levels[index - 1].clone()),
                );
            }
            FeatureKind::UnorderedCategorical => {
                let n = spec.levels.len();
                let preferred = ((math::round(center).max(1.0) as usize).min(n)) - 1;
                let flip: f64 = rng.random();
                let index = if flip < noise && n > 1 {
                    // Uniform over the other levels.
                    let offset = rng.random_range(1..n);
                    (preferred + offset) % n
                } else {
                    preferred
                };
                values.insert(spec.name.clone(), RawValue::Level(spec.levels[index].clone()));
            }
        }
    }

    let p_fail = sigmoid(
        config.link[0] + config.link[1] * physical_age + config.link[2] * cond_age_t,
    );
    let status = if rng.random::<f64>() < p_fail {
        Status::Failed
    } else {
        Status::Working
    };
    AssetRecord {
        asset_id: String::from(asset_id),
        inspection_year: year,
        values,
        physical_age,
        status,
    }
}
