//! Conditional ages and aging rates.
//!
//! A cluster's conditional age is the mean physical age of its members. An
//! individual asset's conditional age interpolates the cluster ages with
//! inverse-distance weights to the centroids:
//!
//! ```text
//! A_X = Σ_j A_j · (1/d(X, C_j)) / Σ_j (1/d(X, C_j))
//! ```
//!
//! The average aging rate R = A_cond / A_phys then projects conditional age
//! forward, either assuming a constant rate (one-time data) or by borrowing
//! the observed rate drift of similar assets from a long-term history.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cluster::ClusterModel;
use crate::data::{Dataset, DatasetKind};
use crate::encode::{
    distance_unchecked, normalize, EncodeError, EncodedPoint, Encoder, NormalizationParams,
    Weights,
};

/// Distances below this (in squared-distance units) count as "at a centroid"
/// and short-circuit the inverse-distance weighting to that cluster's age.
pub const CENTROID_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgeError {
    #[error("assignment covers {assigned} records, dataset has {records}")]
    AssignmentMismatch { assigned: usize, records: usize },
    #[error("physical age must be positive to form an aging rate")]
    ZeroPhysicalAge,
    #[error("no similar assets supplied")]
    EmptySimilars,
    #[error("encountered a non-positive base aging rate")]
    ZeroBaseRate,
    #[error("observed interval must be positive for rate interpolation")]
    ZeroObservedInterval,
    #[error("needed {needed} similar assets, only {found} qualify")]
    InsufficientHistory { needed: usize, found: usize },
    #[error("similar-asset search requires a long-term dataset")]
    LongTermRequired,
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// A cluster model enriched with per-cluster conditional ages and the
/// normalization needed to encode new points against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgedClusterModel {
    pub base: ClusterModel,
    /// Mean physical age of each cluster's members, by cluster index.
    pub conditional_ages: Vec<f64>,
    pub normalization: NormalizationParams,
}

/// Physical age, conditional age and the rate tying them together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgingProfile {
    pub physical_age: f64,
    pub conditional_age: f64,
    /// R = conditional age / physical age; 1 means nominal calendar aging.
    pub rate: f64,
}

impl AgingProfile {
    pub fn new(physical_age: f64, conditional_age: f64) -> Result<Self, AgeError> {
        let rate = aging_rate(conditional_age, physical_age)?;
        Ok(AgingProfile {
            physical_age,
            conditional_age,
            rate,
        })
    }
}

/// Averages the physical age of each cluster's members (working and failed
/// alike) to produce the cluster conditional ages.
pub fn compute_cluster_ages(
    model: ClusterModel,
    records: &Dataset,
    normalization: NormalizationParams,
) -> Result<AgedClusterModel, AgeError> {
    if model.assignment.len() != records.len() {
        return Err(AgeError::AssignmentMismatch {
            assigned: model.assignment.len(),
            records: records.len(),
        });
    }
    let mut sums = alloc::vec![0.0f64; model.k];
    let mut counts = alloc::vec![0usize; model.k];
    for (record, &cluster) in records.records().iter().zip(&model.assignment) {
        sums[cluster] += record.physical_age;
        counts[cluster] += 1;
    }
    let conditional_ages = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    Ok(AgedClusterModel {
        base: model,
        conditional_ages,
        normalization,
    })
}

/// Conditional age of one encoded point: cluster ages blended with
/// inverse-distance weights, collapsing to the nearest cluster's age when
/// the point sits on a centroid.
pub fn asset_conditional_age(
    point: &EncodedPoint,
    aged: &AgedClusterModel,
    weights: &Weights,
) -> f64 {
    let mut nearest: Option<(usize, f64)> = None;
    let mut inv_sum = 0.0;
    let mut weighted = 0.0;
    for (j, centroid) in aged.base.centroids.iter().enumerate() {
        let d = distance_unchecked(point, centroid, weights);
        match &nearest {
            Some((_, nd)) if *nd <= d => {}
            _ => nearest = Some((j, d)),
        }
        if d > 0.0 {
            let inv = 1.0 / d;
            inv_sum += inv;
            weighted += aged.conditional_ages[j] * inv;
        }
    }
    let (j, d) = nearest.expect("cluster models have at least one centroid");
    if d < CENTROID_EPSILON {
        return aged.conditional_ages[j];
    }
    weighted / inv_sum
}

/// R = conditional age / physical age.
pub fn aging_rate(conditional_age: f64, physical_age: f64) -> Result<f64, AgeError> {
    if physical_age <= 0.0 {
        return Err(AgeError::ZeroPhysicalAge);
    }
    Ok(conditional_age / physical_age)
}

/// Future conditional age assuming the rate stays constant: R · (A + T).
pub fn project_one_time(rate: f64, physical_age: f64, horizon: f64) -> f64 {
    rate * (physical_age + horizon)
}

/// Future rate from similar assets' observed drift:
/// R · mean(R_i_future / R_i_initial).
pub fn project_rate_long_term(rate: f64, similars: &[(f64, f64)]) -> Result<f64, AgeError> {
    if similars.is_empty() {
        return Err(AgeError::EmptySimilars);
    }
    let mut sum = 0.0;
    for &(initial, future) in similars {
        if initial <= 0.0 {
            return Err(AgeError::ZeroBaseRate);
        }
        sum += future / initial;
    }
    Ok(rate * sum / similars.len() as f64)
}

/// Future conditional age under a projected rate: R_future · (A + T).
pub fn project_long_term(rate_future: f64, physical_age: f64, horizon: f64) -> f64 {
    rate_future * (physical_age + horizon)
}

/// Linear interpolation (or extrapolation) of an observed rate change from
/// the measured interval onto the desired one.
pub fn interpolate_rate(
    rate_initial: f64,
    rate_after: f64,
    observed_interval: f64,
    desired_interval: f64,
) -> Result<f64, AgeError> {
    if observed_interval <= 0.0 {
        return Err(AgeError::ZeroObservedInterval);
    }
    Ok(rate_initial + (rate_after - rate_initial) * desired_interval / observed_interval)
}

/// One qualifying historical asset, ranked by mixed distance to the target.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarAsset {
    pub asset_id: String,
    pub distance: f64,
    /// Aging rate at the asset's earliest inspection.
    pub rate_initial: f64,
    /// Aging rate at its latest inspection.
    pub rate_final: f64,
    /// Years between those two inspections.
    pub span_years: f64,
}

/// Finds the `n` historical assets whose earliest recorded state (condition
/// features plus min-max-normalized physical age, weight 1) is closest to
/// the target's current state.
///
/// Qualifying assets need at least two distinct inspection years and
/// positive ages/rates so both endpoint rates exist. Results are sorted by
/// (distance, asset id) for a stable ranking.
pub fn find_similar_assets(
    target_point: &EncodedPoint,
    target_age: f64,
    history: &Dataset,
    encoder: &Encoder,
    aged: &AgedClusterModel,
    n: usize,
) -> Result<Vec<SimilarAsset>, AgeError> {
    if history.kind() != DatasetKind::LongTerm {
        return Err(AgeError::LongTermRequired);
    }
    // Physical age participates as one more normalized feature; its range is
    // fitted over all ages present in the history.
    let mut age_min = f64::INFINITY;
    let mut age_max = f64::NEG_INFINITY;
    for record in history.records() {
        age_min = age_min.min(record.physical_age);
        age_max = age_max.max(record.physical_age);
    }
    let target_norm_age = normalize(target_age, age_min, age_max);

    let mut per_asset: BTreeMap<&str, Vec<&crate::data::AssetRecord>> = BTreeMap::new();
    for record in history.records() {
        per_asset.entry(record.asset_id.as_str()).or_default().push(record);
    }

    let weights = encoder.weights();
    let mut candidates = Vec::new();
    for (asset_id, mut rows) in per_asset {
        rows.sort_by_key(|r| r.inspection_year);
        let earliest = rows.first().expect("group is non-empty");
        let latest = rows.last().expect("group is non-empty");
        let span = match (earliest.inspection_year, latest.inspection_year) {
            (Some(a), Some(b)) if b > a => (b - a) as f64,
            _ => continue,
        };
        if earliest.physical_age <= 0.0 || latest.physical_age <= 0.0 {
            continue;
        }
        let (early_point, _) = encoder.encode(earliest)?;
        let (late_point, _) = encoder.encode(latest)?;
        let cond_early = asset_conditional_age(&early_point, aged, weights);
        let cond_late = asset_conditional_age(&late_point, aged, weights);
        if cond_early <= 0.0 {
            continue;
        }
        let rate_initial = cond_early / earliest.physical_age;
        let rate_final = cond_late / latest.physical_age;
        let norm_age = normalize(earliest.physical_age, age_min, age_max);
        let age_diff = target_norm_age - norm_age;
        let dist = distance_unchecked(target_point, &early_point, weights) + age_diff * age_diff;
        candidates.push(SimilarAsset {
            asset_id: String::from(asset_id),
            distance: dist,
            rate_initial,
            rate_final,
            span_years: span,
        });
    }
    if candidates.len() < n {
        return Err(AgeError::InsufficientHistory {
            needed: n,
            found: candidates.len(),
        });
    }
    candidates.sort_by(|a, b| {
        a.distance
            .total_cmp(&b.distance)
            .then_with(|| a.asset_id.cmp(&b.asset_id))
    });
    candidates.truncate(n);
    Ok(candidates)
}
