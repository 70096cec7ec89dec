//! Encoding of mixed condition features into a weighted metric space.
//!
//! Ordered-categorical levels are mapped to (c − 1/2)/N, then every
//! numeric-behaving feature is min-max normalized into [0, 1]. Unordered
//! categorical features stay as level indices and contribute a weighted
//! match/mismatch term. Distances use the squared form
//!
//! ```text
//! d(X, Y) = Σ_j w_j (x_j − y_j)²  +  Σ_j w_j δ(x_j, y_j)
//! ```
//!
//! with no square root anywhere; the same form feeds clustering, Silhouette
//! scores and conditional-age interpolation so that all stages agree on one
//! metric.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{AssetRecord, Dataset, FeatureKind, FeatureSchema, RawValue};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EncodeError {
    #[error("ordered level index {index} outside [1, {count}]")]
    OutOfRange { index: usize, count: usize },
    #[error("cannot fit normalization on an empty dataset")]
    EmptyDataset,
    #[error("points come from different schemas (slot counts differ)")]
    SchemaMismatch,
    #[error("record `{asset_id}` is missing feature `{feature}`")]
    MissingValue { asset_id: String, feature: String },
    #[error("record `{asset_id}`: feature `{feature}` has the wrong value type")]
    WrongValueType { asset_id: String, feature: String },
    #[error("feature `{feature}`: `{value}` is not a declared level")]
    UnknownLevel { feature: String, value: String },
}

/// Converts a 1-based ordered level index into its numeric encoding
/// (c − 1/2)/N, strictly inside (0, 1).
pub fn encode_ordered(level_index: usize, level_count: usize) -> Result<f64, EncodeError> {
    if level_count == 0 || level_index == 0 || level_index > level_count {
        return Err(EncodeError::OutOfRange {
            index: level_index,
            count: level_count,
        });
    }
    Ok((level_index as f64 - 0.5) / level_count as f64)
}

/// Observed min/max of one numeric-behaving feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

/// Min-max bounds for every numeric-behaving feature, in schema order.
/// Ordered-categorical features are ranged over their encoded values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub ranges: Vec<FeatureRange>,
}

/// Min-max normalization of a raw value. Degenerate ranges map to 0;
/// out-of-range values (new data) are clamped into [0, 1].
pub fn normalize(raw: f64, min: f64, max: f64) -> f64 {
    if max <= min {
        return 0.0;
    }
    ((raw - min) / (max - min)).clamp(0.0, 1.0)
}

/// Fits per-feature min/max over a dataset. Ordered-categorical features are
/// first mapped through [`encode_ordered`] and then treated as numeric.
pub fn fit_normalization(dataset: &Dataset) -> Result<NormalizationParams, EncodeError> {
    if dataset.is_empty() {
        return Err(EncodeError::EmptyDataset);
    }
    let mut ranges = Vec::new();
    for spec in dataset.schema().numeric_behaving() {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for record in dataset.records() {
            let x = numeric_behaving_value(spec, record)?;
            min = min.min(x);
            max = max.max(x);
        }
        ranges.push(FeatureRange {
            name: spec.name.clone(),
            min,
            max,
        });
    }
    Ok(NormalizationParams { ranges })
}

fn numeric_behaving_value(
    spec: &crate::data::FeatureSpec,
    record: &AssetRecord,
) -> Result<f64, EncodeError> {
    let value = record.value(&spec.name).ok_or_else(|| EncodeError::MissingValue {
        asset_id: record.asset_id.clone(),
        feature: spec.name.clone(),
    })?;
    match (spec.kind, value) {
        (FeatureKind::Numeric, RawValue::Number(x)) => Ok(*x),
        (FeatureKind::OrderedCategorical, RawValue::Level(level)) => {
            let index = spec
                .levels
                .iter()
                .position(|l| l == level)
                .ok_or_else(|| EncodeError::UnknownLevel {
                    feature: spec.name.clone(),
                    value: level.clone(),
                })?;
            encode_ordered(index + 1, spec.levels.len())
        }
        _ => Err(EncodeError::WrongValueType {
            asset_id: record.asset_id.clone(),
            feature: spec.name.clone(),
        }),
    }
}

/// A record encoded into the metric space: normalized numeric slots in
/// [0, 1] plus level indices for unordered-categorical slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedPoint {
    pub numeric: Vec<f64>,
    pub categorical: Vec<u32>,
}

/// Per-slot weights aligned with [`EncodedPoint`] layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub numeric: Vec<f64>,
    pub categorical: Vec<f64>,
}

impl Weights {
    pub fn from_schema(schema: &FeatureSchema) -> Weights {
        Weights {
            numeric: schema.numeric_behaving().map(|f| f.weight).collect(),
            categorical: schema.unordered().map(|f| f.weight).collect(),
        }
    }
}

/// Weighted squared mixed distance between two encoded points.
pub fn distance(a: &EncodedPoint, b: &EncodedPoint, weights: &Weights) -> Result<f64, EncodeError> {
    if a.numeric.len() != b.numeric.len()
        || a.categorical.len() != b.categorical.len()
        || a.numeric.len() != weights.numeric.len()
        || a.categorical.len() != weights.categorical.len()
    {
        return Err(EncodeError::SchemaMismatch);
    }
    Ok(distance_unchecked(a, b, weights))
}

/// Distance without layout checks; callers validate once up front.
pub(crate) fn distance_unchecked(a: &EncodedPoint, b: &EncodedPoint, weights: &Weights) -> f64 {
    let mut d = 0.0;
    for i in 0..a.numeric.len() {
        let diff = a.numeric[i] - b.numeric[i];
        d += weights.numeric[i] * diff * diff;
    }
    for i in 0..a.categorical.len() {
        if a.categorical[i] != b.categorical[i] {
            d += weights.categorical[i];
        }
    }
    d
}

/// Dataset encoded as points, with the count of values clamped because they
/// fell outside the fitted min/max (only possible for data the params were
/// not fitted on).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub points: Vec<EncodedPoint>,
    pub clamped: usize,
}

/// Bundles a schema with fitted normalization so records can be encoded
/// consistently at training and prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    schema: FeatureSchema,
    params: NormalizationParams,
    weights: Weights,
}

impl Encoder {
    /// Fits min-max parameters on a dataset and captures the schema weights.
    pub fn fit(dataset: &Dataset) -> Result<Encoder, EncodeError> {
        let params = fit_normalization(dataset)?;
        Ok(Encoder {
            schema: dataset.schema().clone(),
            params,
            weights: Weights::from_schema(dataset.schema()),
        })
    }

    /// Rebuilds an encoder from stored parts (model artifact loading).
    pub fn from_parts(schema: FeatureSchema, params: NormalizationParams) -> Encoder {
        let weights = Weights::from_schema(&schema);
        Encoder {
            schema,
            params,
            weights,
        }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn params(&self) -> &NormalizationParams {
        &self.params
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Encodes one record. The second value counts clamped coordinates.
    pub fn encode(&self, record: &AssetRecord) -> Result<(EncodedPoint, usize), EncodeError> {
        let mut numeric = Vec::with_capacity(self.params.ranges.len());
        let mut clamped = 0usize;
        let mut range_iter = self.params.ranges.iter();
        for spec in self.schema.numeric_behaving() {
            let range = range_iter.next().ok_or(EncodeError::SchemaMismatch)?;
            let x = numeric_behaving_value(spec, record)?;
            if x < range.min || x > range.max {
                clamped += 1;
            }
            numeric.push(normalize(x, range.min, range.max));
        }
        let mut categorical = Vec::new();
        for spec in self.schema.unordered() {
            let value = record.value(&spec.name).ok_or_else(|| EncodeError::MissingValue {
                asset_id: record.asset_id.clone(),
                feature: spec.name.clone(),
            })?;
            match value {
                RawValue::Level(level) => {
                    let index = spec
                        .levels
                        .iter()
                        .position(|l| l == level)
                        .ok_or_else(|| EncodeError::UnknownLevel {
                            feature: spec.name.clone(),
                            value: level.clone(),
                        })?;
                    categorical.push(index as u32);
                }
                RawValue::Number(_) => {
                    return Err(EncodeError::WrongValueType {
                        asset_id: record.asset_id.clone(),
                        feature: spec.name.clone(),
                    });
                }
            }
        }
        Ok((EncodedPoint { numeric, categorical }, clamped))
    }

    pub fn encode_dataset(&self, dataset: &Dataset) -> Result<EncodedDataset, EncodeError> {
        let mut points = Vec::with_capacity(dataset.len());
        let mut clamped = 0usize;
        for record in dataset.records() {
            let (point, c) = self.encode(record)?;
            points.push(point);
            clamped += c;
        }
        Ok(EncodedDataset { points, clamped })
    }
}
