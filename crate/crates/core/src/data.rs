//! Asset condition data model: feature schemas, inspection records and
//! validated datasets.
//!
//! A dataset is either *one-time* (a single inspection snapshot per asset) or
//! *long-term* (several inspection years per asset). Records carry the raw
//! condition feature values alongside the asset's physical age and its
//! working/failed status at recording time.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// How a condition feature participates in the encoded metric space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureKind {
    /// Real-valued test or measurement result.
    Numeric,
    /// Categorical with a severity order (e.g. good < medium < poor);
    /// mapped to a numeric value before clustering.
    OrderedCategorical,
    /// Categorical without an order; contributes a match/mismatch term
    /// to distances.
    UnorderedCategorical,
}

impl FeatureKind {
    /// True for kinds that end up on the numeric side of the encoded space.
    pub fn is_numeric_behaving(self) -> bool {
        matches!(self, FeatureKind::Numeric | FeatureKind::OrderedCategorical)
    }
}

/// Declaration of a single condition feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    /// Level names for categorical kinds, in severity order for
    /// ordered-categorical features. Empty for numeric features.
    #[serde(default)]
    pub levels: Vec<String>,
    /// Importance weight applied to this feature's distance term.
    #[serde(default = "default_weight")]
    pub weight: f64,
}

fn default_weight() -> f64 {
    1.0
}

impl FeatureSpec {
    pub fn numeric(name: &str) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Numeric,
            levels: Vec::new(),
            weight: 1.0,
        }
    }

    pub fn ordered(name: &str, levels: &[&str]) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::OrderedCategorical,
            levels: levels.iter().map(|l| l.to_string()).collect(),
            weight: 1.0,
        }
    }

    pub fn unordered(name: &str, levels: &[&str]) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::UnorderedCategorical,
            levels: levels.iter().map(|l| l.to_string()).collect(),
            weight: 1.0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }
}

/// Schema violations caught when building a [`FeatureSchema`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemaError {
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("categorical feature `{0}` declares no levels")]
    MissingLevels(String),
    #[error("numeric feature `{0}` must not declare levels")]
    UnexpectedLevels(String),
    #[error("feature `{feature}` declares duplicate level `{level}`")]
    DuplicateLevel { feature: String, level: String },
    #[error("feature `{0}` declares an empty level name")]
    EmptyLevel(String),
    #[error("feature `{feature}` has non-positive weight {weight}")]
    NonPositiveWeight { feature: String, weight: f64 },
}

/// Ordered list of feature declarations for one asset class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<FeatureSpec>", into = "Vec<FeatureSpec>")]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
}

impl TryFrom<Vec<FeatureSpec>> for FeatureSchema {
    type Error = SchemaError;

    fn try_from(features: Vec<FeatureSpec>) -> Result<Self, SchemaError> {
        FeatureSchema::new(features)
    }
}

impl From<FeatureSchema> for Vec<FeatureSpec> {
    fn from(schema: FeatureSchema) -> Vec<FeatureSpec> {
        schema.features
    }
}

impl FeatureSchema {
    /// Validates feature declarations: unique names, positive weights and
    /// well-formed level lists (present exactly for categorical kinds).
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self, SchemaError> {
        let mut seen = alloc::collections::BTreeSet::new();
        for spec in &features {
            if !seen.insert(spec.name.clone()) {
                return Err(SchemaError::DuplicateFeature(spec.name.clone()));
            }
            if !(spec.weight > 0.0 && spec.weight.is_finite()) {
                return Err(SchemaError::NonPositiveWeight {
                    feature: spec.name.clone(),
                    weight: spec.weight,
                });
            }
            match spec.kind {
                FeatureKind::Numeric => {
                    if !spec.levels.is_empty() {
                        return Err(SchemaError::UnexpectedLevels(spec.name.clone()));
                    }
                }
                FeatureKind::OrderedCategorical | FeatureKind::UnorderedCategorical => {
                    if spec.levels.is_empty() {
                        return Err(SchemaError::MissingLevels(spec.name.clone()));
                    }
                    let mut level_seen = alloc::collections::BTreeSet::new();
                    for level in &spec.levels {
                        if level.is_empty() {
                            return Err(SchemaError::EmptyLevel(spec.name.clone()));
                        }
                        if !level_seen.insert(level.clone()) {
                            return Err(SchemaError::DuplicateLevel {
                                feature: spec.name.clone(),
                                level: level.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(FeatureSchema { features })
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureSpec> {
        self.features.iter().find(|f| f.name == name)
    }

    /// Features that land on the numeric side of the encoded space
    /// (numeric and ordered-categorical), in schema order.
    pub fn numeric_behaving(&self) -> impl Iterator<Item = &FeatureSpec> {
        self.features.iter().filter(|f| f.kind.is_numeric_behaving())
    }

    /// Unordered-categorical features, in schema order.
    pub fn unordered(&self) -> impl Iterator<Item = &FeatureSpec> {
        self.features
            .iter()
            .filter(|f| f.kind == FeatureKind::UnorderedCategorical)
    }
}

/// Binary operation status of an asset at recording time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Working,
    Failed,
}

impl Status {
    /// Parses a status string case-insensitively.
    pub fn parse(s: &str) -> Option<Status> {
        if s.eq_ignore_ascii_case("working") {
            Some(Status::Working)
        } else if s.eq_ignore_ascii_case("failed") {
            Some(Status::Failed)
        } else {
            None
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Working => "Working",
            Status::Failed => "Failed",
        }
    }
}

impl core::fmt::Display for Status {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A raw condition feature value as recorded: a number for numeric features,
/// a level name for categorical ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RawValue {
    Number(f64),
    Level(String),
}

/// One inspection row: condition values plus physical age and status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetRecord {
    pub asset_id: String,
    /// Present for long-term datasets, absent for one-time snapshots.
    pub inspection_year: Option<i32>,
    /// Feature name → raw value; must cover the schema exactly.
    pub values: BTreeMap<String, RawValue>,
    /// Calendar years in service; non-negative and finite.
    pub physical_age: f64,
    pub status: Status,
}

impl AssetRecord {
    pub fn value(&self, feature: &str) -> Option<&RawValue> {
        self.values.get(feature)
    }
}

/// Record- and dataset-level invariant violations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("record `{asset_id}` is missing a value for feature `{feature}`")]
    MissingFeatureValue { asset_id: String, feature: String },
    #[error("record `{asset_id}` carries a value for undeclared feature `{feature}`")]
    UnexpectedFeatureValue { asset_id: String, feature: String },
    #[error("feature `{feature}`: `{value}` is not a declared level")]
    UnknownLevel { feature: String, value: String },
    #[error("feature `{feature}` of record `{asset_id}` has the wrong value type")]
    WrongValueType { asset_id: String, feature: String },
    #[error("feature `{feature}` of record `{asset_id}` is not finite")]
    NonFiniteValue { asset_id: String, feature: String },
    #[error("record `{asset_id}` has negative physical age {age}")]
    NegativeAge { asset_id: String, age: f64 },
    #[error("record `{asset_id}` has a non-finite physical age")]
    NonFiniteAge { asset_id: String },
    #[error("long-term record `{asset_id}` is missing its inspection year")]
    MissingInspectionYear { asset_id: String },
    #[error("duplicate key: asset `{asset_id}`, inspection year {year:?}")]
    DuplicateKey { asset_id: String, year: Option<i32> },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// Whether a dataset holds one snapshot per asset or several inspection years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    OneTime,
    LongTerm,
}

/// A validated collection of asset records under one schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    records: Vec<AssetRecord>,
    kind: DatasetKind,
}

impl Dataset {
    /// Validates every record against the schema and the kind-specific key
    /// invariants (unique asset ids for one-time data, unique
    /// (asset, year) pairs with years present for long-term data).
    pub fn new(
        schema: FeatureSchema,
        records: Vec<AssetRecord>,
        kind: DatasetKind,
    ) -> Result<Self, DataError> {
        let mut keys = alloc::collections::BTreeSet::new();
        for record in &records {
            validate_record(&schema, record)?;
            match kind {
                DatasetKind::OneTime => {
                    if !keys.insert((record.asset_id.clone(), None)) {
                        return Err(DataError::DuplicateKey {
                            asset_id: record.asset_id.clone(),
                            year: None,
                        });
                    }
                }
                DatasetKind::LongTerm => {
                    let year = record.inspection_year.ok_or_else(|| {
                        DataError::MissingInspectionYear {
                            asset_id: record.asset_id.clone(),
                        }
                    })?;
                    if !keys.insert((record.asset_id.clone(), Some(year))) {
                        return Err(DataError::DuplicateKey {
                            asset_id: record.asset_id.clone(),
                            year: Some(year),
                        });
                    }
                }
            }
        }
        Ok(Dataset {
            schema,
            records,
            kind,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn records(&self) -> &[AssetRecord] {
        &self.records
    }

    pub fn kind(&self) -> DatasetKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct asset ids in order of first appearance.
    pub fn asset_ids(&self) -> Vec<String> {
        let mut seen = alloc::collections::BTreeSet::new();
        let mut ids = Vec::new();
        for record in &self.records {
            if seen.insert(record.asset_id.as_str()) {
                ids.push(record.asset_id.clone());
            }
        }
        ids
    }

    /// One-time view of the latest inspection per asset, in order of first
    /// appearance. For one-time data this is a copy of the dataset.
    pub fn latest_snapshot(&self) -> Result<Dataset, DataError> {
        self.snapshot_by(|candidate, current| candidate.inspection_year > current.inspection_year)
    }

    /// One-time view of the earliest inspection per asset; the prediction-
    /// time state in evaluation protocols.
    pub fn earliest_snapshot(&self) -> Result<Dataset, DataError> {
        self.snapshot_by(|candidate, current| candidate.inspection_year < current.inspection_year)
    }

    fn snapshot_by(
        &self,
        replace: impl Fn(&AssetRecord, &AssetRecord) -> bool,
    ) -> Result<Dataset, DataError> {
        if self.kind == DatasetKind::OneTime {
            return Ok(self.clone());
        }
        let mut chosen: BTreeMap<&str, &AssetRecord> = BTreeMap::new();
        for record in &self.records {
            let entry = chosen.entry(record.asset_id.as_str()).or_insert(record);
            if replace(record, entry) {
                *entry = record;
            }
        }
        let records = self
            .asset_ids()
            .iter()
            .map(|id| {
                let mut r = (*chosen.get(id.as_str()).expect("id from same dataset")).clone();
                r.inspection_year = None;
                r
            })
            .collect();
        Dataset::new(self.schema.clone(), records, DatasetKind::OneTime)
    }

    /// Restriction to the given asset ids, preserving record order.
    pub fn filter_assets(&self, keep: &alloc::collections::BTreeSet<String>) -> Dataset {
        let records = self
            .records
            .iter()
            .filter(|r| keep.contains(&r.asset_id))
            .cloned()
            .collect();
        Dataset {
            schema: self.schema.clone(),
            records,
            kind: self.kind,
        }
    }
}

fn validate_record(schema: &FeatureSchema, record: &AssetRecord) -> Result<(), DataError> {
    if !record.physical_age.is_finite() {
        return Err(DataError::NonFiniteAge {
            asset_id: record.asset_id.clone(),
        });
    }
    if record.physical_age < 0.0 {
        return Err(DataError::NegativeAge {
            asset_id: record.asset_id.clone(),
            age: record.physical_age,
        });
    }
    for spec in schema.features() {
        let value = record.values.get(&spec.name).ok_or_else(|| {
            DataError::MissingFeatureValue {
                asset_id: record.asset_id.clone(),
                feature: spec.name.clone(),
            }
        })?;
        match (spec.kind, value) {
            (FeatureKind::Numeric, RawValue::Number(x)) => {
                if !x.is_finite() {
                    return Err(DataError::NonFiniteValue {
                        asset_id: record.asset_id.clone(),
                        feature: spec.name.clone(),
                    });
                }
            }
            (FeatureKind::OrderedCategorical | FeatureKind::UnorderedCategorical, RawValue::Level(level)) => {
                if !spec.levels.iter().any(|l| l == level) {
                    return Err(DataError::UnknownLevel {
                        feature: spec.name.clone(),
                        value: level.clone(),
                    });
                }
            }
            _ => {
                return Err(DataError::WrongValueType {
                    asset_id: record.asset_id.clone(),
                    feature: spec.name.clone(),
                });
            }
        }
    }
    if record.values.len() != schema.len() {
        let extra = record
            .values
            .keys()
            .find(|k| schema.feature(k).is_none())
            .cloned()
            .unwrap_or_default();
        return Err(DataError::UnexpectedFeatureValue {
            asset_id: record.asset_id.clone(),
            feature: extra,
        });
    }
    Ok(())
}

/// Data-quality findings. These are advisory: filtering is the operator's
/// decision, never applied silently.
#[derive(Debug, Clone, PartialEq)]
pub enum QualityWarning {
    /// Numeric value outside the [Q1 − 3·IQR, Q3 + 3·IQR] fence of its feature.
    Outlier {
        asset_id: String,
        inspection_year: Option<i32>,
        feature: String,
        value: f64,
        fence_low: f64,
        fence_high: f64,
    },
    /// Every record carries the same value for this feature.
    ConstantFeature { feature: String },
}

impl core::fmt::Display for QualityWarning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            QualityWarning::Outlier {
                asset_id,
                inspection_year,
                feature,
                value,
                fence_low,
                fence_high,
            } => {
                write!(
                    f,
                    "outlier: asset {asset_id}{} feature {feature} = {value} outside [{fence_low}, {fence_high}]",
                    match inspection_year {
                        Some(y) => alloc::format!(" ({y})"),
                        None => String::new(),
                    }
                )
            }
            QualityWarning::ConstantFeature { feature } => {
                write!(f, "constant feature: {feature} has a single value across the dataset")
            }
        }
    }
}

/// Screens a dataset for statistical outliers and degenerate features.
///
/// Numeric features are checked against a [Q1 − 3·IQR, Q3 + 3·IQR] fence with
/// quartiles computed by linear interpolation on the sorted sample. Constant
/// features (of any kind) are reported as uninformative.
pub fn validate_dataset(dataset: &Dataset) -> Vec<QualityWarning> {
    let mut warnings = Vec::new();
    for spec in dataset.schema().features() {
        match spec.kind {
            FeatureKind::Numeric => {
                let values: Vec<f64> = dataset
                    .records()
                    .iter()
                    .filter_map(|r| match r.value(&spec.name) {
                        Some(RawValue::Number(x)) => Some(*x),
                        _ => None,
                    })
                    .collect();
                if values.is_empty() {
                    continue;
                }
                let first = values[0];
                if values.iter().all(|v| *v == first) {
                    if values.len() > 1 {
                        warnings.push(QualityWarning::ConstantFeature {
                            feature: spec.name.clone(),
                        });
                    }
                    continue;
                }
                let (q1, q3) = quartiles(&values);
                let iqr = q3 - q1;
                let (low, high) = (q1 - 3.0 * iqr, q3 + 3.0 * iqr);
                for record in dataset.records() {
                    if let Some(RawValue::Number(x)) = record.value(&spec.name) {
                        if *x < low || *x > high {
                            warnings.push(QualityWarning::Outlier {
                                asset_id: record.asset_id.clone(),
                                inspection_year: record.inspection_year,
                                feature: spec.name.clone(),
                                value: *x,
                                fence_low: low,
                                fence_high: high,
                            });
                        }
                    }
                }
            }
            FeatureKind::OrderedCategorical | FeatureKind::UnorderedCategorical => {
                let mut iter = dataset.records().iter().filter_map(|r| match r.value(&spec.name) {
                    Some(RawValue::Level(l)) => Some(l),
                    _ => None,
                });
                if let Some(first) = iter.next() {
                    let mut count = 1usize;
                    let mut constant = true;
                    for level in iter {
                        count += 1;
                        if level != first {
                            constant = false;
                            break;
                        }
                    }
                    if constant && count > 1 {
                        warnings.push(QualityWarning::ConstantFeature {
                            feature: spec.name.clone(),
                        });
                    }
                }
            }
        }
    }
    warnings
}

/// Quartiles by linear interpolation at positions (n−1)/4 and 3(n−1)/4.
fn quartiles(values: &[f64]) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    (percentile(&sorted, 0.25), percentile(&sorted, 0.75))
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let lo = crate::math::floor(pos) as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
