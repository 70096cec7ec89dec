//! End-to-end learning and prediction runs.
//!
//! Learning clusters the present condition snapshot, derives cluster
//! conditional ages, then trains the logistic classifier on oversampled
//! (physical age, conditional age, status) examples. Evaluation splits the
//! snapshot 80:20 stratified by status, learns on the train side only and
//! scores one of four prediction paths on the test side:
//!
//! * `Classification` — score current statuses from current ages;
//! * `PredictOneTime` — project conditional age at a constant rate;
//! * `PredictLongTerm` — project the rate via similar assets' observed
//!   drift in the long-term history (train assets only);
//! * `Weibull` — the physical-age-only baseline over the same split.
//!
//! The prediction-time state is each asset's earliest inspection; future
//! statuses come from a separate truth dataset (for generated fleets, the
//! snapshot one horizon later), so the learner never sees them. Later
//! inspection rows of train assets supply the rate histories; later rows of
//! test assets are never consulted.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::age::{
    aging_rate, asset_conditional_age, compute_cluster_ages, find_similar_assets,
    interpolate_rate, project_long_term, project_one_time, project_rate_long_term, AgeError,
    AgedClusterModel,
};
use crate::cluster::{select_k, ClusterError, KMeansConfig};
use crate::data::{DataError, Dataset, DatasetKind, Status};
use crate::encode::{EncodeError, Encoder};
use crate::logistic::{oversample, train, LabeledExample, LogisticModel, TrainConfig, TrainError};
use crate::metrics::{metrics, ConfusionMatrix, MetricsError, MetricsReport};
use crate::split::{split, SplitError};
use crate::weibull::{HorizonMode, WeibullError, WeibullFitConfig, WeibullModel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("long-term prediction requires a long-term history dataset")]
    ModeDataMismatch,
    #[error("this mode scores against future statuses; no truth dataset supplied")]
    MissingTruthDataset,
    #[error("truth dataset has no status for asset `{0}`")]
    MissingTruth(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Age(#[from] AgeError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Weibull(#[from] WeibullError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Which prediction path an evaluation run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineMode {
    Classification,
    PredictOneTime,
    PredictLongTerm,
    Weibull,
}

impl PipelineMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PipelineMode::Classification => "classification",
            PipelineMode::PredictOneTime => "predict-one-time",
            PipelineMode::PredictLongTerm => "predict-long-term",
            PipelineMode::Weibull => "weibull",
        }
    }
}

/// Shared run parameters. The seed drives the split, clustering restarts
/// and oversampling; identical configs reproduce identical runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub split_ratio: f64,
    pub k_range: (usize, usize),
    pub restarts: usize,
    pub kmeans_max_iters: usize,
    pub kmeans_tolerance: f64,
    /// Projection horizon in years.
    pub horizon: f64,
    /// Similar assets consulted per target in long-term mode.
    pub similar_count: usize,
    pub threshold: f64,
    pub weibull_horizon: HorizonMode,
    pub train: TrainConfig,
}

impl PipelineConfig {
    pub fn new(seed: u64) -> Self {
        PipelineConfig {
            seed,
            split_ratio: 0.8,
            k_range: (2, 10),
            restarts: 10,
            kmeans_max_iters: 300,
            kmeans_tolerance: 1e-9,
            horizon: 5.0,
            similar_count: 5,
            threshold: 0.5,
            weibull_horizon: HorizonMode::Conditional,
            train: TrainConfig::default(),
        }
    }

    fn kmeans_config(&self) -> KMeansConfig {
        KMeansConfig {
            restarts: self.restarts,
            max_iters: self.kmeans_max_iters,
            tolerance: self.kmeans_tolerance,
            seed: self.seed,
        }
    }
}

/// Everything the learning stage produces.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedModel {
    pub encoder: Encoder,
    pub k_sweep: Vec<(usize, f64)>,
    pub best_k: usize,
    pub aged: AgedClusterModel,
    pub classifier: LogisticModel,
    /// Size of the oversampled training set fed to the classifier.
    pub training_examples: usize,
    /// Values clamped while encoding the learning data.
    pub clamped_values: usize,
}

/// Runs the full learning sequence on a dataset: encode, sweep cluster
/// counts, derive conditional ages, split, oversample, train. Clustering
/// sees the whole snapshot; the classifier trains on the train share only.
pub fn learn(data: &Dataset, config: &PipelineConfig) -> Result<LearnedModel, PipelineError> {
    let snapshot = data.latest_snapshot()?;
    let encoder = Encoder::fit(&snapshot)?;
    let encoded = encoder.encode_dataset(&snapshot)?;
    let sweep = select_k(
        &encoded.points,
        config.k_range.0..=config.k_range.1,
        encoder.weights(),
        &config.kmeans_config(),
    )?;
    let aged = compute_cluster_ages(sweep.model, &snapshot, encoder.params().clone())?;
    let (train_side, _test_side) = split(&snapshot, config.split_ratio, config.seed)?;
    let classifier = fit_classifier(&train_side, &encoder, &aged, config)?;
    Ok(LearnedModel {
        encoder,
        k_sweep: sweep.scores,
        best_k: sweep.best_k,
        aged,
        classifier: classifier.0,
        training_examples: classifier.1,
        clamped_values: encoded.clamped,
    })
}

fn fit_classifier(
    train_side: &Dataset,
    encoder: &Encoder,
    aged: &AgedClusterModel,
    config: &PipelineConfig,
) -> Result<(LogisticModel, usize), PipelineError> {
    let mut examples = Vec::with_capacity(train_side.len());
    for record in train_side.records() {
        let (point, _) = encoder.encode(record)?;
        let conditional_age = asset_conditional_age(&point, aged, encoder.weights());
        examples.push(LabeledExample {
            physical_age: record.physical_age,
            conditional_age,
            status: record.status,
        });
    }
    let balanced = oversample(&examples, config.seed)?;
    let model = train(&balanced, &config.train)?;
    Ok((model, balanced.len()))
}

/// One scored asset in an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub asset_id: String,
    pub physical_age: f64,
    pub conditional_age_now: Option<f64>,
    pub rate: Option<f64>,
    pub rate_future: Option<f64>,
    pub conditional_age_future: Option<f64>,
    pub probability: f64,
    pub predicted: Status,
    pub actual: Status,
}

/// Models and diagnostics retained from a pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineArtifacts {
    pub k_sweep: Vec<(usize, f64)>,
    pub best_k: Option<usize>,
    pub aged: Option<AgedClusterModel>,
    pub encoder: Option<Encoder>,
    pub classifier: Option<LogisticModel>,
    pub weibull: Option<WeibullModel>,
    /// Encoded values clamped to the fitted range across the run.
    pub clamped_values: usize,
    /// Rate interpolations that extrapolated beyond the observed span.
    pub extrapolations: usize,
}

/// Outcome of one evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutcome {
    pub mode: PipelineMode,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
    pub predictions: Vec<PredictionRow>,
    pub artifacts: PipelineArtifacts,
}

/// Learns on the train split of the history's present snapshot and scores
/// the selected prediction path on the test split.
///
/// `truth` supplies the future statuses for the prediction modes; the
/// classification mode scores against the test records' own statuses and
/// may omit it.
pub fn run_pipeline(
    history: &Dataset,
    truth: Option<&Dataset>,
    mode: PipelineMode,
    config: &PipelineConfig,
) -> Result<PipelineOutcome, PipelineError> {
    if mode == PipelineMode::PredictLongTerm && history.kind() != DatasetKind::LongTerm {
        return Err(PipelineError::ModeDataMismatch);
    }
    let snapshot = history.earliest_snapshot()?;
    let (train_side, test_side) = split(&snapshot, config.split_ratio, config.seed)?;

    let truth_statuses = match (mode, truth) {
        (PipelineMode::Classification, _) => None,
        (_, Some(t)) => {
            let snap = t.latest_snapshot()?;
            let map: alloc::collections::BTreeMap<String, Status> = snap
                .records()
                .iter()
                .map(|r| (r.asset_id.clone(), r.status))
                .collect();
            Some(map)
        }
        (_, None) => return Err(PipelineError::MissingTruthDataset),
    };
    let actual_for = |asset_id: &str, current: Status| -> Result<Status, PipelineError> {
        match &truth_statuses {
            None => Ok(current),
            Some(map) => map
                .get(asset_id)
                .copied()
                .ok_or_else(|| PipelineError::MissingTruth(String::from(asset_id))),
        }
    };

    let mut rows = Vec::with_capacity(test_side.len());
    let mut artifacts;

    if mode == PipelineMode::Weibull {
        let ages: Vec<f64> = train_side.records().iter().map(|r| r.physical_age).collect();
        let statuses: Vec<Status> = train_side.records().iter().map(|r| r.status).collect();
        let model = crate::weibull::fit(&ages, &statuses, &WeibullFitConfig::default())?;
        for record in test_side.records() {
            let (probability, predicted) = model.predict(
                record.physical_age,
                config.horizon,
                config.threshold,
                config.weibull_horizon,
            )?;
            rows.push(PredictionRow {
                asset_id: record.asset_id.clone(),
                physical_age: record.physical_age,
                conditional_age_now: None,
                rate: None,
                rate_future: None,
                conditional_age_future: None,
                probability,
                predicted,
                actual: actual_for(&record.asset_id, record.status)?,
            });
        }
        artifacts = PipelineArtifacts {
            k_sweep: Vec::new(),
            best_k: None,
            aged: None,
            encoder: None,
            classifier: None,
            weibull: Some(model),
            clamped_values: 0,
            extrapolations: 0,
        };
    } else {
        let encoder = Encoder::fit(&train_side)?;
        let encoded_train = encoder.encode_dataset(&train_side)?;
        let sweep = select_k(
            &encoded_train.points,
            config.k_range.0..=config.k_range.1,
            encoder.weights(),
            &config.kmeans_config(),
        )?;
        let best_k = sweep.best_k;
        let k_scores = sweep.scores.clone();
        let aged = compute_cluster_ages(sweep.model, &train_side, encoder.params().clone())?;
        let (classifier, _) = fit_classifier(&train_side, &encoder, &aged, config)?;
        let mut clamped = encoded_train.clamped;
        let mut extrapolations = 0usize;

        // Long-term mode borrows rate drift from the train assets' histories.
        let train_history = if mode == PipelineMode::PredictLongTerm {
            let keep: BTreeSet<String> = train_side
                .records()
                .iter()
                .map(|r| r.asset_id.clone())
                .collect();
            Some(history.filter_assets(&keep))
        } else {
            None
        };

        for record in test_side.records() {
            let (point, c) = encoder.encode(record)?;
            clamped += c;
            let conditional_now = asset_conditional_age(&point, &aged, encoder.weights());
            let row = match mode {
                PipelineMode::Classification => {
                    let probability =
                        classifier.predict_probability(record.physical_age, conditional_now);
                    PredictionRow {
                        asset_id: record.asset_id.clone(),
                        physical_age: record.physical_age,
                        conditional_age_now: Some(conditional_now),
                        rate: None,
                        rate_future: None,
                        conditional_age_future: None,
                        probability,
                        predicted: classifier.classify(
                            record.physical_age,
                            conditional_now,
                            config.threshold,
                        ),
                        actual: record.status,
                    }
                }
                PipelineMode::PredictOneTime => {
                    let rate = aging_rate(conditional_now, record.physical_age)?;
                    let future_age = record.physical_age + config.horizon;
                    let conditional_future =
                        project_one_time(rate, record.physical_age, config.horizon);
                    let probability =
                        classifier.predict_probability(future_age, conditional_future);
                    PredictionRow {
                        asset_id: record.asset_id.clone(),
                        physical_age: record.physical_age,
                        conditional_age_now: Some(conditional_now),
                        rate: Some(rate),
                        rate_future: None,
                        conditional_age_future: Some(conditional_future),
                        probability,
                        predicted: classifier.classify(
                            future_age,
                            conditional_future,
                            config.threshold,
                        ),
                        actual: actual_for(&record.asset_id, record.status)?,
                    }
                }
                PipelineMode::PredictLongTerm => {
                    let rate = aging_rate(conditional_now, record.physical_age)?;
                    let hist = train_history.as_ref().expect("built for long-term mode");
                    let similars = find_similar_assets(
                        &point,
                        record.physical_age,
                        hist,
                        &encoder,
                        &aged,
                        config.similar_count,
                    )?;
                    let mut pairs = Vec::with_capacity(similars.len());
                    for s in &similars {
                        let adjusted = if s.span_years == config.horizon {
                            s.rate_final
                        } else {
                            if config.horizon > s.span_years {
                                extrapolations += 1;
                            }
                            interpolate_rate(
                                s.rate_initial,
                                s.rate_final,
                                s.span_years,
                                config.horizon,
                            )?
                        };
                        pairs.push((s.rate_initial, adjusted));
                    }
                    let rate_future = project_rate_long_term(rate, &pairs)?;
                    let future_age = record.physical_age + config.horizon;
                    let conditional_future =
                        project_long_term(rate_future, record.physical_age, config.horizon);
                    let probability =
                        classifier.predict_probability(future_age, conditional_future);
                    PredictionRow {
                        asset_id: record.asset_id.clone(),
                        physical_age: record.physical_age,
                        conditional_age_now: Some(conditional_now),
                        rate: Some(rate),
                        rate_future: Some(rate_future),
                        conditional_age_future: Some(conditional_future),
                        probability,
                        predicted: classifier.classify(
                            future_age,
                            conditional_future,
                            config.threshold,
                        ),
                        actual: actual_for(&record.asset_id, record.status)?,
                    }
                }
                PipelineMode::Weibull => unreachable!("handled above"),
            };
            rows.push(row);
        }
        artifacts = PipelineArtifacts {
            k_sweep: k_scores,
            best_k: Some(best_k),
            aged: Some(aged),
            encoder: Some(encoder),
            classifier: Some(classifier),
            weibull: None,
            clamped_values: clamped,
            extrapolations,
        };
    }

    let predicted: Vec<Status> = rows.iter().map(|r| r.predicted).collect();
    let actual: Vec<Status> = rows.iter().map(|r| r.actual).collect();
    let confusion = ConfusionMatrix::from_predictions(&predicted, &actual)?;
    let report = metrics(&confusion);
    artifacts.k_sweep.shrink_to_fit();
    Ok(PipelineOutcome {
        mode,
        confusion,
        metrics: report,
        predictions: rows,
        artifacts,
    })
}
