//! K-means over the encoded mixed space, Silhouette quality scoring and
//! cluster-count selection.
//!
//! Centroids update as coordinate means on numeric slots and per-slot modes
//! on unordered-categorical slots (ties to the lowest level index), the
//! standard choice for mixed k-means. Initial centroids are data points
//! drawn by a seeded probability-proportional-to-distance scheme, so runs
//! are reproducible and never start from an empty cluster.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encode::{distance_unchecked, EncodedPoint, Weights};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("k = {k} exceeds the {distinct} distinct points available")]
    TooFewPoints { k: usize, distinct: usize },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("silhouette requires at least 2 clusters")]
    SingleCluster,
    #[error("empty k range {lo}..={hi}")]
    InvalidKRange { lo: usize, hi: usize },
    #[error("model was fitted on {expected} points, got {actual}")]
    PointCountMismatch { expected: usize, actual: usize },
    #[error("point {index} does not match the weight layout")]
    LayoutMismatch { index: usize },
}

fn check_layout(points: &[EncodedPoint], weights: &Weights) -> Result<(), ClusterError> {
    for (index, p) in points.iter().enumerate() {
        if p.numeric.len() != weights.numeric.len()
            || p.categorical.len() != weights.categorical.len()
        {
            return Err(ClusterError::LayoutMismatch { index });
        }
    }
    Ok(())
}

/// K-means run parameters. The seed is mandatory: every run is reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Convergence threshold on the largest centroid coordinate shift.
    pub tolerance: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(seed: u64) -> Self {
        KMeansConfig {
            restarts: 10,
            max_iters: 300,
            tolerance: 1e-9,
            seed,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }
}

/// A fitted clustering: centroids, point assignment and the within-cluster
/// scatter (sum of squared mixed distances to the assigned centroid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<EncodedPoint>,
    /// Point index → cluster index.
    pub assignment: Vec<usize>,
    pub inertia: f64,
    pub member_counts: Vec<usize>,
}

impl ClusterModel {
    /// Recomputes the scatter from scratch; used to audit the stored value.
    pub fn recompute_inertia(&self, points: &[EncodedPoint], weights: &Weights) -> f64 {
        self.assignment
            .iter()
            .zip(points)
            .map(|(&c, p)| distance_unchecked(p, &self.centroids[c], weights))
            .sum()
    }
}

/// Runs seeded k-means with restarts and returns the lowest-inertia model.
pub fn kmeans(
    points: &[EncodedPoint],
    k: usize,
    weights: &Weights,
    config: &KMeansConfig,
) -> Result<ClusterModel, ClusterError> {
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    check_layout(points, weights)?;
    let distinct = count_distinct(points);
    if k > distinct {
        return Err(ClusterError::TooFewPoints { k, distinct });
    }
    let mut seed_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let restarts = config.restarts.max(1);
    let mut best: Option<ClusterModel> = None;
    for _ in 0..restarts {
        let run_seed: u64 = seed_rng.random();
        let (model, _trace) = kmeans_single_run(points, k, weights, config, run_seed);
        match &best {
            Some(b) if b.inertia <= model.inertia => {}
            _ => best = Some(model),
        }
    }
    Ok(best.expect("at least one restart"))
}

fn count_distinct(points: &[EncodedPoint]) -> usize {
    let mut distinct: Vec<&EncodedPoint> = Vec::new();
    for p in points {
        if !distinct.iter().any(|q| *q == p) {
            distinct.push(p);
        }
    }
    distinct.len()
}

/// One seeded k-means run. Returns the model and the objective value
/// recorded after every assignment step (non-increasing by construction).
pub(crate) fn kmeans_single_run(
    points: &[EncodedPoint],
    k: usize,
    weights: &Weights,
    config: &KMeansConfig,
    run_seed: u64,
) -> (ClusterModel, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let mut centroids = init_centroids(points, k, weights, &mut rng);
    let mut assignment = alloc::vec![0usize; points.len()];
    let mut trace = Vec::new();

    let mut iters = 0;
    loop {
        iters += 1;
        let objective = assign(points, &centroids, weights, &mut assignment);
        trace.push(objective);

        // A cluster can lose all members after an update; reseed it to the
        // point farthest from its previous centroid and keep iterating.
        let mut counts = alloc::vec![0usize; k];
        for &c in &assignment {
            counts[c] += 1;
        }
        let mut reseeded = false;
        for cluster in 0..k {
            if counts[cluster] == 0 {
                let far = farthest_point(points, &centroids[cluster], weights);
                centroids[cluster] = points[far].clone();
                reseeded = true;
            }
        }
        if reseeded {
            if iters >= config.max_iters {
                // Give the reseeded centroid one final assignment pass.
                assign(points, &centroids, weights, &mut assignment);
                break;
            }
            continue;
        }

        let movement = update_centroids(points, &assignment, weights, &mut centroids, k);
        if movement < config.tolerance || iters >= config.max_iters {
            // Sync the assignment with the final centroids.
            let objective = assign(points, &centroids, weights, &mut assignment);
            trace.push(objective);
            break;
        }
    }

    let mut member_counts = alloc::vec![0usize; k];
    for &c in &assignment {
        member_counts[c] += 1;
    }
    // The final sync pass can in principle empty a cluster; force the
    // farthest point into it so returned models never have empty clusters.
    for cluster in 0..k {
        if member_counts[cluster] == 0 {
            let far = farthest_point(points, &centroids[cluster], weights);
            member_counts[assignment[far]] -= 1;
            assignment[far] = cluster;
            member_counts[cluster] += 1;
            centroids[cluster] = points[far].clone();
        }
    }
    let inertia = assignment
        .iter()
        .zip(points)
        .map(|(&c, p)| distance_unchecked(p, &centroids[c], weights))
        .sum();
    (
        ClusterModel {
            k,
            centroids,
            assignment,
            inertia,
            member_counts,
        },
        trace,
    )
}

/// Seeded greedy-spreading initialization over distinct data points: the
/// first centroid is uniform, later ones are drawn with probability
/// proportional to the squared distance from the nearest chosen centroid.
fn init_centroids(
    points: &[EncodedPoint],
    k: usize,
    weights: &Weights,
    rng: &mut ChaCha8Rng,
) -> Vec<EncodedPoint> {
    let mut centroids: Vec<EncodedPoint> = Vec::with_capacity(k);
    let first = rng.random_range(0..points.len());
    centroids.push(points[first].clone());
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| distance_unchecked(p, &centroids[0], weights))
        .collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random_range(0.0..total);
            let mut chosen = points.len() - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 {
                    if target < d {
                        chosen = i;
                        break;
                    }
                    target -= d;
                }
            }
            chosen
        } else {
            // All remaining mass at distance zero cannot happen with k below
            // the distinct-point count, but fall back to uniform anyway.
            rng.random_range(0..points.len())
        };
        centroids.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            let d = distance_unchecked(p, centroids.last().expect("just pushed"), weights);
            if d < nearest[i] {
                nearest[i] = d;
            }
        }
    }
    centroids
}

/// Assigns each point to its nearest centroid (ties to the lowest cluster
/// index) and returns the resulting objective value.
fn assign(
    points: &[EncodedPoint],
    centroids: &[EncodedPoint],
    weights: &Weights,
    assignment: &mut [usize],
) -> f64 {
    let mut objective = 0.0;
    for (i, point) in points.iter().enumerate() {
        let mut best = 0usize;
        let mut best_d = distance_unchecked(point, &centroids[0], weights);
        for (c, centroid) in centroids.iter().enumerate().skip(1) {
            let d = distance_unchecked(point, centroid, weights);
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        assignment[i] = best;
        objective += best_d;
    }
    objective
}

fn farthest_point(points: &[EncodedPoint], from: &EncodedPoint, weights: &Weights) -> usize {
    let mut far = 0usize;
    let mut far_d = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = distance_unchecked(p, from, weights);
        if d > far_d {
            far_d = d;
            far = i;
        }
    }
    far
}

/// Moves centroids to the mean (numeric slots) and mode (categorical slots)
/// of their members. Returns the largest coordinate shift; a categorical
/// slot switching level counts as a shift of 1.
fn update_centroids(
    points: &[EncodedPoint],
    assignment: &[usize],
    _weights: &Weights,
    centroids: &mut [EncodedPoint],
    k: usize,
) -> f64 {
    let p = centroids[0].numeric.len();
    let q = centroids[0].categorical.len();
    let mut movement = 0.0f64;
    for cluster in 0..k {
        let members: Vec<usize> = assignment
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| (c == cluster).then_some(i))
            .collect();
        if members.is_empty() {
            continue;
        }
        for slot in 0..p {
            let mean =
                members.iter().map(|&i| points[i].numeric[slot]).sum::<f64>() / members.len() as f64;
            movement = movement.max(crate::math::abs(mean - centroids[cluster].numeric[slot]));
            centroids[cluster].numeric[slot] = mean;
        }
        for slot in 0..q {
            let mode = mode_level(members.iter().map(|&i| points[i].categorical[slot]));
            if mode != centroids[cluster].categorical[slot] {
                movement = movement.max(1.0);
                centroids[cluster].categorical[slot] = mode;
            }
        }
    }
    movement
}

/// Most frequent level, ties broken toward the lowest index.
fn mode_level(levels: impl Iterator<Item = u32>) -> u32 {
    let mut counts: alloc::collections::BTreeMap<u32, usize> = alloc::collections::BTreeMap::new();
    for level in levels {
        *counts.entry(level).or_insert(0) += 1;
    }
    let mut best = 0u32;
    let mut best_count = 0usize;
    for (level, count) in counts {
        if count > best_count {
            best_count = count;
            best = level;
        }
    }
    best
}

/// Per-point Silhouette coefficients with their building blocks retained
/// for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteReport {
    pub per_point: Vec<f64>,
    pub average: f64,
    /// Mean distance to the point's own cluster (a_r); 0 for singletons.
    pub intra: Vec<f64>,
    /// Smallest mean distance to another cluster (b_r).
    pub nearest_other: Vec<f64>,
}

/// Scores a clustering: s_r = (b_r − a_r) / max(a_r, b_r), with singleton
/// clusters and 0/0 cases scored 0 by convention.
pub fn silhouette(
    points: &[EncodedPoint],
    model: &ClusterModel,
    weights: &Weights,
) -> Result<SilhouetteReport, ClusterError> {
    if model.k < 2 {
        return Err(ClusterError::SingleCluster);
    }
    if model.assignment.len() != points.len() {
        return Err(ClusterError::PointCountMismatch {
            expected: model.assignment.len(),
            actual: points.len(),
        });
    }
    check_layout(points, weights)?;
    let n = points.len();
    let k = model.k;
    let mut per_point = Vec::with_capacity(n);
    let mut intra = Vec::with_capacity(n);
    let mut nearest_other = Vec::with_capacity(n);
    let mut sums = alloc::vec![0.0f64; k];
    for r in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for s in 0..n {
            if s == r {
                continue;
            }
            sums[model.assignment[s]] += distance_unchecked(&points[r], &points[s], weights);
        }
        let own = model.assignment[r];
        let own_size = model.member_counts[own];
        let a = if own_size > 1 {
            sums[own] / (own_size - 1) as f64
        } else {
            0.0
        };
        let mut b = f64::INFINITY;
        for t in 0..k {
            if t == own || model.member_counts[t] == 0 {
                continue;
            }
            b = b.min(sums[t] / model.member_counts[t] as f64);
        }
        let s_r = if own_size <= 1 {
            0.0
        } else {
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        };
        per_point.push(s_r);
        intra.push(a);
        nearest_other.push(if b.is_finite() { b } else { 0.0 });
    }
    let average = per_point.iter().sum::<f64>() / n as f64;
    Ok(SilhouetteReport {
        per_point,
        average,
        intra,
        nearest_other,
    })
}

/// Outcome of a cluster-count sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct KSweep {
    pub best_k: usize,
    pub model: ClusterModel,
    /// (k, average silhouette) for every candidate, in ascending k.
    pub scores: Vec<(usize, f64)>,
}

/// Clusters at every k in the range and keeps the one with the largest
/// average Silhouette, ties broken toward the smaller k.
pub fn select_k(
    points: &[EncodedPoint],
    k_range: core::ops::RangeInclusive<usize>,
    weights: &Weights,
    config: &KMeansConfig,
) -> Result<KSweep, ClusterError> {
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo > hi || lo < 2 {
        return Err(ClusterError::InvalidKRange { lo, hi });
    }
    let mut best: Option<(usize, ClusterModel, f64)> = None;
    let mut scores = Vec::new();
    for k in lo..=hi {
        let model = kmeans(points, k, weights, config)?;
        let report = silhouette(points, &model, weights)?;
        scores.push((k, report.average));
        match &best {
            Some((_, _, s)) if *s >= report.average => {}
            _ => best = Some((k, model, report.average)),
        }
    }
    let (best_k, model, _) = best.expect("non-empty range");
    Ok(KSweep {
        best_k,
        model,
        scores,
    })
}
