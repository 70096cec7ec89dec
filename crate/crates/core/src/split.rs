//! Seeded stratified train/test splitting.

use alloc::vec::Vec;

use crate::data::{DataError, Dataset, Status};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SplitError {
    #[error("status {status} has {count} records; need at least 5 and a non-empty share on both sides")]
    TooFewPerClass { status: Status, count: usize },
    #[error("split ratio {0} is not a fraction in (0, 1)")]
    InvalidRatio(f64),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// FNV-1a over the seed and record identity; a cheap seeded shuffle key
/// that is identical on every platform.
fn record_hash(seed: u64, asset_id: &str, year: Option<i32>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |byte: u8| {
        h ^= byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    };
    for byte in seed.to_le_bytes() {
        eat(byte);
    }
    for byte in asset_id.as_bytes() {
        eat(*byte);
    }
    if let Some(y) = year {
        for byte in y.to_le_bytes() {
            eat(byte);
        }
    }
    h
}

/// Splits a dataset into train/test stratified by status.
///
/// Each class contributes round(count · ratio) records to the train side,
/// selected by a seeded shuffle; record order within each side follows the
/// input dataset. Requires at least 5 records per class and both sides
/// non-empty for every class.
pub fn split(dataset: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset), SplitError> {
    if ratio.is_nan() {
        return Err(SplitError::InvalidRatio(ratio));
    }
    if ratio <= 0.0 || ratio >= 1.0 {
        // A degenerate ratio always leaves one side empty.
        let status = Status::Failed;
        let count = dataset
            .records()
            .iter()
            .filter(|r| r.status == status)
            .count();
        return Err(SplitError::TooFewPerClass { status, count });
    }
    // Records are ordered by a seeded hash of their identity and each class
    // draws its train share in that order. The order does not depend on
    // record position, statuses or the rest of the fleet, so perturbed or
    // subsampled variants of a dataset stay paired with their baseline:
    // an asset keeps its side unless class-count rounding moves it.
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by_key(|&i| {
        let r = &dataset.records()[i];
        (record_hash(seed, &r.asset_id, r.inspection_year), i)
    });
    let mut train_indices: Vec<usize> = Vec::new();
    let mut test_indices: Vec<usize> = Vec::new();
    for status in [Status::Failed, Status::Working] {
        let indices: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| dataset.records()[i].status == status)
            .collect();
        let count = indices.len();
        if count < 5 {
            return Err(SplitError::TooFewPerClass { status, count });
        }
        let train_count = crate::math::floor(count as f64 * ratio + 0.5) as usize;
        if train_count == 0 || train_count == count {
            return Err(SplitError::TooFewPerClass { status, count });
        }
        train_indices.extend_from_slice(&indices[..train_count]);
        test_indices.extend_from_slice(&indices[train_count..]);
    }
    train_indices.sort_unstable();
    test_indices.sort_unstable();
    let pick = |indices: &[usize]| -> Result<Dataset, DataError> {
        let records = indices
            .iter()
            .map(|&i| dataset.records()[i].clone())
            .collect();
        Dataset::new(dataset.schema().clone(), records, dataset.kind())
    };
    Ok((pick(&train_indices)?, pick(&test_indices)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DatasetKind, FeatureSchema, FeatureSpec};
    use crate::testutil::record;

    fn status_dataset(failed: usize, working: usize) -> Dataset {
        let schema = FeatureSchema::new(alloc::vec![FeatureSpec::numeric("x")]).unwrap();
        let mut rows = Vec::new();
        for i in 0..failed {
            rows.push(record(
                &alloc::format!("f{i}"),
                None,
                &[("x", i as f64)],
                &[],
                10.0,
                Status::Failed,
            ));
        }
        for i in 0..working {
            rows.push(record(
                &alloc::format!("w{i}"),
                None,
                &[("x", i as f64)],
                &[],
                10.0,
                Status::Working,
            ));
        }
        Dataset::new(schema, rows, DatasetKind::OneTime).unwrap()
    }

    fn count(d: &Dataset, status: Status) -> usize {
        d.records().iter().filter(|r| r.status == status).count()
    }

    #[test]
    fn integer_rounding_follows_the_published_protocol_counts() {
        // 51 failed and 149 working at 0.8: round(40.8) = 41 and
        // round(119.2) = 119 on the train side, leaving 10 + 30 for test.
        let d = status_dataset(51, 149);
        let (train, test) = split(&d, 0.8, 11).unwrap();
        assert_eq!(count(&train, Status::Failed), 41);
        assert_eq!(count(&train, Status::Working), 119);
        assert_eq!(count(&test, Status::Failed), 10);
        assert_eq!(count(&test, Status::Working), 30);
        assert_eq!(train.len() + test.len(), d.len());
    }

    #[test]
    fn degenerate_ratio_is_rejected() {
        let d = status_dataset(20, 20);
        assert!(matches!(
            split(&d, 1.0, 1),
            Err(SplitError::TooFewPerClass { .. })
        ));
        assert!(matches!(
            split(&d, 0.0, 1),
            Err(SplitError::TooFewPerClass { .. })
        ));
    }

    #[test]
    fn too_few_records_per_class_is_rejected() {
        let d = status_dataset(4, 20);
        assert!(matches!(
            split(&d, 0.8, 1),
            Err(SplitError::TooFewPerClass { status: Status::Failed, count: 4 })
        ));
    }

    #[test]
    fn same_seed_gives_identical_split_and_sides_partition_the_input() {
        let d = status_dataset(13, 37);
        let (train_a, test_a) = split(&d, 0.8, 42).unwrap();
        let (train_b, test_b) = split(&d, 0.8, 42).unwrap();
        assert_eq!(train_a, train_b);
        assert_eq!(test_a, test_b);

        let mut ids: Vec<&str> = train_a
            .records()
            .iter()
            .chain(test_a.records())
            .map(|r| r.asset_id.as_str())
            .collect();
        ids.sort_unstable();
        let mut original: Vec<&str> = d.records().iter().map(|r| r.asset_id.as_str()).collect();
        original.sort_unstable();
        assert_eq!(ids, original);

        // Different seeds give a different selection (overwhelmingly likely).
        let (train_c, _) = split(&d, 0.8, 43).unwrap();
        assert_ne!(train_a, train_c);
    }
}
