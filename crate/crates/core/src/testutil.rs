//! Shared builders for in-module tests.

use alloc::collections::BTreeMap;
use alloc::string::ToString;

use crate::data::{AssetRecord, RawValue, Status};

pub(crate) fn record(
    id: &str,
    year: Option<i32>,
    numbers: &[(&str, f64)],
    levels: &[(&str, &str)],
    age: f64,
    status: Status,
) -> AssetRecord {
    let mut values = BTreeMap::new();
    for (name, x) in numbers {
        values.insert(name.to_string(), RawValue::Number(*x));
    }
    for (name, l) in levels {
        values.insert(name.to_string(), RawValue::Level(l.to_string()));
    }
    AssetRecord {
        asset_id: id.to_string(),
        inspection_year: year,
        values,
        physical_age: age,
        status,
    }
}
