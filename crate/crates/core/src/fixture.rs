//! The two-package running example: `p1` depends on `p2` with `~1.0.0`,
//! later widened to `^1.0.0`.
//!
//! Time point `T_i` is day `i` after 2017-01-01T00:00:00Z. `p2` publishes
//! 1.0.0@T1, 1.0.1@T3, 1.1.0@T5, 1.0.2@T8 and 2.0.0@T9; `p1` publishes
//! 1.0.0@T1 (`~1.0.0`) and 1.1.0@T9 (`^1.0.0`).

use chrono::{DateTime, Duration, TimeZone, Utc};

use crate::corpus::{DepKind, PackageIndex, RawDependency, RawRecord};

pub fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2017, 1, 1, 0, 0, 0).unwrap()
}

/// `T_i`.
pub fn t(i: i64) -> DateTime<Utc> {
    epoch() + Duration::days(i)
}

fn record(package: &str, version: &str, day: i64, deps: &[(&str, &str)]) -> RawRecord {
    RawRecord {
        package: package.to_string(),
        version: version.to_string(),
        date: t(day),
        dependencies: deps
            .iter()
            .map(|(target, constraint)| RawDependency {
                target: target.to_string(),
                constraint: constraint.to_string(),
                kind: DepKind::Runtime,
            })
            .collect(),
    }
}

pub fn records() -> Vec<RawRecord> {
    vec![
        record("p1", "1.0.0", 1, &[("p2", "~1.0.0")]),
        record("p1", "1.1.0", 9, &[("p2", "^1.0.0")]),
        record("p2", "1.0.0", 1, &[]),
        record("p2", "1.0.1", 3, &[]),
        record("p2", "1.1.0", 5, &[]),
        record("p2", "1.0.2", 8, &[]),
        record("p2", "2.0.0", 9, &[]),
    ]
}

pub fn index() -> PackageIndex {
    PackageIndex::build(&records()).expect("fixture is well formed")
}

/// One row of the installable/missed/lag table for `p1@1.0.0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedRow {
    pub time: i64,
    pub max_installable: &'static str,
    pub missed: &'static [&'static str],
    pub lag_days: i64,
}

pub const TABLE: [ExpectedRow; 4] = [
    ExpectedRow {
        time: 2,
        max_installable: "1.0.0",
        missed: &[],
        lag_days: 0,
    },
    ExpectedRow {
        time: 4,
        max_installable: "1.0.1",
        missed: &[],
        lag_days: 0,
    },
    ExpectedRow {
        time: 6,
        max_installable: "1.0.1",
        missed: &["1.1.0"],
        lag_days: 6 - 5,
    },
    ExpectedRow {
        time: 9,
        max_installable: "1.0.2",
        missed: &["1.1.0", "2.0.0"],
        lag_days: 9 - 5,
    },
];
