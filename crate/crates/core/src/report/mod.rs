//! Monthly series and distributions for each research question, run
//! metadata, and per-dependency traces.

mod analyses;
mod table;

use std::io::Read;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::corpus::{format_date, CorpusError, FilterConfig, PackageId, PackageIndex, Release};
use crate::lag::{days, Admission, Evaluator};

pub use analyses::{
    rq1_proportions, rq2_distributions, rq3_update_stats, rq4_growth, rq5_changes, rq6_whatif, rq6_whatif_with, run,
    Analysis, ReportConfig, Table, TableData,
};
pub use table::{
    distribution_csv, grouped_csv, number, percentile, DistributionRow, Group, GroupedRow, MonthlySeries, SeriesRow,
    YearMonth,
};

pub const LAGGING_DEFINITION: &str = "lag > 0 at the release date or at the next release date, counted once";
pub const BUCKETING: &str = "calendar month (UTC) of the release date";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

pub fn digest_inputs<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<InputDigest>, CorpusError> {
    crate::corpus::expand_inputs(paths)?
        .into_iter()
        .map(|path| {
            let mut file = std::fs::File::open(&path).map_err(|e| CorpusError::io(&path, e))?;
            let mut hasher = Sha256::new();
            let mut buf = [0u8; 1 << 16];
            loop {
                let n = file.read(&mut buf).map_err(|e| CorpusError::io(&path, e))?;
                if n == 0 {
                    break;
                }
                hasher.update(&buf[..n]);
            }
            Ok(InputDigest {
                path: path.display().to_string(),
                sha256: hex::encode(hasher.finalize()),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusSize {
    pub packages: usize,
    pub releases: usize,
    pub dependencies: usize,
    pub dropped_dependencies: usize,
}

impl CorpusSize {
    pub fn of(idx: &PackageIndex) -> Self {
        CorpusSize {
            packages: idx.package_count(),
            releases: idx.release_count(),
            dependencies: idx.dependency_count(),
            dropped_dependencies: idx.dropped_dependencies(),
        }
    }
}

/// Contents of `run.json`. Holds no timestamps so that repeated runs
/// produce identical files.
#[derive(Debug, Clone, Serialize)]
pub struct RunInfo {
    pub tool: &'static str,
    pub version: &'static str,
    pub analyses: Vec<String>,
    pub loosen: String,
    pub whatif_levels: Vec<String>,
    pub zero_major_caret: bool,
    pub end_of_observation: Option<String>,
    pub lagging_definition: &'static str,
    pub bucketing: &'static str,
    pub filter: Option<FilterConfig>,
    pub inputs: Vec<InputDigest>,
    pub corpus: CorpusSize,
}

impl RunInfo {
    pub fn new(
        analyses: &[Analysis],
        cfg: &ReportConfig,
        filter: Option<FilterConfig>,
        inputs: Vec<InputDigest>,
        idx: &PackageIndex,
    ) -> Self {
        RunInfo {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            analyses: analyses.iter().map(|a| a.to_string()).collect(),
            loosen: cfg.loosening.level.to_string(),
            whatif_levels: cfg.whatif.iter().map(|l| l.level.to_string()).collect(),
            zero_major_caret: cfg.loosening.zero_major_caret || cfg.whatif.iter().any(|l| l.zero_major_caret),
            end_of_observation: cfg.end_of_observation.as_ref().map(format_date),
            lagging_definition: LAGGING_DEFINITION,
            bucketing: BUCKETING,
            filter,
            inputs,
            corpus: CorpusSize::of(idx),
        }
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("serializable");
        out.push(b'\n');
        out
    }
}

/// Resolution of one dependency at one time point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub time: DateTime<Utc>,
    pub target: String,
    pub constraint: String,
    pub max_installable: Option<String>,
    pub missed: Vec<String>,
    pub lag_days: f64,
}

/// Resolves the dependencies of `r` (optionally only those on `target`)
/// at each of `times`.
pub fn trace<A: Admission>(
    ev: &Evaluator<'_, A>,
    r: &Release,
    target: Option<PackageId>,
    times: &[DateTime<Utc>],
) -> Vec<TraceRow> {
    let idx = ev.index();
    let mut rows = Vec::new();
    for &t in times {
        for d in r.deps.iter().filter(|d| target.is_none_or(|p| p == d.target)) {
            let res = ev.resolve(d, t).expect("index-built dependency");
            let missed = ev
                .missed(d, t)
                .expect("index-built dependency")
                .into_iter()
                .map(|id| idx.release(id).version.to_string())
                .collect();
            rows.push(TraceRow {
                time: t,
                target: idx.package_name(d.target).to_string(),
                constraint: d.constraint.raw().to_string(),
                max_installable: res.selected.map(|id| idx.release(id).version.to_string()),
                missed,
                lag_days: days(res.lag()),
            });
        }
    }
    rows
}

pub fn trace_csv(rows: &[TraceRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["time", "target", "constraint", "max_installable", "missed", "lag_days"])
        .unwrap();
    for r in rows {
        w.write_record([
            format_date(&r.time),
            r.target.clone(),
            r.constraint.clone(),
            r.max_installable.clone().unwrap_or_default(),
            r.missed.join(" "),
            number(r.lag_days),
        ])
        .unwrap();
    }
    w.into_inner().expect("in-memory writer")
}

/// The running example's expected trace, in `trace_csv` layout.
pub fn expected_table1() -> Vec<TraceRow> {
    crate::fixture::TABLE
        .iter()
        .map(|row| TraceRow {
            time: crate::fixture::t(row.time),
            target: "p2".into(),
            constraint: "~1.0.0".into(),
            max_installable: Some(row.max_installable.into()),
            missed: row.missed.iter().map(|s| s.to_string()).collect(),
            lag_days: row.lag_days as f64,
        })
        .collect()
}
