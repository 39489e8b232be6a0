use std::fmt;

use chrono::{DateTime, Datelike, Utc};
use serde::Serialize;

use crate::semver::ReleaseType;

/// Calendar month in UTC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn of(date: DateTime<Utc>) -> Self {
        YearMonth {
            year: date.year(),
            month: date.month(),
        }
    }

    pub fn succ(self) -> Self {
        if self.month == 12 {
            YearMonth {
                year: self.year + 1,
                month: 1,
            }
        } else {
            YearMonth {
                year: self.year,
                month: self.month + 1,
            }
        }
    }

    /// Every month from `first` to `last` inclusive.
    pub fn range(first: YearMonth, last: YearMonth) -> Vec<YearMonth> {
        let mut out = Vec::new();
        let mut m = first;
        while m <= last {
            out.push(m);
            m = m.succ();
        }
        out
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

/// Row of a monthly series: `value` over a population of `count`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub month: YearMonth,
    pub metric: String,
    pub value: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonthlySeries {
    pub rows: Vec<SeriesRow>,
}

impl MonthlySeries {
    pub fn push(&mut self, month: YearMonth, metric: &str, hits: usize, count: usize) {
        if count > 0 {
            self.rows.push(SeriesRow {
                month,
                metric: metric.to_string(),
                value: hits as f64 / count as f64,
                count,
            });
        }
    }

    pub fn metric<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a SeriesRow> + 'a {
        self.rows.iter().filter(move |r| r.metric == name)
    }

    pub fn value(&self, month: YearMonth, metric: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.month == month && r.metric == metric)
            .map(|r| r.value)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["month", "metric", "value", "count"]).unwrap();
        for r in &self.rows {
            w.write_record([
                r.month.to_string(),
                r.metric.clone(),
                number(r.value),
                r.count.to_string(),
            ])
            .unwrap();
        }
        w.into_inner().expect("in-memory writer")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Group {
    Month(YearMonth),
    YearType(i32, ReleaseType),
    TypePair(ReleaseType, ReleaseType),
    Type(ReleaseType),
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Month(m) => m.fmt(f),
            Group::YearType(y, t) => write!(f, "{y:04}:{t}"),
            Group::TypePair(a, b) => write!(f, "{a}->{b}"),
            Group::Type(t) => t.fmt(f),
        }
    }
}

/// Summary of a duration metric in days.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionRow {
    pub group: Group,
    pub metric: String,
    pub count: usize,
    pub p25: f64,
    pub median: f64,
    pub mean: f64,
    pub p75: f64,
}

impl DistributionRow {
    /// `None` for an empty sample.
    pub fn summarize(group: Group, metric: &str, mut values: Vec<f64>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Some(DistributionRow {
            group,
            metric: metric.to_string(),
            count: values.len(),
            p25: percentile(&values, 0.25),
            median: percentile(&values, 0.5),
            mean,
            p75: percentile(&values, 0.75),
        })
    }
}

pub fn distribution_csv(rows: &[DistributionRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "metric", "count", "p25", "median", "mean", "p75"])
        .unwrap();
    for r in rows {
        w.write_record([
            r.group.to_string(),
            r.metric.clone(),
            r.count.to_string(),
            number(r.p25),
            number(r.median),
            number(r.mean),
            number(r.p75),
        ])
        .unwrap();
    }
    w.into_inner().expect("in-memory writer")
}

/// Proportion within a non-temporal group, e.g. per release type.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedRow {
    pub group: Group,
    pub metric: String,
    pub value: f64,
    pub count: usize,
}

pub fn grouped_csv(rows: &[GroupedRow]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["group", "metric", "value", "count"]).unwrap();
    for r in rows {
        w.write_record([
            r.group.to_string(),
            r.metric.clone(),
            number(r.value),
            r.count.to_string(),
        ])
        .unwrap();
    }
    w.into_inner().expect("in-memory writer")
}

/// Linear interpolation between closest ranks (numpy's default).
/// `sorted` must be non-empty and ascending.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn number(v: f64) -> String {
    format!("{v:.6}")
}
