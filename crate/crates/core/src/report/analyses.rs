use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Duration, Utc};
use rayon::prelude::*;

use super::table::{distribution_csv, grouped_csv, DistributionRow, Group, GroupedRow, MonthlySeries, YearMonth};
use crate::corpus::{PackageIndex, Release};
use crate::lag::{days, Direction, Evaluator};
use crate::semver::ReleaseType;
use crate::whatif::{LoosenLevel, Loosening};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Analysis {
    Rq1,
    Rq2,
    Rq3,
    Rq4,
    Rq5,
    Rq6,
}

impl Analysis {
    pub const ALL: [Analysis; 6] = [
        Analysis::Rq1,
        Analysis::Rq2,
        Analysis::Rq3,
        Analysis::Rq4,
        Analysis::Rq5,
        Analysis::Rq6,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Analysis::Rq1 => "rq1",
            Analysis::Rq2 => "rq2",
            Analysis::Rq3 => "rq3",
            Analysis::Rq4 => "rq4",
            Analysis::Rq5 => "rq5",
            Analysis::Rq6 => "rq6",
        }
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Analysis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown analysis {s:?} (expected rq1 .. rq6)"))
    }
}

/// Settings shared by all analyses.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    /// Applied to rq1 .. rq5.
    pub loosening: Loosening,
    /// Second evaluation point for a package's last release. Off by default.
    pub end_of_observation: Option<DateTime<Utc>>,
    /// Series emitted next to the baseline by rq6.
    pub whatif: Vec<Loosening>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            loosening: LoosenLevel::None.into(),
            end_of_observation: None,
            whatif: vec![LoosenLevel::Patch.into(), LoosenLevel::PatchAndMinor.into()],
        }
    }
}

impl ReportConfig {
    fn evaluator<'a>(&self, idx: &'a PackageIndex) -> Evaluator<'a, Loosening> {
        Evaluator::new(idx)
            .with_admission(self.loosening)
            .with_end_of_observation(self.end_of_observation)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TableData {
    Series(MonthlySeries),
    Distribution(Vec<DistributionRow>),
    Grouped(Vec<GroupedRow>),
}

/// One CSV file. The first table of an analysis has an empty name.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub data: TableData,
}

impl Table {
    pub fn to_csv(&self) -> Vec<u8> {
        match &self.data {
            TableData::Series(s) => s.to_csv(),
            TableData::Distribution(rows) => distribution_csv(rows),
            TableData::Grouped(rows) => grouped_csv(rows),
        }
    }
}

pub fn run(analysis: Analysis, idx: &PackageIndex, cfg: &ReportConfig) -> Vec<Table> {
    let table = |name, data| Table { name, data };
    match analysis {
        Analysis::Rq1 => vec![table("", TableData::Series(rq1_proportions(idx, cfg)))],
        Analysis::Rq2 => {
            let (monthly, by_type) = rq2_distributions(idx, cfg);
            vec![
                table("", TableData::Distribution(monthly)),
                table("by_type", TableData::Distribution(by_type)),
            ]
        }
        Analysis::Rq3 => {
            let (types, lifespan, by_type) = rq3_update_stats(idx, cfg);
            vec![
                table("", TableData::Series(types)),
                table("lifespan", TableData::Distribution(lifespan)),
                table("lifespan_by_type", TableData::Distribution(by_type)),
            ]
        }
        Analysis::Rq4 => {
            let (growth, missed) = rq4_growth(idx, cfg);
            vec![
                table("", TableData::Distribution(growth)),
                table("missed_types", TableData::Series(missed)),
            ]
        }
        Analysis::Rq5 => {
            let (monthly, by_type) = rq5_changes(idx, cfg);
            vec![
                table("", TableData::Series(monthly)),
                table("by_type", TableData::Grouped(by_type)),
            ]
        }
        Analysis::Rq6 => vec![table("", TableData::Series(rq6_whatif(idx, &cfg.whatif)))],
    }
}

fn per_release<T: Send>(idx: &PackageIndex, f: impl Fn(&Release) -> T + Sync + Send) -> Vec<T> {
    idx.releases().par_iter().map(f).collect()
}

fn lagging<A: crate::lag::Admission>(ev: &Evaluator<'_, A>, r: &Release) -> bool {
    let (at_release, at_next) = ev.lifespan_lags(r);
    at_release > Duration::zero() || at_next.is_some_and(|l| l > Duration::zero())
}

#[derive(Default)]
struct Rq1Month {
    releases: usize,
    releases_lagging: usize,
    deps: usize,
    deps_lagging: usize,
    with_lifespan: usize,
    target_updated: usize,
    update_missed: usize,
}

/// Monthly proportions of lagging releases and dependencies, and of
/// releases seeing a target update during their lifespan and missing it.
///
/// A release or dependency lags when its lag is positive at its release
/// date or at the next release date; it is counted once.
pub fn rq1_proportions(idx: &PackageIndex, cfg: &ReportConfig) -> MonthlySeries {
    let ev = cfg.evaluator(idx);
    let facts = per_release(idx, |r| {
        let at_release = ev.dependency_lags(r, r.date);
        let at_next = ev.next_time(r).map(|t| ev.dependency_lags(r, t));
        let dep_lagging = (0..r.deps.len())
            .filter(|&i| at_release[i] > Duration::zero() || at_next.as_ref().is_some_and(|n| n[i] > Duration::zero()))
            .count();
        (
            YearMonth::of(r.date),
            r.deps.len(),
            dep_lagging,
            lagging(&ev, r),
            ev.lifespan_events(r),
        )
    });
    let mut months: BTreeMap<YearMonth, Rq1Month> = BTreeMap::new();
    for (month, deps, deps_lagging, release_lagging, events) in facts {
        let m = months.entry(month).or_default();
        m.releases += 1;
        m.releases_lagging += release_lagging as usize;
        m.deps += deps;
        m.deps_lagging += deps_lagging;
        if let Some(e) = events {
            m.with_lifespan += 1;
            m.target_updated += e.target_updated as usize;
            m.update_missed += e.update_missed as usize;
        }
    }
    let mut out = MonthlySeries::default();
    for (month, m) in months {
        out.push(month, "releases_lagging", m.releases_lagging, m.releases);
        out.push(month, "dependencies_lagging", m.deps_lagging, m.deps);
        out.push(month, "releases_target_updated", m.target_updated, m.with_lifespan);
        out.push(month, "releases_update_missed", m.update_missed, m.with_lifespan);
        out.push(month, "missed_over_updated", m.update_missed, m.target_updated);
    }
    out
}

/// Monthly distribution of positive lag at the next release date, and
/// yearly distribution of positive lag at the release date per release
/// type (initial releases left out).
pub fn rq2_distributions(idx: &PackageIndex, cfg: &ReportConfig) -> (Vec<DistributionRow>, Vec<DistributionRow>) {
    let ev = cfg.evaluator(idx);
    let facts = per_release(idx, |r| ev.lifespan_lags(r));
    let mut monthly: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
    let mut yearly: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
    for (r, (at_release, at_next)) in idx.releases().iter().zip(facts) {
        if let Some(l) = at_next.filter(|l| *l > Duration::zero()) {
            monthly
                .entry(Group::Month(YearMonth::of(r.date)))
                .or_default()
                .push(days(l));
        }
        if r.release_type != ReleaseType::Initial && at_release > Duration::zero() {
            yearly
                .entry(Group::YearType(r.date.year(), r.release_type))
                .or_default()
                .push(days(at_release));
        }
    }
    (summarize(monthly, "lag_at_next"), summarize(yearly, "lag_at_release"))
}

fn summarize(groups: BTreeMap<Group, Vec<f64>>, metric: &str) -> Vec<DistributionRow> {
    groups
        .into_iter()
        .filter_map(|(g, values)| DistributionRow::summarize(g, metric, values))
        .collect()
}

/// Monthly proportions of next-release types, plus lifespan distributions
/// per month and per (release type, next release type).
pub fn rq3_update_stats(
    idx: &PackageIndex,
    _cfg: &ReportConfig,
) -> (MonthlySeries, Vec<DistributionRow>, Vec<DistributionRow>) {
    let mut counts: BTreeMap<YearMonth, [usize; 3]> = BTreeMap::new();
    let mut lifespans: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
    let mut pairs: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
    for r in idx.releases() {
        let Some(next) = idx.next_t(r) else {
            continue;
        };
        let month = YearMonth::of(r.date);
        let lifespan = days(next.date - r.date);
        lifespans.entry(Group::Month(month)).or_default().push(lifespan);
        pairs
            .entry(Group::TypePair(r.release_type, next.release_type))
            .or_default()
            .push(lifespan);
        if let Some(i) = ReleaseType::UPDATES.iter().position(|t| *t == next.release_type) {
            counts.entry(month).or_default()[i] += 1;
        }
    }
    let mut series = MonthlySeries::default();
    for (month, c) in counts {
        let total = c.iter().sum();
        for (t, hits) in ReleaseType::UPDATES.iter().zip(c) {
            series.push(
                month,
                &format!("update_{}", t.as_str().to_ascii_lowercase()),
                hits,
                total,
            );
        }
    }
    (series, summarize(lifespans, "lifespan"), summarize(pairs, "lifespan"))
}

/// Monthly distribution of positive lag growth over a lifespan, and the
/// monthly proportion of releases that missed a major, minor or patch
/// target release published during their lifespan.
pub fn rq4_growth(idx: &PackageIndex, cfg: &ReportConfig) -> (Vec<DistributionRow>, MonthlySeries) {
    let ev = cfg.evaluator(idx);
    let facts = per_release(idx, |r| {
        let (at_release, at_next) = ev.lifespan_lags(r);
        (at_next.map(|n| n - at_release), ev.missed_types(r))
    });
    let mut growth: BTreeMap<Group, Vec<f64>> = BTreeMap::new();
    let mut missed: BTreeMap<YearMonth, (usize, [usize; 3])> = BTreeMap::new();
    for (r, (delta, types)) in idx.releases().iter().zip(facts) {
        let month = YearMonth::of(r.date);
        if let Some(g) = delta.filter(|g| *g > Duration::zero()) {
            growth.entry(Group::Month(month)).or_default().push(days(g));
        }
        if let Some(types) = types {
            let m = missed.entry(month).or_default();
            m.0 += 1;
            for (i, t) in ReleaseType::UPDATES.iter().enumerate() {
                m.1[i] += types.contains(t) as usize;
            }
        }
    }
    let mut series = MonthlySeries::default();
    for (month, (population, hits)) in missed {
        for (t, h) in ReleaseType::UPDATES.iter().zip(hits) {
            series.push(
                month,
                &format!("missed_{}", t.as_str().to_ascii_lowercase()),
                h,
                population,
            );
        }
    }
    (summarize(growth, "lag_growth"), series)
}

/// Monthly proportions of releases whose lag is higher, the same or lower
/// than their predecessor's, and the same split per release type together
/// with the proportion adopting a previously missed target release.
pub fn rq5_changes(idx: &PackageIndex, cfg: &ReportConfig) -> (MonthlySeries, Vec<GroupedRow>) {
    let ev = cfg.evaluator(idx);
    let directions = [Direction::Higher, Direction::Same, Direction::Lower];
    let facts = per_release(idx, |r| {
        ev.lag_change(r)
            .map(|c| (c.direction, ev.adoption(r).unwrap_or_default()))
    });
    let mut monthly: BTreeMap<YearMonth, [usize; 3]> = BTreeMap::new();
    let mut by_type: BTreeMap<ReleaseType, (usize, [usize; 3], [usize; 3])> = BTreeMap::new();
    for (r, fact) in idx.releases().iter().zip(facts) {
        let Some((direction, adopted)) = fact else {
            continue;
        };
        let d = directions.iter().position(|x| *x == direction).unwrap();
        monthly.entry(YearMonth::of(r.date)).or_default()[d] += 1;
        let g = by_type.entry(r.release_type).or_default();
        g.0 += 1;
        g.1[d] += 1;
        for (i, t) in ReleaseType::UPDATES.iter().enumerate() {
            g.2[i] += adopted.contains(t) as usize;
        }
    }
    let mut series = MonthlySeries::default();
    for (month, c) in monthly {
        let total = c.iter().sum();
        for (dir, hits) in directions.iter().zip(c) {
            series.push(month, &format!("lag_{}", dir.as_str()), hits, total);
        }
    }
    let mut grouped = Vec::new();
    for (t, (total, dirs, adopted)) in by_type {
        let rows = directions
            .iter()
            .map(|d| format!("lag_{}", d.as_str()))
            .zip(dirs)
            .chain(
                ReleaseType::UPDATES
                    .iter()
                    .map(|u| format!("adopted_{}", u.as_str().to_ascii_lowercase()))
                    .zip(adopted),
            );
        for (metric, hits) in rows {
            grouped.push(GroupedRow {
                group: Group::Type(t),
                metric,
                value: hits as f64 / total as f64,
                count: total,
            });
        }
    }
    (series, grouped)
}

/// Monthly proportion of lagging releases (as in rq1) for the baseline
/// and for each loosening in `levels`.
pub fn rq6_whatif(idx: &PackageIndex, levels: &[Loosening]) -> MonthlySeries {
    rq6_whatif_with(idx, levels, None)
}

pub fn rq6_whatif_with(
    idx: &PackageIndex,
    levels: &[Loosening],
    end_of_observation: Option<DateTime<Utc>>,
) -> MonthlySeries {
    let baseline = Loosening::from(LoosenLevel::None);
    let all: Vec<Loosening> = std::iter::once(baseline).chain(levels.iter().copied()).collect();
    let facts = per_release(idx, |r| {
        all.iter()
            .map(|l| {
                let ev = Evaluator::new(idx)
                    .with_admission(*l)
                    .with_end_of_observation(end_of_observation);
                lagging(&ev, r)
            })
            .collect::<Vec<bool>>()
    });
    let mut months: BTreeMap<YearMonth, (usize, Vec<usize>)> = BTreeMap::new();
    for (r, flags) in idx.releases().iter().zip(facts) {
        let m = months
            .entry(YearMonth::of(r.date))
            .or_insert_with(|| (0, vec![0; all.len()]));
        m.0 += 1;
        for (i, f) in flags.into_iter().enumerate() {
            m.1[i] += f as usize;
        }
    }
    let names: Vec<String> = std::iter::once("releases_lagging".to_string())
        .chain(levels.iter().map(|l| format!("releases_lagging@{}", l.level)))
        .collect();
    let mut series = MonthlySeries::default();
    for (month, (total, hits)) in months {
        for (name, h) in names.iter().zip(hits) {
            series.push(month, name, h, total);
        }
    }
    series
}
