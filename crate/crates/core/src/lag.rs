//! Installable and missed releases, dependency and release technical lag,
//! and the per-release lifespan measures built on them.
//!
//! For a dependency `d` evaluated at time `t`:
//!
//! * `installable(d, t)`: releases of the target published by `t` whose
//!   version satisfies the constraint;
//! * `missed(d, t)`: releases published by `t` whose version is above the
//!   highest installable one (all published releases when nothing is
//!   installable);
//! * `lag(d, t)`: `t` minus the earliest publication date in `missed`, or
//!   zero when `missed` is empty.
//!
//! A release lags by the maximum over its dependencies. When the target
//! has published nothing by `t` the lag is zero and the dependency is
//! reported as unresolved.

use chrono::{DateTime, Duration, Utc};
use thiserror::Error;

use crate::corpus::{Dependency, PackageId, PackageIndex, Release, ReleaseId};
use crate::semver::{ReleaseType, Version};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LagError {
    #[error("dependency target {0:?} is not in the index")]
    UnknownTarget(PackageId),
}

/// Decides which releases above the highest installable one are accepted
/// as well. The baseline accepts none.
pub trait Admission: Sync {
    /// Whether `candidate` (a version above `anchor`) may replace `anchor`,
    /// the highest release the constraint itself admits.
    fn admits(&self, candidate: &Version, anchor: &Version) -> bool;

    fn widens(&self) -> bool {
        true
    }
}

/// The constraint as written.
#[derive(Debug, Clone, Copy, Default)]
pub struct Strict;

impl Admission for Strict {
    fn admits(&self, _: &Version, _: &Version) -> bool {
        false
    }

    fn widens(&self) -> bool {
        false
    }
}

/// Outcome of resolving one dependency at one time point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    pub time: DateTime<Utc>,
    /// Highest accepted release, if any.
    pub selected: Option<ReleaseId>,
    /// Earliest publication date among missed releases.
    pub earliest_missed: Option<DateTime<Utc>>,
    /// Nothing of the target was published by `time`.
    pub unresolved: bool,
}

impl Resolution {
    pub fn lag(&self) -> Duration {
        self.earliest_missed.map_or(Duration::zero(), |first| self.time - first)
    }

    /// Whether `release` (of the same target, published by `time`) is missed.
    pub fn misses(&self, release: &Release) -> bool {
        release.date <= self.time && self.selected.is_none_or(|s| release.id > s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EvalPoint {
    AtRelease,
    AtNextRelease,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Release(ReleaseId),
    /// A release and the position of the dependency in its manifest.
    Dependency(ReleaseId, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagSample {
    pub subject: Subject,
    pub time_point: DateTime<Utc>,
    pub lag: Duration,
    pub context: EvalPoint,
    pub unresolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Higher,
    Same,
    Lower,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Higher => "higher",
            Direction::Same => "same",
            Direction::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagChange {
    pub release: ReleaseId,
    pub direction: Direction,
    pub magnitude: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LifespanEvents {
    /// Some dependency target published a release during the lifespan.
    pub target_updated: bool,
    /// Some such release is missed at the end of the lifespan.
    pub update_missed: bool,
}

pub fn days(d: Duration) -> f64 {
    d.num_seconds() as f64 / 86_400.0
}

/// Evaluates lag measures against a frozen index.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a, A = Strict> {
    idx: &'a PackageIndex,
    admission: A,
    end_of_observation: Option<DateTime<Utc>>,
}

impl<'a> Evaluator<'a, Strict> {
    pub fn new(idx: &'a PackageIndex) -> Self {
        Evaluator {
            idx,
            admission: Strict,
            end_of_observation: None,
        }
    }
}

impl<'a, A: Admission> Evaluator<'a, A> {
    pub fn with_admission<B: Admission>(self, admission: B) -> Evaluator<'a, B> {
        Evaluator {
            idx: self.idx,
            admission,
            end_of_observation: self.end_of_observation,
        }
    }

    /// Uses `end` as the second evaluation point of a package's last
    /// release instead of leaving it out.
    pub fn with_end_of_observation(mut self, end: Option<DateTime<Utc>>) -> Self {
        self.end_of_observation = end;
        self
    }

    pub fn index(&self) -> &'a PackageIndex {
        self.idx
    }

    pub fn admission(&self) -> &A {
        &self.admission
    }

    pub fn resolve(&self, d: &Dependency, t: DateTime<Utc>) -> Result<Resolution, LagError> {
        if self.idx.package(d.target).is_none() {
            return Err(LagError::UnknownTarget(d.target));
        }
        Ok(self.resolve_known(d, t))
    }

    fn resolve_known(&self, d: &Dependency, t: DateTime<Utc>) -> Resolution {
        let releases = self.idx.by_version(d.target);
        let mut top = None;
        let mut anchor = None;
        for (i, r) in releases.iter().enumerate().rev() {
            if r.date > t {
                continue;
            }
            top.get_or_insert(i);
            if d.constraint.satisfied_by(&r.version) {
                anchor = Some(i);
                break;
            }
        }
        let Some(top) = top else {
            return Resolution {
                time: t,
                selected: None,
                earliest_missed: None,
                unresolved: true,
            };
        };
        let selected = anchor.map(|a| {
            if !self.admission.widens() {
                return a;
            }
            let anchor_version = &releases[a].version;
            (a + 1..=top)
                .rev()
                .find(|&i| releases[i].date <= t && self.admission.admits(&releases[i].version, anchor_version))
                .unwrap_or(a)
        });
        let first_missed = selected.map_or(0, |s| s + 1);
        let earliest_missed = releases[first_missed..=top]
            .iter()
            .filter(|r| r.date <= t)
            .map(|r| r.date)
            .min();
        Resolution {
            time: t,
            selected: selected.map(|i| releases[i].id),
            earliest_missed,
            unresolved: false,
        }
    }

    /// Accepted releases of the target at `t`, in version order.
    pub fn installable(&self, d: &Dependency, t: DateTime<Utc>) -> Result<Vec<ReleaseId>, LagError> {
        if self.idx.package(d.target).is_none() {
            return Err(LagError::UnknownTarget(d.target));
        }
        let available: Vec<&Release> = self.idx.by_version(d.target).iter().filter(|r| r.date <= t).collect();
        let base: Vec<&Release> = available
            .iter()
            .copied()
            .filter(|r| d.constraint.satisfied_by(&r.version))
            .collect();
        Ok(available
            .iter()
            .filter(|r| {
                d.constraint.satisfied_by(&r.version)
                    || (self.admission.widens()
                        && base
                            .iter()
                            .any(|b| b.version < r.version && self.admission.admits(&r.version, &b.version)))
            })
            .map(|r| r.id)
            .collect())
    }

    /// Missed releases of the target at `t`, in version order.
    pub fn missed(&self, d: &Dependency, t: DateTime<Utc>) -> Result<Vec<ReleaseId>, LagError> {
        let res = self.resolve(d, t)?;
        Ok(self
            .idx
            .by_version(d.target)
            .iter()
            .filter(|r| res.misses(r))
            .map(|r| r.id)
            .collect())
    }

    pub fn dep_lag(&self, d: &Dependency, t: DateTime<Utc>) -> Result<Duration, LagError> {
        self.resolve(d, t).map(|r| r.lag())
    }

    /// Maximum dependency lag of an indexed release; zero without dependencies.
    pub fn release_lag(&self, r: &Release, t: DateTime<Utc>) -> Duration {
        r.deps
            .iter()
            .map(|d| self.resolve_known(d, t).lag())
            .max()
            .unwrap_or_else(Duration::zero)
    }

    /// Per-dependency lags of an indexed release.
    pub fn dependency_lags(&self, r: &Release, t: DateTime<Utc>) -> Vec<Duration> {
        r.deps.iter().map(|d| self.resolve_known(d, t).lag()).collect()
    }

    /// The second evaluation point: the next release's date, or the
    /// configured end of observation for a package's last release.
    pub fn next_time(&self, r: &Release) -> Option<DateTime<Utc>> {
        match self.idx.next_t(r) {
            Some(next) => Some(next.date),
            None => self.end_of_observation.filter(|end| *end >= r.date),
        }
    }

    pub fn lifespan_lags(&self, r: &Release) -> (Duration, Option<Duration>) {
        let at_release = self.release_lag(r, r.date);
        let at_next = self.next_time(r).map(|t| self.release_lag(r, t));
        (at_release, at_next)
    }

    pub fn lifespan_events(&self, r: &Release) -> Option<LifespanEvents> {
        let next = self.next_time(r)?;
        let mut events = LifespanEvents::default();
        for d in &r.deps {
            let fresh = self.idx.released_between(d.target, r.date, next);
            if fresh.is_empty() {
                continue;
            }
            events.target_updated = true;
            let res = self.resolve_known(d, next);
            if fresh.iter().any(|id| res.misses(self.idx.release(*id))) {
                events.update_missed = true;
                break;
            }
        }
        Some(events)
    }

    /// Release types of target releases published during the lifespan of
    /// `r` and missed at its end, one entry per dependency and release.
    pub fn missed_types(&self, r: &Release) -> Option<Vec<ReleaseType>> {
        let next = self.next_time(r)?;
        let mut types = Vec::new();
        for d in &r.deps {
            let fresh = self.idx.released_between(d.target, r.date, next);
            if fresh.is_empty() {
                continue;
            }
            let res = self.resolve_known(d, next);
            types.extend(
                fresh
                    .iter()
                    .map(|id| self.idx.release(*id))
                    .filter(|rel| res.misses(rel))
                    .map(|rel| rel.release_type),
            );
        }
        Some(types)
    }

    /// Lag of `r` at its release date compared with the lag its date-order
    /// predecessor would have at that same date.
    pub fn lag_change(&self, r: &Release) -> Option<LagChange> {
        let prev = self.idx.prev_t(r)?;
        let magnitude = self.release_lag(r, r.date) - self.release_lag(prev, r.date);
        let direction = match magnitude.cmp(&Duration::zero()) {
            std::cmp::Ordering::Greater => Direction::Higher,
            std::cmp::Ordering::Equal => Direction::Same,
            std::cmp::Ordering::Less => Direction::Lower,
        };
        Some(LagChange {
            release: r.id,
            direction,
            magnitude,
        })
    }

    /// Release types of target releases that the predecessor missed at
    /// `r`'s date and that `r` now accepts. Dependencies are matched by
    /// target; targets present in only one of the two releases are skipped.
    pub fn adoption(&self, r: &Release) -> Option<Vec<ReleaseType>> {
        let prev = self.idx.prev_t(r)?;
        let mut types = Vec::new();
        let mut seen: Vec<PackageId> = Vec::new();
        for d in &r.deps {
            if seen.contains(&d.target) {
                continue;
            }
            seen.push(d.target);
            let Some(before) = prev.deps.iter().find(|p| p.target == d.target) else {
                continue;
            };
            let was_missed = self.resolve_known(before, r.date);
            let accepted = self.installable(d, r.date).expect("index-built dependency");
            types.extend(
                accepted
                    .into_iter()
                    .map(|id| self.idx.release(id))
                    .filter(|rel| was_missed.misses(rel))
                    .map(|rel| rel.release_type),
            );
        }
        Some(types)
    }

    /// Dependency and release samples at both evaluation points.
    pub fn samples(&self, r: &Release) -> Vec<LagSample> {
        let mut out = Vec::with_capacity(2 * (r.deps.len() + 1));
        let mut points = vec![(EvalPoint::AtRelease, r.date)];
        if let Some(next) = self.next_time(r) {
            points.push((EvalPoint::AtNextRelease, next));
        }
        for (context, t) in points {
            let mut worst = Duration::zero();
            let mut any_unresolved = false;
            for (i, d) in r.deps.iter().enumerate() {
                let res = self.resolve_known(d, t);
                worst = worst.max(res.lag());
                any_unresolved |= res.unresolved;
                out.push(LagSample {
                    subject: Subject::Dependency(r.id, i),
                    time_point: t,
                    lag: res.lag(),
                    context,
                    unresolved: res.unresolved,
                });
            }
            out.push(LagSample {
                subject: Subject::Release(r.id),
                time_point: t,
                lag: worst,
                context,
                unresolved: any_unresolved,
            });
        }
        out
    }
}

pub fn installable(d: &Dependency, t: DateTime<Utc>, idx: &PackageIndex) -> Result<Vec<ReleaseId>, LagError> {
    Evaluator::new(idx).installable(d, t)
}

pub fn missed(d: &Dependency, t: DateTime<Utc>, idx: &PackageIndex) -> Result<Vec<ReleaseId>, LagError> {
    Evaluator::new(idx).missed(d, t)
}

pub fn dep_lag(d: &Dependency, t: DateTime<Utc>, idx: &PackageIndex) -> Result<Duration, LagError> {
    Evaluator::new(idx).dep_lag(d, t)
}

pub fn release_lag(r: &Release, t: DateTime<Utc>, idx: &PackageIndex) -> Duration {
    Evaluator::new(idx).release_lag(r, t)
}

pub fn lifespan_lags(r: &Release, idx: &PackageIndex) -> (Duration, Option<Duration>) {
    Evaluator::new(idx).lifespan_lags(r)
}

pub fn lifespan_events(r: &Release, idx: &PackageIndex) -> Option<LifespanEvents> {
    Evaluator::new(idx).lifespan_events(r)
}

pub fn missed_types(r: &Release, idx: &PackageIndex) -> Option<Vec<ReleaseType>> {
    Evaluator::new(idx).missed_types(r)
}

pub fn lag_change(r: &Release, idx: &PackageIndex) -> Option<LagChange> {
    Evaluator::new(idx).lag_change(r)
}

pub fn adoption(r: &Release, idx: &PackageIndex) -> Option<Vec<ReleaseType>> {
    Evaluator::new(idx).adoption(r)
}
