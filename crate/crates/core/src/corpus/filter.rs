//! Dataset filtering pipeline.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::record::{DepKind, RawRecord};
use crate::semver::{Constraint, Version};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub exclude_prereleases: bool,
    /// Packages without any release strictly after this date are dropped.
    pub activity_cutoff: Option<DateTime<Utc>>,
    pub drop_single_release_packages: bool,
    pub drop_isolated_packages: bool,
    pub keep_dep_kinds: BTreeSet<DepKind>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            exclude_prereleases: true,
            activity_cutoff: None,
            drop_single_release_packages: true,
            drop_isolated_packages: true,
            keep_dep_kinds: BTreeSet::from([DepKind::Runtime]),
        }
    }
}

impl FilterConfig {
    /// Checks that the activity cutoff lies within `[earliest, latest]`.
    pub fn validate(&self, bounds: Option<(DateTime<Utc>, DateTime<Utc>)>) -> Result<(), String> {
        match (self.activity_cutoff, bounds) {
            (Some(cutoff), Some((lo, hi))) if cutoff < lo || cutoff > hi => Err(format!(
                "activity cutoff {cutoff} lies outside the corpus time range {lo} .. {hi}"
            )),
            _ => Ok(()),
        }
    }
}

/// A dependency dropped because its constraint could not be parsed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedDependency {
    pub package: String,
    pub version: String,
    pub target: String,
    pub constraint: String,
    pub reason: String,
}

/// Counts removed by each filtering rule.
///
/// Releases are counted once, under the first rule that removes them.
/// Dependencies removed together with their release are not counted
/// separately.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input_packages: usize,
    pub input_releases: usize,
    pub input_dependencies: usize,

    pub deps_removed_by_kind: usize,
    pub deps_removed_missing_target: usize,
    pub deps_removed_unparseable_constraint: usize,

    pub releases_removed_invalid_version: usize,
    pub releases_removed_prerelease: usize,
    pub packages_removed_single_release: usize,
    pub releases_removed_single_release: usize,
    pub packages_removed_inactive: usize,
    pub releases_removed_inactive: usize,
    /// Dependencies whose target package was dropped by a package-level rule.
    pub deps_removed_dropped_target: usize,
    pub packages_removed_isolated: usize,
    pub releases_removed_isolated: usize,

    /// Dependencies left after the dependency-level rules, before any
    /// package-level rule ran.
    pub edges_before_package_rules: usize,
    pub output_packages: usize,
    pub output_releases: usize,
    pub output_dependencies: usize,

    pub dropped_constraints: Vec<DroppedDependency>,
}

impl FilterReport {
    pub fn releases_removed(&self) -> usize {
        self.releases_removed_invalid_version
            + self.releases_removed_prerelease
            + self.releases_removed_single_release
            + self.releases_removed_inactive
            + self.releases_removed_isolated
    }
}

/// Applies the filtering rules in order:
///
/// 1. keep only dependency kinds in `keep_dep_kinds`;
/// 2. drop dependencies whose target package is not in the corpus, and
///    dependencies whose constraint cannot be parsed;
/// 3. drop releases with an unparseable version, then pre-releases;
/// 4. drop packages with a single release;
/// 5. drop packages without a release after the activity cutoff;
/// 6. drop isolated packages.
///
/// Dependencies pointing at packages removed by 3–5 are dropped before the
/// isolation test.
pub fn filter(records: &[RawRecord], cfg: &FilterConfig) -> (Vec<RawRecord>, FilterReport) {
    let mut report = FilterReport {
        input_packages: records.iter().map(|r| r.package.as_str()).collect::<HashSet<_>>().len(),
        input_releases: records.len(),
        input_dependencies: records.iter().map(|r| r.dependencies.len()).sum(),
        ..FilterReport::default()
    };

    let corpus_packages: HashSet<String> = records.iter().map(|r| r.package.clone()).collect();
    let mut out: Vec<RawRecord> = Vec::with_capacity(records.len());

    for record in records {
        let mut r = record.clone();
        let before = r.dependencies.len();
        r.dependencies.retain(|d| cfg.keep_dep_kinds.contains(&d.kind));
        report.deps_removed_by_kind += before - r.dependencies.len();

        let before = r.dependencies.len();
        r.dependencies.retain(|d| corpus_packages.contains(&d.target));
        report.deps_removed_missing_target += before - r.dependencies.len();

        let mut kept = Vec::with_capacity(r.dependencies.len());
        for d in r.dependencies.drain(..) {
            match Constraint::parse(&d.constraint) {
                Ok(_) => kept.push(d),
                Err(e) => {
                    log::warn!(
                        "dropping dependency {}@{} -> {} {:?}: {e}",
                        r.package,
                        r.version,
                        d.target,
                        d.constraint
                    );
                    report.dropped_constraints.push(DroppedDependency {
                        package: r.package.clone(),
                        version: r.version.clone(),
                        target: d.target.clone(),
                        constraint: d.constraint.clone(),
                        reason: e.to_string(),
                    });
                    report.deps_removed_unparseable_constraint += 1;
                }
            }
        }
        r.dependencies = kept;
        out.push(r);
    }

    out.retain(|r| match Version::parse(&r.version) {
        Ok(v) => {
            if cfg.exclude_prereleases && v.is_prerelease() {
                report.releases_removed_prerelease += 1;
                false
            } else {
                true
            }
        }
        Err(e) => {
            log::warn!("dropping release {}@{}: {e}", r.package, r.version);
            report.releases_removed_invalid_version += 1;
            false
        }
    });

    report.edges_before_package_rules = out.iter().map(|r| r.dependencies.len()).sum();

    if cfg.drop_single_release_packages {
        let counts = release_counts(&out);
        let doomed: HashSet<&str> = counts.iter().filter(|(_, &n)| n == 1).map(|(p, _)| *p).collect();
        report.packages_removed_single_release = doomed.len();
        let doomed: HashSet<String> = doomed.into_iter().map(str::to_string).collect();
        let before = out.len();
        out.retain(|r| !doomed.contains(&r.package));
        report.releases_removed_single_release = before - out.len();
    }

    if let Some(cutoff) = cfg.activity_cutoff {
        let mut active: HashSet<&str> = HashSet::new();
        let mut all: HashSet<&str> = HashSet::new();
        for r in &out {
            all.insert(&r.package);
            if r.date > cutoff {
                active.insert(&r.package);
            }
        }
        let doomed: HashSet<String> = all.difference(&active).map(|p| p.to_string()).collect();
        report.packages_removed_inactive = doomed.len();
        let before = out.len();
        out.retain(|r| !doomed.contains(&r.package));
        report.releases_removed_inactive = before - out.len();
    }

    let present: HashSet<String> = out.iter().map(|r| r.package.clone()).collect();
    for r in &mut out {
        let before = r.dependencies.len();
        r.dependencies.retain(|d| present.contains(&d.target));
        report.deps_removed_dropped_target += before - r.dependencies.len();
    }

    if cfg.drop_isolated_packages {
        let mut connected: HashSet<&str> = HashSet::new();
        for r in &out {
            for d in &r.dependencies {
                connected.insert(&r.package);
                connected.insert(&d.target);
            }
        }
        let doomed: HashSet<String> = present
            .iter()
            .filter(|p| !connected.contains(p.as_str()))
            .cloned()
            .collect();
        report.packages_removed_isolated = doomed.len();
        let before = out.len();
        out.retain(|r| !doomed.contains(&r.package));
        report.releases_removed_isolated = before - out.len();
    }

    report.output_packages = out.iter().map(|r| r.package.as_str()).collect::<HashSet<_>>().len();
    report.output_releases = out.len();
    report.output_dependencies = out.iter().map(|r| r.dependencies.len()).sum();
    (out, report)
}

fn release_counts(records: &[RawRecord]) -> BTreeMap<&str, usize> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in records {
        *counts.entry(&r.package).or_default() += 1;
    }
    counts.into_iter().collect()
}
