use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use chrono::{DateTime, Utc};

use super::record::RawRecord;
use super::CorpusError;
use crate::semver::{classify, Constraint, ReleaseType, Version};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PackageId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReleaseId(pub u32);

#[derive(Debug, Clone, PartialEq)]
pub struct Dependency {
    pub target: PackageId,
    pub constraint: Constraint,
}

#[derive(Debug, Clone)]
pub struct Release {
    pub id: ReleaseId,
    pub package: PackageId,
    pub version: Version,
    pub date: DateTime<Utc>,
    pub deps: Vec<Dependency>,
    pub release_type: ReleaseType,
    /// Position within the package under the date order.
    pub date_rank: u32,
}

#[derive(Debug, Clone)]
pub struct Package {
    pub name: String,
    /// Release ids of this package; ids are allocated in version order, so
    /// this range is also the version order.
    versions: Range<u32>,
    by_date: Vec<ReleaseId>,
}

/// Immutable, time-indexed view of a filtered corpus.
///
/// Releases of one package are totally ordered by version and by
/// `(date, version)`. All queries are read-only.
#[derive(Debug, Clone)]
pub struct PackageIndex {
    packages: Vec<Package>,
    by_name: HashMap<String, PackageId>,
    releases: Vec<Release>,
    dropped_dependencies: usize,
}

impl PackageIndex {
    /// Builds the index from records that already went through `filter`.
    ///
    /// Dependencies whose constraint does not parse, or whose target is
    /// missing from the records, are dropped and logged.
    pub fn build(records: &[RawRecord]) -> Result<PackageIndex, CorpusError> {
        let mut grouped: BTreeMap<&str, Vec<(Version, &RawRecord)>> = BTreeMap::new();
        for r in records {
            let version = Version::parse(&r.version).map_err(|source| CorpusError::Version {
                package: r.package.clone(),
                source,
            })?;
            grouped.entry(&r.package).or_default().push((version, r));
        }

        let by_name: HashMap<String, PackageId> = grouped
            .keys()
            .enumerate()
            .map(|(i, name)| (name.to_string(), PackageId(i as u32)))
            .collect();

        let mut packages = Vec::with_capacity(grouped.len());
        let mut releases: Vec<Release> = Vec::with_capacity(records.len());
        let mut dropped_dependencies = 0;

        for (p, (name, mut list)) in grouped.into_iter().enumerate() {
            let package = PackageId(p as u32);
            list.sort_by(|a, b| a.0.cmp(&b.0));
            for pair in list.windows(2) {
                if pair[0].0 == pair[1].0 {
                    return Err(CorpusError::DuplicateVersion {
                        package: name.to_string(),
                        first: pair[0].1.version.clone(),
                        second: pair[1].1.version.clone(),
                    });
                }
            }
            let start = releases.len() as u32;
            let mut prev: Option<&Version> = None;
            for (i, (version, raw)) in list.iter().enumerate() {
                let release_type = classify(version, prev).map_err(|source| CorpusError::Version {
                    package: name.to_string(),
                    source,
                })?;
                prev = Some(version);
                let mut deps = Vec::with_capacity(raw.dependencies.len());
                for d in &raw.dependencies {
                    let Some(&target) = by_name.get(&d.target) else {
                        log::warn!("{name}@{}: dependency target {} not in corpus", raw.version, d.target);
                        dropped_dependencies += 1;
                        continue;
                    };
                    match Constraint::parse(&d.constraint) {
                        Ok(constraint) => deps.push(Dependency { target, constraint }),
                        Err(e) => {
                            log::warn!("{name}@{}: {e}", raw.version);
                            dropped_dependencies += 1;
                        }
                    }
                }
                releases.push(Release {
                    id: ReleaseId(start + i as u32),
                    package,
                    version: version.clone(),
                    date: raw.date,
                    deps,
                    release_type,
                    date_rank: 0,
                });
            }
            let end = releases.len() as u32;
            let mut by_date: Vec<ReleaseId> = (start..end).map(ReleaseId).collect();
            // Ids follow version order, so the id breaks date ties by version.
            by_date.sort_by_key(|id| (releases[id.0 as usize].date, *id));
            for (rank, id) in by_date.iter().enumerate() {
                releases[id.0 as usize].date_rank = rank as u32;
            }
            packages.push(Package {
                name: name.to_string(),
                versions: start..end,
                by_date,
            });
        }

        Ok(PackageIndex {
            packages,
            by_name,
            releases,
            dropped_dependencies,
        })
    }

    pub fn package_count(&self) -> usize {
        self.packages.len()
    }

    pub fn release_count(&self) -> usize {
        self.releases.len()
    }

    pub fn dependency_count(&self) -> usize {
        self.releases.iter().map(|r| r.deps.len()).sum()
    }

    /// Dependencies discarded while building the index.
    pub fn dropped_dependencies(&self) -> usize {
        self.dropped_dependencies
    }

    pub fn package_ids(&self) -> impl Iterator<Item = PackageId> {
        (0..self.packages.len() as u32).map(PackageId)
    }

    pub fn package_id(&self, name: &str) -> Option<PackageId> {
        self.by_name.get(name).copied()
    }

    pub fn package(&self, id: PackageId) -> Option<&Package> {
        self.packages.get(id.0 as usize)
    }

    pub fn package_name(&self, id: PackageId) -> &str {
        &self.packages[id.0 as usize].name
    }

    pub fn release(&self, id: ReleaseId) -> &Release {
        &self.releases[id.0 as usize]
    }

    pub fn releases(&self) -> &[Release] {
        &self.releases
    }

    /// Looks up a release by package name and version text.
    pub fn find(&self, package: &str, version: &str) -> Option<&Release> {
        let pid = self.package_id(package)?;
        let version = Version::parse(version).ok()?;
        self.by_version(pid)
            .binary_search_by(|r| r.version.cmp(&version))
            .ok()
            .map(|i| &self.by_version(pid)[i])
    }

    /// Releases of a package in ascending version order.
    pub fn by_version(&self, p: PackageId) -> &[Release] {
        let range = &self.packages[p.0 as usize].versions;
        &self.releases[range.start as usize..range.end as usize]
    }

    /// Release ids of a package in ascending `(date, version)` order.
    pub fn by_date(&self, p: PackageId) -> &[ReleaseId] {
        &self.packages[p.0 as usize].by_date
    }

    /// Releases of `p` published at or before `t`, in version order.
    pub fn available(&self, p: PackageId, t: DateTime<Utc>) -> Vec<ReleaseId> {
        self.by_version(p)
            .iter()
            .filter(|r| r.date <= t)
            .map(|r| r.id)
            .collect()
    }

    /// Number of releases of `p` published at or before `t`.
    pub fn available_count(&self, p: PackageId, t: DateTime<Utc>) -> usize {
        self.by_date(p).partition_point(|id| self.release(*id).date <= t)
    }

    /// Releases of `p` published in the half-open window `(after, until]`,
    /// in date order.
    pub fn released_between(&self, p: PackageId, after: DateTime<Utc>, until: DateTime<Utc>) -> &[ReleaseId] {
        let list = self.by_date(p);
        let lo = list.partition_point(|id| self.release(*id).date <= after);
        let hi = list.partition_point(|id| self.release(*id).date <= until);
        &list[lo..hi.max(lo)]
    }

    fn version_offset(&self, r: &Release) -> u32 {
        r.id.0 - self.packages[r.package.0 as usize].versions.start
    }

    pub fn prev_v(&self, r: &Release) -> Option<&Release> {
        (self.version_offset(r) > 0).then(|| self.release(ReleaseId(r.id.0 - 1)))
    }

    pub fn next_v(&self, r: &Release) -> Option<&Release> {
        let end = self.packages[r.package.0 as usize].versions.end;
        (r.id.0 + 1 < end).then(|| self.release(ReleaseId(r.id.0 + 1)))
    }

    pub fn prev_t(&self, r: &Release) -> Option<&Release> {
        let list = self.by_date(r.package);
        let rank = r.date_rank as usize;
        (rank > 0).then(|| self.release(list[rank - 1]))
    }

    pub fn next_t(&self, r: &Release) -> Option<&Release> {
        self.by_date(r.package)
            .get(r.date_rank as usize + 1)
            .map(|id| self.release(*id))
    }

    /// Earliest and latest release dates in the corpus.
    pub fn bounds(&self) -> Option<(DateTime<Utc>, DateTime<Utc>)> {
        let lo = self.releases.iter().map(|r| r.date).min()?;
        let hi = self.releases.iter().map(|r| r.date).max()?;
        Some((lo, hi))
    }

    pub fn describe(&self, r: &Release) -> String {
        format!("{}@{}", self.package_name(r.package), r.version)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    fn names(idx: &PackageIndex, ids: &[ReleaseId]) -> Vec<String> {
        ids.iter().map(|id| idx.release(*id).version.to_string()).collect()
    }

    #[test]
    fn fixture_orders() {
        let idx = fixture::index();
        let p2 = idx.package_id("p2").unwrap();
        let r110 = idx.find("p2", "1.1.0").unwrap();
        assert_eq!(idx.prev_v(r110).unwrap().version.to_string(), "1.0.2");
        assert_eq!(idx.prev_t(r110).unwrap().version.to_string(), "1.0.1");
        assert_eq!(idx.next_v(r110).unwrap().version.to_string(), "2.0.0");
        assert_eq!(idx.next_t(r110).unwrap().version.to_string(), "1.0.2");
        let by_date: Vec<String> = idx
            .by_date(p2)
            .iter()
            .map(|id| idx.release(*id).version.to_string())
            .collect();
        assert_eq!(by_date, ["1.0.0", "1.0.1", "1.1.0", "1.0.2", "2.0.0"]);
        let types: Vec<ReleaseType> = idx.by_version(p2).iter().map(|r| r.release_type).collect();
        assert_eq!(
            types,
            [
                ReleaseType::Initial,
                ReleaseType::Patch,
                ReleaseType::Patch,
                ReleaseType::Minor,
                ReleaseType::Major
            ]
        );
    }

    #[test]
    fn fixture_availability() {
        let idx = fixture::index();
        let p2 = idx.package_id("p2").unwrap();
        assert_eq!(names(&idx, &idx.available(p2, fixture::t(4))), ["1.0.0", "1.0.1"]);
        assert!(idx.available(p2, fixture::t(0)).is_empty());
        assert_eq!(idx.available_count(p2, fixture::t(8)), 4);
        let window = idx.released_between(p2, fixture::t(1), fixture::t(9));
        assert_eq!(names(&idx, window), ["1.0.1", "1.1.0", "1.0.2", "2.0.0"]);
        assert!(idx.released_between(p2, fixture::t(9), fixture::t(3)).is_empty());
    }

    #[test]
    fn date_ties_break_by_version() {
        let date = fixture::t(1);
        let mk = |v: &str| RawRecord {
            package: "x".into(),
            version: v.into(),
            date,
            dependencies: vec![],
        };
        let idx = PackageIndex::build(&[mk("2.0.0"), mk("1.0.0"), mk("1.5.0")]).unwrap();
        let x = idx.package_id("x").unwrap();
        let order: Vec<String> = idx
            .by_date(x)
            .iter()
            .map(|id| idx.release(*id).version.to_string())
            .collect();
        assert_eq!(order, ["1.0.0", "1.5.0", "2.0.0"]);
    }

    #[test]
    fn rejects_unparseable_and_duplicate_versions() {
        let date = fixture::t(1);
        let mk = |v: &str| RawRecord {
            package: "x".into(),
            version: v.into(),
            date,
            dependencies: vec![],
        };
        assert!(matches!(
            PackageIndex::build(&[mk("1.0")]),
            Err(CorpusError::Version { .. })
        ));
        assert!(matches!(
            PackageIndex::build(&[mk("1.0.0"), mk("v1.0.0")]),
            Err(CorpusError::DuplicateVersion { .. })
        ));
    }
}
