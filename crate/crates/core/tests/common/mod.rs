//! Seeded corpus generators shared by the integration tests.

#![allow(dead_code)]

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use laggraph::corpus::{DepKind, RawDependency, RawRecord};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2014, 1, 1, 0, 0, 0).unwrap()
}

#[derive(Debug, Clone)]
pub struct Shape {
    pub max_packages: usize,
    pub max_releases: usize,
    pub max_deps: usize,
    /// Chance that a release is a `-alpha`/`-beta` pre-release.
    pub prerelease: f64,
    /// Chance that a release back-ports to an older line.
    pub backport: f64,
    pub span_days: i64,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_packages: 20,
            max_releases: 50,
            max_deps: 3,
            prerelease: 0.05,
            backport: 0.1,
            span_days: 900,
        }
    }
}

/// Version strings of one package in publication order.
fn version_history(rng: &mut ChaCha8Rng, n: usize, shape: &Shape) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    let (mut major, mut minor, mut patch) = (rng.gen_range(0..2u64), rng.gen_range(0..3u64), 0u64);
    let mut released: Vec<(u64, u64, u64)> = Vec::new();
    while out.len() < n {
        let candidate = if !released.is_empty() && rng.gen_bool(shape.backport) {
            let &(a, b, c) = released.choose(rng).unwrap();
            (a, b, c + 1 + rng.gen_range(0..2))
        } else {
            match rng.gen_range(0..10) {
                0 => (major + 1, 0, 0),
                1..=3 => (major, minor + 1, 0),
                _ => (major, minor, patch + 1),
            }
        };
        let pre = rng.gen_bool(shape.prerelease);
        let text = if pre {
            let tag = ["alpha", "beta"].choose(rng).unwrap();
            format!("{}.{}.{}-{tag}", candidate.0, candidate.1, candidate.2)
        } else {
            format!("{}.{}.{}", candidate.0, candidate.1, candidate.2)
        };
        if !seen.insert(text.clone()) {
            continue;
        }
        if !pre {
            released.push(candidate);
            if candidate > (major, minor, patch) {
                (major, minor, patch) = candidate;
            }
        }
        out.push(text);
    }
    out
}

fn pick_version(rng: &mut ChaCha8Rng, versions: &[String]) -> String {
    if versions.is_empty() || rng.gen_bool(0.15) {
        format!(
            "{}.{}.{}",
            rng.gen_range(0..3),
            rng.gen_range(0..4),
            rng.gen_range(0..4)
        )
    } else {
        versions.choose(rng).unwrap().clone()
    }
}

/// A constraint in the grammar both the parser and the oracle accept.
pub fn constraint(rng: &mut ChaCha8Rng, versions: &[String]) -> String {
    let simple = |rng: &mut ChaCha8Rng| {
        let v = pick_version(rng, versions);
        let op = ["", "=", "^", "^", "^", "~", "~", ">=", ">", "<", "<="]
            .choose(rng)
            .unwrap();
        format!("{op}{v}")
    };
    match rng.gen_range(0..20) {
        0 => "*".to_string(),
        1 => {
            let (a, b) = (pick_version(rng, versions), pick_version(rng, versions));
            format!(">={a} <{b}")
        }
        2 => format!("{} || {}", simple(rng), simple(rng)),
        _ => simple(rng),
    }
}

/// A random corpus: every package has 1 ..= `max_releases` releases and
/// each release up to `max_deps` runtime dependencies on other packages.
pub fn corpus(seed: u64, shape: &Shape) -> Vec<RawRecord> {
    let mut rng = rng(seed);
    let packages = rng.gen_range(2..=shape.max_packages);
    let names: Vec<String> = (0..packages).map(|i| format!("pkg{i:02}")).collect();
    let histories: Vec<Vec<String>> = (0..packages)
        .map(|_| {
            let n = rng.gen_range(1..=shape.max_releases);
            version_history(&mut rng, n, shape)
        })
        .collect();
    let mut records = Vec::new();
    for (p, history) in histories.iter().enumerate() {
        let mut day = rng.gen_range(0..shape.span_days / 3);
        for version in history {
            // Several releases may share a timestamp.
            day += rng.gen_range(0..=(2 * shape.span_days / history.len().max(1) as i64).max(1));
            let date = start() + Duration::days(day.min(shape.span_days)) + Duration::hours(12 * rng.gen_range(0..2));
            let n_deps = rng.gen_range(0..=shape.max_deps);
            let mut dependencies: Vec<RawDependency> = Vec::new();
            for _ in 0..n_deps {
                let t = rng.gen_range(0..packages);
                if t == p || dependencies.iter().any(|d| d.target == names[t]) {
                    continue;
                }
                dependencies.push(RawDependency {
                    target: names[t].clone(),
                    constraint: constraint(&mut rng, &histories[t]),
                    kind: DepKind::Runtime,
                });
            }
            records.push(RawRecord {
                package: names[p].clone(),
                version: version.clone(),
                date,
                dependencies,
            });
        }
    }
    records
}

/// `n` random time points around the corpus' time range.
pub fn times(seed: u64, records: &[RawRecord], n: usize) -> Vec<DateTime<Utc>> {
    let mut rng = rng(seed ^ 0x5eed);
    let lo = records.iter().map(|r| r.date).min().unwrap() - Duration::days(2);
    let hi = records.iter().map(|r| r.date).max().unwrap() + Duration::days(30);
    let span = (hi - lo).num_hours();
    let mut out: Vec<_> = (0..n).map(|_| lo + Duration::hours(rng.gen_range(0..=span))).collect();
    // Exact release dates exercise the inclusive availability bound.
    if let Some(r) = records.choose(&mut rng) {
        out[0] = r.date;
    }
    out
}

/// Large corpus for the determinism and scale run: `releases` releases
/// with about `deps_per_release` dependencies each, targets skewed towards
/// low package numbers.
pub fn large(seed: u64, releases: usize, deps_per_release: usize) -> Vec<RawRecord> {
    let mut rng = rng(seed);
    let packages = releases / 10;
    let names: Vec<String> = (0..packages).map(|i| format!("p{i:05}")).collect();
    let shape = Shape {
        prerelease: 0.0,
        backport: 0.05,
        ..Shape::default()
    };
    let mut histories = Vec::with_capacity(packages);
    for _ in 0..packages {
        histories.push(version_history(&mut rng, 10, &shape));
    }
    let mut records = Vec::with_capacity(releases);
    let span = 365 * 6;
    for (p, history) in histories.iter().enumerate() {
        let mut day = rng.gen_range(0..span / 2);
        for version in history {
            day += rng.gen_range(1..60);
            let mut dependencies: Vec<RawDependency> = Vec::with_capacity(deps_per_release);
            while dependencies.len() < deps_per_release {
                // Squaring a uniform draw favours popular, low-numbered targets.
                let u: f64 = rng.gen();
                let t = ((u * u) * packages as f64) as usize;
                if t == p || dependencies.iter().any(|d| d.target == names[t]) {
                    continue;
                }
                dependencies.push(RawDependency {
                    target: names[t].clone(),
                    constraint: constraint(&mut rng, &histories[t]),
                    kind: DepKind::Runtime,
                });
            }
            records.push(RawRecord {
                package: names[p].clone(),
                version: version.clone(),
                date: start() + Duration::days(day),
                dependencies,
            });
        }
    }
    records
}

/// Expected counts for [`planted`].
#[derive(Debug, Clone, Copy)]
pub struct Planted {
    pub input_releases: usize,
    pub prereleases: usize,
    pub single_release_packages: usize,
    pub stale_packages: usize,
    pub stale_releases: usize,
    pub isolated_packages: usize,
    pub isolated_releases: usize,
    pub dev_deps: usize,
    pub missing_target_deps: usize,
    pub orphaned_deps: usize,
    pub output_packages: usize,
    pub output_releases: usize,
    pub output_deps: usize,
}

pub fn cutoff() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2017, 1, 1, 0, 0, 0).unwrap()
}

/// A 1,000-release corpus with known numbers of pre-releases,
/// single-release packages, stale packages and isolated packages.
///
/// * 40 core packages, each with 13 releases and 2 pre-releases; core
///   package `i` depends on core package `i + 1` (mod 40); every stable core
///   release also has a dev dependency, and 25 of them depend on a package
///   that does not exist;
/// * 50 single-release packages depending on a core package;
/// * 30 stale packages with 5 releases before the cutoff, depending on a
///   core package;
/// * 40 isolated packages with 4 releases and no dependencies;
/// * 10 packages with 4 releases whose only dependency is a stale package,
///   so they become isolated once the stale packages go.
pub fn planted() -> (Vec<RawRecord>, Planted) {
    let mut records = Vec::new();
    let mut rng = rng(1000);
    let after = |day: i64| cutoff() + Duration::days(day);
    let before = |day: i64| cutoff() - Duration::days(400 - day);
    let dep = |target: String, constraint: &str, kind: DepKind| RawDependency {
        target,
        constraint: constraint.to_string(),
        kind,
    };
    let mut missing = 0;
    for i in 0..40 {
        let next = format!("core{:02}", (i + 1) % 40);
        for j in 0..13 {
            let mut deps = vec![
                dep(next.clone(), "^1.0.0", DepKind::Runtime),
                dep("mocha".into(), "^3.0.0", DepKind::Dev),
            ];
            if missing < 25 && rng.gen_bool(0.1) {
                deps.push(dep(format!("ghost{missing}"), "*", DepKind::Runtime));
                missing += 1;
            }
            records.push(RawRecord {
                package: format!("core{i:02}"),
                version: format!("1.0.{j}"),
                date: after(j * 10),
                dependencies: deps,
            });
        }
        for (k, tag) in ["alpha", "beta"].iter().enumerate() {
            records.push(RawRecord {
                package: format!("core{i:02}"),
                version: format!("1.1.0-{tag}"),
                date: after(200 + k as i64),
                dependencies: vec![dep(next.clone(), "^1.0.0", DepKind::Runtime)],
            });
        }
    }
    assert_eq!(missing, 25, "seed plants all missing targets");
    for i in 0..50 {
        records.push(RawRecord {
            package: format!("single{i:02}"),
            version: "1.0.0".into(),
            date: after(5),
            dependencies: vec![dep(format!("core{:02}", i % 40), "^1.0.0", DepKind::Runtime)],
        });
    }
    for i in 0..30 {
        for j in 0..5 {
            records.push(RawRecord {
                package: format!("stale{i:02}"),
                version: format!("0.{j}.0"),
                date: before(j * 20),
                dependencies: vec![dep(format!("core{:02}", i % 40), "^1.0.0", DepKind::Runtime)],
            });
        }
    }
    for i in 0..40 {
        for j in 0..4 {
            records.push(RawRecord {
                package: format!("lonely{i:02}"),
                version: format!("2.{j}.0"),
                date: after(j * 15),
                dependencies: Vec::new(),
            });
        }
    }
    for i in 0..10 {
        for j in 0..4 {
            records.push(RawRecord {
                package: format!("orphan{i:02}"),
                version: format!("1.{j}.0"),
                date: after(j * 15),
                dependencies: vec![dep(format!("stale{i:02}"), "^0.1.0", DepKind::Runtime)],
            });
        }
    }
    records.shuffle(&mut rng);
    let expected = Planted {
        input_releases: 1000,
        prereleases: 80,
        single_release_packages: 50,
        stale_packages: 30,
        stale_releases: 150,
        isolated_packages: 50,
        isolated_releases: 200,
        dev_deps: 520,
        missing_target_deps: 25,
        orphaned_deps: 40,
        output_packages: 40,
        output_releases: 520,
        output_deps: 520,
    };
    (records, expected)
}
