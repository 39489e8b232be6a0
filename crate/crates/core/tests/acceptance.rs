//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration as Elapsed, Instant};

use chrono::Duration;

use laggraph::corpus::{self, filter, FilterConfig, PackageIndex};
use laggraph::fixture::{self, t};
use laggraph::lag::{self, Evaluator};
use laggraph::oracle::{self, Key, OracleConstraint};
use laggraph::report::{self, MonthlySeries};
use laggraph::semver::{Constraint, Version};
use laggraph::whatif::{LoosenLevel, Loosening};

use rand::seq::SliceRandom;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_laggraph")
}

fn cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin())
        .args(args)
        .output()
        .map_err(|e| format!("spawning laggraph: {e}"))?;
    check(out.status.success(), || {
        format!("laggraph {args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Criterion 1: Table I rows on the running example, through the library and the CLI.
fn table1() -> Outcome {
    let started = Instant::now();
    let idx = fixture::index();
    let r1 = idx.find("p1", "1.0.0").unwrap();
    let d = &r1.deps[0];
    for row in fixture::TABLE {
        let at = t(row.time);
        let res = Evaluator::new(&idx).resolve(d, at).unwrap();
        let max = res.selected.map(|id| idx.release(id).version.to_string());
        let missed: Vec<String> = lag::missed(d, at, &idx)
            .unwrap()
            .into_iter()
            .map(|id| idx.release(id).version.to_string())
            .collect();
        let lag = lag::dep_lag(d, at, &idx).unwrap();
        check(
            max.as_deref() == Some(row.max_installable) && missed == row.missed && lag == Duration::days(row.lag_days),
            || format!("T{}: max {max:?} missed {missed:?} lag {lag}", row.time),
        )?;
    }
    let dir = tempfile::tempdir().unwrap();
    cli(&["example", "--out", path(dir.path())])?;
    let traced = dir.path().join("trace.csv");
    let times: Vec<String> = fixture::TABLE
        .iter()
        .map(|row| corpus::format_date(&t(row.time)))
        .collect();
    let mut args = vec![
        "trace",
        "--in",
        path(dir.path()),
        "--release",
        "p1@1.0.0",
        "--out",
        path(&traced),
        "--at",
    ];
    args.extend(times.iter().map(String::as_str));
    cli(&args)?;
    let got = std::fs::read(&traced).unwrap();
    let want = std::fs::read(dir.path().join("expected_table1.csv")).unwrap();
    check(got == want, || "CLI trace differs from expected_table1.csv".into())?;
    let elapsed = started.elapsed();
    check(elapsed < Elapsed::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("4/4 rows exact, CLI trace identical, {elapsed:.2?}"))
}

/// Criterion 2: `^1.0.0` on the same fixture: lag 0 at T9, one day at T10.
fn caret() -> Outcome {
    let idx = fixture::index();
    let d = laggraph::corpus::Dependency {
        target: idx.package_id("p2").unwrap(),
        constraint: Constraint::parse("^1.0.0").unwrap(),
    };
    let at9 = lag::dep_lag(&d, t(9), &idx).unwrap();
    let at10 = lag::dep_lag(&d, t(10), &idx).unwrap();
    check(at9 == Duration::zero() && at10 == Duration::days(1), || {
        format!("lag at T9 {at9}, at T10 {at10}")
    })?;
    Ok("lag(T9) = 0, lag(T10) = 1 day".into())
}

fn corpora() -> impl Iterator<Item = (u64, Vec<corpus::RawRecord>)> {
    let shape = common::Shape::default();
    (0..200u64).map(move |seed| (seed, common::corpus(seed, &shape)))
}

/// Criterion 3: dep_lag and missed equal the brute-force oracle on 200 corpora.
fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let (mut checked, mut skipped, mut releases) = (0, 0, 0);
    for (seed, records) in corpora() {
        let idx = PackageIndex::build(&records).map_err(|e| format!("seed {seed}: {e}"))?;
        releases += idx.release_count();
        let times = common::times(seed, &records, 10);
        let r = oracle::differential_check(&records, &idx, &times);
        check(r.passed(), || format!("seed {seed}: {}", r.mismatches[0]))?;
        checked += r.checked;
        skipped += r.skipped;
    }
    let elapsed = started.elapsed();
    check(skipped == 0, || {
        format!("{skipped} evaluations outside the oracle grammar")
    })?;
    check(elapsed < Elapsed::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "200 corpora, {releases} releases, {checked} evaluations agree, {elapsed:.2?}"
    ))
}

fn lattice() -> Vec<String> {
    let mut out = Vec::new();
    for a in 0..=4 {
        for b in 0..=4 {
            for c in 0..=4 {
                out.push(format!("{a}.{b}.{c}"));
                out.push(format!("{a}.{b}.{c}-alpha"));
            }
        }
    }
    out
}

/// Criterion 4: satisfies versus interval expansion over the version lattice.
fn semver_differential() -> Outcome {
    let versions = lattice();
    let mut rng = common::rng(4);
    let mut constraints: Vec<String> = Vec::new();
    for v in &versions {
        if v.starts_with("0.") {
            constraints.push(format!("^{v}"));
        }
    }
    while constraints.len() < 1000 {
        let one = |rng: &mut rand_chacha::ChaCha8Rng| {
            let v = versions.choose(rng).unwrap();
            let op = ["", "=", "^", "~", ">=", ">", "<", "<="].choose(rng).unwrap();
            format!("{op}{v}")
        };
        let c = match rng.gen_range(0..6) {
            0 => format!("{} {}", one(&mut rng), one(&mut rng)),
            1 => format!("{} || {}", one(&mut rng), one(&mut rng)),
            2 => "*".to_string(),
            _ => one(&mut rng),
        };
        constraints.push(c);
    }
    let zero_major = constraints.iter().filter(|c| c.starts_with("^0.")).count();
    let mut pairs = 0;
    for c in &constraints {
        let ours = Constraint::parse(c).map_err(|e| format!("{c:?}: {e}"))?;
        let theirs = OracleConstraint::parse(c).ok_or_else(|| format!("oracle rejects {c:?}"))?;
        for v in &versions {
            let a = ours.satisfied_by(&Version::parse(v).unwrap());
            let b = theirs.accepts(&Key::parse(v).unwrap());
            check(a == b, || format!("{v} against {c:?}: satisfies {a}, oracle {b}"))?;
            pairs += 1;
        }
    }
    Ok(format!(
        "{} constraints ({zero_major} of the form ^0.x.y) x {} versions = {pairs} pairs agree",
        constraints.len(),
        versions.len()
    ))
}

fn metric_csv(series: &MonthlySeries, metric: &str, rename: &str) -> Vec<u8> {
    let mut out = MonthlySeries::default();
    for r in series.metric(metric) {
        let mut row = r.clone();
        row.metric = rename.to_string();
        out.rows.push(row);
    }
    out.to_csv()
}

/// Criterion 5: Loosened lagging proportions never exceed the stricter ones, and level
/// NONE is the baseline.
fn whatif_dominance() -> Outcome {
    let levels: Vec<Loosening> = LoosenLevel::ALL.iter().map(|l| Loosening::from(*l)).collect();
    let mut points = 0;
    for (seed, records) in corpora() {
        let idx = PackageIndex::build(&records).unwrap();
        let series = report::rq6_whatif(&idx, &levels);
        for row in series.metric("releases_lagging") {
            let at = |name: &str| series.value(row.month, name).unwrap();
            let (none, patch, minor) = (
                at("releases_lagging@none"),
                at("releases_lagging@patch"),
                at("releases_lagging@minor"),
            );
            check(minor <= patch && patch <= none && none <= row.value, || {
                format!(
                    "seed {seed} {}: minor {minor} patch {patch} none {none} base {}",
                    row.month, row.value
                )
            })?;
            points += 1;
        }
        let rq1 = report::rq1_proportions(&idx, &report::ReportConfig::default());
        let base = metric_csv(&rq1, "releases_lagging", "releases_lagging");
        check(
            metric_csv(&series, "releases_lagging@none", "releases_lagging") == base
                && metric_csv(&series, "releases_lagging", "releases_lagging") == base,
            || format!("seed {seed}: level none differs from the rq1 release series"),
        )?;
    }
    Ok(format!(
        "{points} monthly points ordered minor <= patch <= none, none byte-identical to rq1"
    ))
}

/// Criterion 6: FilterReport on the planted 1,000-release corpus.
fn filter_accounting() -> Outcome {
    let (records, want) = common::planted();
    let cfg = FilterConfig {
        activity_cutoff: Some(common::cutoff()),
        ..FilterConfig::default()
    };
    let (kept, got) = filter(&records, &cfg);
    let pairs = [
        ("input releases", got.input_releases, want.input_releases),
        ("pre-releases", got.releases_removed_prerelease, want.prereleases),
        (
            "single-release packages",
            got.packages_removed_single_release,
            want.single_release_packages,
        ),
        (
            "single-release releases",
            got.releases_removed_single_release,
            want.single_release_packages,
        ),
        ("stale packages", got.packages_removed_inactive, want.stale_packages),
        ("stale releases", got.releases_removed_inactive, want.stale_releases),
        (
            "isolated packages",
            got.packages_removed_isolated,
            want.isolated_packages,
        ),
        (
            "isolated releases",
            got.releases_removed_isolated,
            want.isolated_releases,
        ),
        ("dev dependencies", got.deps_removed_by_kind, want.dev_deps),
        (
            "missing-target dependencies",
            got.deps_removed_missing_target,
            want.missing_target_deps,
        ),
        (
            "dropped-target dependencies",
            got.deps_removed_dropped_target,
            want.orphaned_deps,
        ),
        ("output packages", got.output_packages, want.output_packages),
        ("output releases", got.output_releases, want.output_releases),
        ("output dependencies", got.output_dependencies, want.output_deps),
        ("invalid versions", got.releases_removed_invalid_version, 0),
    ];
    for (name, g, w) in pairs {
        check(g == w, || format!("{name}: got {g}, planted {w}"))?;
    }
    check(kept.len() == want.output_releases, || {
        "kept records disagree with report".into()
    })?;
    check(
        got.input_releases - got.releases_removed() == got.output_releases,
        || "removal counts do not sum".into(),
    )?;
    Ok(format!("{} planted counts match exactly", pairs.len()))
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

/// Criterion 7: Two full CLI runs over 100,000 releases / 500,000 dependencies.
fn determinism_and_scale() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus");
    std::fs::create_dir(&input).unwrap();
    let records = common::large(7, 100_000, 5);
    let deps: usize = records.iter().map(|r| r.dependencies.len()).sum();
    check(records.len() == 100_000 && deps == 500_000, || {
        format!("generated {} releases / {deps} dependencies", records.len())
    })?;
    corpus::write_csv(&input, &records).map_err(|e| e.to_string())?;
    drop(records);
    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let started = Instant::now();
        cli(&["analyze", "all", "--in", path(&input), "--out", path(&out)])?;
        let elapsed = started.elapsed();
        check(elapsed < Elapsed::from_secs(120), || {
            format!("run {run} took {elapsed:?}")
        })?;
        runs.push((elapsed, read_dir_sorted(&out)));
    }
    let files = runs[0].1.len();
    check(runs[0].1 == runs[1].1, || "the two runs differ".into())?;
    check(files == 12, || format!("expected 12 output files, got {files}"))?;
    Ok(format!(
        "{files} files byte-identical, runs took {:.1?} and {:.1?}",
        runs[0].0, runs[1].0
    ))
}

/// Criterion 8: A dump in the neutral schema is ingested and every series emitted.
fn neutral_schema() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut records = common::corpus(8, &common::Shape::default());
    for (i, r) in records.iter_mut().enumerate() {
        if i % 7 == 0 {
            r.dependencies.push(corpus::RawDependency {
                target: "left-pad".into(),
                constraint: "git+https://example.org/left-pad.git".into(),
                kind: corpus::DepKind::Dev,
            });
        }
    }
    let (jsonl_part, csv_part) = records.split_at(records.len() / 2);
    corpus::write_jsonl(&dir.path().join("part1.jsonl"), jsonl_part).map_err(|e| e.to_string())?;
    let csv_dir = dir.path().join("part2");
    std::fs::create_dir(&csv_dir).unwrap();
    corpus::write_csv(&csv_dir, csv_part).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let jsonl = dir.path().join("part1.jsonl");
    cli(&["validate", "--in", path(&jsonl), path(&csv_dir)])?;
    cli(&[
        "analyze",
        "all",
        "--apply-filter",
        "--in",
        path(&jsonl),
        path(&csv_dir),
        "--out",
        path(&out),
    ])?;
    let files = read_dir_sorted(&out);
    for (name, bytes) in &files {
        let text = String::from_utf8_lossy(bytes);
        if name.ends_with(".csv") {
            check(text.lines().count() > 1, || format!("{name} has no rows"))?;
        }
    }
    let run: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("run.json")).unwrap()).unwrap();
    check(run["inputs"].as_array().map_or(0, |a| a.len()) == 3, || {
        "run.json digests".into()
    })?;
    Ok(format!(
        "{} releases from JSONL + CSV ingested, {} output files with rows",
        records.len(),
        files.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("Table I golden test", table1),
        ("caret example", caret),
        ("oracle equivalence", oracle_equivalence),
        ("semver differential suite", semver_differential),
        ("what-if dominance", whatif_dominance),
        ("filter accounting", filter_accounting),
        ("determinism and scale", determinism_and_scale),
        ("neutral-schema ingestion", neutral_schema),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
