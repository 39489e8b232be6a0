//! Raw release records and their on-disk formats.
//!
//! Two equivalent layouts are supported:
//!
//! * a pair of CSV files, `releases.csv` (`package,version,date`) and
//!   `dependencies.csv` (`package,version,target,constraint,kind`);
//! * a JSON-lines file with one release object per line, dependencies
//!   embedded as an array.
//!
//! Dates are RFC 3339 and stored at second resolution in UTC.

use std::collections::HashMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Timelike, Utc};
use serde::{Deserialize, Serialize};

use super::CorpusError;

pub const RELEASES_FILE: &str = "releases.csv";
pub const DEPENDENCIES_FILE: &str = "dependencies.csv";
const RELEASES_HEADER: [&str; 3] = ["package", "version", "date"];
const DEPENDENCIES_HEADER: [&str; 5] = ["package", "version", "target", "constraint", "kind"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepKind {
    Runtime,
    Dev,
    Other,
}

impl DepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DepKind::Runtime => "runtime",
            DepKind::Dev => "dev",
            DepKind::Other => "other",
        }
    }
}

impl FromStr for DepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "runtime" => Ok(DepKind::Runtime),
            "dev" => Ok(DepKind::Dev),
            "other" => Ok(DepKind::Other),
            other => Err(format!(
                "unknown dependency kind {other:?} (expected runtime, dev or other)"
            )),
        }
    }
}

impl fmt::Display for DepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawDependency {
    pub target: String,
    pub constraint: String,
    pub kind: DepKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub package: String,
    pub version: String,
    #[serde(with = "rfc3339")]
    pub date: DateTime<Utc>,
    #[serde(default)]
    pub dependencies: Vec<RawDependency>,
}

/// Where a record came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub path: PathBuf,
    pub line: u64,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.path.display(), self.line)
    }
}

pub fn parse_date(text: &str) -> Result<DateTime<Utc>, String> {
    DateTime::parse_from_rfc3339(text.trim())
        .map(|d| {
            let utc = d.with_timezone(&Utc);
            utc.with_nanosecond(0).unwrap_or(utc)
        })
        .map_err(|e| format!("invalid RFC 3339 date {text:?}: {e}"))
}

pub fn format_date(date: &DateTime<Utc>) -> String {
    date.to_rfc3339_opts(SecondsFormat::Secs, true)
}

mod rfc3339 {
    use chrono::{DateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(date: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_date(date))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_date(&text).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Default)]
struct Loader {
    records: Vec<RawRecord>,
    locations: Vec<Location>,
    keys: HashMap<(String, String), usize>,
    pending_deps: Vec<(String, String, RawDependency, Location)>,
}

impl Loader {
    fn push(&mut self, record: RawRecord, at: Location) -> Result<(), CorpusError> {
        let key = (record.package.clone(), record.version.clone());
        if let Some(&first) = self.keys.get(&key) {
            return Err(CorpusError::Duplicate {
                package: key.0,
                version: key.1,
                first: self.locations[first].clone(),
                second: at,
            });
        }
        self.keys.insert(key, self.records.len());
        self.records.push(record);
        self.locations.push(at);
        Ok(())
    }

    fn finish(mut self) -> Result<Vec<RawRecord>, CorpusError> {
        for (package, version, dep, at) in std::mem::take(&mut self.pending_deps) {
            let Some(&i) = self.keys.get(&(package.clone(), version.clone())) else {
                return Err(CorpusError::Schema {
                    at,
                    message: format!("dependency row for unknown release {package}@{version}"),
                });
            };
            self.records[i].dependencies.push(dep);
        }
        Ok(self.records)
    }
}

/// Loads records from files or directories.
///
/// A directory contributes its `releases.csv`, `dependencies.csv` and any
/// `*.jsonl` files. Plain files are recognised by extension (`.jsonl`) or
/// by their CSV header. Duplicate `(package, version)` pairs are rejected
/// across all inputs.
pub fn load<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<RawRecord>, CorpusError> {
    let files = expand_inputs(paths)?;
    if files.is_empty() {
        return Err(CorpusError::NoInput);
    }
    let mut loader = Loader::default();
    let mut dependency_files = Vec::new();
    for file in files {
        match detect(&file)? {
            Format::Jsonl => load_jsonl(&file, &mut loader)?,
            Format::Releases => load_releases_csv(&file, &mut loader)?,
            Format::Dependencies => dependency_files.push(file),
        }
    }
    for file in dependency_files {
        load_dependencies_csv(&file, &mut loader)?;
    }
    loader.finish()
}

/// Lists the concrete files `load` would read, in reading order.
pub fn expand_inputs<P: AsRef<Path>>(paths: &[P]) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    for path in paths {
        let path = path.as_ref();
        if path.is_dir() {
            let mut found = Vec::new();
            let entries = std::fs::read_dir(path).map_err(|e| CorpusError::io(path, e))?;
            for entry in entries {
                let entry = entry.map_err(|e| CorpusError::io(path, e))?;
                let p = entry.path();
                let name = entry.file_name().to_string_lossy().into_owned();
                if name == RELEASES_FILE || name == DEPENDENCIES_FILE || p.extension().is_some_and(|e| e == "jsonl") {
                    found.push(p);
                }
            }
            if found.is_empty() {
                return Err(CorpusError::Schema {
                    at: Location {
                        path: path.to_path_buf(),
                        line: 0,
                    },
                    message: format!("directory contains neither {RELEASES_FILE} nor *.jsonl files"),
                });
            }
            found.sort();
            files.extend(found);
        } else if path.exists() {
            files.push(path.to_path_buf());
        } else {
            return Err(CorpusError::io(
                path,
                std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
            ));
        }
    }
    Ok(files)
}

enum Format {
    Jsonl,
    Releases,
    Dependencies,
}

fn detect(path: &Path) -> Result<Format, CorpusError> {
    if path.extension().is_some_and(|e| e == "jsonl" || e == "json") {
        return Ok(Format::Jsonl);
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| CorpusError::csv(path, e))?;
    let headers = reader.headers().map_err(|e| CorpusError::csv(path, e))?;
    let names: Vec<&str> = headers.iter().map(str::trim).collect();
    if names == RELEASES_HEADER {
        Ok(Format::Releases)
    } else if names == DEPENDENCIES_HEADER {
        Ok(Format::Dependencies)
    } else {
        Err(CorpusError::Schema {
            at: Location {
                path: path.to_path_buf(),
                line: 1,
            },
            message: format!(
                "unrecognised header {:?}; expected {:?} or {:?}",
                names.join(","),
                RELEASES_HEADER.join(","),
                DEPENDENCIES_HEADER.join(",")
            ),
        })
    }
}

fn csv_rows(
    path: &Path,
    width: usize,
    mut each: impl FnMut(&csv::StringRecord, Location) -> Result<(), CorpusError>,
) -> Result<(), CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| CorpusError::csv(path, e))?;
    for row in reader.records() {
        let row = row.map_err(|e| CorpusError::csv(path, e))?;
        let at = Location {
            path: path.to_path_buf(),
            line: row.position().map_or(0, |p| p.line()),
        };
        if row.len() != width {
            return Err(CorpusError::Schema {
                at,
                message: format!("expected {width} columns, found {}", row.len()),
            });
        }
        if let Some(col) = (0..width).find(|&i| row[i].trim().is_empty() && !(width == 5 && i == 3)) {
            return Err(CorpusError::Schema {
                at,
                message: format!("empty value in column {}", col + 1),
            });
        }
        each(&row, at)?;
    }
    Ok(())
}

fn load_releases_csv(path: &Path, loader: &mut Loader) -> Result<(), CorpusError> {
    csv_rows(path, RELEASES_HEADER.len(), |row, at| {
        let date = parse_date(&row[2]).map_err(|message| CorpusError::Schema {
            at: at.clone(),
            message,
        })?;
        let record = RawRecord {
            package: row[0].trim().to_string(),
            version: row[1].trim().to_string(),
            date,
            dependencies: Vec::new(),
        };
        loader.push(record, at)
    })
}

fn load_dependencies_csv(path: &Path, loader: &mut Loader) -> Result<(), CorpusError> {
    csv_rows(path, DEPENDENCIES_HEADER.len(), |row, at| {
        let kind = row[4].trim().parse().map_err(|message| CorpusError::Schema {
            at: at.clone(),
            message,
        })?;
        let dep = RawDependency {
            target: row[2].trim().to_string(),
            constraint: row[3].to_string(),
            kind,
        };
        loader
            .pending_deps
            .push((row[0].trim().to_string(), row[1].trim().to_string(), dep, at));
        Ok(())
    })
}

fn load_jsonl(path: &Path, loader: &mut Loader) -> Result<(), CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        let at = Location {
            path: path.to_path_buf(),
            line: i as u64 + 1,
        };
        if line.trim().is_empty() {
            continue;
        }
        let record: RawRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Schema {
            at: at.clone(),
            message: e.to_string(),
        })?;
        loader.push(record, at)?;
    }
    Ok(())
}

/// Writes `releases.csv` and `dependencies.csv` into `dir`.
pub fn write_csv(dir: &Path, records: &[RawRecord]) -> Result<(), CorpusError> {
    std::fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    let releases = dir.join(RELEASES_FILE);
    let mut w = csv::Writer::from_path(&releases).map_err(|e| CorpusError::csv(&releases, e))?;
    w.write_record(RELEASES_HEADER)
        .map_err(|e| CorpusError::csv(&releases, e))?;
    for r in records {
        w.write_record([r.package.as_str(), r.version.as_str(), &format_date(&r.date)])
            .map_err(|e| CorpusError::csv(&releases, e))?;
    }
    w.flush().map_err(|e| CorpusError::io(&releases, e))?;

    let deps = dir.join(DEPENDENCIES_FILE);
    let mut w = csv::Writer::from_path(&deps).map_err(|e| CorpusError::csv(&deps, e))?;
    w.write_record(DEPENDENCIES_HEADER)
        .map_err(|e| CorpusError::csv(&deps, e))?;
    for r in records {
        for d in &r.dependencies {
            w.write_record([
                r.package.as_str(),
                r.version.as_str(),
                d.target.as_str(),
                d.constraint.as_str(),
                d.kind.as_str(),
            ])
            .map_err(|e| CorpusError::csv(&deps, e))?;
        }
    }
    w.flush().map_err(|e| CorpusError::io(&deps, e))
}

pub fn write_jsonl(path: &Path, records: &[RawRecord]) -> Result<(), CorpusError> {
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| CorpusError::Schema {
            at: Location {
                path: path.to_path_buf(),
                line: 0,
            },
            message: e.to_string(),
        })?;
        out.write_all(b"\n").map_err(|e| CorpusError::io(path, e))?;
    }
    out.flush().map_err(|e| CorpusError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_two_rows() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            RELEASES_FILE,
            "package,version,date\np1,1.0.0,2017-01-02T00:00:00Z\np2,1.0.0,2017-01-02T00:00:00Z\n",
        );
        write(
            dir.path(),
            DEPENDENCIES_FILE,
            "package,version,target,constraint,kind\np1,1.0.0,p2,~1.0.0,runtime\n",
        );
        let records = load(&[dir.path()]).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].dependencies.len(), 1);
        assert_eq!(records[0].dependencies[0].constraint, "~1.0.0");
        assert!(records[1].dependencies.is_empty());
    }

    #[test]
    fn missing_date_is_reported_at_its_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            RELEASES_FILE,
            "package,version,date\np1,1.0.0,2017-01-02T00:00:00Z\np1,1.0.1\n",
        );
        let err = load(&[&p]).unwrap_err();
        match err {
            CorpusError::Schema { at, .. } => assert_eq!(at.line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicates_name_both_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            RELEASES_FILE,
            "package,version,date\np2,1.0.0,2017-01-02T00:00:00Z\np2,1.0.0,2017-01-03T00:00:00Z\n",
        );
        let err = load(&[&p]).unwrap_err();
        match &err {
            CorpusError::Duplicate { first, second, .. } => {
                assert_eq!(first.line, 2);
                assert_eq!(second.line, 3);
            }
            other => panic!("unexpected {other}"),
        }
        assert!(err.to_string().contains("p2@1.0.0"));
    }

    #[test]
    fn dependency_for_unknown_release_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            RELEASES_FILE,
            "package,version,date\np1,1.0.0,2017-01-02T00:00:00Z\n",
        );
        write(
            dir.path(),
            DEPENDENCIES_FILE,
            "package,version,target,constraint,kind\np1,9.9.9,p2,*,runtime\n",
        );
        assert!(matches!(load(&[dir.path()]), Err(CorpusError::Schema { .. })));
    }

    #[test]
    fn bad_kind_and_bad_header_are_schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            RELEASES_FILE,
            "package,version,date\np1,1.0.0,2017-01-02T00:00:00Z\n",
        );
        write(
            dir.path(),
            DEPENDENCIES_FILE,
            "package,version,target,constraint,kind\np1,1.0.0,p2,*,peer\n",
        );
        assert!(matches!(load(&[dir.path()]), Err(CorpusError::Schema { .. })));
        let other = tempfile::tempdir().unwrap();
        let p = write(other.path(), "x.csv", "name,ver\n");
        assert!(matches!(load(&[&p]), Err(CorpusError::Schema { .. })));
    }

    #[test]
    fn empty_constraint_is_allowed() {
        let dir = tempfile::tempdir().unwrap();
        write(
            dir.path(),
            RELEASES_FILE,
            "package,version,date\np1,1.0.0,2017-01-02T00:00:00Z\n",
        );
        write(
            dir.path(),
            DEPENDENCIES_FILE,
            "package,version,target,constraint,kind\np1,1.0.0,p2,,runtime\n",
        );
        let records = load(&[dir.path()]).unwrap();
        assert_eq!(records[0].dependencies[0].constraint, "");
    }

    #[test]
    fn csv_and_jsonl_agree() {
        let dir = tempfile::tempdir().unwrap();
        let date = parse_date("2017-05-01T10:20:30Z").unwrap();
        let records = vec![
            RawRecord {
                package: "a".into(),
                version: "1.0.0".into(),
                date,
                dependencies: vec![RawDependency {
                    target: "b".into(),
                    constraint: ">= 1.0.0, <2".into(),
                    kind: DepKind::Dev,
                }],
            },
            RawRecord {
                package: "b".into(),
                version: "1.0.0".into(),
                date,
                dependencies: vec![],
            },
        ];
        let csv_dir = dir.path().join("csv");
        write_csv(&csv_dir, &records).unwrap();
        let jsonl = dir.path().join("all.jsonl");
        write_jsonl(&jsonl, &records).unwrap();
        assert_eq!(load(&[&csv_dir]).unwrap(), records);
        assert_eq!(load(&[&jsonl]).unwrap(), records);
    }

    #[test]
    fn dates_are_normalised_to_utc_seconds() {
        let d = parse_date("2017-01-01T02:00:00.750+02:00").unwrap();
        assert_eq!(format_date(&d), "2017-01-01T00:00:00Z");
    }
}
