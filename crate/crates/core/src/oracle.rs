//! Brute-force reference implementations for differential checking.
//!
//! Nothing here calls into `semver` or `lag`. Versions are plain keys,
//! constraints are expanded into explicit version intervals, and lag is
//! computed by enumerating every release of the target. The grammar is
//! deliberately small: full `x.y.z` versions with at most one alphabetic
//! pre-release tag, the operators `= < <= > >= ~ ^`, `*`, space
//! conjunction and `||`. Anything else is reported as unsupported.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::Bound;

use chrono::{DateTime, Duration, Utc};
use serde::Serialize;

use crate::corpus::{PackageIndex, RawRecord};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    /// Pre-release tag. The empty tag sorts below every real tag.
    Pre(String),
    Release,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Key {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
    pub tag: Tag,
}

impl Key {
    pub fn parse(text: &str) -> Option<Key> {
        let (core, tag) = match text.split_once('-') {
            Some((core, tag)) if !tag.is_empty() && tag.bytes().all(|b| b.is_ascii_alphabetic()) => {
                (core, Tag::Pre(tag.to_string()))
            }
            Some(_) => return None,
            None => (text, Tag::Release),
        };
        let nums: Vec<u64> = core
            .split('.')
            .map(|p| {
                if p.is_empty() || !p.bytes().all(|b| b.is_ascii_digit()) || (p.len() > 1 && p.starts_with('0')) {
                    None
                } else {
                    p.parse().ok()
                }
            })
            .collect::<Option<_>>()?;
        match nums[..] {
            [major, minor, patch] => Some(Key {
                major,
                minor,
                patch,
                tag,
            }),
            _ => None,
        }
    }

    fn floor_of(major: u64, minor: u64, patch: u64) -> Key {
        Key {
            major,
            minor,
            patch,
            tag: Tag::Pre(String::new()),
        }
    }

    fn is_pre(&self) -> bool {
        matches!(self.tag, Tag::Pre(_))
    }

    fn triple(&self) -> (u64, u64, u64) {
        (self.major, self.minor, self.patch)
    }
}

#[derive(Debug, Clone)]
pub struct Interval {
    pub lo: Bound<Key>,
    pub hi: Bound<Key>,
}

impl Interval {
    fn everything() -> Self {
        Interval {
            lo: Bound::Unbounded,
            hi: Bound::Unbounded,
        }
    }

    fn contains(&self, k: &Key) -> bool {
        let above = match &self.lo {
            Bound::Unbounded => true,
            Bound::Included(lo) => k >= lo,
            Bound::Excluded(lo) => k > lo,
        };
        let below = match &self.hi {
            Bound::Unbounded => true,
            Bound::Included(hi) => k <= hi,
            Bound::Excluded(hi) => k < hi,
        };
        above && below
    }
}

/// One conjunct: a list of intervals that must all contain the version,
/// plus the pre-release triples it names.
#[derive(Debug, Clone)]
pub struct Conjunct {
    pub intervals: Vec<Interval>,
    pub named_pre: Vec<(u64, u64, u64)>,
}

#[derive(Debug, Clone)]
pub struct OracleConstraint {
    pub conjuncts: Vec<Conjunct>,
}

impl OracleConstraint {
    pub fn parse(text: &str) -> Option<OracleConstraint> {
        let conjuncts = text
            .split("||")
            .map(|part| {
                let words: Vec<&str> = part.split_whitespace().collect();
                if words.is_empty() {
                    return None;
                }
                let mut c = Conjunct {
                    intervals: Vec::new(),
                    named_pre: Vec::new(),
                };
                for w in words {
                    let (interval, key) = expand(w)?;
                    if let Some(k) = key.filter(Key::is_pre) {
                        c.named_pre.push(k.triple());
                    }
                    c.intervals.push(interval);
                }
                Some(c)
            })
            .collect::<Option<Vec<_>>>()?;
        Some(OracleConstraint { conjuncts })
    }

    pub fn accepts(&self, k: &Key) -> bool {
        self.conjuncts
            .iter()
            .any(|c| c.intervals.iter().all(|i| i.contains(k)) && (!k.is_pre() || c.named_pre.contains(&k.triple())))
    }
}

fn expand(word: &str) -> Option<(Interval, Option<Key>)> {
    if word == "*" {
        return Some((Interval::everything(), None));
    }
    let ops = [">=", "<=", ">", "<", "=", "~", "^"];
    let (op, rest) = ops
        .iter()
        .find_map(|op| word.strip_prefix(op).map(|rest| (*op, rest)))
        .unwrap_or(("=", word));
    let k = Key::parse(rest)?;
    let (major, minor, patch) = k.triple();
    let interval = match op {
        "=" => Interval {
            lo: Bound::Included(k.clone()),
            hi: Bound::Included(k.clone()),
        },
        ">=" => Interval {
            lo: Bound::Included(k.clone()),
            hi: Bound::Unbounded,
        },
        ">" => Interval {
            lo: Bound::Excluded(k.clone()),
            hi: Bound::Unbounded,
        },
        "<=" => Interval {
            lo: Bound::Unbounded,
            hi: Bound::Included(k.clone()),
        },
        "<" => Interval {
            lo: Bound::Unbounded,
            hi: Bound::Excluded(k.clone()),
        },
        "~" => Interval {
            lo: Bound::Included(k.clone()),
            hi: Bound::Excluded(Key::floor_of(major, minor + 1, 0)),
        },
        "^" => {
            let ceiling = if major > 0 {
                Key::floor_of(major + 1, 0, 0)
            } else if minor > 0 {
                Key::floor_of(0, minor + 1, 0)
            } else {
                Key::floor_of(0, 0, patch + 1)
            };
            Interval {
                lo: Bound::Included(k.clone()),
                hi: Bound::Excluded(ceiling),
            }
        }
        _ => unreachable!(),
    };
    Some((interval, Some(k)))
}

/// What the brute-force definition says about one dependency at one time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    /// Missed version strings, sorted.
    pub missed: Vec<String>,
    pub lag: Duration,
}

/// Releases grouped by package, straight from the records.
#[derive(Debug, Clone, Default)]
pub struct OracleCorpus {
    packages: HashMap<String, Vec<(Key, String, DateTime<Utc>)>>,
    unsupported: HashMap<String, bool>,
}

impl OracleCorpus {
    pub fn new(records: &[RawRecord]) -> Self {
        let mut corpus = OracleCorpus::default();
        for r in records {
            let bad = corpus.unsupported.entry(r.package.clone()).or_insert(false);
            match Key::parse(&r.version) {
                Some(k) => corpus
                    .packages
                    .entry(r.package.clone())
                    .or_default()
                    .push((k, r.version.clone(), r.date)),
                None => *bad = true,
            }
        }
        corpus
    }

    /// Evaluates `constraint` on `target` at `t`, optionally loosened.
    /// `loosen` is 0 (none), 1 (same major.minor) or 2 (same major).
    pub fn verdict(&self, target: &str, constraint: &str, t: DateTime<Utc>, loosen: u8) -> Option<OracleVerdict> {
        if self.unsupported.get(target).copied().unwrap_or(true) {
            return None;
        }
        let c = OracleConstraint::parse(constraint)?;
        let all = self.packages.get(target).map(Vec::as_slice).unwrap_or_default();
        let available: Vec<&(Key, String, DateTime<Utc>)> = all.iter().filter(|(_, _, d)| *d <= t).collect();
        let base: Vec<&Key> = available
            .iter()
            .filter(|(k, _, _)| c.accepts(k))
            .map(|(k, _, _)| k)
            .collect();
        let compatible = |cand: &Key, anchor: &Key| match loosen {
            1 => cand.major == anchor.major && cand.minor == anchor.minor,
            2 => cand.major == anchor.major,
            _ => false,
        };
        let installable: Vec<&Key> = available
            .iter()
            .map(|(k, _, _)| k)
            .filter(|k| base.contains(k) || base.iter().any(|b| b.cmp(k) == Ordering::Less && compatible(k, b)))
            .collect();
        let ceiling = installable.iter().max();
        let mut missed: Vec<(&String, DateTime<Utc>)> = available
            .iter()
            .filter(|(k, _, _)| ceiling.is_none_or(|m| k > *m))
            .map(|(_, raw, d)| (raw, *d))
            .collect();
        let lag = missed
            .iter()
            .map(|(_, d)| *d)
            .min()
            .map_or(Duration::zero(), |first| t - first);
        missed.sort();
        Some(OracleVerdict {
            missed: missed.into_iter().map(|(raw, _)| raw.clone()).collect(),
            lag,
        })
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct OracleReport {
    pub checked: usize,
    pub skipped: usize,
    pub mismatches: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares `dep_lag` and `missed` from the index with the oracle for every
/// dependency of every release at each time in `times`. When `times` is
/// empty, each release is checked at its own date and its successor's.
pub fn differential_check(records: &[RawRecord], idx: &PackageIndex, times: &[DateTime<Utc>]) -> OracleReport {
    let corpus = OracleCorpus::new(records);
    let mut report = OracleReport::default();
    for r in idx.releases() {
        let points: Vec<DateTime<Utc>> = if times.is_empty() {
            std::iter::once(r.date).chain(idx.next_t(r).map(|n| n.date)).collect()
        } else {
            times.to_vec()
        };
        for d in &r.deps {
            let target = idx.package_name(d.target);
            for &t in &points {
                let Some(expected) = corpus.verdict(target, d.constraint.raw(), t, 0) else {
                    report.skipped += 1;
                    continue;
                };
                report.checked += 1;
                let lag = crate::lag::dep_lag(d, t, idx).expect("index-built dependency");
                let mut missed: Vec<String> = crate::lag::missed(d, t, idx)
                    .expect("index-built dependency")
                    .into_iter()
                    .map(|id| idx.release(id).version.raw().to_string())
                    .collect();
                missed.sort();
                if lag != expected.lag || missed != expected.missed {
                    report.mismatches.push(format!(
                        "{} -> {target} {:?} at {t}: got lag {}s missed {missed:?}, oracle lag {}s missed {:?}",
                        idx.describe(r),
                        d.constraint.raw(),
                        lag.num_seconds(),
                        expected.lag.num_seconds(),
                        expected.missed
                    ));
                }
            }
        }
    }
    report
}
