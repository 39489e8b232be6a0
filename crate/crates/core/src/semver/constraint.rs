//! Dependency constraint grammar and satisfaction.
//!
//! Accepted forms: exact versions, the comparators `= < <= > >=`, x-ranges
//! (`1.2.x`, `1.*`, `1`), tilde (`~`, `~>`), caret (`^`), hyphen ranges
//! (`1.2.3 - 2.0.0`), space-separated conjunctions and `||` unions. `*`,
//! `x`, the empty string and `latest` match every non-prerelease version.
//!
//! Sugared forms are lowered to plain comparator sets the same way npm's
//! `semver` package does, including the `^0.x` rules.

use std::fmt;
use std::str::FromStr;

use super::version::{parse_numeric, split_suffixes, Identifier, Version};
use super::SemverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Op {
    fn symbol(self) -> &'static str {
        match self {
            Op::Eq => "=",
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
        }
    }
}

/// A single `op version` test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comparator {
    pub op: Op,
    pub version: Version,
    /// True when the pre-release tag of `version` was written by the user,
    /// as opposed to the synthetic `-0` used for exclusive upper bounds.
    pub explicit_prerelease: bool,
}

impl Comparator {
    fn new(op: Op, version: Version) -> Self {
        let explicit_prerelease = version.is_prerelease();
        Comparator {
            op,
            version,
            explicit_prerelease,
        }
    }

    /// `< major.minor.patch-0`, which excludes every pre-release of that triple.
    fn below(major: u64, minor: u64, patch: u64) -> Self {
        Comparator {
            op: Op::Lt,
            version: Version::new(major, minor, patch).with_prerelease(vec![Identifier::Numeric(0)]),
            explicit_prerelease: false,
        }
    }

    fn at_least(major: u64, minor: u64, patch: u64) -> Self {
        Comparator::new(Op::Ge, Version::new(major, minor, patch))
    }

    pub fn test(&self, v: &Version) -> bool {
        let ord = v.cmp(&self.version);
        match self.op {
            Op::Eq => ord.is_eq(),
            Op::Lt => ord.is_lt(),
            Op::Le => ord.is_le(),
            Op::Gt => ord.is_gt(),
            Op::Ge => ord.is_ge(),
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.op.symbol(), self.version)
    }
}

/// Conjunction of comparators. An empty set matches every version.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ComparatorSet {
    pub comparators: Vec<Comparator>,
}

impl ComparatorSet {
    fn any() -> Self {
        ComparatorSet::default()
    }

    fn none() -> Self {
        ComparatorSet {
            comparators: vec![Comparator::below(0, 0, 0)],
        }
    }

    pub fn matches(&self, v: &Version) -> bool {
        if !self.comparators.iter().all(|c| c.test(v)) {
            return false;
        }
        if !v.is_prerelease() {
            return true;
        }
        self.comparators
            .iter()
            .any(|c| c.explicit_prerelease && c.version.triple() == v.triple())
    }
}

impl fmt::Display for ComparatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.comparators.is_empty() {
            return f.write_str("*");
        }
        for (i, c) in self.comparators.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// A parsed dependency constraint: a union of comparator sets.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub sets: Vec<ComparatorSet>,
    raw: String,
}

impl PartialEq for Constraint {
    fn eq(&self, other: &Self) -> bool {
        self.sets == other.sets
    }
}

impl Eq for Constraint {}

impl Constraint {
    pub fn parse(text: &str) -> Result<Self, SemverError> {
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "latest" {
            return Ok(Constraint {
                sets: vec![ComparatorSet::any()],
                raw: text.to_string(),
            });
        }
        let sets = trimmed
            .split("||")
            .map(|part| parse_set(part.trim(), text))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Constraint {
            sets,
            raw: text.to_string(),
        })
    }

    pub fn any() -> Self {
        Constraint {
            sets: vec![ComparatorSet::any()],
            raw: "*".to_string(),
        }
    }

    pub fn is_any(&self) -> bool {
        self.sets.iter().any(|s| s.comparators.is_empty())
    }

    pub fn satisfied_by(&self, v: &Version) -> bool {
        self.sets.iter().any(|set| set.matches(v))
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    /// The lowered comparator form, e.g. `>=1.0.0 <1.1.0-0`.
    pub fn normalized(&self) -> String {
        self.sets
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" || ")
    }
}

impl FromStr for Constraint {
    type Err = SemverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Constraint::parse(s)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// A possibly partial version such as `1`, `1.2`, `1.x` or `1.2.3-rc.1`.
#[derive(Debug, Clone)]
struct Partial {
    major: Option<u64>,
    minor: Option<u64>,
    patch: Option<u64>,
    prerelease: Vec<Identifier>,
}

impl Partial {
    fn parse(text: &str, whole: &str) -> Result<Self, SemverError> {
        let body = text.strip_prefix('v').unwrap_or(text);
        if body.is_empty() {
            return Err(SemverError::invalid_constraint(whole, "missing version"));
        }
        let (core, prerelease, _build) =
            split_suffixes(body, whole).map_err(|e| SemverError::invalid_constraint(whole, &e.to_string()))?;
        let pieces: Vec<&str> = core.split('.').collect();
        if pieces.len() > 3 {
            return Err(SemverError::invalid_constraint(whole, "too many version components"));
        }
        let mut components = [None; 3];
        let mut wildcard_seen = false;
        for (slot, piece) in components.iter_mut().zip(&pieces) {
            if matches!(*piece, "x" | "X" | "*") {
                wildcard_seen = true;
                continue;
            }
            let n = parse_numeric(piece, whole, "version")
                .map_err(|e| SemverError::invalid_constraint(whole, &e.to_string()))?;
            // Components after a wildcard are ignored, as npm does.
            if !wildcard_seen {
                *slot = Some(n);
            }
        }
        let [major, minor, patch] = components;
        if !prerelease.is_empty() && patch.is_none() {
            return Err(SemverError::invalid_constraint(
                whole,
                "pre-release tag on a partial version",
            ));
        }
        Ok(Partial {
            major,
            minor,
            patch,
            prerelease,
        })
    }

    fn full(&self) -> Option<Version> {
        match (self.major, self.minor, self.patch) {
            (Some(a), Some(b), Some(c)) => Some(Version::new(a, b, c).with_prerelease(self.prerelease.clone())),
            _ => None,
        }
    }
}

fn parse_set(part: &str, whole: &str) -> Result<ComparatorSet, SemverError> {
    if part.is_empty() {
        return Ok(ComparatorSet::any());
    }
    let tokens = tokenize(part, whole)?;

    if let Some(pos) = tokens.iter().position(|t| t == "-") {
        if tokens.len() != 3 || pos != 1 {
            return Err(SemverError::invalid_constraint(whole, "malformed hyphen range"));
        }
        let from = Partial::parse(&tokens[0], whole)?;
        let to = Partial::parse(&tokens[2], whole)?;
        return Ok(hyphen(&from, &to));
    }

    let mut comparators = Vec::new();
    for token in &tokens {
        let (sugar, rest) = split_operator(token);
        let partial = Partial::parse(rest.trim_start_matches('='), whole)?;
        lower(sugar, &partial, &mut comparators);
    }
    Ok(ComparatorSet { comparators })
}

/// Splits on whitespace, gluing a bare operator to the version after it.
fn tokenize(part: &str, whole: &str) -> Result<Vec<String>, SemverError> {
    let mut tokens = Vec::new();
    let mut pending: Option<&str> = None;
    for word in part.split_whitespace() {
        match pending.take() {
            Some(op) => tokens.push(format!("{op}{word}")),
            None if is_bare_operator(word) => pending = Some(word),
            None => tokens.push(word.to_string()),
        }
    }
    if pending.is_some() {
        return Err(SemverError::invalid_constraint(whole, "operator without a version"));
    }
    Ok(tokens)
}

fn is_bare_operator(word: &str) -> bool {
    matches!(word, "<" | "<=" | ">" | ">=" | "=" | "~" | "~>" | "^")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sugar {
    Plain(Option<Op>),
    Tilde,
    Caret,
}

fn split_operator(token: &str) -> (Sugar, &str) {
    const PREFIXES: [(&str, Sugar); 8] = [
        (">=", Sugar::Plain(Some(Op::Ge))),
        ("<=", Sugar::Plain(Some(Op::Le))),
        ("~>", Sugar::Tilde),
        (">", Sugar::Plain(Some(Op::Gt))),
        ("<", Sugar::Plain(Some(Op::Lt))),
        ("=", Sugar::Plain(Some(Op::Eq))),
        ("~", Sugar::Tilde),
        ("^", Sugar::Caret),
    ];
    for (prefix, sugar) in PREFIXES {
        if let Some(rest) = token.strip_prefix(prefix) {
            return (sugar, rest);
        }
    }
    (Sugar::Plain(None), token)
}

fn lower(sugar: Sugar, p: &Partial, out: &mut Vec<Comparator>) {
    match sugar {
        Sugar::Tilde => lower_tilde(p, out),
        Sugar::Caret => lower_caret(p, out),
        Sugar::Plain(op) => lower_plain(op, p, out),
    }
}

fn lower_tilde(p: &Partial, out: &mut Vec<Comparator>) {
    match (p.major, p.minor) {
        (None, _) => {}
        (Some(m), None) => {
            out.push(Comparator::at_least(m, 0, 0));
            out.push(Comparator::below(m + 1, 0, 0));
        }
        (Some(m), Some(n)) => {
            let floor = p.full().unwrap_or_else(|| Version::new(m, n, 0));
            out.push(Comparator::new(Op::Ge, floor));
            out.push(Comparator::below(m, n + 1, 0));
        }
    }
}

fn lower_caret(p: &Partial, out: &mut Vec<Comparator>) {
    match (p.major, p.minor, p.patch) {
        (None, _, _) => {}
        (Some(m), None, _) => {
            out.push(Comparator::at_least(m, 0, 0));
            out.push(Comparator::below(m + 1, 0, 0));
        }
        (Some(m), Some(n), None) => {
            out.push(Comparator::at_least(m, n, 0));
            out.push(if m == 0 {
                Comparator::below(0, n + 1, 0)
            } else {
                Comparator::below(m + 1, 0, 0)
            });
        }
        (Some(m), Some(n), Some(q)) => {
            out.push(Comparator::new(Op::Ge, p.full().expect("all components present")));
            out.push(match (m, n) {
                (0, 0) => Comparator::below(0, 0, q + 1),
                (0, _) => Comparator::below(0, n + 1, 0),
                _ => Comparator::below(m + 1, 0, 0),
            });
        }
    }
}

fn lower_plain(op: Option<Op>, p: &Partial, out: &mut Vec<Comparator>) {
    if let Some(full) = p.full() {
        out.push(Comparator::new(op.unwrap_or(Op::Eq), full));
        return;
    }
    let Some(major) = p.major else {
        // `*` with an operator: `>*` and `<*` match nothing, the rest anything.
        if matches!(op, Some(Op::Gt | Op::Lt)) {
            out.extend(ComparatorSet::none().comparators);
        }
        return;
    };
    match (op, p.minor) {
        (None | Some(Op::Eq), None) => {
            out.push(Comparator::at_least(major, 0, 0));
            out.push(Comparator::below(major + 1, 0, 0));
        }
        (None | Some(Op::Eq), Some(minor)) => {
            out.push(Comparator::at_least(major, minor, 0));
            out.push(Comparator::below(major, minor + 1, 0));
        }
        (Some(Op::Gt), None) => out.push(Comparator::at_least(major + 1, 0, 0)),
        (Some(Op::Gt), Some(minor)) => out.push(Comparator::at_least(major, minor + 1, 0)),
        (Some(Op::Ge), minor) => out.push(Comparator::at_least(major, minor.unwrap_or(0), 0)),
        (Some(Op::Lt), minor) => out.push(Comparator::below(major, minor.unwrap_or(0), 0)),
        (Some(Op::Le), None) => out.push(Comparator::below(major + 1, 0, 0)),
        (Some(Op::Le), Some(minor)) => out.push(Comparator::below(major, minor + 1, 0)),
    }
}

fn hyphen(from: &Partial, to: &Partial) -> ComparatorSet {
    let mut comparators = Vec::new();
    if let Some(major) = from.major {
        let floor = from
            .full()
            .unwrap_or_else(|| Version::new(major, from.minor.unwrap_or(0), 0));
        comparators.push(Comparator::new(Op::Ge, floor));
    }
    match (to.major, to.minor, to.full()) {
        (None, _, _) => {}
        (_, _, Some(full)) => comparators.push(Comparator::new(Op::Le, full)),
        (Some(m), None, None) => comparators.push(Comparator::below(m + 1, 0, 0)),
        (Some(m), Some(n), None) => comparators.push(Comparator::below(m, n + 1, 0)),
    }
    ComparatorSet { comparators }
}
