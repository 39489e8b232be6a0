use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use super::SemverError;

/// One dot-separated pre-release identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Identifier {
    Numeric(u64),
    Alphanumeric(String),
}

impl Identifier {
    pub(crate) fn parse(text: &str, whole: &str) -> Result<Self, SemverError> {
        if text.is_empty() {
            return Err(SemverError::invalid_version(whole, "empty pre-release identifier"));
        }
        if text.bytes().all(|b| b.is_ascii_digit()) {
            if text.len() > 1 && text.starts_with('0') {
                return Err(SemverError::invalid_version(
                    whole,
                    "numeric pre-release identifier has a leading zero",
                ));
            }
            return text
                .parse()
                .map(Identifier::Numeric)
                .map_err(|_| SemverError::invalid_version(whole, "pre-release number overflows"));
        }
        if !text.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-') {
            return Err(SemverError::invalid_version(
                whole,
                "pre-release identifier contains invalid characters",
            ));
        }
        Ok(Identifier::Alphanumeric(text.to_string()))
    }
}

impl Ord for Identifier {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Identifier::Numeric(a), Identifier::Numeric(b)) => a.cmp(b),
            (Identifier::Numeric(_), Identifier::Alphanumeric(_)) => Ordering::Less,
            (Identifier::Alphanumeric(_), Identifier::Numeric(_)) => Ordering::Greater,
            (Identifier::Alphanumeric(a), Identifier::Alphanumeric(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Identifier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identifier::Numeric(n) => write!(f, "{n}"),
            Identifier::Alphanumeric(s) => f.write_str(s),
        }
    }
}

/// A semantic version `major.minor.patch[-prerelease][+build]`.
///
/// Equality, hashing and ordering use npm precedence: the numeric triple,
/// then the pre-release identifiers. Build metadata and the original text
/// are kept for display only.
#[derive(Debug, Clone)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
    pub prerelease: Vec<Identifier>,
    pub build: Vec<String>,
    raw: String,
}

impl Version {
    pub fn new(major: u64, minor: u64, patch: u64) -> Self {
        let raw = format!("{major}.{minor}.{patch}");
        Version {
            major,
            minor,
            patch,
            prerelease: Vec::new(),
            build: Vec::new(),
            raw,
        }
    }

    pub(crate) fn with_prerelease(mut self, prerelease: Vec<Identifier>) -> Self {
        self.prerelease = prerelease;
        self.raw = self.to_string();
        self
    }

    /// Parses a full version. A single leading `v` and surrounding
    /// whitespace are accepted.
    pub fn parse(text: &str) -> Result<Self, SemverError> {
        let trimmed = text.trim();
        let body = trimmed.strip_prefix('v').unwrap_or(trimmed);
        let (core, prerelease, build) = split_suffixes(body, text)?;

        let mut parts = core.split('.');
        let mut next = |name: &str| -> Result<u64, SemverError> {
            let part = parts
                .next()
                .ok_or_else(|| SemverError::invalid_version(text, &format!("missing {name} component")))?;
            parse_numeric(part, text, name)
        };
        let major = next("major")?;
        let minor = next("minor")?;
        let patch = next("patch")?;
        if parts.next().is_some() {
            return Err(SemverError::invalid_version(text, "too many components"));
        }

        Ok(Version {
            major,
            minor,
            patch,
            prerelease,
            build,
            raw: text.to_string(),
        })
    }

    pub fn is_prerelease(&self) -> bool {
        !self.prerelease.is_empty()
    }

    pub fn triple(&self) -> (u64, u64, u64) {
        (self.major, self.minor, self.patch)
    }

    /// The text this version was parsed from.
    pub fn raw(&self) -> &str {
        &self.raw
    }
}

/// Splits `core[-pre][+build]`, parsing the pre-release and build parts.
pub(crate) fn split_suffixes<'a>(
    body: &'a str,
    whole: &str,
) -> Result<(&'a str, Vec<Identifier>, Vec<String>), SemverError> {
    let (rest, build) = match body.split_once('+') {
        Some((rest, build)) => {
            let ids: Vec<String> = build.split('.').map(str::to_string).collect();
            if ids
                .iter()
                .any(|id| id.is_empty() || !id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-'))
            {
                return Err(SemverError::invalid_version(whole, "invalid build metadata"));
            }
            (rest, ids)
        }
        None => (body, Vec::new()),
    };
    let (core, prerelease) = match rest.split_once('-') {
        Some((core, pre)) => {
            let ids = pre
                .split('.')
                .map(|id| Identifier::parse(id, whole))
                .collect::<Result<Vec<_>, _>>()?;
            (core, ids)
        }
        None => (rest, Vec::new()),
    };
    Ok((core, prerelease, build))
}

pub(crate) fn parse_numeric(part: &str, whole: &str, name: &str) -> Result<u64, SemverError> {
    if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(SemverError::invalid_version(
            whole,
            &format!("{name} component is not a number"),
        ));
    }
    if part.len() > 1 && part.starts_with('0') {
        return Err(SemverError::invalid_version(
            whole,
            &format!("{name} component has a leading zero"),
        ));
    }
    part.parse()
        .map_err(|_| SemverError::invalid_version(whole, &format!("{name} component overflows")))
}

impl FromStr for Version {
    type Err = SemverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Version::parse(s)
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Version {}

impl Hash for Version {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.triple().hash(state);
        self.prerelease.hash(state);
    }
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        self.triple().cmp(&other.triple()).then_with(|| {
            match (self.prerelease.is_empty(), other.prerelease.is_empty()) {
                (true, true) => Ordering::Equal,
                (true, false) => Ordering::Greater,
                (false, true) => Ordering::Less,
                (false, false) => self.prerelease.cmp(&other.prerelease),
            }
        })
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)?;
        for (i, id) in self.prerelease.iter().enumerate() {
            f.write_str(if i == 0 { "-" } else { "." })?;
            write!(f, "{id}")?;
        }
        for (i, id) in self.build.iter().enumerate() {
            f.write_str(if i == 0 { "+" } else { "." })?;
            f.write_str(id)?;
        }
        Ok(())
    }
}
