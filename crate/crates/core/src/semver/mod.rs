//! Semantic versions, npm-style dependency constraints and release types.

mod constraint;
mod version;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use constraint::{Comparator, ComparatorSet, Constraint, Op};
pub use version::{Identifier, Version};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemverError {
    #[error("invalid version {text:?}: {reason}")]
    InvalidVersion { text: String, reason: String },
    #[error("invalid constraint {text:?}: {reason}")]
    InvalidConstraint { text: String, reason: String },
    #[error("version {0} cannot be classified against itself")]
    SameVersion(String),
}

impl SemverError {
    pub(crate) fn invalid_version(text: &str, reason: &str) -> Self {
        SemverError::InvalidVersion {
            text: text.to_string(),
            reason: reason.to_string(),
        }
    }

    pub(crate) fn invalid_constraint(text: &str, reason: &str) -> Self {
        SemverError::InvalidConstraint {
            text: text.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// Release type of a version relative to its predecessor in version order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ReleaseType {
    Major,
    Minor,
    Patch,
    Initial,
}

impl ReleaseType {
    pub const UPDATES: [ReleaseType; 3] = [ReleaseType::Major, ReleaseType::Minor, ReleaseType::Patch];

    pub fn as_str(self) -> &'static str {
        match self {
            ReleaseType::Major => "MAJOR",
            ReleaseType::Minor => "MINOR",
            ReleaseType::Patch => "PATCH",
            ReleaseType::Initial => "INITIAL",
        }
    }
}

impl fmt::Display for ReleaseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReleaseType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "MAJOR" => Ok(ReleaseType::Major),
            "MINOR" => Ok(ReleaseType::Minor),
            "PATCH" => Ok(ReleaseType::Patch),
            "INITIAL" => Ok(ReleaseType::Initial),
            other => Err(format!("unknown release type {other:?}")),
        }
    }
}

pub fn parse_version(text: &str) -> Result<Version, SemverError> {
    Version::parse(text)
}

pub fn parse_constraint(text: &str) -> Result<Constraint, SemverError> {
    Constraint::parse(text)
}

pub fn compare(a: &Version, b: &Version) -> Ordering {
    a.cmp(b)
}

pub fn satisfies(v: &Version, c: &Constraint) -> bool {
    c.satisfied_by(v)
}

/// Classifies `curr` against its version-order predecessor.
///
/// Pre-release tags do not take part: `1.0.0` following `1.0.0-rc.1`
/// differs only outside the triple and is reported as a patch.
pub fn classify(curr: &Version, prev: Option<&Version>) -> Result<ReleaseType, SemverError> {
    let Some(prev) = prev else {
        return Ok(ReleaseType::Initial);
    };
    if curr == prev {
        return Err(SemverError::SameVersion(curr.to_string()));
    }
    Ok(if curr.major != prev.major {
        ReleaseType::Major
    } else if curr.minor != prev.minor {
        ReleaseType::Minor
    } else {
        ReleaseType::Patch
    })
}
