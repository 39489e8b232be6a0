//! Counterfactual loosening of dependency constraints.
//!
//! A loosened dependency additionally accepts any published release that is
//! higher than, and compatible with, a release its constraint already
//! accepts. Compatible means the same `major.minor` for patch loosening
//! and the same `major` for minor loosening.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{Dependency, PackageIndex, Release, ReleaseId};
use crate::lag::{Admission, Evaluator, LagError};
use crate::semver::Version;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoosenLevel {
    None,
    Patch,
    PatchAndMinor,
}

impl LoosenLevel {
    pub const ALL: [LoosenLevel; 3] = [LoosenLevel::None, LoosenLevel::Patch, LoosenLevel::PatchAndMinor];

    /// Name used on the command line and in report metric names.
    pub fn as_str(self) -> &'static str {
        match self {
            LoosenLevel::None => "none",
            LoosenLevel::Patch => "patch",
            LoosenLevel::PatchAndMinor => "minor",
        }
    }
}

impl fmt::Display for LoosenLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LoosenLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(LoosenLevel::None),
            "patch" => Ok(LoosenLevel::Patch),
            "minor" | "patch_and_minor" => Ok(LoosenLevel::PatchAndMinor),
            other => Err(format!(
                "unknown loosen level {other:?} (expected none, patch or minor)"
            )),
        }
    }
}

/// Loosening policy.
///
/// With `zero_major_caret` set, minor loosening of a `0.y.z` anchor only
/// admits releases sharing `0.y`, and of a `0.0.z` anchor none, mirroring
/// the caret operator. By default compatibility is plain component
/// equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Loosening {
    pub level: LoosenLevel,
    pub zero_major_caret: bool,
}

impl From<LoosenLevel> for Loosening {
    fn from(level: LoosenLevel) -> Self {
        Loosening {
            level,
            zero_major_caret: false,
        }
    }
}

impl Loosening {
    pub fn compatible(&self, candidate: &Version, anchor: &Version) -> bool {
        match self.level {
            LoosenLevel::None => false,
            LoosenLevel::Patch => candidate.major == anchor.major && candidate.minor == anchor.minor,
            LoosenLevel::PatchAndMinor => {
                if candidate.major != anchor.major {
                    return false;
                }
                if !self.zero_major_caret || anchor.major > 0 {
                    return true;
                }
                if anchor.minor > 0 {
                    candidate.minor == anchor.minor
                } else {
                    candidate.minor == 0 && candidate.patch == anchor.patch
                }
            }
        }
    }
}

impl Admission for Loosening {
    fn admits(&self, candidate: &Version, anchor: &Version) -> bool {
        self.compatible(candidate, anchor)
    }

    fn widens(&self) -> bool {
        self.level != LoosenLevel::None
    }
}

pub fn installable_loosened(
    d: &Dependency,
    t: DateTime<Utc>,
    level: LoosenLevel,
    idx: &PackageIndex,
) -> Result<Vec<ReleaseId>, LagError> {
    Evaluator::new(idx)
        .with_admission(Loosening::from(level))
        .installable(d, t)
}

pub fn dep_lag_loosened(
    d: &Dependency,
    t: DateTime<Utc>,
    level: LoosenLevel,
    idx: &PackageIndex,
) -> Result<Duration, LagError> {
    Evaluator::new(idx).with_admission(Loosening::from(level)).dep_lag(d, t)
}

pub fn lag_loosened(r: &Release, t: DateTime<Utc>, level: LoosenLevel, idx: &PackageIndex) -> Duration {
    Evaluator::new(idx)
        .with_admission(Loosening::from(level))
        .release_lag(r, t)
}
