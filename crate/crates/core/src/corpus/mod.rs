//! Corpus ingestion, filtering and the time-indexed package index.

mod filter;
mod index;
mod record;

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::semver::SemverError;

pub use filter::{filter, DroppedDependency, FilterConfig, FilterReport};
pub use index::{Dependency, Package, PackageId, PackageIndex, Release, ReleaseId};
pub use record::{
    expand_inputs, format_date, load, parse_date, write_csv, write_jsonl, DepKind, Location, RawDependency, RawRecord,
    DEPENDENCIES_FILE, RELEASES_FILE,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{at}: {message}")]
    Schema { at: Location, message: String },
    #[error("duplicate release {package}@{version} at {first} and {second}")]
    Duplicate {
        package: String,
        version: String,
        first: Location,
        second: Location,
    },
    #[error("package {package}: versions {first:?} and {second:?} have equal precedence")]
    DuplicateVersion {
        package: String,
        first: String,
        second: String,
    },
    #[error("package {package}")]
    Version {
        package: String,
        #[source]
        source: SemverError,
    },
    #[error("no input files given")]
    NoInput,
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        CorpusError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }
}
