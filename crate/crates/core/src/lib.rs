//! Technical lag of package releases over a dependency network.

pub mod cli;
pub mod corpus;
pub mod fixture;
pub mod lag;
pub mod oracle;
pub mod report;
pub mod semver;
pub mod whatif;
