//! Command-line front end: manifests in, canonical JSON reports out.

pub mod commands;
pub mod manifest;
pub mod report;

use std::fmt;

/// Bad input: unreadable manifest, schema violations, inconsistent flags. Exit code 3.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub const EXIT_USAGE: i32 = 3;
