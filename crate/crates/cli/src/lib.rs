//! Plumbing behind the `henon-cocycle` binary: configuration, the alpha
//! curve and its CSV form, a small PNG rasterizer, and the verification
//! suites.

pub mod config;
pub mod curve;
pub mod raster;
pub mod verify;

/// A configuration problem; the binary exits with status 2 on these.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "usage error: {}", self.0)
    }
}

impl std::error::Error for UsageError {}

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}
