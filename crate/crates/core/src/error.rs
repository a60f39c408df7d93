//! Error type shared across the crate.

use thiserror::Error;

/// Unified error for state construction, enumeration, and numerical checks.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor argument is outside its validated range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// The requested quantity is undefined for these inputs.
    #[error("domain: {0}")]
    Domain(String),
    /// Two objects that must agree in size or grading do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    /// A fermionic state was built from coincident modes.
    #[error("exclusion violation: {0}")]
    Exclusion(String),
    /// The diagram class falls outside the implemented expansion orders.
    #[error("unsupported class: {0}")]
    UnsupportedClass(String),
    /// An enumeration or solve would exceed its hard size cap.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    /// A numerical cross-check exceeded its tolerance.
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
