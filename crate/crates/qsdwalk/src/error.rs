use std::path::PathBuf;

use thiserror::Error;

use crate::model::PovmDiagnostics;
use crate::walk::MismatchReport;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar parameter fell outside its admissible range.
    #[error("{name} = {value} out of range: requires {requirement}")]
    Domain {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    /// A matrix failed the density-operator checks.
    #[error(
        "not a density operator: hermiticity defect {hermiticity_defect:.3e}, \
         trace defect {trace_defect:.3e}, min eigenvalue {min_eigenvalue:.3e}"
    )]
    InvalidDensity {
        hermiticity_defect: f64,
        trace_defect: f64,
        min_eigenvalue: f64,
    },

    /// A measurement failed positivity or completeness checks.
    #[error("invalid POVM:\n{0}")]
    InvalidPovm(PovmDiagnostics),

    /// A coin schedule contains a non-unitary matrix.
    #[error("non-unitary coin at layer {layer}, position {position}: defect {defect:.3e}")]
    NonUnitaryCoin {
        layer: usize,
        position: i64,
        defect: f64,
    },

    /// The ensemble average is (numerically) singular, so no confidence
    /// oracle can be evaluated.
    #[error("ensemble average is singular: min eigenvalue {eigenvalue:.3e}")]
    SingularAverage { eigenvalue: f64 },

    /// The three-outcome walk schedule only exists for nu <= 1.
    #[error(
        "no walk schedule for nu = {nu:.6} > 1; \
         evaluate the four-element measurement algebraically instead"
    )]
    UnsupportedSchedule { nu: f64 },

    /// Walk statistics could not be matched to the measurement outcomes.
    #[error("schedule does not reproduce the measurement:\n{0}")]
    CompilationMismatch(MismatchReport),

    /// A coin matrix is not reachable with a half-wave plate alone.
    #[error(
        "coin at layer {layer}, position {position} is not real-symmetric \
         with determinant -1; a quarter-wave plate would be required"
    )]
    NeedsQwp { layer: usize, position: i64 },

    /// Figure-of-merit estimation was asked to run on an empty record set.
    #[error("no count records to estimate from")]
    EmptyRecords,

    /// A configuration field failed validation.
    #[error("invalid {field}: {message}")]
    Config {
        field: &'static str,
        message: String,
    },

    /// An angle expression on the command line could not be parsed.
    #[error("cannot parse angle '{0}' (examples: 0.7854, pi/4, 0.25pi, 45deg)")]
    AngleParse(String),

    /// File I/O failure, annotated with the offending path.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
