//! Process-level error handling: every failure is classified into one of
//! three kinds, each with a fixed exit code, and printed as a single
//! `error[<kind>]: <message>` line on stderr.

use std::fmt;

use qreservoir::error::Error;

/// Failure class of a CLI run. Validation covers everything wrong with the
/// request itself, numeric covers computations that started from a valid
/// request and broke down, io covers the filesystem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Validation,
    Numeric,
    Io,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Validation => 2,
            Kind::Numeric => 3,
            Kind::Io => 4,
        }
    }

    fn label(self) -> &'static str {
        match self {
            Kind::Validation => "validation",
            Kind::Numeric => "numeric",
            Kind::Io => "io",
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        CliError { kind: Kind::Validation, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        CliError { kind: Kind::Numeric, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { kind: Kind::Io, message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.kind.label(), self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        // A stream that cannot converge is a problem with the requested pair,
        // not with the arithmetic, so it lands in the validation class.
        let kind = match e {
            Error::InvalidDimension { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidParameter { .. }
            | Error::InvalidState(_)
            | Error::AmplitudeTooLarge { .. }
            | Error::SqueezeTooLarge { .. }
            | Error::NoConvergence { .. }
            | Error::OutsideValidity { .. }
            | Error::UnreachableTarget(_)
            | Error::StepSize(_) => Kind::Validation,
            Error::TruncationOverflow(_)
            | Error::FitFailure(_)
            | Error::Singular(_)
            | Error::OracleInvalid(_)
            | Error::Numeric(_) => Kind::Numeric,
        };
        CliError { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}
