// SPDX-License-Identifier: Apache-2.0
use std::io;
use std::path::PathBuf;

use latbal_core::analyzer::{AnalysisError, PackageError};
use latbal_core::fixtures::FixtureError;
use latbal_core::marker::MarkerError;
use latbal_core::netlist::{AssignmentFormatError, NetlistError};
use latbal_core::oracle::OracleError;
use latbal_core::simulator::SimError;
use latbal_core::vhdlgen::VhdlGenError;
use thiserror::Error;

/// Balancing or verification failed: the inputs were fine, the design is not.
pub const EXIT_FAILURE: i32 = 1;
/// Bad arguments or unreadable inputs.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Fixture(#[from] FixtureError),
    #[error(transparent)]
    Marker(#[from] MarkerError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Package(#[from] PackageError),
    #[error(transparent)]
    VhdlGen(#[from] VhdlGenError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{path}: {source}")]
    Assignment {
        path: PathBuf,
        source: AssignmentFormatError,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("oracle mismatch: simulation gave {simulated}, static analysis gave {expected}")]
    OracleMismatch { simulated: String, expected: String },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Analysis(
                AnalysisError::InconsistentLatency { .. }
                | AnalysisError::NoValidSamples { .. }
                | AnalysisError::PathCountChanged { .. }
                | AnalysisError::DelayOverflow { .. },
            )
            | Self::Sim(SimError::FinalTestFailed(_))
            | Self::OracleMismatch { .. } => EXIT_FAILURE,
            _ => EXIT_USAGE,
        }
    }
}
