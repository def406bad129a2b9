use thiserror::Error;

use crate::graph::GraphError;
use crate::noise::NoiseError;
use crate::partition::PartitionError;
use crate::program::ParseError;
use crate::qfbe::QfbeError;
use crate::statevector::SimError;

/// Any failure surfaced to the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Qfbe(#[from] QfbeError),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Exit status for bad scripts, flags and inputs.
pub const EXIT_INPUT: i32 = 2;
/// Exit status for exceeded qubit, branch or tensor limits.
pub const EXIT_RESOURCE: i32 = 3;
/// Exit status for numeric, I/O and internal failures.
pub const EXIT_INTERNAL: i32 = 4;

impl Error {
    pub fn class(&self) -> &'static str {
        match self {
            Error::Parse(e) => e.class(),
            Error::Sim(e) => e.class(),
            Error::Noise(e) => e.class(),
            Error::Partition(e) => e.class(),
            Error::Graph(e) => e.class(),
            Error::Qfbe(e) => e.class(),
            Error::Input(_) => "InvalidInput",
            Error::Io(_) => "IoError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        fn sim(e: &SimError) -> i32 {
            match e {
                SimError::TooManyQubits { .. } => EXIT_RESOURCE,
                SimError::NoQubits => EXIT_INPUT,
                _ => EXIT_INTERNAL,
            }
        }
        match self {
            Error::Parse(_) | Error::Noise(_) | Error::Input(_) => EXIT_INPUT,
            Error::Sim(e) => sim(e),
            Error::Partition(PartitionError::BranchExplosion { .. }) => EXIT_RESOURCE,
            Error::Partition(PartitionError::Sim(e)) => sim(e),
            Error::Partition(_) => EXIT_INPUT,
            Error::Graph(GraphError::TensorTooLarge { .. }) => EXIT_RESOURCE,
            Error::Graph(GraphError::UnsupportedGate { .. } | GraphError::MeasureInSingleMode { .. }) => EXIT_INPUT,
            Error::Graph(_) => EXIT_INTERNAL,
            Error::Qfbe(QfbeError::DomainEscape { .. } | QfbeError::BranchUndefined { .. }) => EXIT_INTERNAL,
            Error::Qfbe(_) => EXIT_INPUT,
            Error::Io(_) => EXIT_INTERNAL,
        }
    }

    /// `<Class>: <message>`; messages tied to a script line start with `line N:`.
    pub fn render(&self) -> String {
        format!("{}: {}", self.class(), self)
    }
}
