//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Two states (or a projector and a state) are defined over different rail sets.
    #[error("rail set mismatch: {0}")]
    RailSetMismatch(String),

    /// An element or selection references a rail the state does not have.
    #[error("unknown rail `{0}`")]
    UnknownRail(String),

    /// A rail label appears twice within one rail set.
    #[error("duplicate rail `{0}`")]
    DuplicateRail(String),

    /// An amplitude is NaN or infinite.
    #[error("non-finite amplitude on term `{0}`")]
    NonFiniteAmplitude(String),

    /// Normalization was requested on the zero state. Signals that a
    /// conditioning event has probability zero and callers must branch.
    #[error("cannot normalize the zero state: {0}")]
    ZeroState(String),

    /// A post-selection removed every term of the state.
    #[error("impossible post-selection event: {0}")]
    ImpossibleEvent(String),

    /// A state cannot be written as a path-word register.
    #[error("no path-register representation: {0}")]
    Representation(String),

    /// Weak values are undefined when pre- and postselection are orthogonal.
    #[error("weak value undefined: preselection and postselection are orthogonal ({0})")]
    OrthogonalSelections(String),

    /// A caller violated an operation's contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An optical element is internally inconsistent (e.g. non-unitary routing).
    #[error("invalid element: {0}")]
    InvalidElement(String),

    /// A network description document failed to parse or validate.
    #[error("network description: {0}")]
    Description(String),

    /// Error context: the evolution stage in which a failure occurred.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    /// Error context: the scenario in which a failure occurred.
    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    /// Report serialization / deserialization failure.
    #[error("report: {0}")]
    Report(String),
}

impl Error {
    /// Wrap an error with the name of the evolution stage it occurred in.
    pub fn in_stage(self, stage: &str) -> Self {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }

    /// Wrap an error with the name of the scenario it occurred in.
    pub fn in_scenario(self, scenario: &str) -> Self {
        Error::Scenario {
            scenario: scenario.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
