use thiserror::Error;

/// Errors raised while parsing or validating a game.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing keyword {0}")]
    MissingSection(&'static str),
    #[error("line {line}: duplicate keyword {keyword}")]
    DuplicateSection { line: usize, keyword: &'static str },
    #[error("line {line}: keyword {keyword} out of order (expected ALPHABET, STATES, INIT, SAFE, TARGET, TRANS, OBS)")]
    SectionOrder { line: usize, keyword: &'static str },
    #[error("line {line}: unknown state `{name}`")]
    UnknownState { line: usize, name: String },
    #[error("line {line}: unknown label `{name}`")]
    UnknownLabel { line: usize, name: String },
    #[error("{}duplicate name `{name}`", line_prefix(*.line))]
    DuplicateName { line: Option<usize>, name: String },
    #[error("line {line}: the name `{name}` is reserved")]
    ReservedName { line: usize, name: String },
    #[error("line {line}: malformed priority `{text}`")]
    MalformedPriority { line: usize, text: String },
    #[error("{}state `{state}` belongs to two observations", line_prefix(*.line))]
    ObservationOverlap { line: Option<usize>, state: String },
    #[error("state `{0}` belongs to no observation")]
    Unobserved(String),
    #[error("empty alphabet")]
    EmptyAlphabet,
    #[error("no states")]
    NoStates,
    #[error("initial states must lie in a single observation")]
    InitialSpansObservations,
    #[error("transition relation not total: no transition from `{state}` on `{label}`")]
    NotTotal { state: String, label: String },
    #[error("invalid game: {0}")]
    Invalid(String),
}

fn line_prefix(line: Option<usize>) -> String {
    line.map(|l| format!("line {l}: ")).unwrap_or_default()
}

impl GameError {
    /// Source line the error refers to, when known.
    pub fn line(&self) -> Option<usize> {
        match self {
            GameError::Syntax { line, .. }
            | GameError::DuplicateSection { line, .. }
            | GameError::SectionOrder { line, .. }
            | GameError::UnknownState { line, .. }
            | GameError::UnknownLabel { line, .. }
            | GameError::ReservedName { line, .. }
            | GameError::MalformedPriority { line, .. } => Some(*line),
            GameError::DuplicateName { line, .. } | GameError::ObservationOverlap { line, .. } => *line,
            _ => None,
        }
    }
}

/// Errors raised by the symbolic encoding and the solver.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("symbolic encoding needs {needed} variables, above the cap of {cap}")]
    Capacity { needed: usize, cap: usize },
    #[error("game has {locations} locations, above the oracle cap of {cap}")]
    OracleCapacity { locations: usize, cap: usize },
    #[error("strategy ranks overflow 64 bits")]
    RankOverflow,
}
