use std::fmt;

use thiserror::Error;

/// Parse failure in a SAS+ file, with the 1-based line and section name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub section: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {} (section `{}`): {}",
            self.line, self.section, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("invalid task: {0}")]
    InvalidTask(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("state space too large: more than {limit} states (reached {reached})")]
    TooLarge { limit: usize, reached: usize },
    #[error("state not in the forward state space")]
    UnknownState,
    #[error("invalid predecessor: no forward-reachable state matches")]
    InvalidPredecessor,
    #[error("no goal-reaching state in the state space")]
    NoGoalReachable,
    #[error("goal has no predecessors")]
    GoalHasNoPredecessors,
    #[error("sampling: {0}")]
    Sampling(String),
    #[error("learner: {0}")]
    Learner(String),
    #[error("format: {0}")]
    Format(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
