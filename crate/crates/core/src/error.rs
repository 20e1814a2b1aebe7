use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RaceError {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A game, configuration or probability vector failed validation.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A finite-sum or lattice method would exceed its configured work limit.
    #[error("{what} needs {needed} units of work, above the budget of {budget}")]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    /// An iterative numerical method stopped before reaching its tolerance.
    #[error("{what} did not converge (achieved {achieved:e}, requested {requested:e})")]
    Convergence {
        what: &'static str,
        achieved: f64,
        requested: f64,
    },

    /// The inverse-map solver gave up; `best` is the last accepted iterate.
    #[error("solver stopped after {iterations} iterations with residual {residual:e}")]
    Unsolved {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    /// A simulated walk ran past the hard round cap.
    #[error("walk exceeded {rounds} rounds without finishing")]
    Runaway { rounds: u64 },
}

impl RaceError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        RaceError::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RaceError::Validation(msg.into())
    }

    /// True for failures caused by numerical non-convergence rather than bad input.
    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            RaceError::Convergence { .. } | RaceError::Unsolved { .. }
        )
    }
}

pub type Result<T, E = RaceError> = std::result::Result<T, E>;
