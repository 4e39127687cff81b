use thiserror::Error;

/// Outcome report attached to iterative solvers.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SolverReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    /// Adaptive quadrature ran out of subdivisions; carries the best estimate
    /// and its error bound so callers can decide whether to keep it.
    #[error("quadrature did not converge: estimate {estimate}, error bound {error_bound}")]
    QuadratureNonConvergence { estimate: f64, error_bound: f64 },

    #[error("no sign change over bracket [{lo}, {hi}]: f(lo)={flo}, f(hi)={fhi}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        flo: f64,
        fhi: f64,
    },

    #[error("nonlinear solver failed after {} iterations (residual {})", report.iterations, report.residual_norm)]
    SolverDiverged { report: SolverReport },

    #[error("degenerate cohort: {0}")]
    DegenerateCohort(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Comparing two score distributions that disagree on the event rate.
    #[error("event-rate mismatch: old has pi={old_pi}, new has pi={new_pi}")]
    MismatchedEventRate { old_pi: f64, new_pi: f64 },

    #[error("scenario (beta1={beta1}, beta2={beta2}, beta3={beta3}, pi={pi}) failed: {source}")]
    Scenario {
        beta1: f64,
        beta2: f64,
        beta3: f64,
        pi: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than numerical trouble;
    /// the CLI maps these to a different exit code.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::DegenerateCohort(_)
            | Error::InvalidInput(_)
            | Error::MismatchedEventRate { .. }
            | Error::Io(_) => true,
            Error::Scenario { source, .. } => source.is_input_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
