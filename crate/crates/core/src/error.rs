use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("infeasible timing: {0}")]
    Feasibility(String),
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),
    #[error("configuration error: {0}")]
    Config(String),
    /// Wraps an error raised while evaluating one stability grid cell.
    #[error("cell (delta={delta}, ratio={ratio}): {source}")]
    Cell {
        delta: f64,
        ratio: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerical kernels (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_) => true,
            Error::Cell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
