use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of an operation (shape, range, emptiness).
    #[error("domain error: {0}")]
    Domain(String),

    /// A hypothesis of a sufficient condition or algorithm does not hold for the inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative factorization did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Every remaining correlation is negligible while the residual is not.
    #[error("OMP stalled with residual {residual_norm:.3e} after selecting {partial:?}")]
    Stall {
        partial: Vec<usize>,
        residual_norm: f64,
    },

    /// Error raised while processing one point of a batch.
    #[error("point {point}: {source}")]
    AtPoint {
        point: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_point(point: usize, source: Error) -> Self {
        Error::AtPoint {
            point,
            source: Box::new(source),
        }
    }
}
