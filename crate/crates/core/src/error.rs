use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty sample")]
    EmptySample,

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A margin of the sample is constant, so the requested quantity is undefined.
    #[error("{0}")]
    DegenerateMargin(String),

    #[error("degenerate 2x2 collapse at cut ({x}, {y})")]
    DegenerateCollapse { x: f64, y: f64 },

    #[error("duplicate support point {0}")]
    DuplicateSupport(f64),

    #[error("eigenfunction {0} is identically zero")]
    ZeroEigenfunction(usize),

    #[error("component ({k}, {l}) is beyond the available spectrum")]
    ComponentOutOfRange { k: usize, l: usize },

    #[error("unsupported family: {0}")]
    UnsupportedFamily(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn constant_margin() -> Self {
        Error::DegenerateMargin("rho_star undefined for constant margin".to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
