use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A squeezing specification whose variance product falls below the
    /// uncertainty bound.
    #[error("unphysical state: V*V' = {product} is below 1")]
    UnphysicalState { product: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("degenerate batch for setting {setting}: sample variance is zero")]
    DegenerateBatch { setting: String },

    #[error("grid too coarse: {pixels_per_waist:.2} pixels per beam waist, need at least {required}")]
    Resolution { pixels_per_waist: f64, required: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs or I/O.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NumericalDegeneracy(_) | Error::DegenerateBatch { .. })
    }

    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
