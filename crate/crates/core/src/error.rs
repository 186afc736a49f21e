use thiserror::Error;

/// Roots and pole multiplicities gathered before a completeness failure.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSpectrum {
    pub roots: Vec<f64>,
    /// `(pole value, multiplicity as an eigenvalue of H)`
    pub pole_eigenvalues: Vec<(f64, usize)>,
    pub refinement_level: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("t = {t} lies within {radius:e} of pole {pole}")]
    PoleProximity { t: f64, pole: f64, radius: f64 },

    #[error("operation requires {expected} parity")]
    ParityMismatch { expected: &'static str },

    #[error("eigenvector denominator {value:e} is degenerate at mu = {mu}")]
    DegenerateDenominator { mu: f64, value: f64 },

    #[error("mu = {mu} coincides with pole value {pole}")]
    PoleValueInput { mu: f64, pole: f64 },

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("length mismatch: {lhs} vs {rhs}")]
    LengthMismatch { lhs: usize, rhs: usize },

    #[error("incomplete spectrum: accounted for {found} of {expected} eigenvalues")]
    IncompleteSpectrum { found: usize, expected: usize, partial: Box<PartialSpectrum> },
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidTolerance(_) => "invalid_tolerance",
            Error::PoleProximity { .. } => "pole_proximity",
            Error::ParityMismatch { .. } => "parity_mismatch",
            Error::DegenerateDenominator { .. } => "degenerate_denominator",
            Error::PoleValueInput { .. } => "pole_value_input",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::Singular => "singular",
            Error::NoConvergence { .. } => "no_convergence",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::IncompleteSpectrum { .. } => "incomplete_spectrum",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
