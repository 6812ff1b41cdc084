use thiserror::Error;

/// Errors raised by the grid, exponent, norm and maximal-operator routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VarlexError {
    #[error("domain is empty: no cell center satisfies the mask rule")]
    EmptyDomain,

    #[error("dimension {0} is not supported (expected 1 or 2)")]
    UnsupportedDimension(usize),

    #[error("invalid box on axis {axis}: [{lo}, {hi}]")]
    InvalidBox { axis: usize, lo: f64, hi: f64 },

    #[error("resolution on axis {axis} must be at least 1")]
    InvalidResolution { axis: usize },

    #[error("non-uniform spacing: axis 0 has h = {h0}, axis {axis} has h = {h}")]
    NonUniformSpacing { axis: usize, h0: f64, h: f64 },

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value {value} at cell {cell}")]
    NonFinite { cell: usize, value: f64 },

    #[error("operands live on different domains")]
    DomainMismatch,

    #[error("exponent out of range at cell {cell}: p = {value}, required {requirement}")]
    ExponentRange {
        cell: usize,
        value: f64,
        requirement: String,
    },

    #[error("alpha = {alpha} outside {range} for n = {n}")]
    InvalidAlpha { alpha: f64, n: usize, range: &'static str },

    #[error("cube family needs a maximal side of at least 1 cell")]
    InvalidCubeFamily,

    #[error("tolerance {0} outside (0, 1e-4]")]
    InvalidTolerance(f64),

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("bisection did not reach tolerance within {0} iterations")]
    ToleranceNotReached(usize),

    #[error("hypothesis violated at cell {cell}: f = {value} does not satisfy {condition}")]
    Hypothesis {
        cell: usize,
        value: f64,
        condition: &'static str,
    },

    #[error("hypothesis violated: Luxemburg norm {norm} exceeds 1")]
    NormTooLarge { norm: f64 },

    #[error("invalid field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl VarlexError {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            VarlexError::EmptyDomain => "empty_domain",
            VarlexError::UnsupportedDimension(_) => "unsupported_dimension",
            VarlexError::InvalidBox { .. } => "invalid_box",
            VarlexError::InvalidResolution { .. } => "invalid_resolution",
            VarlexError::NonUniformSpacing { .. } => "non_uniform_spacing",
            VarlexError::LengthMismatch { .. } => "length_mismatch",
            VarlexError::NonFinite { .. } => "non_finite",
            VarlexError::DomainMismatch => "domain_mismatch",
            VarlexError::ExponentRange { .. } => "exponent_range",
            VarlexError::InvalidAlpha { .. } => "invalid_alpha",
            VarlexError::InvalidCubeFamily => "invalid_cube_family",
            VarlexError::InvalidTolerance(_) => "invalid_tolerance",
            VarlexError::ZeroFunction => "zero_function",
            VarlexError::ToleranceNotReached(_) => "tolerance_not_reached",
            VarlexError::Hypothesis { .. } => "hypothesis",
            VarlexError::NormTooLarge { .. } => "hypothesis",
            VarlexError::Config { .. } => "config",
            VarlexError::Io(_) => "io",
            VarlexError::Parse(_) => "parse",
        }
    }
}

impl From<std::io::Error> for VarlexError {
    fn from(e: std::io::Error) -> Self {
        VarlexError::Io(e.to_string())
    }
}

impl From<csv::Error> for VarlexError {
    fn from(e: csv::Error) -> Self {
        VarlexError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for VarlexError {
    fn from(e: serde_json::Error) -> Self {
        VarlexError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VarlexError>;
