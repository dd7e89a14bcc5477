use thiserror::Error;

/// Errors raised by the core pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix has {found} entries, expected {rows}x{cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        found: usize,
    },
    #[error("non-finite value encountered")]
    NonFinite,
    #[error("tolerance `{0}` must be strictly positive")]
    InvalidTolerance(&'static str),
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("quadrature did not converge within the evaluation budget")]
    NoConvergence,
    #[error("matrix is not a proper rotation")]
    NotSO3,
    #[error("algebra has no identity element")]
    NotUnital,
    #[error("conjugation is only defined for the quaternion algebra")]
    NoConjugation,
    #[error("the zero quaternion is not a point of the unit group")]
    ZeroPoint,
    #[error("chart singularity: {0}")]
    ChartSingularity(&'static str),
    #[error("radial profile cannot be inverted at R = {value}")]
    ProfileNotInvertible { value: f64 },
    #[error("invalid radial profile at eta = {eta}: R and dR/deta must be finite and nonzero")]
    InvalidProfile { eta: f64 },
    #[error("argument outside the principal domain")]
    OutOfDomain,
    #[error("contraction is not symmetric (max asymmetry {asymmetry:e})")]
    NotInPrincipalSpace { asymmetry: f64 },
    #[error("tau vanishes at eta = {eta}")]
    ZeroTau { eta: f64 },
    #[error("tau changes sign near eta = {eta}")]
    SignChange { eta: f64 },
    #[error("eta = {eta} lies outside the profile domain [{lo}, {hi}]")]
    EtaOutOfDomain { eta: f64, lo: f64, hi: f64 },
    #[error("invalid profile definition: {0}")]
    InvalidTauProfile(&'static str),
    #[error("quadrature failed while integrating the profile")]
    QuadratureFailure,
    #[error("metric is singular at the evaluation point")]
    SingularMetric,
}

pub type Result<T> = core::result::Result<T, Error>;
