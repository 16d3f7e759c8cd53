use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("reaction term is not bistable: {0}")]
    NonBistable(String),
    #[error("diffusivity is not uniformly elliptic: min eta^T D eta = {min_form:e} at s = {s}")]
    NotElliptic { min_form: f64, s: f64 },
    #[error("equipotential condition violated: max |int D_ij f ds| = {residual:e} > {tol:e}")]
    EquipotentialViolated { residual: f64, tol: f64 },
    #[error("direction is not a unit vector (|e| = {norm})")]
    NotUnit { norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("quadrature failed on [{a}, {b}]: estimated error {err:e}")]
    QuadratureFailure { a: f64, b: f64, err: f64 },
    #[error("W_e is negative inside the well: W_e({s}) = {value:e}")]
    NegativeW { s: f64, value: f64 },
    #[error("standing-wave integration stalled near a root at z = {z}")]
    StallNearRoot { z: f64 },
    #[error("tolerance not met: {0}")]
    ToleranceFailure(String),
    #[error("linearized problem is not solvable: residual {residual:e}")]
    NotSolvable { residual: f64 },
    #[error("denominator underflow in the linearized solution at z = {z}")]
    InnerSingularity { z: f64 },
    #[error("non-integrable endpoint behaviour in the mobility integrand near s = {s}")]
    SingularEndpoint { s: f64 },
    #[error("vectors are not tangential: |e . eta| = {dot:e}")]
    NotTangential { dot: f64 },
    #[error("non-finite value after step at t = {t}")]
    Blowup { t: f64 },
    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    CflViolated { dt: f64, limit: f64 },
    #[error("the field does not cross level {level}")]
    NoContour { level: f64 },
    #[error("contour could not be closed")]
    OpenContour,
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("front self-intersects at t = {t}")]
    SelfIntersection { t: f64 },
    #[error("front went extinct at t = {t}")]
    Extinction { t: f64 },
    #[error("{count} band cells have |grad d| < 0.5")]
    GradientDegeneracy { count: usize },
    #[error("no M0 below the ceiling {ceiling} works (needed {needed})")]
    CeilingExceeded { ceiling: f64, needed: f64 },
    #[error("front went extinct before t_end at t = {t}")]
    ExtinctionBeforeEnd { t: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
