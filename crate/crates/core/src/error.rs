use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("momentum is not on the forward light cone (relative residual {residual:.3e})")]
    NotOnCone { residual: f64 },
    #[error("momentum lies on the excluded ray p3 = -p0")]
    SingularRay,
    #[error("Wigner phase undefined: denominator modulus {modulus:.3e}")]
    PhaseUndefined { modulus: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not in SL(2,C): |det - 1| = {residual:.3e}")]
    NotUnimodular { residual: f64 },
    #[error("matrix is not in SU(2,2): residual {residual:.3e}")]
    NotSu22 { residual: f64 },
    #[error("imaginary part is not positive definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotInTube { min_eigenvalue: f64 },
    #[error("vector is not in the open forward cone")]
    NotForwardTimelike,
    #[error("conformal action is singular here: |det(CZ + D)| = {modulus:.3e}")]
    SingularAction { modulus: f64 },
    #[error("invalid quadrature order {0}; orders must be at least 2")]
    InvalidOrder(usize),
    #[error("lattice resolves momenta up to {limit:.3}, grid needs {required:.3}")]
    Nyquist { required: f64, limit: f64 },
    #[error("operation needs {expected} parity of n, got n = {n}")]
    Parity { expected: &'static str, n: usize },
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("extension mode {0} is not the calibrated kernel mode")]
    UncalibratedMode(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("unknown integral `{0}`")]
    UnknownIntegral(String),
    #[error("config: {0}")]
    Config(String),
    #[error("report: {0}")]
    Report(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
