use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid test function: {0}")]
    InvalidDescriptor(String),

    #[error("spectrum is not Hermitian (max asymmetry {max_asymmetry:e})")]
    NonHermitian { max_asymmetry: f64 },

    #[error("symbol is not Hermitian-compatible: m(-xi) != conj(m(xi)) at k = {k:?} (deviation {deviation:e})")]
    SymbolNotHermitian { k: Vec<i64>, deviation: f64 },

    #[error("non-real output: imaginary residual {residual:e} exceeds {bound:e}")]
    ImaginaryResidual { residual: f64, bound: f64 },

    #[error("input has non-negligible mean {mean:e} (tolerance {tol:e}); the Riesz potential symbol is singular at zero frequency")]
    NonzeroMean { mean: f64, tol: f64 },

    #[error("{op}: parameter out of range: {constraint}")]
    ParameterRange { op: &'static str, constraint: String },

    #[error("quadrature did not converge at r = {r:e}")]
    QuadratureDivergence { r: f64 },

    #[error("radius r = {r:e} lies outside the symbol table range [{r_min:e}, {r_max:e}]")]
    OutsideTable { r: f64, r_min: f64, r_max: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("missing field: {0}")]
    MissingField(String),

    #[error("symbol cache {path}: {reason}")]
    Cache { path: String, reason: String },

    #[error("non-finite value produced by {op}")]
    NonFinite { op: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn range(op: &'static str, constraint: impl Into<String>) -> Self {
        Error::ParameterRange {
            op,
            constraint: constraint.into(),
        }
    }
}
