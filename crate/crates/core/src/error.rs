use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Messages name the violated
/// parameter region or numeric constraint.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("symbol is not conjugate-symmetric: imaginary residue {residue:e} exceeds {limit:e}")]
    Symmetry { residue: f64, limit: f64 },

    #[error(
        "Hamiltonian is not well-defined: alpha = {alpha} must exceed p/(p+2) = {bound} for p = {p}"
    )]
    HamiltonianUndefined { alpha: f64, p: u32, bound: f64 },

    #[error("no solitary wave at c = {c}: {reason}")]
    NoSolution { c: f64, reason: String },

    #[error("existence error: {0}")]
    Existence(String),

    #[error("Petviashvili iteration did not converge in {iterations} iterations (last change {change:e}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        change: f64,
        residual: f64,
    },

    #[error("iteration diverged (non-finite iterate) at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource error: {n} grid points exceed the dense-matrix cap of {cap}")]
    Resource { n: usize, cap: usize },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("no real root: radicand 2*alpha - p + alpha*p = {radicand} is negative")]
    NoRealRoot { radicand: f64 },

    #[error("blow-up: non-finite field after t = {last_finite_time}")]
    BlowUp { last_finite_time: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Short stable name of the error class.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Dimension { .. } => "dimension",
            Error::Symmetry { .. } => "symmetry",
            Error::HamiltonianUndefined { .. } => "hamiltonian-undefined",
            Error::NoSolution { .. } => "no-solution",
            Error::Existence(_) => "existence",
            Error::NonConvergence { .. } => "non-convergence",
            Error::Divergence { .. } => "divergence",
            Error::Degenerate(_) => "degenerate-input",
            Error::Domain(_) => "domain",
            Error::Resource { .. } => "resource",
            Error::Numeric(_) => "numeric",
            Error::NoRealRoot { .. } => "no-real-root",
            Error::BlowUp { .. } => "blow-up",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Dimension { .. } | Error::Format(_) => 2,
            Error::HamiltonianUndefined { .. } => 3,
            Error::NoSolution { .. } | Error::Existence(_) | Error::NoRealRoot { .. } => 4,
            Error::NonConvergence { .. } | Error::Divergence { .. } => 5,
            Error::Resource { .. } => 6,
            Error::BlowUp { .. } => 7,
            Error::Symmetry { .. }
            | Error::Degenerate(_)
            | Error::Domain(_)
            | Error::Numeric(_) => 8,
            Error::Io(_) => 9,
        }
    }
}
