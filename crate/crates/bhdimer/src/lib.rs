//! Simulator and analytics for the driven-dissipative two-site Bose-Hubbard
//! model: adiabatic excitation from the vacuum, Josephson-oscillation decay
//! after drive switch-off, and the sector-dephasing theory of that decay.

pub mod analytics;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod liouville;
pub mod meanfield;
pub mod observables;
pub mod plot;
pub mod protocol;
pub mod runner;
pub mod superop;

pub use fock::{FockBasis, Mode, Operator};
pub use liouville::{DensityMatrix, LindbladGenerator};
pub use observables::{NumberHistogram, ObservableSeries, SingleParticleDm};
pub use protocol::ParameterSchedule;
pub use runner::RunConfig;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid mode index {0} (valid modes are 1 and 2)")]
    InvalidMode(usize),
    #[error("number sector {sector} out of range (n_max = {n_max})")]
    SectorOutOfRange { sector: usize, n_max: usize },
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("trace drifted to {trace} at t = {t} (tolerance {tol})")]
    TraceDrift { trace: f64, t: f64, tol: f64 },
    #[error("state is not a density matrix: {0}")]
    InvalidState(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no condensate: leading eigenvalue {0} is not positive")]
    NoCondensate(f64),
    #[error("expectation value has imaginary residue {residue} above tolerance {tol}")]
    ImaginaryResidue { residue: f64, tol: f64 },
    #[error("leakage {leakage:.3e} into the top {shells} shells exceeds threshold {threshold:.3e}")]
    LeakageExceeded {
        leakage: f64,
        shells: usize,
        threshold: f64,
    },
    #[error("positivity violated: smallest eigenvalue {min_eig:.3e} at t = {t}")]
    PositivityViolation { min_eig: f64, t: f64 },
    #[error("envelope fit did not converge after {iterations} iterations (cost {cost:.3e})")]
    FitDidNotConverge { iterations: usize, cost: f64 },
    #[error("ambiguous oscillation frequency: peaks at {omega1:.4} and {omega2:.4} have comparable weight")]
    AmbiguousFrequency { omega1: f64, omega2: f64 },
    #[error("fit input too short: {0}")]
    FitInputTooShort(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("state file error: {0}")]
    StateFile(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 config/usage, 3 numerical-invariant
    /// violation, 4 fit failure, 1 everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidParameter(_)
            | Error::InvalidSchedule(_)
            | Error::InvalidMode(_)
            | Error::SectorOutOfRange { .. } => 2,
            Error::TraceDrift { .. }
            | Error::NonFinite(_)
            | Error::LeakageExceeded { .. }
            | Error::PositivityViolation { .. }
            | Error::ImaginaryResidue { .. } => 3,
            Error::FitDidNotConverge { .. }
            | Error::AmbiguousFrequency { .. }
            | Error::FitInputTooShort(_) => 4,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
