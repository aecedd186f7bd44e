use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("modular parameter must satisfy Im(tau) > 0, got {tau}")]
    NonPositiveImTau { tau: Complex64 },

    /// A theta-function denominator is within tolerance of zero.
    #[error("pole proximity: |theta_1({at})| = {magnitude:e} < tol")]
    PoleProximity { at: Complex64, magnitude: f64 },

    /// Some elliptic number [n] vanishes, i.e. eta is a torsion point of the lattice.
    #[error("torsion eta: elliptic number [{n}] has magnitude {magnitude:e}")]
    TorsionEta { n: i64, magnitude: f64 },

    #[error("series mismatch for {what}: relative disagreement {error:e}")]
    SeriesMismatch { what: &'static str, error: f64 },

    #[error("point is not on the spectral curve (smallest singular value ratio {ratio:e})")]
    NotOnCurve { ratio: f64 },

    #[error("inconsistent eigenvalue ratios: relative spread {spread:e}")]
    InconsistentRatios { spread: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton Jacobian is singular (|det J| = {det:e}); point is close to a branch point")]
    SingularJacobian { det: f64 },

    #[error("lattice collision: theta_1 vanishes on the sampling lattice after {reshifts} reshifts")]
    LatticeCollision { reshifts: usize },

    /// Poles `j` and `k` coincide modulo the lattice.
    #[error("coincident poles x_{j} and x_{k} (margin {margin:e})")]
    CoincidentPoles { j: usize, k: usize, margin: f64 },

    /// A pole difference hits a nonzero multiple of eta; the configuration lies on the
    /// boundary of the locus, as the degenerate Lame configuration does.
    #[error("boundary of locus: x_{j} - x_{k} = {shift}*eta modulo the lattice (margin {margin:e})")]
    LocusBoundary {
        j: usize,
        k: usize,
        shift: i32,
        margin: f64,
    },

    #[error("configuration is off the locus: gap between the two pole systems is {gap:e}")]
    OffLocus { gap: f64 },

    #[error("locus drift at t = {t}: gap {gap:e} exceeds {limit:e}")]
    LocusDrift { t: f64, gap: f64, limit: f64 },

    #[error("margin violation at t = {t}: {source}")]
    MarginViolation { t: f64, source: Box<Error> },

    #[error("no locus seed found after {attempts} attempts (best residual {best:e})")]
    NoLocusSeed { attempts: usize, best: f64 },

    #[error("eigenvalue solver failed: {0}")]
    Eigen(String),
}

impl Error {
    /// True for errors caused by a pole configuration sitting on the boundary of the
    /// locus or on a collision, as opposed to numerical failures.
    pub fn is_margin_violation(&self) -> bool {
        matches!(
            self,
            Error::CoincidentPoles { .. } | Error::LocusBoundary { .. } | Error::MarginViolation { .. }
        )
    }
}
