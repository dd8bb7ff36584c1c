use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (non-positive
    /// population, division by zero, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// `ad - bc = 0`: the reciprocal linear system has no unique rest point.
    #[error("singular system: ad - bc = {det:e}")]
    SingularSystem { det: f64 },

    /// A parameter set sits on a classification boundary that the theory
    /// leaves undecided.
    #[error("degenerate classification: {0}")]
    Degenerate(String),

    #[error("closed form evaluated past blow-up at t = {t}")]
    BlowUpPassed { t: f64 },

    #[error("t = {t} outside covered interval [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// `sqrt(bd) p` equals `2 pi m` for the reported `m`.
    #[error("resonance: sqrt(bd)*p = {omega_p} is within {distance:e} of 2*pi*{m}")]
    Resonance { omega_p: f64, m: i64, distance: f64 },

    #[error("near resonance: cond(I - F(p)) = {condition:e}")]
    NearResonance { condition: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no usable grid points: every initial value blew up before one period")]
    NoData,
}
