use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad class of a failure, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Domain,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spec field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: &'static str },
    #[error("wavenumber must be finite and positive on its ray, got {0}")]
    InvalidWavenumber(f64),
    #[error("general complex wavenumber {re}+{im}i is not supported")]
    GeneralComplexWavenumber { re: f64, im: f64 },
    #[error("a(k) = 0: transmission pole / bound-state condition")]
    TransmissionPole,
    #[error("kappa = {kappa} is not an eigenvalue (scaled residual {residual:e})")]
    NotAnEigenvalue { kappa: f64, residual: f64 },
    #[error("no bound-state sector: both layer strengths are non-negative")]
    NoBoundSector,
    #[error("chi = {chi} outside (0, rho = {rho})")]
    ChiOutOfRange { chi: f64, rho: f64 },
    #[error("off resonance: theta expressions spread by {spread:e}")]
    OffResonance { spread: f64 },
    #[error("theta = 0")]
    ThetaZero,
    #[error("degenerate denominator theta + 1/theta = 0")]
    DegenerateDenominator,
    #[error("operation needs second-way (Y-type) limit elements")]
    NotSecondWay,
    #[error("Dirichlet: use psi(+-0) = 0")]
    Separated,
    #[error("limit characteristic `{name}` diverges (epsilon power {power})")]
    DivergentCharacteristic { name: &'static str, power: f64 },
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("epsilon = {eps:e} below floor {floor:e}")]
    EpsilonBelowFloor { eps: f64, floor: f64 },
    #[error("region {0} supports no resonance condition")]
    NoResonanceCondition(String),
    #[error("step {h} exceeds the maximum {max} for this structure")]
    StepTooCoarse { h: f64, max: f64 },
    #[error("h1 d1 + h2 d2 = {residual:e} violates the delta-prime condition")]
    DeltaPrimeViolated { residual: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
    #[error("no sign change found for {0}")]
    NoBracket(String),
    #[error("non-finite value while evaluating {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NoBracket(_) | Error::NonFinite(_) | Error::OffResonance { .. } => {
                ErrorKind::Numerical
            }
            _ => ErrorKind::Domain,
        }
    }
}
