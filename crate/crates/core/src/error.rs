use crate::cosmology::Side;

/// Every failure mode of the engine. The CLI maps these to exit code 2 and
/// prints [`Error::name`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("1/a is not integrable at the {0:?} endpoint; the conformal endpoint is infinite")]
    NonIntegrableEndpoint(Side),
    #[error("point {0} lies outside the chart or inside the endpoint margin")]
    OutOfChart(f64),
    #[error("ladder would exceed the entry budget of {budget}")]
    CutoffTooLarge { budget: usize },
    #[error("no spectral entry survives the infrared cut")]
    EmptySpectrum,
    #[error("zeta series diverges: s = {s} <= d/2 = {half_d}")]
    DivergentSeries { s: f64, half_d: f64 },
    #[error("q is undefined for eta0 = {0}")]
    DegenerateExponent(f64),
    #[error("regime outside every tabulated row: {0}")]
    UnclassifiedRegime(String),
    #[error("step size underflow at tau = {tau} (h = {h})")]
    ToleranceFailure { tau: f64, h: f64 },
    #[error("target {tau} lies inside the endpoint margin {margin}")]
    EndpointReached { tau: f64, margin: f64 },
    #[error("probe sequence did not converge: {0}")]
    NoConvergence(String),
    #[error("log and power divergence fits are indistinguishable (residuals {log_residual:e}, {power_residual:e})")]
    ModelSelectionAmbiguous { log_residual: f64, power_residual: f64 },
    #[error("mu + V = {0} is not positive")]
    NegativeFrequency(f64),
    #[error("no admissible tau0: the double integral of V never drops below the threshold")]
    NoAdmissibleTau0,
    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("bound violated: {0}")]
    BoundViolated(String),
    #[error("need derivatives of V up to order {needed}, the source provides {available}")]
    InsufficientSmoothness { needed: usize, available: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("data span {0:.2} decades of mu, at least 2 required")]
    InsufficientDecades(f64),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("argument outside the domain: {0}")]
    DomainError(String),
    #[error("exponent p = {p} exceeds d/(d-2) for d = {d}")]
    SupercriticalExponent { p: f64, d: u32 },
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "InvalidModel",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NonIntegrableEndpoint(_) => "NonIntegrableEndpoint",
            Error::OutOfChart(_) => "OutOfChart",
            Error::CutoffTooLarge { .. } => "CutoffTooLarge",
            Error::EmptySpectrum => "EmptySpectrum",
            Error::DivergentSeries { .. } => "DivergentSeries",
            Error::DegenerateExponent(_) => "DegenerateExponent",
            Error::UnclassifiedRegime(_) => "UnclassifiedRegime",
            Error::ToleranceFailure { .. } => "ToleranceFailure",
            Error::EndpointReached { .. } => "EndpointReached",
            Error::NoConvergence(_) => "NoConvergence",
            Error::ModelSelectionAmbiguous { .. } => "ModelSelectionAmbiguous",
            Error::NegativeFrequency(_) => "NegativeFrequency",
            Error::NoAdmissibleTau0 => "NoAdmissibleTau0",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::BoundViolated(_) => "BoundViolated",
            Error::InsufficientSmoothness { .. } => "InsufficientSmoothness",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::InsufficientDecades(_) => "InsufficientDecades",
            Error::UnsupportedRegime(_) => "UnsupportedRegime",
            Error::DomainError(_) => "DomainError",
            Error::SupercriticalExponent { .. } => "SupercriticalExponent",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
