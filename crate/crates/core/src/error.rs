use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension `{name}` must be positive, got {value}")]
    NonPositiveDimension { name: &'static str, value: f64 },

    #[error("invalid material parameter `{name}`: {reason}")]
    InvalidMaterial { name: &'static str, reason: String },

    #[error("invalid quantum numbers: {0}")]
    InvalidQuantumNumber(String),

    #[error("no root found in scan window (0, {chi_max}]; found {found} of {wanted}")]
    NoRootInBracket { chi_max: f64, found: usize, wanted: usize },

    #[error("mixing matrix has rank 0 at chi = {chi}; mixing coefficients are undetermined")]
    DegenerateNullspace { chi: f64 },

    #[error("point at radius {r} lies outside the sphere of radius {radius}")]
    PointOutsideSphere { r: f64, radius: f64 },

    #[error("adaptive quadrature did not converge (estimated error {error:e})")]
    QuadratureNotConverged { error: f64 },

    #[error("Fock truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("perturbative elimination invalid: {0}")]
    PerturbationInvalid(String),

    #[error("dipole separation must be non-zero")]
    ZeroSeparation,

    #[error("drive is too close to the dipolar dressed-state resonance: {0}")]
    DressedResonance(String),

    #[error("quasi-resonant double excitation: |kappa1^2 j/eps| = {0} >= 0.1")]
    QuasiResonantDoubleExcitation(f64),

    #[error("microwave driving too weak: {0}")]
    WeakDriving(String),

    #[error("unknown dissipator frame `{0}`")]
    UnknownFrame(String),

    #[error("integrator step size underflow at t = {t:e} (step {step:e})")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("population leaked into the Fock truncation edge: {population:e} at t = {t:e}")]
    TruncationLeak { t: f64, population: f64 },

    #[error("no admissible closure index: {0}")]
    NoAdmissibleM(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid pulse schedule: {0}")]
    InvalidSchedule(String),

    #[error("config error {}: {message}", origin(*line))]
    Config { line: usize, message: String },
}

fn origin(line: usize) -> String {
    match line {
        0 => "in command-line override".into(),
        n => format!("at line {n}"),
    }
}
