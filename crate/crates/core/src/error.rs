use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-physical parameter `{field}` = {value}")]
    NonPhysicalParameter { field: &'static str, value: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("finite-difference step {h:e} is below the resolvable limit {limit:e}")]
    StepTooSmall { h: f64, limit: f64 },

    #[error("frequency grid [{omega_min}, {omega_max}] does not cover [{need_min}, {need_max}]")]
    GridTooNarrow { omega_min: f64, omega_max: f64, need_min: f64, need_max: f64 },

    #[error("frequency grid has {n} points; at least {min} are required")]
    GridTooCoarse { n: usize, min: usize },

    #[error("spectrum norm is {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("grids do not match: {0}")]
    GridMismatch(String),

    #[error("antisymmetric transfer function vanishes on the pulse support (|r_- u| = {norm:e})")]
    DegenerateAntisymmetric { norm: f64 },

    #[error("detection probability {probability:e} is too small to define a fidelity")]
    NoSignal { probability: f64 },

    #[error("optimizer did not converge after {evaluations} evaluations")]
    NotConverged { evaluations: usize },

    #[error("no real roots: {0}")]
    NoRoots(String),

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("norm increased by {increase:e} in the step ending at t = {t}")]
    NormViolation { t: f64, increase: f64 },

    #[error("temporal modes are not orthogonal (overlap {overlap:e})")]
    ModesNotOrthogonal { overlap: f64 },

    #[error("formula outside its regime of validity: {0}")]
    RegimeViolation(String),

    #[error("spectrum import failed: {0}")]
    Import(String),
}

pub type Result<T> = std::result::Result<T, Error>;
